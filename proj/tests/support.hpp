#pragma once

// Reference computations for the tests. These deliberately avoid the library's
// own kernels so that agreement means something.

#include "ncphom/ncphom.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

using ncphom::Mat;
using ncphom::Vec;

/// Laplace expansion along the first row. Exponential cost; fine for n <= 8.
inline double cofactor_det(const Mat& a) {
  const auto n = a.rows();
  if (n == 0) return 1.0;
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  double det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Mat minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = a(r, c);
    det += (j % 2 ? -1.0 : 1.0) * a(0, j) * cofactor_det(minor);
  }
  return det;
}

/// psi straight from its definition with phi(y) = y^3.
inline double psi_by_definition(double f, double z) {
  auto cube = [](double y) { return y * y * y; };
  return cube((f - z) * (f - z)) - cube(f * std::abs(f)) - cube(z * std::abs(z));
}

inline Vec psi_by_definition(const Vec& f, const Vec& z) {
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = psi_by_definition(f[i], z[i]);
  return out;
}

/// Fourth-order central-difference Jacobian (five-point stencil).
template <class F>
Mat stencil_jacobian(F&& f, const Vec& x, double rel_step = 1e-3) {
  const auto n = x.size();
  Mat jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    auto at = [&](double s) {
      Vec y = x;
      y[j] += s * h;
      return Vec(f(y));
    };
    const Vec d = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
    if (j == 0) jac.resize(d.size(), n);
    jac.col(j) = d;
  }
  return jac;
}

/// f(x) = x - a on R^1; the NCP solution is max(a, 0).
inline ncphom::NcpProblem shifted_identity(double a) {
  ncphom::NcpProblem p;
  p.n = 1;
  p.f = [a](const Vec& x) { return Vec(x.array() - a); };
  p.jf = [](const Vec&) { return Mat(Mat::Identity(1, 1)); };
  p.name = "shifted-identity";
  return p;
}

inline Vec paper_vector() {
  Vec v(5);
  v << 15.429308, 12.498582, 9.663473, 7.165093, 5.132566;
  return v;
}

inline Vec random_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Max over entries of |a - b| / max(1, |b|).
inline double max_rel_error(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().cwiseQuotient(b.cwiseAbs().cwiseMax(1.0)).maxCoeff();
}

/// Whether any component sits near a kink of psi (f_i = 0, x_i = 0 or f_i = x_i).
inline bool near_kink(const Vec& f, const Vec& x, double margin) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(f[i]) < margin || std::abs(x[i]) < margin || std::abs(f[i] - x[i]) < margin) return true;
  return false;
}

struct PathCheck {
  int points = 0;
  double worst_h_ratio = 0.0;       // max ||H||_inf / (1 + ||psi(x0)||_inf) over accepted iterates
  double worst_newton_error = 0.0;  // max relative gap in the on-path Newton identity
  int pinned = 0;                   // iterates with an exactly solved component, skipped by the identity
  bool lambda_in_box = true;
};

/// Re-evaluates every post-corrector record of a run against its own anchor.
/// The Newton identity compares the forward predictor x_d (t_d = e) with
/// -J_psi(x)^{-1} psi(x), solved here by a full-pivot LU.
inline PathCheck check_path(const ncphom::ReformulatedSystem& sys, const ncphom::SolveReport& rep) {
  PathCheck out;
  for (const auto& r : rep.trace) {
    if (r.event != ncphom::TraceEvent::correct) continue;
    ++out.points;
    if (!((r.lambda.array() > 0.0).all() && (r.lambda.array() <= 1.0).all())) out.lambda_in_box = false;
    const ncphom::HomotopyInstance h(sys, rep.anchors.at(r.segment));
    const Vec hv = h.sys().psi(r.x) - r.lambda.cwiseProduct(h.psi0());
    out.worst_h_ratio = std::max(out.worst_h_ratio, ncphom::inf_norm(hv) / h.h_scale());

    // Where psi_i(x) == 0 the tracer pins lambda_i instead of recovering it,
    // so lambda * psi0 and psi(x) differ in that component by construction.
    const Vec psi = h.sys().psi(r.x);
    if ((psi.array() == 0.0).any()) {
      ++out.pinned;
      continue;
    }
    const Mat j = h.sys().jacobian(r.x);
    const Vec newton = -j.fullPivLu().solve(psi);
    const ncphom::PathPoint p(r.x, Vec(-r.lambda.array().log()));
    const Vec xd = ncphom::predictor_direction(h, p, j, false).xd;
    const double gap = (xd - newton).norm() / std::max(newton.norm(), std::numeric_limits<double>::min());
    out.worst_newton_error = std::max(out.worst_newton_error, gap);
  }
  return out;
}

}  // namespace testing_support
