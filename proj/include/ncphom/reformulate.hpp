#pragma once

// Nonlinear complementarity problems and their square-system reformulation
//
//   psi_i(z) = phi((f_i - z_i)^2) - phi(f_i |f_i|) - phi(z_i |z_i|),  phi(y) = y^3,
//
// whose zeros are exactly the solutions of  z >= 0, f(z) >= 0, z^T f(z) = 0.

#include "ncphom/numerics.hpp"

#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <utility>

namespace ncphom {

/// An NCP: find z >= 0 with f(z) >= 0 and z^T f(z) = 0.
///
/// `in_domain` must reject every point where `f` is undefined; evaluation
/// entry points check it before calling `f`. `jf` is optional; when absent
/// the Jacobian is taken by central differences.
struct NcpProblem {
  int n = 0;
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> jf;
  std::function<bool(const Vec&)> in_domain = [](const Vec&) { return true; };
  std::string name;

  bool contains(const Vec& x) const {
    return x.size() == n && x.allFinite() && in_domain(x);
  }

  Vec eval_f(const Vec& x) const {
    if (!contains(x)) throw DomainError(name + ": point outside the domain of f");
    Vec out = f(x);
    if (out.size() != n || !out.allFinite()) throw DomainError(name + ": f is not finite");
    return out;
  }

  Mat eval_jf(const Vec& x) const {
    if (!contains(x)) throw DomainError(name + ": point outside the domain of f");
    if (jf) return jf(x);
    return fd_jacobian([this](const Vec& y) { return eval_f(y); }, x);
  }
};

/// Largest relative entry error between the analytic Jacobian and central
/// differences over `probes`. Entry error is |a - b| / max(1, |b|).
inline double jacobian_mismatch(const NcpProblem& p, std::span<const Vec> probes) {
  double worst = 0.0;
  for (const auto& x : probes) {
    const Mat a = p.eval_jf(x);
    const Mat b = fd_jacobian([&p](const Vec& y) { return p.eval_f(y); }, x);
    const Mat rel = (a - b).cwiseAbs().cwiseQuotient(b.cwiseAbs().cwiseMax(1.0));
    worst = std::max(worst, rel.maxCoeff());
  }
  return worst;
}

/// Rejects a problem whose analytic Jacobian disagrees with finite differences
/// by more than 1e-4 relative at any probe point.
inline NcpProblem validated(NcpProblem p, std::span<const Vec> probes) {
  if (p.jf && jacobian_mismatch(p, probes) > 1e-4)
    throw std::invalid_argument(p.name + ": analytic Jacobian disagrees with finite differences");
  return p;
}

constexpr double phi(double y) { return y * y * y; }
constexpr double phi_prime(double y) { return 3.0 * y * y; }

static_assert(phi(0.0) == 0.0 && phi(-1.0) < phi(0.0) && phi(0.0) < phi(1.0));

constexpr int sgn(double y) { return (y > 0) - (y < 0); }

namespace detail {

inline double pow6(double a) {
  const double a3 = a * a * a;
  return a3 * a3;
}

// u^6 - v^6 where diff == u - v is supplied exactly by the caller.
inline double diff_pow6(double u, double v, double diff) {
  return diff * (u + v) * (u * u + u * v + v * v) * (u * u - u * v + v * v);
}

}  // namespace detail

/// One component of psi for scalar values fi = f_i(z), zi = z_i.
///
/// Algebraically (fi - zi)^6 - sgn(fi) fi^6 - sgn(zi) zi^6. The branches pair
/// the two largest sixth powers through an exact difference factor so the
/// result carries no cancellation error near the complementarity set.
inline double psi_component(double fi, double zi) {
  using detail::diff_pow6;
  using detail::pow6;
  if (fi >= 0 && fi >= zi) return diff_pow6(fi - zi, fi, -zi) - sgn(zi) * pow6(zi);
  if (zi >= 0) return diff_pow6(zi - fi, zi, -fi) - sgn(fi) * pow6(fi);
  return pow6(fi - zi) + pow6(fi) + pow6(zi);
}

/// Scale used for psi-residual tolerances: 1 + ||f||_inf^6 + ||x||_inf^6.
inline double psi_scale(const Vec& fx, const Vec& x) {
  return 1.0 + detail::pow6(inf_norm(fx)) + detail::pow6(inf_norm(x));
}

class ReformulatedSystem {
 public:
  static constexpr int kPhiExponent = 3;

  explicit ReformulatedSystem(NcpProblem problem) : problem_(std::move(problem)) {}

  const NcpProblem& problem() const { return problem_; }
  int n() const { return problem_.n; }
  bool contains(const Vec& x) const { return problem_.contains(x); }

  Vec psi(const Vec& x) const { return psi_from(problem_.eval_f(x), x); }

  static Vec psi_from(const Vec& fx, const Vec& x) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = psi_component(fx[i], x[i]);
    return out;
  }

  /// Analytic Jacobian of psi:
  ///   6(f_i - x_i)^5 (df_i/dx_j - d_ij) - 6 f_i^4 |f_i| df_i/dx_j - 6 x_i^4 |x_i| d_ij
  Mat jacobian(const Vec& x) const {
    const Vec fx = problem_.eval_f(x);
    const Mat jf = problem_.eval_jf(x);
    const auto n = x.size();
    Mat out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = fx[i] - x[i];
      const double a = phi_prime(d * d) * 2.0 * d;
      const double b = phi_prime(fx[i] * std::abs(fx[i])) * 2.0 * fx[i] * sgn(fx[i]);
      const double c = phi_prime(x[i] * std::abs(x[i])) * 2.0 * x[i] * sgn(x[i]);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double delta = i == j ? 1.0 : 0.0;
        out(i, j) = a * (jf(i, j) - delta) - b * jf(i, j) - c * delta;
      }
    }
    return out;
  }

 private:
  NcpProblem problem_;
};

inline Vec eval_psi(const ReformulatedSystem& sys, const Vec& x) { return sys.psi(x); }
inline Mat jacobian_psi(const ReformulatedSystem& sys, const Vec& x) { return sys.jacobian(x); }

struct NcpResidual {
  double residual = 0.0;  // ||min(x, f(x))||_inf
  bool feasible = false;  // x >= -1e-8 and f(x) >= -1e-8
};

inline constexpr double kFeasibilityTol = 1e-8;

inline NcpResidual check_ncp_residual(const NcpProblem& p, const Vec& x) {
  const Vec fx = p.eval_f(x);
  return {inf_norm(Vec(x.cwiseMin(fx))),
          x.minCoeff() >= -kFeasibilityTol && fx.minCoeff() >= -kFeasibilityTol};
}

}  // namespace ncphom
