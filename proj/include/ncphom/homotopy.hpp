#pragma once

// Vector-parameter homotopy H(x, lambda) = psi(x) - lambda (.) psi(x0), traced
// in t-space with lambda_i = exp(-t_i).

#include "ncphom/reformulate.hpp"

#include <cmath>
#include <utility>

namespace ncphom {

/// Largest t component. exp(-40) ~ 4.2e-18 sits below the acceptance threshold 1e-16.
inline constexpr double kTMax = 40.0;

/// Relative threshold below which a start residual component counts as zero.
inline constexpr double kDegenerateTol = 1e-12;

struct SingularStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A point (x, t) on or near the path; lambda = exp(-t) is cached.
struct PathPoint {
  Vec x;
  Vec t;
  Vec lambda;

  PathPoint() = default;
  PathPoint(Vec x_, Vec t_) : x(std::move(x_)), t(std::move(t_)), lambda((-t).array().exp()) {}

  static PathPoint start(const Vec& x0) { return {x0, Vec::Zero(x0.size())}; }
};

/// Homotopy anchored at x0. Construction does not validate; a run must call
/// validate_start() first (the tracers do).
class HomotopyInstance {
 public:
  HomotopyInstance(ReformulatedSystem sys, Vec x0)
      : sys_(std::move(sys)), x0_(std::move(x0)), psi0_(sys_.psi(x0_)) {}

  const ReformulatedSystem& sys() const { return sys_; }
  const Vec& x0() const { return x0_; }
  const Vec& psi0() const { return psi0_; }
  int n() const { return sys_.n(); }

  /// Tolerance scale for H residuals: 1 + ||psi(x0)||_inf.
  double h_scale() const { return 1.0 + inf_norm(psi0_); }

  /// Same system, new anchor.
  HomotopyInstance restarted_at(const Vec& x) const { return {sys_, x}; }

 private:
  ReformulatedSystem sys_;
  Vec x0_;
  Vec psi0_;
};

inline Vec eval_H(const HomotopyInstance& h, const Vec& x, const Vec& lambda) {
  return h.sys().psi(x) - lambda.cwiseProduct(h.psi0());
}

inline Vec eval_H(const HomotopyInstance& h, const PathPoint& p) { return eval_H(h, p.x, p.lambda); }

inline Mat dH_dx(const HomotopyInstance& h, const Vec& x) { return h.sys().jacobian(x); }
inline Mat dH_dx(const HomotopyInstance& h, const PathPoint& p) { return dH_dx(h, p.x); }

/// -diag(psi(x0)); constant along the whole homotopy.
inline Mat dH_dlambda(const HomotopyInstance& h) { return Mat((-h.psi0()).asDiagonal()); }

/// diag(psi_i(x0) exp(-t_i)), the chain rule through lambda_i = exp(-t_i).
inline Mat dH_dt(const HomotopyInstance& h, const Vec& t) {
  return Mat(h.psi0().cwiseProduct((-t).array().exp().matrix()).asDiagonal());
}
inline Mat dH_dt(const HomotopyInstance& h, const PathPoint& p) {
  return Mat(h.psi0().cwiseProduct(p.lambda).asDiagonal());
}

struct StartReport {
  SignLogDet d0;           // sign/log|det| of the psi Jacobian at x0
  Vec s0;                  // dlambda/dt at t = 0, i.e. -e
  SignLogDet start_block;  // det of -diag(lambda) J_psi(x0) at lambda = e
  bool identity_ok = false;
  bool ok = false;
};

/// Determinant of the x0-block of the full homotopy Jacobian,
/// entries -lambda_i d psi_i(x0) / d x0_j.
inline SignLogDet start_block_det(const HomotopyInstance& h, const Vec& lambda) {
  const Mat j0 = h.sys().jacobian(h.x0());
  return sign_logdet(Mat(-(lambda.asDiagonal() * j0)));
}

/// Checks the start conditions: every psi_i(x0) nonzero and J_psi(x0) nonsingular.
inline StartReport validate_start(const HomotopyInstance& h) {
  const Vec fx0 = h.sys().problem().eval_f(h.x0());
  const double scale = psi_scale(fx0, h.x0());
  for (Eigen::Index i = 0; i < h.psi0().size(); ++i)
    if (!(std::abs(h.psi0()[i]) > kDegenerateTol * scale))
      throw DegenerateStart("psi(x0) has a zero component at index " + std::to_string(i));

  StartReport rep;
  rep.d0 = sign_logdet(h.sys().jacobian(h.x0()));
  if (rep.d0.sign == 0) throw SingularStart("Jacobian of psi at x0 is singular");
  rep.s0 = -Vec::Ones(h.n());

  const Vec e = Vec::Ones(h.n());
  rep.start_block = start_block_det(h, e);
  const int expected = (h.n() % 2 ? -1 : 1) * rep.d0.sign;
  rep.identity_ok = rep.start_block.sign == expected &&
                    std::abs(rep.start_block.log_abs_det - rep.d0.log_abs_det) <= 1e-8 * (1.0 + std::abs(rep.d0.log_abs_det));
  rep.ok = true;
  return rep;
}

struct PredictorSignCheck {
  int det_sign = 0;       // sign of det [ J_psi(x0) | -diag(psi0) ; e tau^T ]
  int expected_sign = 0;  // (-1)^n sign det J_psi(x0)
  bool matches = false;
};

/// Orientation test at the start point. The 2n x 2n matrix stacks the
/// homotopy Jacobian in (x, lambda) over n copies of the start tangent
/// tau = (-J_psi(x0)^{-1} psi(x0), -e). Its lower block has rank one, so for
/// n >= 2 the determinant vanishes and the check reports a mismatch.
inline PredictorSignCheck predictor_sign_check(const HomotopyInstance& h) {
  const auto n = h.n();
  const Mat j0 = h.sys().jacobian(h.x0());
  const auto d0 = sign_logdet(j0);
  if (d0.sign == 0) throw SingularStart("Jacobian of psi at x0 is singular");

  Vec tau(2 * n);
  tau.head(n) = -lu_solve(j0, h.psi0());
  tau.tail(n) = -Vec::Ones(n);

  Mat m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = j0;
  m.topRightCorner(n, n) = dH_dlambda(h);
  m.bottomRows(n) = Vec::Ones(n) * tau.transpose();

  PredictorSignCheck out;
  out.det_sign = sign_logdet(m).sign;
  out.expected_sign = (n % 2 ? -1 : 1) * d0.sign;
  out.matches = out.det_sign == out.expected_sign;
  return out;
}

}  // namespace ncphom
