#pragma once

// Path followers for the vector-parameter homotopy.
//
// trace_pc is the predictor-corrector scheme: a Newton-type predictor in
// (x, t)-space with step length kappa1^k, a Moore-Penrose corrector, and
// recovery of lambda from psi(x_c) / psi(x0) after every accepted step.
// trace_ode integrates the arc-length tangent field with RK4 and re-projects
// onto H = 0; it exists to cross-check trace_pc.

#include "ncphom/homotopy.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace ncphom {

struct TracerConfig {
  double eta1 = 1e-12;
  double eta2 = 1e-8;
  int c0 = 50;
  double kappa1 = 1.4142135623730951;
  double kappa2 = 9000.0;
  double eps1 = 1e-16;
  double eps2 = 1e-10;
  double t_max = kTMax;
  int max_iters = 10000;
  int max_restarts = 20;
  int corrector_iters = 5;
  double corrector_tol = 1e-10;
  // Accepted iterates must satisfy ||H||_inf <= path_tol * (1 + ||psi(x0)||_inf).
  double path_tol = 1e-8;
  // Accepted endpoints must also satisfy ||min(x, f(x))||_inf <= residual_tol.
  double residual_tol = 1e-6;
  // Arc-length integrator.
  double ode_step = 1e-2;
  double ode_max_arc = 1e4;

  /// Throws std::invalid_argument when the constants are inconsistent.
  void validate() const {
    const bool ok = eps1 > 0 && eps1 < eps2 && eps2 < eta2 && eta2 < 1 && eta1 > 0 && kappa1 > 1 &&
                    kappa2 > kappa1 && c0 > 0 && t_max > 0 && max_iters > 0 && max_restarts >= 0 &&
                    corrector_iters > 0 && corrector_tol > 0 && path_tol > 0 && residual_tol > 0 && ode_step > 0 &&
                    ode_max_arc > 0;
    if (!ok) throw std::invalid_argument("inconsistent tracer configuration");
  }
};

enum class TraceEvent { predict, correct, restart, shrink, accept, probable, fail };

inline std::string_view to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::predict: return "predict";
    case TraceEvent::correct: return "correct";
    case TraceEvent::restart: return "restart";
    case TraceEvent::shrink: return "shrink";
    case TraceEvent::accept: return "accept";
    case TraceEvent::probable: return "probable";
    case TraceEvent::fail: return "fail";
  }
  return "?";
}

struct TraceRecord {
  int iter = 0;
  TraceEvent event = TraceEvent::predict;
  int k = 0;
  int det_sign = 0;
  double psi_norm = 0.0;  // ||psi(x)||_inf
  double H_norm = 0.0;    // ||H||_inf at the corrector output (or predictor point)
  Vec lambda;
  Vec x;
  int segment = 0;  // index into SolveReport::anchors
};

enum class SolveStatus { Accepted, Probable, NonConvergence, SingularStart, DegenerateStart, IterationLimit };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Accepted: return "Accepted";
    case SolveStatus::Probable: return "Probable";
    case SolveStatus::NonConvergence: return "NonConvergence";
    case SolveStatus::SingularStart: return "SingularStart";
    case SolveStatus::DegenerateStart: return "DegenerateStart";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

struct SolveReport {
  SolveStatus status = SolveStatus::NonConvergence;
  Vec x_final;
  Vec lambda_final;
  double ncp_residual = std::numeric_limits<double>::quiet_NaN();
  int iters = 0;
  int restarts = 0;
  std::vector<TraceRecord> trace;
  std::vector<Vec> anchors;  // x0 of each (re)started homotopy

  double lambda_rms() const {
    return lambda_final.size() ? lambda_final.norm() / std::sqrt(double(lambda_final.size())) : 1.0;
  }
};

struct PredictorDirection {
  Vec xd;
  Vec td;
};

/// Unnormalized predictor in (x, t). Moving forward, t_d = e (uniform decrease
/// of every lambda_i); after the Jacobian determinant changes sign relative to
/// the start, t_d = -(e - lambda) / lambda turns back toward t = 0. In both
/// cases x_d = -J_psi(x)^{-1} dH/dt t_d.
inline PredictorDirection predictor_direction(const HomotopyInstance& h, const PathPoint& p, const Mat& jpsi,
                                              bool reversed) {
  const auto n = h.n();
  PredictorDirection d;
  if (reversed)
    d.td = -(Vec::Ones(n) - p.lambda).cwiseQuotient(p.lambda);
  else
    d.td = Vec::Ones(n);
  d.xd = -lu_solve(jpsi, dH_dt(h, p) * d.td);
  return d;
}

/// Unit tangent of H = 0 in (x, lambda)-space along the family d lambda = -lambda ds.
/// With `prev`, the orientation keeps tangent . prev > 0; otherwise lambda decreases.
inline Vec tangent(const HomotopyInstance& h, const Vec& x, const Vec& lambda, const Vec* prev = nullptr) {
  const auto n = h.n();
  Vec mu(2 * n);
  const Vec w = -lambda;
  mu.head(n) = lu_solve(dH_dx(h, x), -(dH_dlambda(h) * w));
  mu.tail(n) = w;
  mu /= mu.norm();
  if (prev != nullptr && mu.dot(*prev) < 0) mu = -mu;
  return mu;
}

inline Vec tangent(const HomotopyInstance& h, const PathPoint& p, const Vec* prev = nullptr) {
  return tangent(h, p.x, p.lambda, prev);
}

namespace detail {

inline SolveStatus status_for_stall(double u1, const TracerConfig& cfg) {
  return u1 <= cfg.eps2 ? SolveStatus::Probable : SolveStatus::NonConvergence;
}

inline TraceEvent event_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::Accepted: return TraceEvent::accept;
    case SolveStatus::Probable: return TraceEvent::probable;
    default: return TraceEvent::fail;
  }
}

struct Correction {
  Vec x;
  Vec t;
  Vec u;  // recovered lambda estimate psi(x) / psi(x0)
  double h_norm = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Moore-Penrose Newton projection of (xp, tp) onto H = 0 followed by lambda
// recovery. The first step is always taken; later ones only while ||H|| is
// above corrector_tol. `ok` is false when the result leaves the domain, misses the path
// tolerance, or produces a lambda outside (0, 1].
inline Correction correct(const HomotopyInstance& h, const Vec& xp, const Vec& tp, const TracerConfig& cfg) {
  const auto n = h.n();
  const auto& sys = h.sys();
  const double scale = h.h_scale();
  Correction c{xp, tp, Vec(), std::numeric_limits<double>::infinity(), false};
  if (!sys.contains(c.x)) return c;
  try {
    Vec hv = eval_H(h, c.x, (-c.t).array().exp().matrix());
    for (int it = 0; it < cfg.corrector_iters && (it == 0 || inf_norm(hv) > cfg.corrector_tol * scale); ++it) {
      Mat j(n, 2 * n);
      j.leftCols(n) = dH_dx(h, c.x);
      j.rightCols(n) = dH_dt(h, c.t);
      const Vec step = pseudoinverse_apply(j, hv);
      c.x -= step.head(n);
      c.t -= step.tail(n);
      if (!sys.contains(c.x)) return c;
      hv = eval_H(h, c.x, (-c.t).array().exp().matrix());
    }
    c.h_norm = inf_norm(hv);
    if (!(c.h_norm <= cfg.path_tol * scale)) return c;
    c.u = sys.psi(c.x).cwiseQuotient(h.psi0());
  } catch (const std::runtime_error&) {
    return c;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c.u[i] > 1.0 && c.u[i] <= 1.0 + 1e-12) c.u[i] = 1.0;
    // psi_i(x_c) == 0 exactly: component i is solved. Pin lambda_i at the
    // acceptance level rather than at t_max, where no predictor step fits.
    if (c.u[i] == 0.0) c.u[i] = cfg.eps1;
    if (!(c.u[i] > 0.0 && c.u[i] <= 1.0)) return c;
  }
  c.ok = true;
  return c;
}

inline bool endpoint_ok(const NcpProblem& p, const Vec& x, const TracerConfig& cfg) {
  try {
    const auto r = check_ncp_residual(p, x);
    return r.residual <= cfg.residual_tol && r.feasible;
  } catch (const DomainError&) {
    return false;
  }
}

inline double merit(const ReformulatedSystem& sys, const Vec& x) { return sys.psi(x).squaredNorm(); }

}  // namespace detail

/// Predictor-corrector path following from (x0, lambda = e) toward lambda = 0.
inline SolveReport trace_pc(const HomotopyInstance& start, const TracerConfig& cfg = {}) {
  cfg.validate();
  const auto n = start.n();
  const double root_n = std::sqrt(double(n));
  SolveReport rep;
  HomotopyInstance h = start;

  auto finish = [&](SolveStatus s, const Vec& x, const Vec& lambda) {
    rep.status = s;
    rep.x_final = x;
    rep.lambda_final = lambda;
    try {
      const auto r = check_ncp_residual(h.sys().problem(), x);
      rep.ncp_residual = r.residual;
      if (s == SolveStatus::Accepted && !(r.residual <= cfg.residual_tol && r.feasible))
        rep.status = SolveStatus::NonConvergence;
    } catch (const DomainError&) {
    }
    TraceRecord rec;
    rec.iter = rep.iters;
    rec.event = detail::event_for(rep.status);
    rec.lambda = lambda;
    rec.x = x;
    rec.segment = rep.restarts;
    try {
      rec.psi_norm = inf_norm(h.sys().psi(x));
    } catch (const DomainError&) {
      rec.psi_norm = std::numeric_limits<double>::quiet_NaN();
    }
    rep.trace.push_back(std::move(rec));
    return rep;
  };

  double u1 = 1.0;
  for (;;) {
    // (Re)start at (x0, t = 0).
    rep.anchors.push_back(h.x0());
    StartReport sr;
    try {
      sr = validate_start(h);
    } catch (const DegenerateStart&) {
      return finish(SolveStatus::DegenerateStart, h.x0(), Vec::Ones(n));
    } catch (const SingularStart&) {
      return finish(SolveStatus::SingularStart, h.x0(), Vec::Ones(n));
    }
    const int d0 = sr.d0.sign;
    PathPoint p = PathPoint::start(h.x0());
    Vec u = p.lambda;
    int c1 = 0, c2 = 0;
    // Below eps2 lambda can sit on its rounding floor, where predict and
    // correct map the iterate onto itself. c3 counts steps without a new low.
    int c3 = 0;
    double best_u1 = u1;
    std::optional<Vec> restart_from;

    while (!restart_from) {
      // Jacobian and its determinant sign at the current point.
      Mat jpsi;
      SignLogDet d;
      try {
        jpsi = dH_dx(h, p);
        d = sign_logdet(jpsi);
      } catch (const DomainError&) {
      }
      if (d.sign == 0) return finish(detail::status_for_stall(u1, cfg), p.x, u);

      // Unit predictor direction.
      PredictorDirection dir;
      try {
        dir = predictor_direction(h, p, jpsi, d.sign == -d0);
      } catch (const SingularMatrix&) {
        return finish(detail::status_for_stall(u1, cfg), p.x, u);
      }
      const double dnorm = std::sqrt(dir.xd.squaredNorm() + dir.td.squaredNorm());
      const Vec xn = dir.xd / dnorm;
      const Vec tn = dir.td / dnorm;
      const double tau = dir.td.norm() / dnorm;
      c1 = tau <= cfg.eta1 ? c1 + 1 : 0;
      if (c1 >= cfg.c0) return finish(detail::status_for_stall(u1, cfg), p.x, u);

      // Grow k while the longer step stays admissible.
      const Vec psi_x = h.sys().psi(p.x);
      const double gamma = 2.0 * (jpsi.transpose() * psi_x).dot(xn);
      int k = 0;
      auto step_len = [&](int kk) { return std::pow(cfg.kappa1, kk); };
      for (;;) {
        const double next = step_len(k + 1);
        const Vec xc = p.x + next * xn;
        const Vec tc = p.t + next * tn;
        bool admissible = h.sys().contains(xc) && (tc.array() > 0.0).all() && (tc.array() < cfg.t_max).all();
        if (admissible && gamma < 0) {
          try {
            admissible = detail::merit(h.sys(), xc) < detail::merit(h.sys(), p.x + step_len(k) * xn);
          } catch (const DomainError&) {
            admissible = false;
          }
        }
        if (!admissible) {
          c2 = 0;
          break;
        }
        ++k;
        if (step_len(k) > cfg.kappa2) {
          --k;
          ++c2;
          break;
        }
      }

      // Predict, correct, shrink on rejection.
      detail::Correction corr;
      for (;;) {
        if (c2 >= cfg.c0) return finish(detail::status_for_stall(u1, cfg), p.x, u);
        const double len = step_len(k);
        const Vec xp = p.x + len * xn;
        const Vec tp = p.t + len * tn;
        {
          TraceRecord rec{rep.iters, TraceEvent::predict, k, d.sign, std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN(), (-tp).array().exp().matrix(), xp,
                          rep.restarts};
          try {
            const Vec psi_p = h.sys().psi(xp);
            rec.psi_norm = inf_norm(psi_p);
            rec.H_norm = inf_norm(Vec(psi_p - rec.lambda.cwiseProduct(h.psi0())));
          } catch (const DomainError&) {
          }
          rep.trace.push_back(std::move(rec));
        }
        corr = detail::correct(h, xp, tp, cfg);
        if (corr.ok) break;

        --k;
        rep.trace.push_back(TraceRecord{rep.iters, TraceEvent::shrink, k, d.sign,
                                        std::numeric_limits<double>::quiet_NaN(), corr.h_norm,
                                        (-corr.t).array().exp().matrix(), corr.x, rep.restarts});
        // Step too short to shrink further: stop or restart from here.
        const double a = std::min(step_len(k), (p.x - corr.x).norm());
        if (a <= cfg.eta2) {
          if (u1 <= cfg.eps2) return finish(SolveStatus::Probable, p.x, u);
          restart_from = h.sys().contains(corr.x) ? corr.x : p.x;
          break;
        }
        // Re-check the length cap on the shrunken step.
        if (step_len(k) > cfg.kappa2) {
          --k;
          ++c2;
        }
      }
      if (restart_from) break;

      // Advance along the path.
      u = corr.u;
      p = PathPoint(corr.x, (-u.array().log()).matrix());
      u1 = u.norm() / root_n;
      rep.trace.push_back(TraceRecord{rep.iters, TraceEvent::correct, k, d.sign, inf_norm(h.sys().psi(p.x)),
                                      corr.h_norm, u, p.x, rep.restarts});
      if (u1 <= cfg.eps1 && detail::endpoint_ok(h.sys().problem(), p.x, cfg))
        return finish(SolveStatus::Accepted, p.x, u);
      c3 = u1 < best_u1 ? 0 : c3 + 1;
      best_u1 = std::min(best_u1, u1);
      if (u1 <= cfg.eps2 && c3 >= cfg.c0) return finish(detail::status_for_stall(u1, cfg), p.x, u);
      if (++rep.iters > cfg.max_iters) return finish(SolveStatus::IterationLimit, p.x, u);
    }

    // Running out of restarts means the path could not be followed.
    if (++rep.restarts > cfg.max_restarts) return finish(SolveStatus::NonConvergence, *restart_from, u);
    rep.trace.push_back(TraceRecord{rep.iters, TraceEvent::restart, 0, 0, std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::quiet_NaN(), Vec::Ones(n), *restart_from,
                                    rep.restarts});
    try {
      h = h.restarted_at(*restart_from);
    } catch (const DomainError&) {
      return finish(SolveStatus::NonConvergence, *restart_from, u);
    }
    u1 = 1.0;
  }
}

/// Arc-length integration of the homotopy curve with fixed RK4 steps in s and
/// Moore-Penrose re-projection after each step. A step is cut so that no
/// lambda_i more than halves, which lets the endpoint lambda -> 0 be approached
/// geometrically instead of overshot.
inline SolveReport trace_ode(const HomotopyInstance& h, const TracerConfig& cfg = {}) {
  cfg.validate();
  const auto n = h.n();
  const double root_n = std::sqrt(double(n));
  SolveReport rep;
  rep.anchors.push_back(h.x0());

  Vec x = h.x0();
  Vec lambda = Vec::Ones(n);
  auto finish = [&](SolveStatus s) {
    rep.status = s;
    rep.x_final = x;
    rep.lambda_final = lambda;
    try {
      const auto r = check_ncp_residual(h.sys().problem(), x);
      rep.ncp_residual = r.residual;
      if (s == SolveStatus::Accepted && !(r.residual <= cfg.residual_tol && r.feasible))
        rep.status = SolveStatus::NonConvergence;
    } catch (const DomainError&) {
    }
    rep.trace.push_back(TraceRecord{rep.iters, detail::event_for(rep.status), 0, 0, inf_norm(h.sys().psi(x)), 0.0,
                                    lambda, x, 0});
    return rep;
  };

  try {
    validate_start(h);
  } catch (const DegenerateStart&) {
    return finish(SolveStatus::DegenerateStart);
  } catch (const SingularStart&) {
    return finish(SolveStatus::SingularStart);
  }

  const double scale = h.h_scale();
  const auto stall = [&] { return finish(detail::status_for_stall(lambda.norm() / root_n, cfg)); };

  // Returns false when the point leaves the domain or the projection fails.
  auto project = [&](Vec& y, Vec& lam, double& hnorm) {
    Mat j(n, 2 * n);
    j.rightCols(n) = dH_dlambda(h);
    for (int it = 0; it < 2 * cfg.corrector_iters; ++it) {
      if (!h.sys().contains(y)) return false;
      const Vec hv = eval_H(h, y, lam);
      hnorm = inf_norm(hv);
      j.leftCols(n) = dH_dx(h, y);
      const Vec step = pseudoinverse_apply(j, hv);
      y -= step.head(n);
      lam -= step.tail(n);
      if (step.norm() <= 1e-15 * (1.0 + y.norm())) break;
    }
    if (!h.sys().contains(y)) return false;
    // As in the corrector, an exactly solved component has reached lambda_i = 0.
    const Vec psi_y = h.sys().psi(y);
    for (Eigen::Index i = 0; i < n; ++i)
      if (psi_y[i] == 0.0) lam[i] = cfg.eps1;
    hnorm = inf_norm(eval_H(h, y, lam));
    return hnorm <= cfg.path_tol * scale;
  };

  Vec mu;
  try {
    mu = tangent(h, x, lambda);
  } catch (const SingularMatrix&) {
    return stall();
  }

  double arc = 0.0;
  while (arc < cfg.ode_max_arc) {
    if (inf_norm(lambda) <= cfg.eps1 && detail::endpoint_ok(h.sys().problem(), x, cfg))
      return finish(SolveStatus::Accepted);

    double step = cfg.ode_step;
    for (Eigen::Index i = 0; i < n; ++i)
      if (mu[n + i] < 0) step = std::min(step, 0.5 * lambda[i] / -mu[n + i]);

    // Steps near lambda = 0 are legitimately tiny; a stall is a step cut
    // far below its own starting length.
    const double first_step = step;
    bool advanced = false;
    while (!advanced) {
      if (step < 1e-10 * first_step || step < 1e-300) return stall();
      try {
        const auto at = [&](const Vec& nu, const Vec& prev) {
          if (!h.sys().contains(nu.head(n))) throw DomainError("stage outside domain");
          return tangent(h, nu.head(n), nu.tail(n), &prev);
        };
        Vec nu(2 * n);
        nu << x, lambda;
        const Vec k1 = mu;
        const Vec k2 = at(nu + 0.5 * step * k1, k1);
        const Vec k3 = at(nu + 0.5 * step * k2, k2);
        const Vec k4 = at(nu + step * k3, k3);
        Vec next = nu + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        Vec y = next.head(n);
        Vec lam = next.tail(n);
        double hnorm = 0.0;
        if (project(y, lam, hnorm) && (lam.array() > 0.0).all() && (lam.array() <= 1.0).all()) {
          const Vec mu_next = tangent(h, y, lam, &mu);
          x = y;
          lambda = lam;
          mu = mu_next;
          arc += step;
          ++rep.iters;
          rep.trace.push_back(TraceRecord{rep.iters, TraceEvent::correct, 0, sign_logdet(dH_dx(h, x)).sign,
                                          inf_norm(h.sys().psi(x)), hnorm, lambda, x, 0});
          advanced = true;
        } else {
          step *= 0.5;
        }
      } catch (const std::runtime_error&) {
        step *= 0.5;
      }
    }
  }
  return finish(SolveStatus::IterationLimit);
}

}  // namespace ncphom
