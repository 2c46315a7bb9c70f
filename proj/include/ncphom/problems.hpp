#pragma once

// Built-in problem families: Cournot oligopoly equilibrium, linear
// complementarity problems, and generators of NCPs with a known solution.

#include "ncphom/reformulate.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ncphom {

/// Cost c_i(Q) = n_i Q + beta_i/(beta_i+1) L_i^(1/beta_i) Q^((beta_i+1)/beta_i),
/// inverse demand P(T) = demand_scale^(1/elasticity) T^(-1/elasticity).
struct OligopolyParams {
  std::vector<double> c_lin;
  std::vector<double> L;
  std::vector<double> beta;
  double demand_scale = 5000.0;
  double demand_elasticity = 1.1;

  int n_firms() const { return static_cast<int>(c_lin.size()); }

  void validate() const {
    const auto n = c_lin.size();
    if (n == 0 || L.size() != n || beta.size() != n)
      throw std::invalid_argument("oligopoly: firm parameter arrays must be non-empty and equally sized");
    for (std::size_t i = 0; i < n; ++i)
      if (!(L[i] > 0 && beta[i] > 0 && c_lin[i] >= 0))
        throw std::invalid_argument("oligopoly: need L > 0, beta > 0, c_lin >= 0");
    if (!(demand_scale > 0 && demand_elasticity > 1))
      throw std::invalid_argument("oligopoly: need demand_scale > 0 and demand_elasticity > 1");
  }

  bool operator==(const OligopolyParams&) const = default;
};

/// The five-firm market of Murphy, Sherali and Soyster. Equilibrium is
/// approximately (15.4293, 12.4986, 9.6635, 7.1651, 5.1326).
inline OligopolyParams murphy5_params() {
  return {{10, 8, 6, 4, 2}, {5, 5, 5, 5, 5}, {1.2, 1.1, 1.0, 0.9, 0.8}, 5000.0, 1.1};
}

/// Smallest admissible firm output and total supply.
inline constexpr double kMinQuantity = 1e-10;

inline bool oligopoly_in_domain(const Vec& q) { return q.minCoeff() >= kMinQuantity && q.sum() >= kMinQuantity; }

namespace detail {

struct Demand {
  double p;    // P(T)
  double dp;   // P'(T)
  double d2p;  // P''(T)
};

inline Demand demand(const OligopolyParams& prm, double total) {
  const double inv = 1.0 / prm.demand_elasticity;
  const double p = std::exp(inv * (std::log(prm.demand_scale) - std::log(total)));
  return {p, -inv * p / total, inv * (inv + 1.0) * p / (total * total)};
}

// L^(1/beta) Q^(1/beta)
inline double marginal_cost_term(double l, double beta, double q) {
  return std::exp((std::log(l) + std::log(q)) / beta);
}

}  // namespace detail

/// c_i'(Q) = n_i + L_i^(1/beta_i) Q^(1/beta_i).
inline double marginal_cost(const OligopolyParams& prm, int i, double q) {
  return prm.c_lin[i] + detail::marginal_cost_term(prm.L[i], prm.beta[i], q);
}

inline double inverse_demand(const OligopolyParams& prm, double total) { return detail::demand(prm, total).p; }

/// f_i(Q) = c_i'(Q_i) - P(T) - Q_i P'(T), T = sum Q.
inline Vec cournot_f(const OligopolyParams& prm, const Vec& q) {
  if (q.size() != prm.n_firms() || !oligopoly_in_domain(q)) throw DomainError("cournot: quantities out of domain");
  const auto d = detail::demand(prm, q.sum());
  Vec f(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) f[i] = marginal_cost(prm, int(i), q[i]) - d.p - q[i] * d.dp;
  return f;
}

/// df_i/dQ_j = d_ij (1/beta_i) L_i^(1/beta_i) Q_i^(1/beta_i - 1) - P'(T)(1 + d_ij) - Q_i P''(T).
inline Mat cournot_jf(const OligopolyParams& prm, const Vec& q) {
  if (q.size() != prm.n_firms() || !oligopoly_in_domain(q)) throw DomainError("cournot: quantities out of domain");
  const auto d = detail::demand(prm, q.sum());
  const auto n = q.size();
  Mat j(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) j(i, k) = -d.dp - q[i] * d.d2p;
    j(i, i) += detail::marginal_cost_term(prm.L[i], prm.beta[i], q[i]) / (prm.beta[i] * q[i]) - d.dp;
  }
  return j;
}

namespace detail {

inline std::vector<Vec> probe_points(int n, double lo, double hi, std::uint64_t seed, int count = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> pts;
  for (int c = 0; c < count; ++c) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = u(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

}  // namespace detail

inline NcpProblem cournot_problem(const OligopolyParams& prm, std::string name = "cournot") {
  prm.validate();
  NcpProblem p;
  p.n = prm.n_firms();
  p.f = [prm](const Vec& q) { return cournot_f(prm, q); };
  p.jf = [prm](const Vec& q) { return cournot_jf(prm, q); };
  p.in_domain = [](const Vec& q) { return oligopoly_in_domain(q); };
  p.name = std::move(name);
  const auto probes = detail::probe_points(p.n, 0.5, 20.0, 0x5eed);
  return validated(std::move(p), probes);
}

struct LcpData {
  Mat M;
  Vec q;

  void validate() const {
    if (M.rows() != M.cols() || M.rows() != q.size() || q.size() == 0)
      throw std::invalid_argument("lcp: M must be n x n and q of length n >= 1");
    if (!M.allFinite() || !q.allFinite()) throw std::invalid_argument("lcp: non-finite data");
  }
};

/// f(z) = M z + q, defined everywhere.
inline NcpProblem lcp_as_ncp(const LcpData& data, std::string name = "lcp") {
  data.validate();
  NcpProblem p;
  p.n = static_cast<int>(data.q.size());
  p.f = [data](const Vec& z) -> Vec { return data.M * z + data.q; };
  p.jf = [m = data.M](const Vec&) { return m; };
  p.name = std::move(name);
  return p;
}

/// Random strictly row-diagonally-dominant matrix with positive diagonal
/// (hence a P-matrix).
inline Mat random_dominant_matrix(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> margin(0.5, 1.5);
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      m(i, j) = off(rng);
      row += std::abs(m(i, j));
    }
    m(i, i) = row + margin(rng);
  }
  return m;
}

/// LCP with a diagonally dominant M and q uniform in [-2, 2]^n; its solution is unique.
inline LcpData random_dominant_lcp(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LcpData d{random_dominant_matrix(n, rng), Vec(n)};
  std::uniform_real_distribution<double> uq(-2.0, 2.0);
  for (int i = 0; i < n; ++i) d.q[i] = uq(rng);
  return d;
}

struct SynthInstance {
  NcpProblem problem;
  Vec solution;
  LcpData lcp;
  std::vector<bool> active;  // i in S: solution_i > 0, f_i = 0
};

/// f(z) = M (z - z*) + w with z*_i > 0 = w_i on a random index set S and
/// z*_i = 0 < w_i off it, so z* + f(z*) > 0.
inline SynthInstance synth_solution_instance(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synth_solution_instance: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  SynthInstance s;
  s.solution = Vec::Zero(n);
  Vec w = Vec::Zero(n);
  s.active.resize(n);
  for (int i = 0; i < n; ++i) {
    s.active[i] = coin(rng);
    (s.active[i] ? s.solution[i] : w[i]) = mag(rng);
  }
  const Mat m = random_dominant_matrix(n, rng);
  s.lcp = {m, Vec(w - m * s.solution)};
  s.problem = lcp_as_ncp(s.lcp, "synth");
  return s;
}

}  // namespace ncphom
