#pragma once

// Brute-force reference solvers for small instances. Never used on the solve path.

#include "ncphom/problems.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace ncphom {

struct NoCandidate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxEnumerationSize = 12;

/// All LCP solutions found by enumerating the 2^n complementary index sets.
/// For each alpha, solve M_aa z_a = -q_a with z = 0 off alpha and keep z when
/// z >= 0 and Mz + q >= 0 within 1e-9. Results are deduplicated and sorted
/// lexicographically.
inline std::vector<Vec> lcp_enumerate(const LcpData& data) {
  data.validate();
  const int n = static_cast<int>(data.q.size());
  if (n > kMaxEnumerationSize) throw std::invalid_argument("lcp_enumerate: n > 12");
  constexpr double tol = 1e-9;

  std::vector<Vec> found;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const int m = static_cast<int>(idx.size());

    Vec z = Vec::Zero(n);
    if (m > 0) {
      Mat sub(m, m);
      Vec rhs(m);
      for (int a = 0; a < m; ++a) {
        rhs[a] = -data.q[idx[a]];
        for (int b = 0; b < m; ++b) sub(a, b) = data.M(idx[a], idx[b]);
      }
      Vec za;
      try {
        za = lu_solve(sub, rhs);
      } catch (const SingularMatrix&) {
        continue;
      }
      for (int a = 0; a < m; ++a) z[idx[a]] = za[a];
    }
    const Vec w = data.M * z + data.q;
    if (z.minCoeff() < -tol || w.minCoeff() < -tol) continue;
    const bool dup = std::any_of(found.begin(), found.end(),
                                 [&](const Vec& y) { return (y - z).cwiseAbs().maxCoeff() <= tol; });
    if (!dup) found.push_back(z);
  }
  std::sort(found.begin(), found.end(), [](const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return found;
}

namespace detail {

// Minimizes the complementarity residual over a tensor grid; returns the best
// point and its residual. Points outside the problem domain are skipped.
inline std::pair<Vec, double> grid_search(const NcpProblem& p, const Vec& lo, const Vec& hi, int per_axis) {
  const auto n = lo.size();
  Vec best = lo;
  double best_r = std::numeric_limits<double>::infinity();
  std::vector<int> counter(n, 0);
  Vec x(n);
  for (;;) {
    for (Eigen::Index i = 0; i < n; ++i)
      x[i] = per_axis == 1 ? lo[i] : lo[i] + (hi[i] - lo[i]) * counter[i] / double(per_axis - 1);
    if (p.contains(x)) {
      try {
        const double r = check_ncp_residual(p, x).residual;
        if (r < best_r) {
          best_r = r;
          best = x;
        }
      } catch (const DomainError&) {
      }
    }
    Eigen::Index d = 0;
    while (d < n && ++counter[d] == per_axis) counter[d++] = 0;
    if (d == n) break;
  }
  return {best, best_r};
}

}  // namespace detail

/// Coarse-to-fine grid minimization of ||min(x, f(x))||_inf inside [lo, hi]
/// for n <= 3: 50 points per axis, then five rounds each shrinking the
/// spacing tenfold around the incumbent.
inline Vec residual_grid_refine(const NcpProblem& p, const Vec& lo, const Vec& hi) {
  if (p.n > 3 || lo.size() != p.n || hi.size() != p.n)
    throw std::invalid_argument("residual_grid_refine: requires n <= 3 and matching box");
  constexpr int kCoarse = 50;
  constexpr int kFine = 21;

  auto [best, best_r] = detail::grid_search(p, lo, hi, kCoarse);
  Vec spacing = (hi - lo) / double(kCoarse - 1);
  for (int round = 0; round < 5; ++round) {
    const Vec a = (best - spacing).cwiseMax(lo);
    const Vec b = (best + spacing).cwiseMin(hi);
    auto [cand, r] = detail::grid_search(p, a, b, kFine);
    if (r < best_r) {
      best = cand;
      best_r = r;
    }
    spacing /= 10.0;
  }
  if (!(best_r <= 1e-2)) throw NoCandidate("residual_grid_refine: no point with residual <= 1e-2");
  return best;
}

}  // namespace ncphom
