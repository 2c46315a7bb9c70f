#include "support.hpp"

#include <gtest/gtest.h>

using namespace ncphom;
namespace ts = testing_support;

TEST(LcpEnumerate, IdentityMinusOnes) {
  const auto sols = lcp_enumerate({Mat::Identity(3, 3), -Vec::Ones(3)});
  ASSERT_EQ(sols.size(), 1u);
  EXPECT_EQ(sols[0], Vec::Ones(3));
}

TEST(LcpEnumerate, TwoByTwoHandSolution) {
  // Index sets: {} gives w = q < 0; {1} gives z1 = 1/2, w2 = -1/2 < 0; {2} symmetric;
  // {1,2} gives z = (1/3, 1/3).
  Mat m(2, 2);
  m << 2, 1, 1, 2;
  const auto sols = lcp_enumerate({m, -Vec::Ones(2)});
  ASSERT_EQ(sols.size(), 1u);
  EXPECT_NEAR(sols[0][0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(sols[0][1], 1.0 / 3.0, 1e-15);
}

TEST(LcpEnumerate, NonnegativeQContainsZero) {
  std::mt19937_64 rng(81);
  const Mat m = random_dominant_matrix(4, rng);
  const auto sols = lcp_enumerate({m, ts::random_vec(rng, 4, 0.1, 1)});
  EXPECT_TRUE(std::any_of(sols.begin(), sols.end(), [](const Vec& z) { return z.isZero(); }));
}

TEST(LcpEnumerate, MultipleSolutionsSorted) {
  // M = -I, q = e: each z_i is 0 or 1, giving four solutions.
  const auto sols = lcp_enumerate({-Mat::Identity(2, 2), Vec::Ones(2)});
  ASSERT_EQ(sols.size(), 4u);
  for (std::size_t i = 1; i < sols.size(); ++i)
    EXPECT_TRUE(std::lexicographical_compare(sols[i - 1].data(), sols[i - 1].data() + 2, sols[i].data(),
                                             sols[i].data() + 2));
}

TEST(LcpEnumerate, EveryOutputSolves) {
  const std::uint64_t base = seed_from_env(500);
  for (int s = 0; s < 30; ++s) {
    const auto d = random_dominant_lcp(2 + s % 7, base + s);
    const auto sols = lcp_enumerate(d);
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_LE(check_ncp_residual(lcp_as_ncp(d), sols[0]).residual, 1e-6);
  }
}

TEST(LcpEnumerate, RejectsLargeN) {
  EXPECT_THROW(lcp_enumerate({Mat::Identity(13, 13), Vec::Ones(13)}), std::invalid_argument);
}

TEST(GridRefine, ScalarShiftedIdentity) {
  for (double a : {0.3, 1.0, 7.0}) {
    const Vec z = residual_grid_refine(ts::shifted_identity(a), Vec::Zero(1), Vec::Constant(1, 2 * a));
    EXPECT_NEAR(z[0], a, 1e-5);
  }
}

TEST(GridRefine, CornerSolution) {
  const Vec z = residual_grid_refine(ts::shifted_identity(-1.0), Vec::Zero(1), Vec::Ones(1));
  EXPECT_NEAR(z[0], 0.0, 1e-5);
}

TEST(GridRefine, TwoFirmOligopolyAgreesWithTracer) {
  const OligopolyParams prm{{10, 8}, {5, 5}, {1.2, 1.1}, 5000, 1.1};
  const auto p = cournot_problem(prm);
  const Vec grid = residual_grid_refine(p, Vec::Constant(2, 1.0), Vec::Constant(2, 60.0));
  const auto rep = trace_pc({ReformulatedSystem(p), Vec::Ones(2)});
  ASSERT_EQ(rep.status, SolveStatus::Accepted);
  EXPECT_LE(inf_norm(Vec(grid - rep.x_final)), 1e-3);
}

TEST(GridRefine, NoCandidate) {
  NcpProblem p;
  p.n = 1;
  p.f = [](const Vec& x) { return Vec(x.array() * 0 - 1.0); };
  EXPECT_THROW(residual_grid_refine(p, Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)), NoCandidate);
  EXPECT_THROW(residual_grid_refine(p, Vec::Zero(4), Vec::Ones(4)), std::invalid_argument);
}
