#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace ncphom;
namespace ts = testing_support;

namespace {

json lcp_doc() { return json::parse(R"({"kind":"lcp","n":2,"M":[[2,1],[1,2]],"q":[-1,-1]})"); }

json cournot_doc() {
  return json::parse(R"({"kind":"cournot","n":2,"c_lin":[10,8],"L":[5,5],"beta":[1.2,1.1],
                        "demand_scale":5000,"demand_elasticity":1.1})");
}

}  // namespace

TEST(ParseProblem, Lcp) {
  const auto pf = parse_problem(lcp_doc());
  EXPECT_EQ(pf.kind, ProblemKind::lcp);
  EXPECT_EQ(pf.n, 2);
  EXPECT_EQ(pf.lcp->M(0, 1), 1.0);
  EXPECT_FALSE(pf.x0.has_value());
  EXPECT_EQ(start_point(pf), Vec::Ones(2));
}

TEST(ParseProblem, CournotAndBuiltin) {
  const auto c = parse_problem(cournot_doc());
  EXPECT_EQ(c.cournot->beta[1], 1.1);
  const auto b = builtin_problem("cournot-murphy5");
  EXPECT_EQ(b.n, 5);
  const auto p = make_problem(b);
  EXPECT_EQ(p.n, 5);
  EXPECT_LE(inf_norm(p.eval_f(ts::paper_vector())), 1e-3);
}

TEST(ParseProblem, RejectsMalformed) {
  auto bad = [](json j) { EXPECT_THROW(parse_problem(j), InputError) << j.dump(); };
  bad(json::array());
  bad(json{{"n", 2}});
  bad(json{{"kind", "qp"}});
  auto j = lcp_doc();
  j["beta"] = {1, 2};
  bad(j);  // field of another kind
  j = lcp_doc();
  j.erase("q");
  bad(j);
  j = lcp_doc();
  j["n"] = 3;
  bad(j);
  j = lcp_doc();
  j["M"][1] = {1};
  bad(j);
  j = lcp_doc();
  j["q"][0] = "x";
  bad(j);
  j = lcp_doc();
  j["x0"] = {1, 2, 3};
  bad(j);
  j = cournot_doc();
  j["L"][0] = -1;
  bad(j);
  bad(json{{"kind", "builtin"}, {"builtin", "nope"}});
  bad(json{{"kind", "builtin"}, {"builtin", "cournot-murphy5"}, {"n", 4}});
}

TEST(ProblemFile, RoundTrip) {
  std::mt19937_64 rng(seed_from_env(91));
  std::vector<ProblemFile> files{parse_problem(lcp_doc()), parse_problem(cournot_doc()),
                                 builtin_problem("cournot-murphy5")};
  for (int s = 0; s < 10; ++s) {
    ProblemFile pf;
    pf.kind = ProblemKind::lcp;
    pf.n = 1 + s % 6;
    pf.lcp = random_dominant_lcp(pf.n, rng());
    if (s % 2) pf.x0 = ts::random_vec(rng, pf.n, -1e3, 1e3);
    files.push_back(pf);
  }
  for (const auto& pf : files) {
    const auto again = parse_problem(json::parse(to_json(pf).dump()));
    EXPECT_TRUE(again == pf) << to_json(pf).dump();
  }
}

TEST(TraceCsv, HeaderAndFormatting) {
  TraceRecord r;
  r.iter = 3;
  r.event = TraceEvent::correct;
  r.k = 2;
  r.det_sign = -1;
  r.psi_norm = 0.1;
  r.H_norm = 1e-300;
  r.lambda = Vec::Constant(2, 1.0 / 3.0);
  r.x = Vec::Constant(2, 2.0);
  const std::string csv = trace_csv({r}, 2);
  EXPECT_EQ(csv,
            "iter,event,k,det_sign,psi_norm,H_norm,lambda_1,lambda_2,x_1,x_2\n"
            "3,correct,2,-1,0.10000000000000001,1e-300,"
            "0.33333333333333331,0.33333333333333331,2,2\n");
}

TEST(TraceCsv, RoundTripsDoubles) {
  std::mt19937_64 rng(92);
  std::uniform_real_distribution<double> u(-1e10, 1e10);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, double(i % 40) - 20);
    EXPECT_EQ(std::strtod(format_real(v).c_str(), nullptr), v);
  }
}

TEST(ResultJson, Fields) {
  SolveReport rep;
  rep.status = SolveStatus::Probable;
  rep.x_final = Vec::Ones(2);
  rep.lambda_final = Vec::Constant(2, 1e-12);
  rep.ncp_residual = 0.5;
  rep.iters = 7;
  rep.restarts = 1;
  const json j = result_json(rep);
  EXPECT_EQ(j["status"], "Probable");
  EXPECT_EQ(j["x"].size(), 2u);
  EXPECT_EQ(j["lambda"][1].get<double>(), 1e-12);
  EXPECT_EQ(j["residual"].get<double>(), 0.5);
  EXPECT_EQ(j["iters"], 7);
  EXPECT_EQ(j["restarts"], 1);
}

TEST(Seed, FromEnvironment) {
  ::setenv("NCP_HOMOTOPY_SEED", "12345", 1);
  EXPECT_EQ(seed_from_env(7), 12345u);
  ::setenv("NCP_HOMOTOPY_SEED", "abc", 1);
  EXPECT_EQ(seed_from_env(7), 7u);
  ::unsetenv("NCP_HOMOTOPY_SEED");
  EXPECT_EQ(seed_from_env(7), 7u);
}
