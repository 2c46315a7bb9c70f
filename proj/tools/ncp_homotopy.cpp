// ncp-homotopy: solve | verify | oracle
//
// Exit codes: 0 success (Accepted / residual within tol), 2 Probable,
// 1 any other solver outcome or failed verification, 64 malformed input.

#include "ncphom/ncphom.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 64;

struct ProblemArgs {
  std::string file;
  std::string builtin;

  void attach(CLI::App* cmd) {
    auto* f = cmd->add_option("--problem", file, "problem JSON file");
    auto* b = cmd->add_option("--builtin", builtin, "builtin problem name (cournot-murphy5)");
    f->excludes(b);
  }

  ncphom::ProblemFile load() const {
    if (!file.empty()) return ncphom::load_problem_file(file);
    if (!builtin.empty()) return ncphom::builtin_problem(builtin);
    throw ncphom::InputError("one of --problem or --builtin is required");
  }
};

ncphom::Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const ncphom::Vec>(v.data(), Eigen::Index(v.size())); }

int run_solve(const ProblemArgs& pa, const std::string& tracer, const std::string& trace_path,
              const std::vector<double>& x0_arg, const ncphom::TracerConfig& cfg) {
  auto pf = pa.load();
  if (!x0_arg.empty()) {
    if (int(x0_arg.size()) != pf.n) throw ncphom::InputError("--x0 must have n entries");
    pf.x0 = to_vec(x0_arg);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ncphom::InputError(e.what());
  }
  ncphom::ReformulatedSystem sys(ncphom::make_problem(pf));
  const ncphom::Vec x0 = ncphom::start_point(pf);
  if (!sys.contains(x0)) throw ncphom::InputError("x0 lies outside the problem domain");
  const ncphom::HomotopyInstance inst(sys, x0);
  const auto rep = tracer == "ode" ? ncphom::trace_ode(inst, cfg) : ncphom::trace_pc(inst, cfg);

  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw ncphom::InputError("cannot write trace file '" + trace_path + "'");
    ncphom::write_trace_csv(out, rep.trace, pf.n);
  }
  std::cout << ncphom::result_json(rep).dump(2) << '\n';
  switch (rep.status) {
    case ncphom::SolveStatus::Accepted: return 0;
    case ncphom::SolveStatus::Probable: return 2;
    default: return 1;
  }
}

int run_verify(const ProblemArgs& pa, const std::vector<double>& x_arg, double tol) {
  const auto pf = pa.load();
  if (int(x_arg.size()) != pf.n) throw ncphom::InputError("--x must have n entries");
  const ncphom::ReformulatedSystem sys(ncphom::make_problem(pf));
  const ncphom::Vec x = to_vec(x_arg);
  const auto r = ncphom::check_ncp_residual(sys.problem(), x);
  const double psi_norm = ncphom::inf_norm(sys.psi(x));
  std::cout << ncphom::json{{"residual", r.residual}, {"feasible", r.feasible}, {"psi_norm", psi_norm}}.dump(2)
            << '\n';
  return r.residual <= tol ? 0 : 1;
}

int run_oracle(const ProblemArgs& pa) {
  const auto pf = pa.load();
  if (pf.kind != ncphom::ProblemKind::lcp) throw ncphom::InputError("oracle requires an lcp problem");
  if (pf.n > ncphom::kMaxEnumerationSize) throw ncphom::InputError("oracle supports n <= 12");
  ncphom::json sols = ncphom::json::array();
  for (const auto& z : ncphom::lcp_enumerate(*pf.lcp)) sols.push_back(ncphom::detail::to_std(z));
  std::cout << ncphom::json{{"solutions", sols}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear complementarity solver by vector-parameter homotopy"};
  app.require_subcommand(1);

  ncphom::TracerConfig cfg;
  ProblemArgs solve_pa, verify_pa, oracle_pa;
  std::string tracer = "pc", trace_path;
  std::vector<double> x0, x;
  double tol = 1e-6;

  auto* solve = app.add_subcommand("solve", "trace the homotopy path to a solution");
  solve_pa.attach(solve);
  solve->add_option("--tracer", tracer, "pc (predictor-corrector) or ode (arc-length RK4)")
      ->check(CLI::IsMember({"pc", "ode"}));
  solve->add_option("--trace", trace_path, "write the trace CSV here");
  solve->add_option("--x0", x0, "start point, comma separated")->delimiter(',');
  solve->add_option("--eps1", cfg.eps1, "acceptance threshold on ||lambda||/sqrt(n)");
  solve->add_option("--eps2", cfg.eps2, "probable-solution threshold");
  solve->add_option("--eta1", cfg.eta1, "predictor t-share threshold");
  solve->add_option("--eta2", cfg.eta2, "minimum step before restart");
  solve->add_option("--kappa1", cfg.kappa1, "step growth base");
  solve->add_option("--kappa2", cfg.kappa2, "step length cap");
  solve->add_option("--c0", cfg.c0, "stall counter limit");
  solve->add_option("--t-max", cfg.t_max, "cap on t = -ln(lambda) during step growth");
  solve->add_option("--max-iters", cfg.max_iters, "iteration limit");
  solve->add_option("--max-restarts", cfg.max_restarts, "restart limit");

  auto* verify = app.add_subcommand("verify", "report the complementarity residual at a point");
  verify_pa.attach(verify);
  verify->add_option("--x", x, "candidate point, comma separated")->delimiter(',')->required();
  verify->add_option("--tol", tol, "residual tolerance");

  auto* oracle = app.add_subcommand("oracle", "enumerate every solution of a small LCP");
  oracle_pa.attach(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return run_solve(solve_pa, tracer, trace_path, x0, cfg);
    if (verify->parsed()) return run_verify(verify_pa, x, tol);
    return run_oracle(oracle_pa);
  } catch (const ncphom::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const ncphom::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}
