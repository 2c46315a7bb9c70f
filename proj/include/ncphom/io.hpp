#pragma once

// Problem files (JSON), trace CSV and result documents for the command-line tool.
//
// Problem file schema, one object per file:
//   {"kind": "lcp",      "n": 2, "M": [[2,1],[1,2]], "q": [-1,-1], "x0": [1,1]}
//   {"kind": "cournot",  "n": 5, "c_lin": [...], "L": [...], "beta": [...],
//                        "demand_scale": 5000, "demand_elasticity": 1.1}
//   {"kind": "builtin",  "builtin": "cournot-murphy5"}
// "x0" is optional for every kind and defaults to the all-ones vector.

#include "ncphom/problems.hpp"
#include "ncphom/tracer.hpp"

#include "json.hpp"  // vendored nlohmann::json

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ncphom {

using json = nlohmann::json;

/// Raised for any structurally invalid problem file or unknown builtin.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { lcp, cournot, builtin };

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"cournot-murphy5"};
  return names;
}

struct ProblemFile {
  ProblemKind kind = ProblemKind::builtin;
  int n = 0;
  std::optional<LcpData> lcp;
  std::optional<OligopolyParams> cournot;
  std::string builtin_name;
  std::optional<Vec> x0;

  bool operator==(const ProblemFile& o) const {
    auto same_vec = [](const std::optional<Vec>& a, const std::optional<Vec>& b) {
      return a.has_value() == b.has_value() && (!a || *a == *b);
    };
    const bool same_lcp = lcp.has_value() == o.lcp.has_value() && (!lcp || (lcp->M == o.lcp->M && lcp->q == o.lcp->q));
    return kind == o.kind && n == o.n && same_lcp && cournot == o.cournot && builtin_name == o.builtin_name &&
           same_vec(x0, o.x0);
  }
};

namespace detail {

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline Vec to_vec(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(std::string(what) + " must be an array of numbers");
    v[Eigen::Index(i)] = j[i].get<double>();
  }
  if (!v.allFinite()) throw InputError(std::string(what) + " has non-finite entries");
  return v;
}

inline std::vector<double> to_std_checked(const json& j, const char* what, int n) {
  const Vec v = to_vec(j, what);
  if (v.size() != n) throw InputError(std::string(what) + " must have n entries");
  return to_std(v);
}

inline void require_exact_keys(const json& j, std::set<std::string> required, const std::set<std::string>& optional) {
  for (const auto& [key, _] : j.items()) {
    if (required.erase(key) == 0 && !optional.count(key)) throw InputError("unexpected field '" + key + "'");
  }
  if (!required.empty()) throw InputError("missing field '" + *required.begin() + "'");
}

}  // namespace detail

inline ProblemFile parse_problem(const json& j) {
  if (!j.is_object()) throw InputError("problem file must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw InputError("missing string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  ProblemFile pf;
  auto read_n = [&] {
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 1) throw InputError("'n' must be a positive integer");
    return j["n"].get<int>();
  };

  if (kind == "lcp") {
    detail::require_exact_keys(j, {"kind", "n", "M", "q"}, {"x0"});
    pf.kind = ProblemKind::lcp;
    pf.n = read_n();
    const auto& m = j["M"];
    if (!m.is_array() || int(m.size()) != pf.n) throw InputError("'M' must be an n x n array");
    LcpData d{Mat(pf.n, pf.n), detail::to_vec(j["q"], "q")};
    for (int i = 0; i < pf.n; ++i) {
      const Vec row = detail::to_vec(m[i], "M row");
      if (row.size() != pf.n) throw InputError("'M' must be an n x n array");
      d.M.row(i) = row.transpose();
    }
    if (d.q.size() != pf.n) throw InputError("'q' must have n entries");
    pf.lcp = std::move(d);
  } else if (kind == "cournot") {
    detail::require_exact_keys(j, {"kind", "n", "c_lin", "L", "beta", "demand_scale", "demand_elasticity"}, {"x0"});
    pf.kind = ProblemKind::cournot;
    pf.n = read_n();
    OligopolyParams prm;
    prm.c_lin = detail::to_std_checked(j["c_lin"], "c_lin", pf.n);
    prm.L = detail::to_std_checked(j["L"], "L", pf.n);
    prm.beta = detail::to_std_checked(j["beta"], "beta", pf.n);
    if (!j["demand_scale"].is_number() || !j["demand_elasticity"].is_number())
      throw InputError("demand constants must be numbers");
    prm.demand_scale = j["demand_scale"].get<double>();
    prm.demand_elasticity = j["demand_elasticity"].get<double>();
    try {
      prm.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    pf.cournot = std::move(prm);
  } else if (kind == "builtin") {
    detail::require_exact_keys(j, {"kind", "builtin"}, {"x0", "n"});
    pf.kind = ProblemKind::builtin;
    if (!j["builtin"].is_string()) throw InputError("'builtin' must be a string");
    pf.builtin_name = j["builtin"].get<std::string>();
    if (pf.builtin_name != "cournot-murphy5") throw InputError("unknown builtin '" + pf.builtin_name + "'");
    pf.n = 5;
    if (j.contains("n") && (!j["n"].is_number_integer() || j["n"].get<int>() != pf.n))
      throw InputError("'n' does not match the builtin");
  } else {
    throw InputError("unknown kind '" + kind + "'");
  }

  if (j.contains("x0")) {
    pf.x0 = detail::to_vec(j["x0"], "x0");
    if (pf.x0->size() != pf.n) throw InputError("'x0' must have n entries");
  }
  return pf;
}

inline ProblemFile builtin_problem(const std::string& name) {
  return parse_problem(json{{"kind", "builtin"}, {"builtin", name}});
}

inline ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  return parse_problem(j);
}

inline json to_json(const ProblemFile& pf) {
  json j;
  switch (pf.kind) {
    case ProblemKind::lcp: {
      j["kind"] = "lcp";
      j["n"] = pf.n;
      json m = json::array();
      for (int i = 0; i < pf.n; ++i) m.push_back(detail::to_std(pf.lcp->M.row(i).transpose()));
      j["M"] = m;
      j["q"] = detail::to_std(pf.lcp->q);
      break;
    }
    case ProblemKind::cournot:
      j["kind"] = "cournot";
      j["n"] = pf.n;
      j["c_lin"] = pf.cournot->c_lin;
      j["L"] = pf.cournot->L;
      j["beta"] = pf.cournot->beta;
      j["demand_scale"] = pf.cournot->demand_scale;
      j["demand_elasticity"] = pf.cournot->demand_elasticity;
      break;
    case ProblemKind::builtin:
      j["kind"] = "builtin";
      j["builtin"] = pf.builtin_name;
      break;
  }
  if (pf.x0) j["x0"] = detail::to_std(*pf.x0);
  return j;
}

inline NcpProblem make_problem(const ProblemFile& pf) {
  switch (pf.kind) {
    case ProblemKind::lcp: return lcp_as_ncp(*pf.lcp);
    case ProblemKind::cournot: return cournot_problem(*pf.cournot);
    case ProblemKind::builtin: return cournot_problem(murphy5_params(), pf.builtin_name);
  }
  throw InputError("unreachable problem kind");
}

inline Vec start_point(const ProblemFile& pf) { return pf.x0 ? *pf.x0 : Vec(Vec::Ones(pf.n)); }

/// Result document: {status, x, lambda, residual, iters, restarts}.
inline json result_json(const SolveReport& r) {
  return json{{"status", std::string(to_string(r.status))},
              {"x", detail::to_std(r.x_final)},
              {"lambda", detail::to_std(r.lambda_final)},
              {"residual", r.ncp_residual},
              {"iters", r.iters},
              {"restarts", r.restarts}};
}

/// Base seed for randomized generators: NCP_HOMOTOPY_SEED if set and numeric, else `fallback`.
inline std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* s = std::getenv("NCP_HOMOTOPY_SEED");
  if (s == nullptr || *s == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  return *end == '\0' ? std::uint64_t(v) : fallback;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with header iter,event,k,det_sign,psi_norm,H_norm,lambda_1..lambda_n,x_1..x_n.
inline void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, int n) {
  out << "iter,event,k,det_sign,psi_norm,H_norm";
  for (int i = 1; i <= n; ++i) out << ",lambda_" << i;
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  out << '\n';
  for (const auto& r : trace) {
    out << r.iter << ',' << to_string(r.event) << ',' << r.k << ',' << r.det_sign << ',' << format_real(r.psi_norm)
        << ',' << format_real(r.H_norm);
    for (int i = 0; i < n; ++i) out << ',' << format_real(i < r.lambda.size() ? r.lambda[i] : 0.0);
    for (int i = 0; i < n; ++i) out << ',' << format_real(i < r.x.size() ? r.x[i] : 0.0);
    out << '\n';
  }
}

inline std::string trace_csv(const std::vector<TraceRecord>& trace, int n) {
  std::ostringstream os;
  write_trace_csv(os, trace, n);
  return os.str();
}

}  // namespace ncphom
