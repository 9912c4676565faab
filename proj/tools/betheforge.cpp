#include "betheforge/harness.hpp"
#include "betheforge/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace bf = betheforge;
using nlohmann::json;

namespace {

constexpr int kInputError = 3;

bf::ChainSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chain spec " + path);
  return bf::ChainSpec::from_json(json::parse(in));
}

template <class S>
S parse_point(const std::string& text);

template <>
bf::Rational parse_point<bf::Rational>(const std::string& text) {
  return bf::parse_rational(text);
}

template <>
bf::Complex parse_point<bf::Complex>(const std::string& text) {
  return bf::parse_complex(text);
}

template <class S>
bf::RootSet<S> parse_roots(const std::string& text) {
  bf::RootSet<S> out;
  for (const auto& item : bf::split_list(text)) out.push_back(parse_point<S>(item));
  return out;
}

template <class S>
json residual_json(const std::vector<bf::Residual<S>>& rs) {
  json arr = json::array();
  for (const auto& r : rs)
    arr.push_back({{"lhs", bf::to_string(r.lhs)}, {"rhs", bf::to_string(r.rhs)}, {"raw", bf::to_string(r.raw)},
                   {"relative", r.relative()}});
  return arr;
}

template <class S>
std::vector<S> sample_points(const bf::ChainSpec& spec, std::size_t count) {
  if constexpr (bf::ScalarTraits<S>::exact) {
    return bf::chain_sample_points(spec, count);
  } else {
    return bf::default_samples(count);
  }
}

template <class S>
json root_list(const bf::RootSet<S>& rs) {
  json arr = json::array();
  for (const auto& r : rs) arr.push_back(bf::to_string(r));
  return arr;
}

/// Residuals, and with `verify` the eigen-residual and spectrum match of the Bethe vector.
template <class S>
int state_report(const bf::Chain& chain, const bf::RootSet<S>& u, const bf::RootSet<S>& v, const bf::RootSet<S>& w,
                 bool verify, std::size_t samples) {
  json rep;
  rep["config"] = {{"chain", chain.spec.to_json()}, {"u", root_list(u)}, {"v", root_list(v)}, {"w", root_list(w)}};
  rep["backend"] = bf::ScalarTraits<S>::name;
  std::function<bf::Vector<S>()> state;
  std::function<S(const S&)> eigenvalue;
  double max_rel = 0.0;
  switch (chain.spec.model()) {
    case bf::Model::GL2: {
      auto r = bf::gl2_residuals<S>(chain, u);
      rep["residuals"] = {{"u", residual_json(r)}, {"v", json::array()}, {"w", json::array()}};
      max_rel = bf::max_relative(r);
      state = [&] { return bf::gl2_vector<S>(chain, u); };
      eigenvalue = [&](const S& x) { return bf::gl2_eigenvalue<S>(chain, x, u); };
      break;
    }
    case bf::Model::GL3: {
      auto [fu, fv] = bf::gl3_residuals<S>(chain, u, v);
      rep["residuals"] = {{"u", residual_json(fu)}, {"v", residual_json(fv)}, {"w", json::array()}};
      max_rel = std::max(bf::max_relative(fu), bf::max_relative(fv));
      state = [&] { return bf::gl3_vector<S>(chain, u, v); };
      eigenvalue = [&](const S& x) { return bf::gl3_eigenvalue<S>(chain, x, u, v); };
      break;
    }
    case bf::Model::SP4: {
      bf::Sp4Config<S> cfg{u, v, w};
      auto r = bf::sp4_residuals<S>(chain, cfg);
      rep["residuals"] = {{"u", residual_json(r.u)}, {"v", residual_json(r.v)}, {"w", residual_json(r.w)}};
      max_rel = r.max_relative();
      state = [&chain, cfg] { return bf::sp4_bethe_vector<S>(chain, cfg); };
      eigenvalue = [&chain, cfg](const S& x) { return bf::sp4_eigenvalue<S>(chain, x, cfg); };
      break;
    }
  }
  rep["max_relative_residual"] = max_rel;
  int code = 0;
  if (verify) {
    try {
      bf::Vector<S> psi = state();
      double worst = 0.0;
      json matched = json::array();
      for (const auto& x : sample_points<S>(chain.spec, samples)) {
        S e = eigenvalue(x);
        auto h = chain.monodromy<S>(x).transfer();
        double res = bf::eigen_residual(h.apply(psi), psi, e);
        worst = std::max(worst, res);
        bf::Complex ec = bf::ScalarTraits<S>::to_complex(e);
        bf::Complex xc = bf::ScalarTraits<S>::to_complex(x);
        matched.push_back({{"x", bf::to_string(x)},
                           {"eigenvalue", bf::to_string(e)},
                           {"gap", bf::spectrum_gap(chain.spec, xc, ec)},
                           {"eigen_residual", res}});
      }
      rep["eigen_residual"] = worst;
      rep["matched_eigenvalue"] = matched;
      rep["verdict"] = worst <= 1e-8 ? "eigenvector" : "not_eigenvector";
      if (worst > 1e-8) code = 1;
    } catch (const bf::ZeroVectorError&) {
      rep["eigen_residual"] = nullptr;
      rep["matched_eigenvalue"] = nullptr;
      rep["verdict"] = "null_vector";
      code = 1;
    }
  }
  std::cout << rep.dump(2) << "\n";
  return code;
}

int run_state(const std::string& spec_path, const std::string& us, const std::string& vs, const std::string& ws,
              bool verify, std::size_t samples, const std::string& backend, bf::Model expected) {
  bf::Chain chain(load_spec(spec_path));
  if (chain.spec.model() != expected)
    throw std::invalid_argument("chain spec model is " + bf::model_name(chain.spec.model()) + ", expected " +
                                bf::model_name(expected));
  if (backend == "exact")
    return state_report<bf::Rational>(chain, parse_roots<bf::Rational>(us), parse_roots<bf::Rational>(vs),
                                      parse_roots<bf::Rational>(ws), verify, samples);
  return state_report<bf::Complex>(chain, parse_roots<bf::Complex>(us), parse_roots<bf::Complex>(vs),
                                   parse_roots<bf::Complex>(ws), verify, samples);
}

template <class S>
int run_ybe(bf::RKind kind, const std::string& xs, const std::string& ys, const std::string& zs) {
  S x = parse_point<S>(xs), y = parse_point<S>(ys), z = parse_point<S>(zs);
  double ybe = bf::check_ybe<S>(kind, x, y, z);
  double uni = bf::check_unitarity<S>(kind, x, y);
  bool ok = bf::ScalarTraits<S>::exact ? (ybe == 0.0 && uni == 0.0) : (ybe <= 1e-12 && uni <= 1e-12);
  std::cout << json{{"kind", bf::kind_name(kind)},
                    {"backend", bf::ScalarTraits<S>::name},
                    {"ybe_residual", ybe},
                    {"unitarity_residual", uni},
                    {"pass", ok}}
                   .dump(2)
            << "\n";
  return ok ? 0 : 1;
}

template <class S>
int run_chain_check(const bf::ChainSpec& spec, const std::string& xs, const std::string& ys) {
  S x = parse_point<S>(xs), y = parse_point<S>(ys);
  bf::Chain chain(spec);
  double rtt = bf::check_rtt<S>(spec, x, y);
  double comm = bf::check_commuting<S>(spec, x, y);
  bool ok = bf::ScalarTraits<S>::exact ? (rtt == 0.0 && comm == 0.0) : (rtt <= 1e-12 && comm <= 1e-12);
  json weights = json::array();
  for (const auto& l : chain.lambda<S>(x)) weights.push_back(bf::to_string(l));
  std::cout << json{{"chain", spec.to_json()},
                    {"backend", bf::ScalarTraits<S>::name},
                    {"vacuum",
                     {{"index", chain.vacuum.index},
                      {"local_slot", chain.vacuum.local_slot},
                      {"annihilated_by", bf::triangularity_name(chain.vacuum.convention)}}},
                    {"weights_at_x", weights},
                    {"rtt_residual", rtt},
                    {"commutator_residual", comm},
                    {"pass", ok}}
                   .dump(2)
            << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"betheforge: nested algebraic Bethe ansatz workbench for gl(2), gl(3) and sp(4) chains"};
  app.require_subcommand(1);

  std::string backend = "exact";
  std::string kind_text, xs, ys, zs;
  auto* ybe = app.add_subcommand("ybe", "Yang-Baxter and unitarity residuals of one R-matrix");
  ybe->add_option("--kind", kind_text, "gl2 | gl3 | sp4 | sp4tilde")->required();
  ybe->add_option("--x", xs)->required();
  ybe->add_option("--y", ys)->required();
  ybe->add_option("--z", zs)->required();
  ybe->add_option("--backend", backend)->check(CLI::IsMember({"exact", "float"}));

  std::string spec_path;
  auto* chk = app.add_subcommand("chain-check", "RTT relation, transfer commutativity and vacuum of a chain");
  chk->add_option("--spec", spec_path, "chain spec JSON file")->required();
  chk->add_option("--x", xs)->required();
  chk->add_option("--y", ys)->required();
  chk->add_option("--backend", backend)->check(CLI::IsMember({"exact", "float"}));

  std::string us, vs, ws;
  bool verify = false;
  std::size_t samples = 3;
  std::string state_backend = "float";
  auto add_state = [&](CLI::App* sub, bool with_v, bool with_w, const char* verify_flag) {
    sub->add_option("--spec", spec_path, "chain spec JSON file")->required();
    sub->add_option("--u", us, "comma-separated roots");
    if (with_v) sub->add_option("--v", vs, "comma-separated roots");
    if (with_w) sub->add_option("--w", ws, "comma-separated roots");
    sub->add_flag(verify_flag, verify, "build the Bethe vector and check it against H(x)");
    sub->add_option("--samples", samples, "number of sample points")->check(CLI::PositiveNumber);
    sub->add_option("--backend", state_backend)->check(CLI::IsMember({"exact", "float"}));
  };
  auto* gl2 = app.add_subcommand("gl2", "gl(2) Bethe conditions and Bethe vector");
  add_state(gl2, false, false, "--verify");
  auto* gl3 = app.add_subcommand("gl3", "nested gl(3) Bethe conditions and Bethe vector");
  add_state(gl3, true, false, "--check,--verify");
  auto* sp4 = app.add_subcommand("sp4", "nested sp(4) Bethe conditions and Bethe vector");
  add_state(sp4, true, true, "--verify");

  std::string model_text;
  std::size_t n = 0, p = 0, q = 0, starts = 20;
  std::uint64_t seed = 7;
  double tol = 1e-11;
  bool with_verify = false;
  auto* slv = app.add_subcommand("solve", "solve the Bethe conditions by damped Newton from random starts");
  slv->add_option("--spec", spec_path, "chain spec JSON file")->required();
  slv->add_option("--model", model_text, "must match the chain spec");
  slv->add_option("--N", n, "first-level roots");
  slv->add_option("--P", p, "second-level roots (gl3: dual level; sp4: plus level)");
  slv->add_option("--Q", q, "sp4 minus-level roots");
  slv->add_option("--starts", starts)->check(CLI::PositiveNumber);
  slv->add_option("--seed", seed);
  slv->add_option("--tol", tol)->check(CLI::PositiveNumber);
  slv->add_flag("--verify", with_verify, "attach a spectrum verification to converged results");

  bool all = false;
  std::string filter;
  std::string out_path;
  bool list = false;
  auto* ver = app.add_subcommand("verify", "run the registered property checks");
  ver->add_flag("--all", all, "run every registered check");
  ver->add_option("--filter", filter, "glob over case ids, e.g. 'sp4.*'");
  ver->add_option("--seed", seed);
  ver->add_option("--out", out_path, "write the JSON report here");
  ver->add_flag("--list", list, "list the registered case ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ybe) {
      bf::RKind kind = bf::parse_kind(kind_text);
      return backend == "exact" ? run_ybe<bf::Rational>(kind, xs, ys, zs) : run_ybe<bf::Complex>(kind, xs, ys, zs);
    }
    if (*chk) {
      auto spec = load_spec(spec_path);
      return backend == "exact" ? run_chain_check<bf::Rational>(spec, xs, ys) : run_chain_check<bf::Complex>(spec, xs, ys);
    }
    if (*gl2) return run_state(spec_path, us, "", "", verify, samples, state_backend, bf::Model::GL2);
    if (*gl3) return run_state(spec_path, us, vs, "", verify, samples, state_backend, bf::Model::GL3);
    if (*sp4) return run_state(spec_path, us, vs, ws, verify, samples, state_backend, bf::Model::SP4);
    if (*slv) {
      bf::Chain chain(load_spec(spec_path));
      if (!model_text.empty() && bf::parse_model(model_text) != chain.spec.model())
        throw std::invalid_argument("--model does not match the chain spec");
      bf::SolveProblem prob{chain, {n, p, q}, {}, {}};
      prob.options.starts = starts;
      prob.options.seed = seed;
      prob.options.tol = tol;
      json arr = json::array();
      bool any = false;
      for (const auto& r : bf::solve(prob)) {
        json j = bf::to_json(r);
        if (with_verify && r.converged) j["verification"] = bf::to_json(bf::verify_solution(chain, r, bf::default_samples()));
        any = any || r.converged;
        arr.push_back(j);
      }
      std::cout << arr.dump(2) << "\n";
      return any ? 0 : 1;
    }
    if (*ver) {
      if (list) {
        for (const auto& c : bf::registry()) std::cout << c.id << "\n";
        return 0;
      }
      if (all == !filter.empty()) throw std::invalid_argument("pass exactly one of --all or --filter");
      std::string glob = all ? "*" : filter;
      auto cases = bf::run_suite(glob, seed);
      if (cases.empty()) {
        std::cerr << "no registered check matches '" << glob << "'\n";
        return bf::exit_code(cases);
      }
      std::cout << bf::report_table(cases);
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << bf::report_json(cases, glob, seed).dump(2) << "\n";
      }
      return bf::exit_code(cases);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return 0;
}
