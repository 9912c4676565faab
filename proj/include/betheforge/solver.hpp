#pragma once

#include "betheforge/chain.hpp"
#include "betheforge/nested_gl.hpp"
#include "betheforge/nested_sp4.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace betheforge {

/// Root sets of one Bethe configuration. gl(2) uses u; gl(3) uses u (first level) and v (dual level).
struct BetheRoots {
  RootSet<Complex> u;
  RootSet<Complex> v;
  RootSet<Complex> w;

  std::size_t size() const { return u.size() + v.size() + w.size(); }
};

struct Counts {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t q = 0;

  std::size_t total() const { return n + p + q; }
};

/// All Bethe conditions of the chain's model, stacked in family order.
inline std::vector<Residual<Complex>> bethe_conditions(const Chain& chain, const BetheRoots& r) {
  std::vector<Residual<Complex>> all;
  auto append = [&](const std::vector<Residual<Complex>>& rs) { all.insert(all.end(), rs.begin(), rs.end()); };
  switch (chain.spec.model()) {
    case Model::GL2:
      append(gl2_residuals<Complex>(chain, r.u));
      break;
    case Model::GL3: {
      auto [fu, fv] = gl3_residuals<Complex>(chain, r.u, r.v);
      append(fu);
      append(fv);
      break;
    }
    case Model::SP4: {
      auto res = sp4_residuals<Complex>(chain, Sp4Config<Complex>{r.u, r.v, r.w});
      append(res.u);
      append(res.v);
      append(res.w);
      break;
    }
  }
  return all;
}

/// Stacked relative residuals raw / max(|lhs|,|rhs|,1).
inline std::vector<Complex> bethe_residuals(const Chain& chain, const BetheRoots& r) {
  std::vector<Complex> out;
  for (const auto& x : bethe_conditions(chain, r)) out.push_back(x.raw / x.scale);
  return out;
}

inline Vector<Complex> bethe_state(const Chain& chain, const BetheRoots& r) {
  switch (chain.spec.model()) {
    case Model::GL2:
      return gl2_vector<Complex>(chain, r.u);
    case Model::GL3:
      return gl3_vector<Complex>(chain, r.u, r.v);
    case Model::SP4:
      return sp4_bethe_vector<Complex>(chain, Sp4Config<Complex>{r.u, r.v, r.w});
  }
  throw std::logic_error("unknown model");
}

inline Complex bethe_eigenvalue(const Chain& chain, const Complex& x, const BetheRoots& r) {
  switch (chain.spec.model()) {
    case Model::GL2:
      return gl2_eigenvalue<Complex>(chain, x, r.u);
    case Model::GL3:
      return gl3_eigenvalue<Complex>(chain, x, r.u, r.v);
    case Model::SP4:
      return sp4_eigenvalue<Complex>(chain, x, Sp4Config<Complex>{r.u, r.v, r.w});
  }
  throw std::logic_error("unknown model");
}

// ---------------------------------------------------------------------------
// Damped Newton

struct SolveOptions {
  double tol = 1e-11;
  int max_iter = 100;
  int max_halvings = 12;
  std::size_t starts = 20;
  std::uint64_t seed = 7;
  double fd_step = 1e-7;
  double dedup_tol = 1e-6;
  double collision_tol = 1e-8;
  double escape_radius = 1e4;
  double degenerate_tol = 1e-6;
  double start_radius = 2.0;
};

struct SolveProblem {
  Chain chain;
  Counts counts;
  std::vector<BetheRoots> guesses;
  SolveOptions options;
};

struct SolveResult {
  BetheRoots roots;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double condition = 1.0;
  std::string status;
};

/// Bethe conditions as a function of the flattened unknowns.
using ConditionFn = std::function<std::vector<Residual<Complex>>(const std::vector<Complex>&)>;

namespace detail {

inline std::vector<Complex> flatten(const BetheRoots& r) {
  std::vector<Complex> out(r.u);
  out.insert(out.end(), r.v.begin(), r.v.end());
  out.insert(out.end(), r.w.begin(), r.w.end());
  return out;
}

inline BetheRoots unflatten(const std::vector<Complex>& z, const Counts& c) {
  BetheRoots r;
  r.u.assign(z.begin(), z.begin() + static_cast<long>(c.n));
  r.v.assign(z.begin() + static_cast<long>(c.n), z.begin() + static_cast<long>(c.n + c.p));
  r.w.assign(z.begin() + static_cast<long>(c.n + c.p), z.end());
  return r;
}

inline double max_norm(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Relative residuals or nullopt at a pole.
inline std::optional<std::vector<Complex>> try_residuals(const ConditionFn& fn, const std::vector<Complex>& z) {
  try {
    std::vector<Complex> out;
    for (const auto& x : fn(z)) {
      Complex r = x.raw / x.scale;
      if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) return std::nullopt;
      out.push_back(r);
    }
    return out;
  } catch (const PoleError&) {
    return std::nullopt;
  }
}

/// Newton objective: the relative residuals scaled by prod (1+|z_j|), which removes
/// the spurious zero that every relative residual has at infinity.
inline std::optional<std::vector<Complex>> objective(const ConditionFn& fn, const std::vector<Complex>& z) {
  auto r = try_residuals(fn, z);
  if (!r) return r;
  double w = 1.0;
  for (const auto& x : z) w *= 1.0 + std::abs(x);
  for (auto& x : *r) x *= w;
  return r;
}

/// Some condition has both sides vanishing, so it holds for a trivial reason.
inline bool degenerate(const ConditionFn& fn, const std::vector<Complex>& z, double tol) {
  for (const auto& x : fn(z))
    if (std::max(std::abs(x.lhs), std::abs(x.rhs)) < tol) return true;
  return false;
}

inline bool collides(const RootSet<Complex>& s, double tol) {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (std::abs(s[i] - s[j]) < tol) return true;
  return false;
}

/// Same multiset of roots within `tol`.
inline bool same_set(const RootSet<Complex>& a, const RootSet<Complex>& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size() && !found; ++j)
      if (!used[j] && std::abs(x - b[j]) <= tol) used[j] = found = true;
    if (!found) return false;
  }
  return true;
}

inline bool same_roots(const BetheRoots& a, const BetheRoots& b, double tol) {
  return same_set(a.u, b.u, tol) && same_set(a.v, b.v, tol) && same_set(a.w, b.w, tol);
}

inline bool lex_less(const BetheRoots& a, const BetheRoots& b) {
  auto fa = flatten(a), fb = flatten(b);
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end(), spectral_less);
}

inline SolveResult newton(const ConditionFn& fn, const Counts& c, std::vector<Complex> z, const SolveOptions& opt) {
  const std::size_t n = z.size();
  const auto m = static_cast<Eigen::Index>(2 * n);
  SolveResult res;
  auto r0 = objective(fn, z);
  if (!r0) {
    res.roots = unflatten(z, c);
    res.residual = std::numeric_limits<double>::infinity();
    res.status = "pole";
    return res;
  }
  std::vector<Complex> r = *r0;
  double norm = max_norm(r);
  auto plain = [&](const std::vector<Complex>& zz) { return max_norm(*try_residuals(fn, zz)); };
  double residual = plain(z);
  auto to_real = [&](const std::vector<Complex>& v) {
    Eigen::VectorXd out(m);
    for (std::size_t i = 0; i < n; ++i) {
      out(static_cast<Eigen::Index>(2 * i)) = v[i].real();
      out(static_cast<Eigen::Index>(2 * i + 1)) = v[i].imag();
    }
    return out;
  };
  int it = 0;
  std::string status = "no_convergence";
  for (; it < opt.max_iter && residual > opt.tol; ++it) {
    Eigen::MatrixXd jac(m, m);
    Eigen::VectorXd base = to_real(r);
    bool pole = false;
    for (std::size_t j = 0; j < 2 * n && !pole; ++j) {
      std::vector<Complex> zp = z;
      zp[j / 2] += (j % 2 == 0) ? Complex(opt.fd_step, 0.0) : Complex(0.0, opt.fd_step);
      auto rp = objective(fn, zp);
      if (!rp) pole = true;
      else jac.col(static_cast<Eigen::Index>(j)) = (to_real(*rp) - base) / opt.fd_step;
    }
    if (pole) {
      status = "pole";
      break;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const auto& sv = svd.singularValues();
    res.condition = sv(m - 1) > 0 ? sv(0) / sv(m - 1) : std::numeric_limits<double>::infinity();
    Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-base);
    double scale = 1.0;
    bool improved = false;
    for (int h = 0; h <= opt.max_halvings; ++h, scale *= 0.5) {
      std::vector<Complex> zn = z;
      for (std::size_t i = 0; i < n; ++i)
        zn[i] += scale * Complex(step(static_cast<Eigen::Index>(2 * i)), step(static_cast<Eigen::Index>(2 * i + 1)));
      auto rn = objective(fn, zn);
      if (rn && max_norm(*rn) < norm) {
        z = std::move(zn);
        r = std::move(*rn);
        norm = max_norm(r);
        residual = plain(z);
        improved = true;
        break;
      }
    }
    if (!improved) {
      status = "stalled";
      ++it;
      break;
    }
    if (max_norm(z) > opt.escape_radius) {
      status = "escaped";
      ++it;
      break;
    }
  }
  res.roots = unflatten(z, c);
  res.residual = residual;
  res.iterations = it;
  res.converged = residual <= opt.tol && status != "escaped";
  if (res.converged) {
    status = "converged";
    if (max_norm(z) > opt.escape_radius) status = "escaped";
    else if (collides(res.roots.u, opt.collision_tol) || collides(res.roots.v, opt.collision_tol) ||
             collides(res.roots.w, opt.collision_tol))
      status = "collision";
    else if (degenerate(fn, z, opt.degenerate_tol))
      status = "degenerate";
    res.converged = status == "converged";
  }
  res.status = status;
  return res;
}

}  // namespace detail

/// Deterministic starting points: a disc of radius `radius` around the mean inhomogeneity, shifted by +0.1i.
inline std::vector<BetheRoots> random_starts(const ChainSpec& spec, const Counts& c, std::size_t count,
                                             std::uint64_t seed, double radius = 2.0) {
  Complex centre(0.0, 0.1);
  for (const auto& z : spec.z()) centre += Complex(z.get_d() / static_cast<double>(spec.length()), 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<BetheRoots> out;
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<Complex> z;
    for (std::size_t i = 0; i < c.total(); ++i) {
      double rad = radius * std::sqrt(unit(rng));
      double ang = 2.0 * M_PI * unit(rng);
      z.push_back(centre + std::polar(rad, ang));
    }
    out.push_back(detail::unflatten(z, c));
  }
  return out;
}

/// Runs Newton from every start in parallel. Converged distinct solutions come first
/// (by residual, then lexicographic roots), followed by the failed starts.
inline std::vector<SolveResult> solve_conditions(const ConditionFn& fn, const Counts& c,
                                                 const std::vector<BetheRoots>& starts, const SolveOptions& opt) {
  std::vector<std::future<SolveResult>> jobs;
  for (const auto& s : starts)
    jobs.push_back(std::async(std::launch::async, [&fn, &c, &opt, z = detail::flatten(s)] {
      return detail::newton(fn, c, z, opt);
    }));
  std::vector<SolveResult> good, bad;
  for (auto& j : jobs) {
    SolveResult r = j.get();
    (r.converged ? good : bad).push_back(std::move(r));
  }
  auto order = [](const SolveResult& a, const SolveResult& b) {
    if (a.residual != b.residual) return a.residual < b.residual;
    return detail::lex_less(a.roots, b.roots);
  };
  std::stable_sort(good.begin(), good.end(), order);
  std::vector<SolveResult> out;
  for (auto& r : good) {
    bool dup = std::any_of(out.begin(), out.end(),
                           [&](const SolveResult& o) { return detail::same_roots(o.roots, r.roots, opt.dedup_tol); });
    if (!dup) out.push_back(std::move(r));
  }
  std::stable_sort(bad.begin(), bad.end(), order);
  for (auto& r : bad) out.push_back(std::move(r));
  return out;
}

inline std::vector<SolveResult> solve(const SolveProblem& problem) {
  const auto& c = problem.counts;
  const auto& opt = problem.options;
  if (opt.tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  if (problem.chain.spec.model() == Model::GL2 && (c.p != 0 || c.q != 0))
    throw std::invalid_argument("gl2 problems take only N roots");
  if (problem.chain.spec.model() == Model::GL3 && c.q != 0) throw std::invalid_argument("gl3 problems take N and P roots");
  if (c.total() == 0) {
    SolveResult trivial;
    trivial.converged = true;
    trivial.status = "converged";
    return {trivial};
  }
  std::vector<BetheRoots> starts = problem.guesses;
  for (const auto& g : starts)
    if (g.u.size() != c.n || g.v.size() != c.p || g.w.size() != c.q)
      throw std::invalid_argument("initial guess does not match the excitation counts");
  if (starts.size() < opt.starts) {
    auto extra = random_starts(problem.chain.spec, c, opt.starts - starts.size(), opt.seed, opt.start_radius);
    starts.insert(starts.end(), extra.begin(), extra.end());
  }
  const Chain& chain = problem.chain;
  ConditionFn fn = [&chain, &c](const std::vector<Complex>& z) {
    return bethe_conditions(chain, detail::unflatten(z, c));
  };
  return solve_conditions(fn, c, starts, opt);
}

// ---------------------------------------------------------------------------
// Verification against the dense spectrum

struct SampleCheck {
  Complex x;
  bool skipped = false;
  std::string reason;
  double eigen_residual = 0.0;
  Complex eigenvalue;
  Complex matched;
  double gap = 0.0;
  double overlap = 0.0;
};

struct VerifyReport {
  std::string verdict;  ///< "eigenvector", "not_eigenvector", "null_vector", "not_converged"
  std::vector<SampleCheck> samples;
  double max_eigen_residual = 0.0;
  double max_gap = 0.0;
  double min_overlap = 1.0;
};

/// Default complex sample points, kept off the real axis where chain poles live.
inline std::vector<Complex> default_samples(std::size_t count = 3) {
  const std::vector<Complex> pool{{0.31, 0.47}, {1.13, -0.29}, {-0.71, 0.83}, {2.3, 0.61}, {-1.9, -0.37}};
  std::vector<Complex> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[i % pool.size()] + Complex(0.0, 0.2 * static_cast<double>(i / pool.size())));
  return out;
}

namespace detail {

/// Fraction of ψ lying in the span of the eigenvectors whose eigenvalue is within `tol` of `value`.
inline double eigenspace_overlap(const Eigen::ComplexEigenSolver<Eigen::MatrixXcd>& es, const Complex& value,
                                 const Vector<Complex>& psi, double tol) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - value) <= tol) cols.push_back(i);
  if (cols.empty()) return 0.0;
  Eigen::MatrixXcd basis(es.eigenvectors().rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) basis.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cols[j]);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(basis);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(basis.rows(), basis.cols());
  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(psi.data(), static_cast<Eigen::Index>(psi.size()));
  return (q.adjoint() * v).norm() / v.norm();
}

}  // namespace detail

/// Checks H(x)ψ = E(x)ψ on the Bethe vector and matches E(x) against dense diagonalization.
inline VerifyReport verify_solution(const Chain& chain, const SolveResult& result, const std::vector<Complex>& samples,
                                    double eigen_tol = 1e-8, double gap_tol = 1e-7) {
  VerifyReport rep;
  if (!result.converged) {
    rep.verdict = "not_converged";
    return rep;
  }
  Vector<Complex> psi;
  try {
    psi = bethe_state(chain, result.roots);
  } catch (const ZeroVectorError&) {
    rep.verdict = "null_vector";
    return rep;
  }
  if (chain.spec.space_dim() > kMaxSpectrumDim) throw CapacityError("spectrum requires chain dimension <= 256");
  for (const auto& x : samples) {
    SampleCheck sc;
    sc.x = x;
    try {
      auto grid = chain.monodromy<Complex>(x);
      Operator<Complex> h = grid.transfer();
      sc.eigenvalue = bethe_eigenvalue(chain, x, result.roots);
      sc.eigen_residual = eigen_residual(h.apply(psi), psi, sc.eigenvalue);
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(to_dense(h));
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) - sc.eigenvalue) < best) {
          best = std::abs(es.eigenvalues()(i) - sc.eigenvalue);
          sc.matched = es.eigenvalues()(i);
        }
      sc.gap = best;
      sc.overlap = detail::eigenspace_overlap(es, sc.matched, psi, 1e-6);
    } catch (const PoleError& e) {
      sc.skipped = true;
      sc.reason = e.what();
    }
    if (!sc.skipped) {
      rep.max_eigen_residual = std::max(rep.max_eigen_residual, sc.eigen_residual);
      rep.max_gap = std::max(rep.max_gap, sc.gap);
      rep.min_overlap = std::min(rep.min_overlap, sc.overlap);
    }
    rep.samples.push_back(sc);
  }
  rep.verdict = rep.max_eigen_residual <= eigen_tol && rep.max_gap <= gap_tol ? "eigenvector" : "not_eigenvector";
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json roots_json(const RootSet<Complex>& rs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rs) a.push_back(to_string(r));
  return a;
}

inline nlohmann::json to_json(const SolveResult& r) {
  return {{"roots", {{"u", roots_json(r.roots.u)}, {"v", roots_json(r.roots.v)}, {"w", roots_json(r.roots.w)}}},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"condition", r.condition},
          {"status", r.status}};
}

inline nlohmann::json to_json(const VerifyReport& rep) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : rep.samples) {
    nlohmann::json j{{"x", to_string(s.x)}, {"skipped", s.skipped}};
    if (s.skipped) j["reason"] = s.reason;
    else {
      j["eigen_residual"] = s.eigen_residual;
      j["eigenvalue"] = to_string(s.eigenvalue);
      j["matched_eigenvalue"] = to_string(s.matched);
      j["gap"] = s.gap;
      j["overlap"] = s.overlap;
    }
    samples.push_back(j);
  }
  return {{"verdict", rep.verdict},
          {"max_eigen_residual", rep.max_eigen_residual},
          {"max_gap", rep.max_gap},
          {"min_overlap", rep.min_overlap},
          {"samples", samples}};
}

}  // namespace betheforge
