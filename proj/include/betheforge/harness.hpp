#pragma once

#include "betheforge/chain.hpp"
#include "betheforge/nested_gl.hpp"
#include "betheforge/nested_sp4.hpp"
#include "betheforge/rmatrix.hpp"
#include "betheforge/scalar.hpp"
#include "betheforge/solver.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace betheforge {

/// Raised by a case that cannot run at this size.
struct SkipCase : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Status { Pass, Fail, Skip };

inline std::string status_name(Status s) {
  switch (s) {
    case Status::Pass:
      return "pass";
    case Status::Fail:
      return "fail";
    case Status::Skip:
      return "skip";
  }
  return "?";
}

/// Residual of one check plus an optional note explaining a failure.
struct Outcome {
  double residual = 0.0;
  std::string note;
};

/// A registered check. A bound of 0 means the residual must vanish exactly.
struct CaseDef {
  std::string id;
  std::string model;
  std::string sizes;
  std::string backend;
  std::string claim;
  double bound = 0.0;
  std::function<Outcome(SampleSource&)> run;
};

struct CheckCase {
  std::string id;
  std::string model;
  std::string sizes;
  std::string backend;
  std::string claim;
  std::uint64_t seed = 0;
  Status status = Status::Skip;
  double residual = 0.0;
  double bound = 0.0;
  double runtime_ms = 0.0;
  std::string note;
};

/// Largest total space dimension an exact-backend case may touch.
inline constexpr std::size_t kExactCapacity = 4096;

inline void require_capacity(std::size_t dim) {
  if (dim > kExactCapacity) throw SkipCase("space dimension " + std::to_string(dim) + " exceeds exact capacity 4096");
}

namespace detail {

/// FNV-1a, stable across platforms, used to derive a per-case seed.
inline std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline Chain sp4_chain(std::size_t length) { return Chain(ChainSpec::with_default_inhomogeneities(Model::SP4, length)); }

inline Chain gl_chain(Model m, std::size_t length, SiteKind sites = SiteKind::Fundamental) {
  return Chain(ChainSpec::with_default_inhomogeneities(m, length, sites));
}

/// Rational points pairwise clear of every pole offset used by the sp(4) formulas and of the chain sites.
inline std::vector<Rational> generic_points(SampleSource& src, std::size_t count, const ChainSpec& spec) {
  return distinct_rationals(src, count, {0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5}, spec.z());
}

inline double max_of(double a, double b) { return std::max(a, b); }

inline std::string model_tag(Model m) { return model_name(m); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Registry

inline std::vector<CaseDef> registry() {
  using detail::generic_points;
  std::vector<CaseDef> cases;
  auto add = [&](CaseDef c) { cases.push_back(std::move(c)); };

  // Scalar summation identities.
  for (std::size_t n = 0; n <= 6; ++n)
    add({"scalars.sum_identities.n" + std::to_string(n), "-", "|u|=" + std::to_string(n), "exact",
         "two summation identities over a root set, 50 random instances", 0.0, [n](SampleSource& src) {
           double r = 0.0;
           for (int t = 0; t < 50; ++t) {
             auto pts = distinct_rationals(src, n + 2, {0});
             RootSet<Rational> us(pts.begin(), pts.begin() + static_cast<long>(n));
             auto [a, b] = check_sum_identities<Rational>(us, pts[n], pts[n + 1]);
             r = std::max({r, a, b});
           }
           return Outcome{r, {}};
         }});
  add({"scalars.field_axioms", "-", "-", "exact", "additive and multiplicative inverses", 0.0, [](SampleSource& src) {
         double r = 0.0;
         for (int t = 0; t < 50; ++t) {
           Rational a = src.rational();
           r = std::max(r, ScalarTraits<Rational>::magnitude(Rational(a + (-a))));
           if (sgn(a) != 0) r = std::max(r, ScalarTraits<Rational>::magnitude(Rational(a * checked_inverse(a, "a") - 1)));
         }
         return Outcome{r, {}};
       }});

  // R-matrices.
  for (RKind kind : {RKind::GL2, RKind::GL3, RKind::SP4, RKind::SP4Tilde}) {
    add({"rmatrix.ybe." + kind_name(kind), kind_name(kind), "25 triples", "exact", "Yang-Baxter equation", 0.0,
         [kind](SampleSource& src) {
           double r = 0.0;
           for (int t = 0; t < 25; ++t) {
             auto p = distinct_rationals(src, 3, {0, 1, -1, 3, -3});
             r = std::max(r, check_ybe<Rational>(kind, p[0], p[1], p[2]));
           }
           return Outcome{r, {}};
         }});
    add({"rmatrix.unitarity." + kind_name(kind), kind_name(kind), "25 pairs", "exact", "R12(x,y) R21(y,x) = I", 0.0,
         [kind](SampleSource& src) {
           double r = 0.0;
           for (int t = 0; t < 25; ++t) {
             auto p = distinct_rationals(src, 2, {0, 1, -1, 3, -3});
             r = std::max(r, check_unitarity<Rational>(kind, p[0], p[1]));
           }
           return Outcome{r, {}};
         }});
  }
  add({"rmatrix.auxiliary_identities", "sp4", "5 instances", "exact",
       "coincident-argument and mixed Yang-Baxter identities of the block R-matrices", 0.0, [](SampleSource& src) {
         double r = 0.0;
         for (int t = 0; t < 5; ++t) {
           auto p = distinct_rationals(src, 4, {0, 1, -1, 2, -2, 3, -3});
           for (const auto& [name, v] : check_auxiliary_identities<Rational>(p[0], p[1], p[2], p[3])) r = std::max(r, v);
         }
         return Outcome{r, {}};
       }});

  // Chains.
  for (Model m : {Model::GL2, Model::GL3, Model::SP4})
    for (std::size_t len : {1, 2}) {
      std::string tag = model_name(m) + ".L" + std::to_string(len);
      add({"chain.rtt." + tag, model_name(m), "L=" + std::to_string(len), "exact", "RTT relation of the monodromy", 0.0,
           [m, len](SampleSource& src) {
             auto spec = ChainSpec::with_default_inhomogeneities(m, len);
             double r = 0.0;
             for (int t = 0; t < 3; ++t) {
               auto p = distinct_rationals(src, 2, {0, 1, -1, 3, -3}, spec.z());
               r = std::max(r, check_rtt<Rational>(spec, p[0], p[1]));
             }
             return Outcome{r, {}};
           }});
      add({"chain.commuting." + tag, model_name(m), "L=" + std::to_string(len), "exact", "[H(x), H(y)] = 0", 0.0,
           [m, len](SampleSource& src) {
             auto spec = ChainSpec::with_default_inhomogeneities(m, len);
             double r = 0.0;
             for (int t = 0; t < 10; ++t) {
               auto p = distinct_rationals(src, 2, {0, 1, -1, 3, -3}, spec.z());
               r = std::max(r, check_commuting<Rational>(spec, p[0], p[1]));
             }
             return Outcome{r, {}};
           }});
    }

  // gl(2).
  for (std::size_t n : {1, 2})
    add({"gl2.exchange.N" + std::to_string(n) + ".L2", "gl2", "N=" + std::to_string(n) + " L=2", "exact",
         "diagonal generators acting on a product of creation operators", 0.0, [n](SampleSource& src) {
           Chain ch = detail::gl_chain(Model::GL2, 2);
           double r = 0.0;
           for (int t = 0; t < 3; ++t) {
             auto p = generic_points(src, n + 1, ch.spec);
             auto [a, b] = check_gl2_exchange<Rational>(ch, p[n], RootSet<Rational>(p.begin(), p.begin() + static_cast<long>(n)));
             r = std::max({r, a, b});
           }
           return Outcome{r, {}};
         }});
  add({"gl2.symmetry.N2.L2", "gl2", "N=2 L=2", "exact", "Bethe vector invariant under root permutation", 0.0,
       [](SampleSource& src) {
         Chain ch = detail::gl_chain(Model::GL2, 2);
         auto p = generic_points(src, 2, ch.spec);
         return Outcome{max_abs(difference(gl2_vector<Rational>(ch, {p[0], p[1]}), gl2_vector<Rational>(ch, {p[1], p[0]}))), {}};
       }});
  add({"gl2.bethe.N1.L2", "gl2", "N=1 L=2", "float", "on-shell Bethe vector is an eigenvector of H(x)", 1e-9,
       [](SampleSource&) {
         SolveProblem prob{detail::gl_chain(Model::GL2, 2), {1, 0, 0}, {}, {}};
         auto res = solve(prob);
         if (res.empty() || !res.front().converged) return Outcome{1.0, "no converged root"};
         auto rep = verify_solution(prob.chain, res.front(), default_samples());
         return Outcome{std::max(rep.max_eigen_residual, rep.max_gap), rep.verdict};
       }});

  // gl(3).
  for (std::size_t m : {1, 2})
    add({"gl3.reduced_vacuum.M" + std::to_string(m) + ".L1", "gl3", "M=" + std::to_string(m) + " L=1", "exact",
         "reduced vacuum weights of the dual-dressed monodromy", 0.0, [m](SampleSource& src) {
           Chain ch = detail::gl_chain(Model::GL3, 1);
           double r = 0.0;
           for (int t = 0; t < 5; ++t) {
             auto p = generic_points(src, m + 1, ch.spec);
             r = std::max(r, check_gl3_vacuum<Rational>(ch, p[m], RootSet<Rational>(p.begin(), p.begin() + static_cast<long>(m))));
           }
           return Outcome{r, {}};
         }});
  add({"gl3.hatted_rtt.M1.L1", "gl3", "M=1 L=1", "exact", "RTT relation of the dual-dressed monodromy", 0.0,
       [](SampleSource& src) {
         Chain ch = detail::gl_chain(Model::GL3, 1);
         auto p = generic_points(src, 3, ch.spec);
         return Outcome{check_gl3_hatted_rtt<Rational>(ch, p[0], p[1], {p[2]}), {}};
       }});
  add({"gl3.bethe.M1.L2", "gl3", "M=1 u=0 L=2 dual sites", "float", "on-shell nested Bethe vector is an eigenvector of H(x)",
       1e-8, [](SampleSource&) {
         SolveProblem prob{detail::gl_chain(Model::GL3, 2, SiteKind::Dual), {0, 1, 0}, {}, {}};
         auto res = solve(prob);
         if (res.empty() || !res.front().converged) return Outcome{1.0, "no converged root"};
         auto rep = verify_solution(prob.chain, res.front(), default_samples());
         return Outcome{std::max(rep.max_eigen_residual, rep.max_gap), rep.verdict};
       }});
  add({"gl3.off_shell_control.M1.L2", "gl3", "M=1 L=2 dual sites", "float",
       "random off-shell roots are not eigenvectors (residual must exceed 1e-4)", 0.0, [](SampleSource& src) {
         Chain ch = detail::gl_chain(Model::GL3, 2, SiteKind::Dual);
         RootSet<Complex> v{src.complex()};
         auto rep = gl3_check_hatted_eigenvector<Complex>(ch, {}, v, default_samples());
         return Outcome{rep.eigen_residual > 1e-4 ? 0.0 : 1.0, "eigen residual " + std::to_string(rep.eigen_residual)};
       }});

  // sp(4): the subspace W0 and the block algebra.
  for (std::size_t len : {1, 2}) {
    std::string sz = "L=" + std::to_string(len);
    std::string tag = ".L" + std::to_string(len);
    add({"sp4.w0_annihilation" + tag, "sp4", sz, "exact", "T^{-i}_k annihilates W0", 0.0, [len](SampleSource& src) {
           Chain ch = detail::sp4_chain(len);
           auto w0 = w0_spanning_set<Rational>(ch);
           double r = 0.0;
           for (const auto& x : generic_points(src, 3, ch.spec)) r = std::max(r, check_w0_annihilation<Rational>(ch, x, w0));
           return Outcome{r, {}};
         }});
    add({"sp4.block_rtt" + tag, "sp4", sz, "exact", "four block RTT relations on W0", 0.0, [len](SampleSource& src) {
           Chain ch = detail::sp4_chain(len);
           auto p = generic_points(src, 2, ch.spec);
           return Outcome{check_block_rtt<Rational>(ch, p[0], p[1], w0_spanning_set<Rational>(ch)), {}};
         }});
    add({"sp4.tilde_rtt" + tag, "sp4", sz, "exact", "RTT relation of the tilde algebra on W0", 0.0,
         [len](SampleSource& src) {
           Chain ch = detail::sp4_chain(len);
           auto p = generic_points(src, 2, ch.spec);
           return Outcome{check_tilde_rtt<Rational>(ch, p[0], p[1], w0_spanning_set<Rational>(ch)), {}};
         }});
    add({"sp4.tilde_commutation" + tag, "sp4", sz, "exact", "commuting pairs of tilde generators on W0", 0.0,
         [len](SampleSource& src) {
           Chain ch = detail::sp4_chain(len);
           auto p = generic_points(src, 2, ch.spec);
           return Outcome{check_tilde_commutation<Rational>(ch, p[0], p[1], w0_spanning_set<Rational>(ch)), {}};
         }});
  }

  // sp(4): B-operators and hatted monodromies.
  add({"sp4.b_exchange.L1", "sp4", "N=2 L=1", "exact", "exchange of two B-operators, generic and coincident", 0.0,
       [](SampleSource& src) {
         Chain ch = detail::sp4_chain(1);
         auto p = generic_points(src, 2, ch.spec);
         auto [a, b] = check_b_exchange<Rational>(ch, p[0], p[1], w0_spanning_set<Rational>(ch));
         return Outcome{std::max(a, b), {}};
       }});
  for (Sign e : {Sign::Plus, Sign::Minus})
    for (std::size_t n : {1, 2}) {
      std::string es = e == Sign::Plus ? "plus" : "minus";
      add({"sp4.b_action." + es + ".N" + std::to_string(n) + ".L1", "sp4", "N=" + std::to_string(n) + " L=1", "exact",
           "block monodromy acting on a product of B-operators", 0.0, [e, n](SampleSource& src) {
             Chain ch = detail::sp4_chain(1);
             auto p = generic_points(src, n + 1, ch.spec);
             RootSet<Rational> us(p.begin(), p.begin() + static_cast<long>(n));
             return Outcome{check_b_action<Rational>(ch, e, p[n], us, w0_spanning_set<Rational>(ch)), {}};
           }});
    }
  for (std::size_t n : {1, 2})
    for (Sign e0 : {Sign::Plus, Sign::Minus})
      for (Sign e1 : {Sign::Plus, Sign::Minus}) {
        std::string pair{sign_char(e0), sign_char(e1)};
        std::string name = std::string(e0 == Sign::Plus ? "p" : "m") + (e1 == Sign::Plus ? "p" : "m");
        add({"sp4.hatted_rtt." + name + ".N" + std::to_string(n) + ".L1", "sp4", "N=" + std::to_string(n) + " L=1",
             "exact", "RTT relation of hatted monodromies with signs " + pair, 0.0, [e0, e1, n](SampleSource& src) {
               Chain ch = detail::sp4_chain(1);
               require_capacity(4 * detail::pow2(2 * n) * ch.spec.space_dim());
               auto p = generic_points(src, n + 2, ch.spec);
               RootSet<Rational> us(p.begin() + 2, p.end());
               return Outcome{check_hatted_rtt<Rational>(ch, e0, e1, p[0], p[1], us, w0_spanning_set<Rational>(ch)), {}};
             }});
      }
  for (std::size_t n : {1, 2, 3})
    add({"sp4.reduced_vacuum.N" + std::to_string(n) + ".L1", "sp4", "N=" + std::to_string(n) + " L=1", "exact",
         "six reduced vacuum relations with weights mu, 10 random instances", 0.0, [n](SampleSource& src) {
           Chain ch = detail::sp4_chain(1);
           double r = 0.0;
           for (int t = 0; t < 10; ++t) {
             auto p = generic_points(src, n + 1, ch.spec);
             r = std::max(r, check_reduced_vacuum<Rational>(ch, p[n], RootSet<Rational>(p.begin(), p.begin() + static_cast<long>(n))));
           }
           return Outcome{r, {}};
         }});

  // sp(4): the tilde-algebra ansatz.
  for (std::size_t pc : {1, 2})
    for (std::size_t qc : {1, 2}) {
      std::string sz = "P=" + std::to_string(pc) + " Q=" + std::to_string(qc);
      std::string tag = ".P" + std::to_string(pc) + "Q" + std::to_string(qc) + ".N1.L1";
      add({"sp4.tilde_exchange" + tag, "sp4", sz + " N=1 L=1", "exact",
           "diagonal tilde generators exchanged with products of creators", 0.0, [pc, qc](SampleSource& src) {
             Chain ch = detail::sp4_chain(1);
             auto p = generic_points(src, 2 + pc + qc, ch.spec);
             RootSet<Rational> v(p.begin() + 2, p.begin() + 2 + static_cast<long>(pc));
             RootSet<Rational> w(p.begin() + 2 + static_cast<long>(pc), p.end());
             return Outcome{check_tilde_exchange<Rational>(ch, {p[0]}, p[1], v, w, w0_spanning_set<Rational>(ch)), {}};
           }});
      add({"sp4.tilde_action" + tag, "sp4", sz + " N=1 L=1", "exact",
           "off-shell action of diagonal tilde generators on the tilde Bethe vector", 0.0, [pc, qc](SampleSource& src) {
             Chain ch = detail::sp4_chain(1);
             auto p = generic_points(src, 2 + pc + qc, ch.spec);
             RootSet<Rational> v(p.begin() + 2, p.begin() + 2 + static_cast<long>(pc));
             RootSet<Rational> w(p.begin() + 2 + static_cast<long>(pc), p.end());
             return Outcome{check_tilde_action<Rational>(ch, {p[0]}, p[1], v, w), {}};
           }});
    }
  add({"sp4.tilde_eigenvector.L2", "sp4", "N=1 P=1 Q=1 L=2", "float",
       "on-shell tilde conditions make the hatted vector a common eigenvector of both hatted transfer operators", 1e-8,
       [](SampleSource&) {
         Chain ch = detail::sp4_chain(2);
         RootSet<Complex> u{Complex(0.37, 0.21)};
         Counts c{0, 1, 1};
         ConditionFn fn = [&](const std::vector<Complex>& z) {
           auto r = detail::unflatten(z, c);
           auto t = sp4_tilde_residuals<Complex>(ch, Sp4Config<Complex>{u, r.v, r.w});
           t.v.insert(t.v.end(), t.w.begin(), t.w.end());
           return t.v;
         };
         auto res = solve_conditions(fn, c, random_starts(ch.spec, c, 20, 7), SolveOptions{});
         if (res.empty() || !res.front().converged) return Outcome{1.0, "no converged tilde root"};
         Sp4Config<Complex> cfg{u, res.front().roots.v, res.front().roots.w};
         return Outcome{std::max(sp4_hatted_eigen_residual<Complex>(ch, cfg, default_samples(), true),
                                 sp4_hatted_eigen_residual<Complex>(ch, cfg, default_samples(), false)),
                        {}};
       }});
  add({"sp4.outer_conditions.L2", "sp4", "N=1 P=1 Q=1 L=2", "exact",
       "outer condition in regular form equals twice the u-family condition", 0.0, [](SampleSource& src) {
         Chain ch = detail::sp4_chain(2);
         double r = 0.0;
         for (int t = 0; t < 5; ++t) {
           auto p = generic_points(src, 4, ch.spec);
           Sp4Config<Rational> cfg{{p[0], p[1]}, {p[2]}, {p[3]}};
           auto outer = sp4_outer_residuals<Rational>(ch, cfg);
           auto fam = sp4_residuals<Rational>(ch, cfg).u;
           for (std::size_t k = 0; k < outer.size(); ++k)
             r = std::max({r, ScalarTraits<Rational>::magnitude(Rational(outer[k].lhs - 2 * fam[k].lhs)),
                           ScalarTraits<Rational>::magnitude(Rational(outer[k].rhs - 2 * fam[k].rhs))});
           Rational x = p[0] + Rational(1, 3);
           auto [ep, em] = sp4_hatted_eigenvalues<Rational>(ch, x, cfg);
           Rational e = F_left(cfg.u, x) * ep + F_right(x, cfg.u) * em;
           r = std::max(r, ScalarTraits<Rational>::magnitude(Rational(e - sp4_eigenvalue<Rational>(ch, x, cfg))));
         }
         return Outcome{r, {}};
       }});
  add({"sp4.pole_cancellation", "sp4", "N=2 L=1", "exact",
       "the hatted eigenvalue is never evaluated at a root of u; doing so raises a pole error", 0.0,
       [](SampleSource& src) {
         Chain ch = detail::sp4_chain(1);
         auto p = generic_points(src, 2, ch.spec);
         try {
           sp4_hatted_eigenvalues<Rational>(ch, p[0], Sp4Config<Rational>{{p[0], p[1]}, {}, {}});
         } catch (const PoleError&) {
           return Outcome{0.0, {}};
         }
         return Outcome{1.0, "no pole error raised"};
       }});
  add({"sp4.symmetry.N1P2Q0.L2", "sp4", "N=1 P=2 L=2", "exact", "Bethe vector invariant under permutation of v", 0.0,
       [](SampleSource& src) {
         Chain ch = detail::sp4_chain(2);
         auto p = generic_points(src, 3, ch.spec);
         auto a = sp4_pair<Rational>(ch, natural_order<Rational>({p[0]}), sp4_phi<Rational>(ch, {{p[0]}, {p[1], p[2]}, {}}));
         auto b = sp4_pair<Rational>(ch, natural_order<Rational>({p[0]}), sp4_phi<Rational>(ch, {{p[0]}, {p[2], p[1]}, {}}));
         return Outcome{max_abs(difference(a, b)), {}};
       }});
  add({"sp4.symmetry.N1P0Q2.L2", "sp4", "N=1 Q=2 L=2", "exact", "Bethe vector invariant under permutation of w", 0.0,
       [](SampleSource& src) {
         Chain ch = detail::sp4_chain(2);
         auto p = generic_points(src, 3, ch.spec);
         auto a = sp4_pair<Rational>(ch, natural_order<Rational>({p[0]}), sp4_phi<Rational>(ch, {{p[0]}, {}, {p[1], p[2]}}));
         auto b = sp4_pair<Rational>(ch, natural_order<Rational>({p[0]}), sp4_phi<Rational>(ch, {{p[0]}, {}, {p[2], p[1]}}));
         return Outcome{max_abs(difference(a, b)), {}};
       }});

  // sp(4): end to end.
  add({"sp4.bethe.N1P0Q0.L1", "sp4", "N=1 L=1", "float", "on-shell final Bethe vector is an eigenvector of H(x)", 1e-8,
       [](SampleSource&) {
         SolveProblem prob{detail::sp4_chain(1), {1, 0, 0}, {}, {}};
         auto res = solve(prob);
         if (res.empty() || !res.front().converged) return Outcome{1.0, "no converged root"};
         auto rep = verify_solution(prob.chain, res.front(), default_samples());
         if (rep.verdict == "null_vector") return Outcome{1.0, "on-shell but null vector"};
         return Outcome{std::max(rep.max_eigen_residual, rep.max_gap), rep.verdict};
       }});
  add({"sp4.bethe.N1P1Q1.L2", "sp4", "N=1 P=1 Q=1 L=2", "float",
       "on-shell final Bethe vector is an eigenvector of H(x)", 1e-8, [](SampleSource&) {
         SolveProblem prob{detail::sp4_chain(2), {1, 1, 1},
                           {BetheRoots{{Complex(-1.26, 0.01)}, {Complex(-0.77, 0.0)}, {Complex(-1.73, 0.01)}}}, {}};
         prob.options.starts = 1;
         auto res = solve(prob);
         if (res.empty() || !res.front().converged) return Outcome{1.0, "no converged root"};
         auto rep = verify_solution(prob.chain, res.front(), default_samples());
         return Outcome{std::max(rep.max_eigen_residual, rep.max_gap), rep.verdict};
       }});
  return cases;
}

// ---------------------------------------------------------------------------
// Running and reporting

inline bool glob_match(const std::string& pattern, const std::string& id) {
  return fnmatch(pattern.c_str(), id.c_str(), 0) == 0;
}

inline CheckCase run_case(const CaseDef& def, std::uint64_t seed) {
  CheckCase c;
  c.id = def.id;
  c.model = def.model;
  c.sizes = def.sizes;
  c.backend = def.backend;
  c.claim = def.claim;
  c.seed = seed ^ detail::stable_hash(def.id);
  c.bound = def.bound;
  SampleSource src(c.seed);
  auto t0 = std::chrono::steady_clock::now();
  try {
    Outcome o = def.run(src);
    c.residual = o.residual;
    bool ok = def.bound == 0.0 ? o.residual == 0.0 : o.residual <= def.bound;
    c.status = ok ? Status::Pass : Status::Fail;
    c.note = o.note;
  } catch (const SkipCase& e) {
    c.status = Status::Skip;
    c.note = e.what();
  } catch (const CapacityError& e) {
    c.status = Status::Skip;
    c.note = e.what();
  } catch (const std::exception& e) {
    c.status = Status::Fail;
    c.residual = std::numeric_limits<double>::infinity();
    c.note = e.what();
  }
  c.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

/// Runs every case whose id matches the glob, in a thread pool; order follows the registry.
inline std::vector<CheckCase> run_suite(const std::string& filter, std::uint64_t seed,
                                        const std::vector<CaseDef>& defs = registry()) {
  std::vector<const CaseDef*> selected;
  for (const auto& d : defs)
    if (glob_match(filter, d.id)) selected.push_back(&d);
  std::vector<CheckCase> out(selected.size());
  std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, selected.size()); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < selected.size(); i = next++) out[i] = run_case(*selected[i], seed);
    });
  for (auto& t : pool) t.join();
  return out;
}

/// Failing cases first, then skips, then passes; registry order within each group.
inline std::vector<CheckCase> report_order(std::vector<CheckCase> cases) {
  auto rank = [](Status s) { return s == Status::Fail ? 0 : s == Status::Skip ? 1 : 2; };
  std::stable_sort(cases.begin(), cases.end(),
                   [&](const CheckCase& a, const CheckCase& b) { return rank(a.status) < rank(b.status); });
  return cases;
}

/// 0 when every case passes or skips, 1 on any failure, 2 when nothing matched.
inline int exit_code(const std::vector<CheckCase>& cases) {
  if (cases.empty()) return 2;
  for (const auto& c : cases)
    if (c.status == Status::Fail) return 1;
  return 0;
}

inline nlohmann::json report_json(const std::vector<CheckCase>& cases, const std::string& filter, std::uint64_t seed) {
  nlohmann::json arr = nlohmann::json::array();
  std::size_t pass = 0, fail = 0, skip = 0;
  for (const auto& c : report_order(cases)) {
    (c.status == Status::Pass ? pass : c.status == Status::Fail ? fail : skip)++;
    nlohmann::json j{{"id", c.id},         {"model", c.model},   {"sizes", c.sizes},
                     {"backend", c.backend}, {"claim", c.claim},   {"seed", c.seed},
                     {"status", status_name(c.status)}, {"residual", c.residual}, {"bound", c.bound},
                     {"runtime_ms", c.runtime_ms}};
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(j);
  }
  return {{"schema", 1},
          {"seed", seed},
          {"filter", filter},
          {"summary", {{"pass", pass}, {"fail", fail}, {"skip", skip}}},
          {"cases", arr}};
}

inline std::string report_table(const std::vector<CheckCase>& cases) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "status" << "  " << std::setw(40) << "id" << "  " << std::setw(12) << "residual"
     << "  " << std::setw(10) << "bound" << "  note\n";
  for (const auto& c : report_order(cases)) {
    std::ostringstream res, bnd;
    res << std::scientific << std::setprecision(2) << c.residual;
    bnd << std::scientific << std::setprecision(0) << c.bound;
    os << std::left << std::setw(6) << status_name(c.status) << "  " << std::setw(40) << c.id << "  " << std::setw(12)
       << res.str() << "  " << std::setw(10) << (c.bound == 0.0 ? std::string("exact") : bnd.str()) << "  " << c.note
       << "\n";
  }
  return os.str();
}

}  // namespace betheforge
