#pragma once

#include "betheforge/bethe.hpp"
#include "betheforge/chain.hpp"
#include "betheforge/operator.hpp"
#include "betheforge/rmatrix.hpp"

#include <stdexcept>
#include <vector>

namespace betheforge {

namespace detail {

inline void require_gl(const Chain& chain, Model model) {
  if (chain.spec.model() != model) throw std::invalid_argument("chain model mismatch for this ansatz");
  if (chain.vacuum.convention != Triangularity::Lower)
    throw std::invalid_argument("gl ansatz requires a vacuum annihilated by T^i_k with i>k");
}

template <class S>
void require_nonzero(const Vector<S>& v) {
  if (is_null(v)) throw ZeroVectorError("Bethe vector vanishes");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// gl(2)

/// T^1_2(u_1) ... T^1_2(u_N) ω.
template <class S>
Vector<S> gl2_vector(const Chain& chain, const RootSet<S>& us) {
  detail::require_gl(chain, Model::GL2);
  Vector<S> v = chain.omega<S>();
  for (std::size_t j = us.size(); j-- > 0;) v = chain.monodromy<S>(us[j]).entry(0, 1).apply(v);
  detail::require_nonzero(v);
  return v;
}

/// E(x) = λ1(x) F(u,x) + λ2(x) F(x,u).
template <class S>
S gl2_eigenvalue(const Chain& chain, const S& x, const RootSet<S>& us) {
  auto lam = chain.lambda<S>(x);
  return S(lam[0] * F_left(us, x) + lam[1] * F_right(x, us));
}

/// λ1(u_k) F(u_k^,u_k) = λ2(u_k) F(u_k,u_k^).
template <class S>
std::vector<Residual<S>> gl2_residuals(const Chain& chain, const RootSet<S>& us) {
  std::vector<Residual<S>> out;
  for (std::size_t k = 0; k < us.size(); ++k) {
    auto lam = chain.lambda<S>(us[k]);
    RootSet<S> rest = without(us, k);
    out.push_back(make_residual<S>(S(lam[0] * F_left(rest, us[k])), S(lam[1] * F_right(us[k], rest))));
  }
  return out;
}

/// Residuals of both creation-operator exchange relations for T^1_1 and T^2_2,
/// as operator identities on the chain space.
template <class S>
std::pair<double, double> check_gl2_exchange(const Chain& chain, const S& x, const RootSet<S>& us) {
  detail::require_gl(chain, Model::GL2);
  auto grid_x = chain.monodromy<S>(x);
  auto create = [&](const RootSet<S>& roots) {
    Operator<S> p = Operator<S>::identity(chain.spec.space_dim());
    for (const auto& u : roots) p = p * chain.monodromy<S>(u).entry(0, 1);
    return p;
  };
  Operator<S> b = create(us);
  Operator<S> lhs1 = grid_x.entry(0, 0) * b;
  Operator<S> lhs2 = grid_x.entry(1, 1) * b;
  Operator<S> rhs1 = (b * grid_x.entry(0, 0)).scaled(F_left(us, x));
  Operator<S> rhs2 = (b * grid_x.entry(1, 1)).scaled(F_right(x, us));
  for (std::size_t k = 0; k < us.size(); ++k) {
    RootSet<S> rest = without(us, k);
    auto grid_u = chain.monodromy<S>(us[k]);
    Operator<S> bk = create(with(rest, x));
    rhs1 = rhs1 - (bk * grid_u.entry(0, 0)).scaled(S(g(us[k], x) * F_left(rest, us[k])));
    rhs2 = rhs2 - (bk * grid_u.entry(1, 1)).scaled(S(g(x, us[k]) * F_right(us[k], rest)));
  }
  return {(lhs1 - rhs1).max_abs(), (lhs2 - rhs2).max_abs()};
}

// ---------------------------------------------------------------------------
// gl(3)

/// The upper-left 2×2 part T~(x) of the gl(3) monodromy as an operator on [aux 2][chain].
template <class S>
Operator<S> gl3_reduced_monodromy(const MonodromyGrid<S>& grid) {
  const std::size_t w = grid.space_dim();
  Operator<S> t(2 * w);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& e = grid.entry(i, k);
      for (std::size_t r = 0; r < w; ++r)
        for (const auto& [c, v] : e.row(r)) t.add(i * w + r, k * w + c, v);
    }
  return t;
}

/// Leg positions of a hatted gl(3) monodromy inside a caller-chosen layout.
struct Gl3HattedLegs {
  std::size_t aux;
  std::size_t first_dual;
  std::size_t chain;
};

/// T^_0(x;v) = R^_{0,1*}(x,v_1) ... R^_{0,M*}(x,v_M) T~_0(x), lifted into `layout`.
template <class S>
OpChain<S> gl3_hatted_chain(const Chain& chain, const S& x, const RootSet<S>& vs, const Layout& layout,
                            const Gl3HattedLegs& legs) {
  OpChain<S> out(layout.total());
  for (std::size_t j = 0; j < vs.size(); ++j)
    out.push_right(embed(hatted_r<S>(Sign::Plus, x, vs[j]), {legs.aux, legs.first_dual + j}, layout));
  out.push_right(embed(gl3_reduced_monodromy(chain.monodromy<S>(x)), {legs.aux, legs.chain}, layout));
  return out;
}

/// Hatted gl(3) monodromy on [aux][V*^M][chain] with grid-entry access.
template <class S>
class Gl3Hatted {
 public:
  Gl3Hatted(const Chain& chain, const S& x, const RootSet<S>& vs) : m_(vs.size()), w_(chain.spec.space_dim()) {
    detail::require_gl(chain, Model::GL3);
    std::vector<std::size_t> dims{2};
    for (std::size_t j = 0; j < m_; ++j) dims.push_back(2);
    dims.push_back(w_);
    layout_ = Layout(dims);
    op_ = gl3_hatted_chain<S>(chain, x, vs, layout_, {0, 1, m_ + 1});
  }

  /// T^i_k(x;v) applied to a vector on [V*^M][chain]; i, k are slots 0,1.
  Vector<S> apply(std::size_t i, std::size_t k, const Vector<S>& v) const {
    return apply_grid_entry<S>(op_, 2, i, k, v);
  }

  std::size_t space_dim() const { return layout_.total() / 2; }

 private:
  std::size_t m_;
  std::size_t w_;
  Layout layout_;
  OpChain<S> op_;
};

/// Ω^ = f^2 ⊗ ... ⊗ f^2 ⊗ ω on [V*^M][chain].
template <class S>
Vector<S> gl3_vacuum(const Chain& chain, std::size_t m) {
  Vector<S> v = chain.omega<S>();
  for (std::size_t j = 0; j < m; ++j) v = tensor(basis_vector<S>(2, 1), v);
  return v;
}

/// μ1(x;v) = λ1(x)/F(v,x), μ2(x;v) = λ2(x).
template <class S>
std::pair<S, S> gl3_mu(const Chain& chain, const S& x, const RootSet<S>& vs) {
  auto lam = chain.lambda<S>(x);
  return {S(lam[0] * checked_inverse<S>(F_left(vs, x), "mu1")), lam[1]};
}

/// Φ(u;v) = T^1_2(u_1;v) ... T^1_2(u_N;v) Ω^.
template <class S>
Vector<S> gl3_phi(const Chain& chain, const RootSet<S>& us, const RootSet<S>& vs) {
  Vector<S> phi = gl3_vacuum<S>(chain, vs.size());
  for (std::size_t j = us.size(); j-- > 0;) phi = Gl3Hatted<S>(chain, us[j], vs).apply(0, 1, phi);
  return phi;
}

/// <b(v), Φ> = sum_a T^{a_1}_3(v_1) ... T^{a_M}_3(v_M) Φ_a.
template <class S>
Vector<S> gl3_pair(const Chain& chain, const RootSet<S>& vs, const Vector<S>& phi) {
  const std::size_t m = vs.size();
  const std::size_t w = chain.spec.space_dim();
  std::vector<MonodromyGrid<S>> grids;
  for (const auto& v : vs) grids.push_back(chain.monodromy<S>(v));
  Vector<S> out(w, S(0));
  const std::size_t combos = std::size_t{1} << m;
  for (std::size_t a = 0; a < combos; ++a) {
    std::size_t comp = 0;
    for (std::size_t j = 0; j < m; ++j) comp = comp * 2 + ((a >> (m - 1 - j)) & 1U);
    Vector<S> vec = block_of(phi, comp, w);
    for (std::size_t j = m; j-- > 0;) vec = grids[j].entry((a >> (m - 1 - j)) & 1U, 2).apply(vec);
    for (std::size_t r = 0; r < w; ++r) out[r] += vec[r];
  }
  return out;
}

template <class S>
Vector<S> gl3_vector(const Chain& chain, const RootSet<S>& us, const RootSet<S>& vs) {
  detail::require_gl(chain, Model::GL3);
  Vector<S> v = gl3_pair<S>(chain, vs, gl3_phi<S>(chain, us, vs));
  detail::require_nonzero(v);
  return v;
}

/// E(x) = λ1 F(u,x) + λ2 F(x,u) F(v,x) + λ3 F(x,v).
template <class S>
S gl3_eigenvalue(const Chain& chain, const S& x, const RootSet<S>& us, const RootSet<S>& vs) {
  auto lam = chain.lambda<S>(x);
  return S(lam[0] * F_left(us, x) + lam[1] * F_right(x, us) * F_left(vs, x) + lam[2] * F_right(x, vs));
}

/// E^(x;u;v) = λ1 F(u,x)/F(v,x) + λ2 F(x,u), regular at x in v.
template <class S>
S gl3_hatted_eigenvalue(const Chain& chain, const S& x, const RootSet<S>& us, const RootSet<S>& vs) {
  auto lam = chain.lambda<S>(x);
  return S(lam[0] * F_left(us, x) * F_left_inv(vs, x) + lam[1] * F_right(x, us));
}

/// Both Bethe families: family u then family v.
template <class S>
std::pair<std::vector<Residual<S>>, std::vector<Residual<S>>> gl3_residuals(const Chain& chain, const RootSet<S>& us,
                                                                           const RootSet<S>& vs) {
  std::vector<Residual<S>> fu, fv;
  for (std::size_t k = 0; k < us.size(); ++k) {
    auto lam = chain.lambda<S>(us[k]);
    RootSet<S> rest = without(us, k);
    fu.push_back(make_residual<S>(S(lam[0] * F_left(rest, us[k])),
                                  S(lam[1] * F_left(vs, us[k]) * F_right(us[k], rest))));
  }
  for (std::size_t k = 0; k < vs.size(); ++k) {
    auto lam = chain.lambda<S>(vs[k]);
    RootSet<S> rest = without(vs, k);
    fv.push_back(make_residual<S>(S(lam[2] * F_right(vs[k], rest)),
                                  S(lam[1] * F_left(rest, vs[k]) * F_right(vs[k], us))));
  }
  return {fu, fv};
}

/// Residuals of the hatted vacuum relations: T^2_1 Ω^ = 0, T^1_1 Ω^ = μ1 Ω^, T^2_2 Ω^ = μ2 Ω^.
template <class S>
double check_gl3_vacuum(const Chain& chain, const S& x, const RootSet<S>& vs) {
  Gl3Hatted<S> t(chain, x, vs);
  Vector<S> om = gl3_vacuum<S>(chain, vs.size());
  auto [mu1, mu2] = gl3_mu<S>(chain, x, vs);
  double r = max_abs(t.apply(1, 0, om));
  r = std::max(r, max_abs(difference(t.apply(0, 0, om), scaled(om, mu1))));
  r = std::max(r, max_abs(difference(t.apply(1, 1, om), scaled(om, mu2))));
  return r;
}

/// R_{0,0'}(x,y) T^_0(x;v) T^_0'(y;v) - T^_0'(y;v) T^_0(x;v) R_{0,0'}(x,y) on the whole hatted space.
template <class S>
double check_gl3_hatted_rtt(const Chain& chain, const S& x, const S& y, const RootSet<S>& vs) {
  std::vector<std::size_t> dims{2, 2};
  for (std::size_t j = 0; j < vs.size(); ++j) dims.push_back(2);
  dims.push_back(chain.spec.space_dim());
  Layout lay(dims);
  auto tx = gl3_hatted_chain<S>(chain, x, vs, lay, {0, 2, vs.size() + 2}).product();
  auto ty = gl3_hatted_chain<S>(chain, y, vs, lay, {1, 2, vs.size() + 2}).product();
  auto r = embed(gl_r<S>(2, x, y), {0, 1}, lay);
  return (r * tx * ty - ty * tx * r).max_abs();
}

/// Residuals of the two-step check, one per stage.
struct HattedEigenReport {
  double hatted_residual = 0.0;
  double condition_residual = 0.0;
  double eigen_residual = 0.0;
};

template <class S>
HattedEigenReport gl3_check_hatted_eigenvector(const Chain& chain, const RootSet<S>& us, const RootSet<S>& vs,
                                                 const std::vector<S>& samples) {
  HattedEigenReport rep;
  Vector<S> phi = gl3_phi<S>(chain, us, vs);
  double nphi = std::max(norm2(phi), 1e-300);
  for (const auto& x : samples) {
    Gl3Hatted<S> t(chain, x, vs);
    Vector<S> hphi = t.apply(0, 0, phi);
    Vector<S> h2 = t.apply(1, 1, phi);
    for (std::size_t i = 0; i < hphi.size(); ++i) hphi[i] += h2[i];
    S e = gl3_hatted_eigenvalue<S>(chain, x, us, vs);
    rep.hatted_residual = std::max(rep.hatted_residual, norm2(difference(hphi, scaled(phi, e))) / nphi);
  }
  for (std::size_t k = 0; k < vs.size(); ++k) {
    auto lam = chain.lambda<S>(vs[k]);
    RootSet<S> rest = without(vs, k);
    S lhs = lam[2] * F_right(vs[k], rest);
    S rhs = gl3_hatted_eigenvalue<S>(chain, vs[k], us, vs) * F_left(rest, vs[k]);
    rep.condition_residual = std::max(rep.condition_residual, make_residual<S>(lhs, rhs).relative());
  }
  Vector<S> psi = gl3_pair<S>(chain, vs, phi);
  detail::require_nonzero(psi);
  double npsi = norm2(psi);
  for (const auto& x : samples) {
    Vector<S> hpsi = chain.monodromy<S>(x).transfer().apply(psi);
    auto lam = chain.lambda<S>(x);
    S e = S(lam[2] * F_right(x, vs) + gl3_hatted_eigenvalue<S>(chain, x, us, vs) * F_left(vs, x));
    rep.eigen_residual = std::max(rep.eigen_residual, norm2(difference(hpsi, scaled(psi, e))) / npsi);
  }
  return rep;
}

}  // namespace betheforge
