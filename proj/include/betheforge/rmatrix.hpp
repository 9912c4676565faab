#pragma once

#include "betheforge/operator.hpp"
#include "betheforge/scalar.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace betheforge {

// ---------------------------------------------------------------------------
// Index tables

/// sp(4) index (-2,-1,1,2) to basis slot (0,1,2,3).
inline std::size_t sp4_slot(int i) {
  switch (i) {
    case -2: return 0;
    case -1: return 1;
    case 1: return 2;
    case 2: return 3;
    default: throw std::out_of_range("sp4 index must be one of -2,-1,1,2");
  }
}

inline int sp4_index(std::size_t slot) {
  static constexpr std::array<int, 4> table{-2, -1, 1, 2};
  return table.at(slot);
}

inline int sign_of(int i) { return i > 0 ? 1 : -1; }

/// Block index a in {1,2} (either sign) to slot a-1 on a two-dimensional block leg.
inline std::size_t block_slot(int a) {
  if (a < -2 || a > 2 || a == 0) throw std::out_of_range("block index must be +-1 or +-2");
  return static_cast<std::size_t>((a > 0 ? a : -a) - 1);
}

/// Unit matrix E^a_b = |b><a| on a d-dimensional leg, given by slots.
template <class S>
Operator<S> unit_E(std::size_t a, std::size_t b, std::size_t d) {
  return Operator<S>::unit(d, b, a);
}

/// Dual unit F^a_b acting on covector coordinates: |a><b|.
template <class S>
Operator<S> unit_F(std::size_t a, std::size_t b, std::size_t d) {
  return Operator<S>::unit(d, a, b);
}

/// Swap P = sum E^i_k ⊗ E^k_i on d⊗d.
template <class S>
Operator<S> swap_op(std::size_t d) {
  Operator<S> p(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) p.add(i * d + j, j * d + i, S(1));
  return p;
}

/// K = sum_{i,k} E^i_k ⊗ E^i_k on d⊗d (the rank-one trace coupling).
template <class S>
Operator<S> trace_coupling(std::size_t d) {
  Operator<S> q(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) q.add(j * d + j, i * d + i, S(1));
  return q;
}

// ---------------------------------------------------------------------------
// R-matrix families

/// gl(n) R-matrix (1/f(x,y)) (I + g(x,y) P).
template <class S>
Operator<S> gl_r(std::size_t n, const S& x, const S& y) {
  S inv_f = checked_inverse<S>(f(x, y), "gl R-matrix prefactor");
  S gv = g(x, y);
  return (Operator<S>::identity(n * n) + swap_op<S>(n).scaled(gv)).scaled(inv_f);
}

/// Q = sum eps_i eps_k E^i_k ⊗ E^{-i}_{-k} on 4⊗4.
template <class S>
Operator<S> sp4_q() {
  Operator<S> q(16);
  for (int i : {-2, -1, 1, 2})
    for (int kk : {-2, -1, 1, 2}) {
      Operator<S> e = kron(unit_E<S>(sp4_slot(i), sp4_slot(kk), 4), unit_E<S>(sp4_slot(-i), sp4_slot(-kk), 4));
      q = q + e.scaled(S(sign_of(i) * sign_of(kk)));
    }
  return q;
}

/// sp(4) R-matrix (1/f) (I + g P - h Q).
template <class S>
Operator<S> sp4_r(const S& x, const S& y) {
  S inv_f = checked_inverse<S>(f(x, y), "sp4 R-matrix prefactor");
  S gv = g(x, y);
  S hv = h(x, y);
  return (Operator<S>::identity(16) + swap_op<S>(4).scaled(gv) - sp4_q<S>().scaled(hv)).scaled(inv_f);
}

/// gl(n) R-matrix times (x-y+1): (x-y) I + P, finite for every x, y.
template <class S>
Operator<S> gl_r_polynomial(std::size_t n, const S& x, const S& y) {
  return Operator<S>::identity(n * n).scaled(S(x - y)) + swap_op<S>(n);
}

/// sp(4) R-matrix times (x-y+1)(x-y+3): (x-y)(x-y+3) I + (x-y+3) P - (x-y) Q, finite for every x, y.
template <class S>
Operator<S> sp4_r_polynomial(const S& x, const S& y) {
  S d = x - y;
  S d3 = d + S(3);
  return Operator<S>::identity(16).scaled(S(d * d3)) + swap_op<S>(4).scaled(d3) - sp4_q<S>().scaled(d);
}

enum class Sign { Plus, Minus };

inline int sign_value(Sign s) { return s == Sign::Plus ? 1 : -1; }
inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }

/// Block R-matrices R^(e1,e2)(x,y) on the 2⊗2 block legs.
template <class S>
Operator<S> block_r(Sign e1, Sign e2, const S& x, const S& y) {
  if (e1 == e2) return gl_r<S>(2, x, y);
  S c = (e1 == Sign::Plus) ? k(x, y) : h(x, y);
  return Operator<S>::identity(4) - trace_coupling<S>(2).scaled(c);
}

/// Block R-matrices at coincident arguments, from their explicit summed forms.
template <class S>
Operator<S> block_r_coincident(Sign e1, Sign e2) {
  if (e1 == Sign::Plus && e2 == Sign::Minus) return Operator<S>::identity(4) + trace_coupling<S>(2);
  if (e1 == Sign::Minus && e2 == Sign::Minus) return swap_op<S>(2);
  throw std::invalid_argument("coincident block R-matrix defined only for (+,-) and (-,-)");
}

/// Sign-sector embedding sum of the four block R-matrices on 4⊗4.
template <class S>
Operator<S> tilde_r(const S& x, const S& y) {
  Operator<S> out(16);
  for (Sign s1 : {Sign::Plus, Sign::Minus})
    for (Sign s2 : {Sign::Plus, Sign::Minus}) {
      Operator<S> b = block_r<S>(s1, s2, x, y);
      for (std::size_t r = 0; r < 4; ++r)
        for (const auto& [c, v] : b.row(r)) {
          auto glob = [&](std::size_t blk, Sign s) {
            return sp4_slot(sign_value(s) * static_cast<int>(blk + 1));
          };
          std::size_t gr = glob(r / 2, s1) * 4 + glob(r % 2, s2);
          std::size_t gc = glob(c / 2, s1) * 4 + glob(c % 2, s2);
          out.add(gr, gc, v);
        }
    }
  return out;
}

/// Extracts the (s1,s2) sign sector of a 4⊗4 operator as a 2⊗2 block operator.
template <class S>
Operator<S> sign_sector(const Operator<S>& op, Sign s1, Sign s2) {
  auto glob = [](std::size_t blk, Sign s) { return sp4_slot(sign_value(s) * static_cast<int>(blk + 1)); };
  Operator<S> out(4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      S v = op.at(glob(r / 2, s1) * 4 + glob(r % 2, s2), glob(c / 2, s1) * 4 + glob(c % 2, s2));
      out.add(r, c, v);
    }
  return out;
}

/// Dual-leg matrix (R*)^(+,+)(x,y) on V*⊗V*.
template <class S>
Operator<S> dual_pp(const S& x, const S& y) {
  return gl_r<S>(2, x, y);
}

/// (R*)^(+,+) at coincident arguments: sum F^i_k ⊗ F^k_i.
template <class S>
Operator<S> dual_pp_coincident() {
  return swap_op<S>(2);
}

/// Hatted matrices R^(e,+)_{0,1*}(x,u) on V_e ⊗ V*.
template <class S>
Operator<S> hatted_r(Sign e, const S& x, const S& u) {
  if (e == Sign::Plus) {
    S inv_f = checked_inverse<S>(f(u, x), "hatted R-matrix prefactor");
    return (Operator<S>::identity(4) + trace_coupling<S>(2).scaled(g(u, x))).scaled(inv_f);
  }
  return Operator<S>::identity(4) - swap_op<S>(2).scaled(k(u, x));
}

/// Hatted matrices at x = u, from their explicit summed forms.
template <class S>
Operator<S> hatted_r_coincident(Sign e) {
  if (e == Sign::Plus) return trace_coupling<S>(2);
  return Operator<S>::identity(4) + swap_op<S>(2);
}

/// gl(n) Lax matrix for a dual-representation site: (1/f(z,x)) (I + g(z,x) sum E^a_b ⊗ F^b_a).
template <class S>
Operator<S> gl_dual_lax(std::size_t n, const S& x, const S& z) {
  S inv_f = checked_inverse<S>(f(z, x), "dual Lax prefactor");
  return (Operator<S>::identity(n * n) + trace_coupling<S>(n).scaled(g(z, x))).scaled(inv_f);
}

// ---------------------------------------------------------------------------
// Kinds and generic checks

enum class RKind { GL2, GL3, SP4, SP4Tilde };

inline std::size_t local_dim(RKind kind) {
  switch (kind) {
    case RKind::GL2: return 2;
    case RKind::GL3: return 3;
    default: return 4;
  }
}

inline std::string kind_name(RKind kind) {
  switch (kind) {
    case RKind::GL2: return "gl2";
    case RKind::GL3: return "gl3";
    case RKind::SP4: return "sp4";
    default: return "sp4tilde";
  }
}

inline RKind parse_kind(const std::string& s) {
  if (s == "gl2") return RKind::GL2;
  if (s == "gl3") return RKind::GL3;
  if (s == "sp4") return RKind::SP4;
  if (s == "sp4tilde" || s == "tilde") return RKind::SP4Tilde;
  throw std::invalid_argument("unknown R-matrix kind: " + s);
}

template <class S>
Operator<S> build_r(RKind kind, const S& x, const S& y) {
  switch (kind) {
    case RKind::GL2: return gl_r<S>(2, x, y);
    case RKind::GL3: return gl_r<S>(3, x, y);
    case RKind::SP4: return sp4_r<S>(x, y);
    default: return tilde_r<S>(x, y);
  }
}

/// Max-abs residual of R12(x,y) R13(x,z) R23(y,z) - R23(y,z) R13(x,z) R12(x,y).
template <class S>
double check_ybe(RKind kind, const S& x, const S& y, const S& z) {
  std::size_t d = local_dim(kind);
  Layout lay({d, d, d});
  Operator<S> r12 = embed(build_r<S>(kind, x, y), {0, 1}, lay);
  Operator<S> r13 = embed(build_r<S>(kind, x, z), {0, 2}, lay);
  Operator<S> r23 = embed(build_r<S>(kind, y, z), {1, 2}, lay);
  return (r12 * r13 * r23 - r23 * r13 * r12).max_abs();
}

/// Max-abs residual of R12(x,y) R21(y,x) - I.
template <class S>
double check_unitarity(RKind kind, const S& x, const S& y) {
  std::size_t d = local_dim(kind);
  Layout lay({d, d});
  Operator<S> r12 = build_r<S>(kind, x, y);
  Operator<S> r21 = embed(build_r<S>(kind, y, x), {1, 0}, lay);
  return (r12 * r21 - Operator<S>::identity(d * d)).max_abs();
}

}  // namespace betheforge
