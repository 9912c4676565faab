#pragma once

#include "betheforge/scalar.hpp"

#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace betheforge {

template <class S>
using Vector = std::vector<S>;

/// Square operator stored row-wise with sorted column indices and no stored zeros.
template <class S>
class Operator {
 public:
  using Entry = std::pair<std::size_t, S>;

  Operator() = default;
  explicit Operator(std::size_t n) : rows_(n) {}

  static Operator identity(std::size_t n) {
    Operator op(n);
    for (std::size_t i = 0; i < n; ++i) op.rows_[i].push_back({i, S(1)});
    return op;
  }

  /// Single unit entry at (row, col).
  static Operator unit(std::size_t n, std::size_t row, std::size_t col) {
    Operator op(n);
    op.rows_[row].push_back({col, S(1)});
    return op;
  }

  std::size_t dim() const { return rows_.size(); }
  const std::vector<Entry>& row(std::size_t i) const { return rows_[i]; }

  S at(std::size_t i, std::size_t j) const {
    for (const auto& [c, v] : rows_[i])
      if (c == j) return v;
    return S(0);
  }

  /// Adds v at (i, j); keeps rows sorted and drops exact zeros.
  void add(std::size_t i, std::size_t j, const S& v) {
    auto& r = rows_[i];
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, std::size_t c) { return e.first < c; });
    if (it != r.end() && it->first == j) {
      it->second = S(it->second + v);
      if (is_exact_zero(it->second)) r.erase(it);
    } else if (!is_exact_zero(v)) {
      r.insert(it, {j, v});
    }
  }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }

  Vector<S> apply(const Vector<S>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("Operator::apply: dimension mismatch");
    Vector<S> y(dim(), S(0));
    for (std::size_t i = 0; i < dim(); ++i) {
      S acc(0);
      for (const auto& [c, v] : rows_[i]) acc += v * x[c];
      y[i] = acc;
    }
    return y;
  }

  Operator operator*(const Operator& b) const {
    if (b.dim() != dim()) throw std::invalid_argument("Operator product: dimension mismatch");
    Operator out(dim());
    std::vector<S> acc(dim(), S(0));
    std::vector<char> used(dim(), 0);
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < dim(); ++i) {
      touched.clear();
      for (const auto& [k, av] : rows_[i]) {
        for (const auto& [j, bv] : b.rows_[k]) {
          if (!used[j]) {
            used[j] = 1;
            touched.push_back(j);
            acc[j] = av * bv;
          } else {
            acc[j] += av * bv;
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      for (std::size_t j : touched) {
        if (!is_exact_zero(acc[j])) out.rows_[i].push_back({j, acc[j]});
        used[j] = 0;
      }
    }
    return out;
  }

  Operator operator+(const Operator& b) const {
    Operator out = *this;
    for (std::size_t i = 0; i < dim(); ++i)
      for (const auto& [j, v] : b.rows_[i]) out.add(i, j, v);
    return out;
  }

  Operator operator-(const Operator& b) const { return *this + b.scaled(S(-1)); }

  Operator scaled(const S& s) const {
    Operator out(dim());
    if (is_exact_zero(s)) return out;
    for (std::size_t i = 0; i < dim(); ++i)
      for (const auto& [j, v] : rows_[i]) out.rows_[i].push_back({j, S(v * s)});
    return out;
  }

  /// Largest entry magnitude.
  double max_abs() const {
    double m = 0.0;
    for (const auto& r : rows_)
      for (const auto& e : r) m = std::max(m, ScalarTraits<S>::magnitude(e.second));
    return m;
  }

  /// True when every stored entry is zero in the backend sense.
  bool is_zero() const {
    for (const auto& r : rows_)
      for (const auto& e : r)
        if (!ScalarTraits<S>::is_zero(e.second)) return false;
    return true;
  }

 private:
  static bool is_exact_zero(const S& v) {
    if constexpr (ScalarTraits<S>::exact) return sgn(v) == 0;
    else return v == S(0);
  }

  std::vector<std::vector<Entry>> rows_;
};

/// Kronecker product a ⊗ b (a acts on the more significant leg).
template <class S>
Operator<S> kron(const Operator<S>& a, const Operator<S>& b) {
  const std::size_t nb = b.dim();
  Operator<S> out(a.dim() * nb);
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t p = 0; p < nb; ++p)
      for (const auto& [j, av] : a.row(i))
        for (const auto& [q, bv] : b.row(p)) out.add(i * nb + p, j * nb + q, S(av * bv));
  return out;
}

/// Mixed-radix layout of a tensor product of legs; leg 0 is most significant.
class Layout {
 public:
  Layout() = default;
  explicit Layout(std::vector<std::size_t> dims) : dims_(std::move(dims)), strides_(dims_.size()) {
    std::size_t s = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
      strides_[i] = s;
      s *= dims_[i];
    }
    total_ = s;
  }
  std::size_t total() const { return total_; }
  std::size_t legs() const { return dims_.size(); }
  std::size_t dim(std::size_t leg) const { return dims_[leg]; }
  std::size_t stride(std::size_t leg) const { return strides_[leg]; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t digit(std::size_t index, std::size_t leg) const { return (index / strides_[leg]) % dims_[leg]; }

  std::size_t compose(const std::vector<std::size_t>& digits) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) idx += digits[i] * strides_[i];
    return idx;
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

/// Lifts `op`, acting on the listed legs in the given order, to the full layout
/// with identity on every other leg.
template <class S>
Operator<S> embed(const Operator<S>& op, const std::vector<std::size_t>& legs, const Layout& layout) {
  std::vector<std::size_t> sub_dims;
  for (std::size_t l : legs) sub_dims.push_back(layout.dim(l));
  Layout sub(sub_dims);
  if (sub.total() != op.dim()) throw std::invalid_argument("embed: leg dimensions do not match operator");
  Operator<S> out(layout.total());
  for (std::size_t r = 0; r < layout.total(); ++r) {
    std::size_t sub_row = 0;
    std::size_t base = r;
    for (std::size_t i = 0; i < legs.size(); ++i) {
      std::size_t d = layout.digit(r, legs[i]);
      sub_row += d * sub.stride(i);
      base -= d * layout.stride(legs[i]);
    }
    for (const auto& [sub_col, v] : op.row(sub_row)) {
      std::size_t c = base;
      for (std::size_t i = 0; i < legs.size(); ++i) c += sub.digit(sub_col, i) * layout.stride(legs[i]);
      out.add(r, c, v);
    }
  }
  return out;
}

/// Product of operators applied right-to-left without forming the product.
template <class S>
class OpChain {
 public:
  OpChain() = default;
  explicit OpChain(std::size_t dim) : dim_(dim) {}

  /// Appends a factor on the right (it is applied before the existing ones).
  void push_right(Operator<S> op) {
    if (dim_ == 0) dim_ = op.dim();
    if (op.dim() != dim_) throw std::invalid_argument("OpChain: dimension mismatch");
    factors_.push_back(std::move(op));
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return factors_.size(); }

  Vector<S> apply(Vector<S> x) const {
    for (std::size_t i = factors_.size(); i-- > 0;) x = factors_[i].apply(x);
    return x;
  }

  Operator<S> product() const {
    Operator<S> p = Operator<S>::identity(dim_);
    for (const auto& f : factors_) p = p * f;
    return p;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<Operator<S>> factors_;
};

// ---------------------------------------------------------------------------
// Vector helpers

template <class S>
Vector<S> basis_vector(std::size_t n, std::size_t i) {
  Vector<S> v(n, S(0));
  v[i] = S(1);
  return v;
}

template <class S>
Vector<S> axpy(const S& a, const Vector<S>& x, const Vector<S>& y) {
  Vector<S> out = y;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += a * x[i];
  return out;
}

template <class S>
Vector<S> scaled(const Vector<S>& x, const S& a) {
  Vector<S> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = S(a * x[i]);
  return out;
}

template <class S>
Vector<S> difference(const Vector<S>& x, const Vector<S>& y) {
  Vector<S> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = S(x[i] - y[i]);
  return out;
}

template <class S>
double max_abs(const Vector<S>& x) {
  double m = 0.0;
  for (const auto& v : x) m = std::max(m, ScalarTraits<S>::magnitude(v));
  return m;
}

template <class S>
double norm2(const Vector<S>& x) {
  double s = 0.0;
  for (const auto& v : x) {
    double a = ScalarTraits<S>::magnitude(v);
    s += a * a;
  }
  return std::sqrt(s);
}

template <class S>
bool is_null(const Vector<S>& x) {
  if constexpr (ScalarTraits<S>::exact) {
    for (const auto& v : x)
      if (sgn(v) != 0) return false;
    return true;
  } else {
    return norm2(x) < ScalarTraits<S>::pole_threshold;
  }
}

/// Tensor product of two vectors (a on the more significant leg).
template <class S>
Vector<S> tensor(const Vector<S>& a, const Vector<S>& b) {
  Vector<S> out(a.size() * b.size(), S(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = S(a[i] * b[j]);
  return out;
}

/// Block `i` of length `block` from a vector laid out as [outer][block].
template <class S>
Vector<S> block_of(const Vector<S>& x, std::size_t i, std::size_t block) {
  return Vector<S>(x.begin() + static_cast<std::ptrdiff_t>(i * block),
                   x.begin() + static_cast<std::ptrdiff_t>((i + 1) * block));
}

/// Exact-or-float rank reduction: keeps a maximal linearly independent subset.
template <class S>
std::vector<Vector<S>> independent_subset(const std::vector<Vector<S>>& vs) {
  std::vector<Vector<S>> kept;
  std::vector<Vector<S>> echelon;
  std::vector<std::size_t> pivots;
  for (const auto& v : vs) {
    Vector<S> r = v;
    for (std::size_t e = 0; e < echelon.size(); ++e) {
      const S& p = r[pivots[e]];
      if (ScalarTraits<S>::is_zero(p)) continue;
      S c = p / echelon[e][pivots[e]];
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * echelon[e][i];
    }
    std::size_t piv = r.size();
    double best = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      double m = ScalarTraits<S>::magnitude(r[i]);
      if (!ScalarTraits<S>::is_zero(r[i]) && m > best) {
        best = m;
        piv = i;
        if constexpr (ScalarTraits<S>::exact) break;
      }
    }
    if (piv == r.size()) continue;
    echelon.push_back(r);
    pivots.push_back(piv);
    kept.push_back(v);
  }
  return kept;
}

}  // namespace betheforge

namespace betheforge {

/// Applies grid entry (i,k) of an operator on [aux][rest] (aux is the most
/// significant leg) to a vector on the rest.
template <class S, class Op>
Vector<S> apply_grid_entry(const Op& op, std::size_t aux_dim, std::size_t i, std::size_t k, const Vector<S>& v) {
  const std::size_t rest = v.size();
  Vector<S> full(aux_dim * rest, S(0));
  std::copy(v.begin(), v.end(), full.begin() + static_cast<std::ptrdiff_t>(k * rest));
  return block_of(op.apply(full), i, rest);
}

}  // namespace betheforge
