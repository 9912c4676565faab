#pragma once

#include "betheforge/operator.hpp"
#include "betheforge/rmatrix.hpp"
#include "betheforge/scalar.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace betheforge {

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoVacuumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Model { GL2, GL3, SP4 };

/// Fundamental sites carry the model's own R-matrix as Lax operator; dual sites
/// (gl only) carry the dual-representation Lax operator.
enum class SiteKind { Fundamental, Dual };

inline std::string model_name(Model m) {
  switch (m) {
    case Model::GL2: return "gl2";
    case Model::GL3: return "gl3";
    default: return "sp4";
  }
}

inline Model parse_model(const std::string& s) {
  if (s == "gl2") return Model::GL2;
  if (s == "gl3") return Model::GL3;
  if (s == "sp4") return Model::SP4;
  throw std::invalid_argument("unknown model: " + s);
}

inline std::size_t model_dim(Model m) {
  switch (m) {
    case Model::GL2: return 2;
    case Model::GL3: return 3;
    default: return 4;
  }
}

/// Largest chain-space dimension accepted for monodromy construction.
inline constexpr std::size_t kMaxChainDim = 1024;
/// Largest chain-space dimension accepted for dense diagonalization.
inline constexpr std::size_t kMaxSpectrumDim = 256;

/// A chain of fundamental (or dual) evaluation sites with exact inhomogeneities.
class ChainSpec {
 public:
  ChainSpec(Model model, std::vector<Rational> z, SiteKind sites = SiteKind::Fundamental)
      : model_(model), z_(std::move(z)), sites_(sites) {
    if (z_.empty()) throw std::invalid_argument("chain length must be at least 1");
    if (sites_ == SiteKind::Dual && model_ == Model::SP4)
      throw std::invalid_argument("dual sites are defined for gl models only");
    for (std::size_t i = 0; i < z_.size(); ++i)
      for (std::size_t j = i + 1; j < z_.size(); ++j) {
        Rational d = z_[i] - z_[j];
        for (long bad : {0L, 1L, -1L, 3L, -3L})
          if (d == bad)
            throw std::invalid_argument("inhomogeneities " + z_[i].get_str() + " and " + z_[j].get_str() +
                                        " differ by a pole offset");
      }
    std::size_t dim = 1;
    for (std::size_t i = 0; i < z_.size(); ++i) {
      dim *= local_dim();
      if (dim > kMaxChainDim) throw CapacityError("chain space exceeds capacity");
    }
  }

  /// z_j = (j-1)/L.
  static ChainSpec with_default_inhomogeneities(Model model, std::size_t length,
                                                SiteKind sites = SiteKind::Fundamental) {
    if (length == 0) throw std::invalid_argument("chain length must be at least 1");
    std::vector<Rational> z;
    for (std::size_t j = 0; j < length; ++j) {
      Rational r(static_cast<long>(j), static_cast<long>(length));
      r.canonicalize();
      z.push_back(r);
    }
    return ChainSpec(model, z, sites);
  }

  static ChainSpec from_json(const nlohmann::json& j) {
    Model m = parse_model(j.at("model").get<std::string>());
    SiteKind sites = SiteKind::Fundamental;
    if (j.contains("sites")) {
      std::string s = j.at("sites").get<std::string>();
      if (s == "dual") sites = SiteKind::Dual;
      else if (s != "fundamental") throw std::invalid_argument("sites must be \"fundamental\" or \"dual\"");
    }
    if (j.contains("inhomogeneities")) {
      std::vector<Rational> z;
      for (const auto& e : j.at("inhomogeneities")) z.push_back(parse_rational(e.get<std::string>()));
      if (j.contains("length") && j.at("length").get<std::size_t>() != z.size())
        throw std::invalid_argument("length does not match the number of inhomogeneities");
      return ChainSpec(m, z, sites);
    }
    return with_default_inhomogeneities(m, j.at("length").get<std::size_t>(), sites);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["model"] = model_name(model_);
    j["length"] = length();
    j["inhomogeneities"] = nlohmann::json::array();
    for (const auto& z : z_) j["inhomogeneities"].push_back(z.get_str());
    if (sites_ == SiteKind::Dual) j["sites"] = "dual";
    return j;
  }

  Model model() const { return model_; }
  SiteKind sites() const { return sites_; }
  std::size_t length() const { return z_.size(); }
  std::size_t local_dim() const { return model_dim(model_); }
  const std::vector<Rational>& z() const { return z_; }

  std::size_t space_dim() const {
    std::size_t dim = 1;
    for (std::size_t i = 0; i < length(); ++i) dim *= local_dim();
    return dim;
  }

 private:
  Model model_;
  std::vector<Rational> z_;
  SiteKind sites_;
};

/// The model R-matrix that governs the RTT relation of a chain.
template <class S>
Operator<S> model_r(Model m, const S& x, const S& y) {
  return m == Model::SP4 ? sp4_r<S>(x, y) : gl_r<S>(model_dim(m), x, y);
}

/// The model R-matrix with its denominators cleared; the RTT relation is homogeneous in R,
/// so this form checks it at every pair of points, including poles of R itself.
template <class S>
Operator<S> model_r_polynomial(Model m, const S& x, const S& y) {
  return m == Model::SP4 ? sp4_r_polynomial<S>(x, y) : gl_r_polynomial<S>(model_dim(m), x, y);
}

/// d×d grid of operators T^i_k(x) on the chain space, indexed by slots.
template <class S>
class MonodromyGrid {
 public:
  MonodromyGrid(Operator<S> full, std::size_t d, std::size_t w) : full_(std::move(full)), d_(d), w_(w) {
    entries_.assign(d * d, Operator<S>(w));
    for (std::size_t r = 0; r < d * w; ++r)
      for (const auto& [c, v] : full_.row(r)) entries_[(r / w) * d + c / w].add(r % w, c % w, v);
  }

  std::size_t aux_dim() const { return d_; }
  std::size_t space_dim() const { return w_; }

  /// T^i_k(x) with i, k given as slots.
  const Operator<S>& entry(std::size_t i, std::size_t k) const { return entries_.at(i * d_ + k); }

  /// The full operator on aux ⊗ chain.
  const Operator<S>& full() const { return full_; }

  Operator<S> transfer() const {
    Operator<S> h(w_);
    for (std::size_t i = 0; i < d_; ++i) h = h + entry(i, i);
    return h;
  }

 private:
  Operator<S> full_;
  std::size_t d_;
  std::size_t w_;
  std::vector<Operator<S>> entries_;
};

template <class S>
S to_scalar(const Rational& r) {
  return ScalarTraits<S>::from_rational(r);
}

/// T_0(x) = L_{01}(x,z_1) ... L_{0L}(x,z_L).
template <class S>
MonodromyGrid<S> build_monodromy(const ChainSpec& spec, const S& x) {
  const std::size_t d = spec.local_dim();
  std::vector<std::size_t> dims(spec.length() + 1, d);
  Layout lay(dims);
  Operator<S> t;
  for (std::size_t j = 0; j < spec.length(); ++j) {
    S z = to_scalar<S>(spec.z()[j]);
    Operator<S> lax = spec.sites() == SiteKind::Dual ? gl_dual_lax<S>(d, x, z) : model_r<S>(spec.model(), x, z);
    Operator<S> lifted = embed(lax, {0, j + 1}, lay);
    t = (j == 0) ? lifted : t * lifted;
  }
  return MonodromyGrid<S>(std::move(t), d, spec.space_dim());
}

template <class S>
Operator<S> transfer(const ChainSpec& spec, const S& x) {
  return build_monodromy<S>(spec, x).transfer();
}

/// Max-abs residual of R12(x,y) T1(x) T2(y) - T2(y) T1(x) R12(x,y).
template <class S>
double check_rtt(const ChainSpec& spec, const S& x, const S& y) {
  const std::size_t d = spec.local_dim();
  const std::size_t w = spec.space_dim();
  Layout lay({d, d, w});
  Operator<S> t1 = embed(build_monodromy<S>(spec, x).full(), {0, 2}, lay);
  Operator<S> t2 = embed(build_monodromy<S>(spec, y).full(), {1, 2}, lay);
  Operator<S> r = embed(model_r_polynomial<S>(spec.model(), x, y), {0, 1}, lay);
  return (r * t1 * t2 - t2 * t1 * r).max_abs();
}

/// Max-abs residual of H(x) H(y) - H(y) H(x).
template <class S>
double check_commuting(const ChainSpec& spec, const S& x, const S& y) {
  Operator<S> hx = transfer<S>(spec, x);
  Operator<S> hy = transfer<S>(spec, y);
  return (hx * hy - hy * hx).max_abs();
}

// ---------------------------------------------------------------------------
// Vacuum

/// Which triangular half of the generators annihilates the vacuum.
enum class Triangularity {
  Lower,  ///< T^i_k ω = 0 for i > k
  Upper   ///< T^i_k ω = 0 for i < k
};

inline std::string triangularity_name(Triangularity t) { return t == Triangularity::Lower ? "i>k" : "i<k"; }

/// Rational sample points away from every pole of the chain's Lax operators.
inline std::vector<Rational> chain_sample_points(const ChainSpec& spec, std::size_t count) {
  std::vector<Rational> pts;
  Rational top = spec.z().front();
  for (const auto& z : spec.z()) top = std::max(top, z);
  for (std::size_t i = 0; pts.size() < count; ++i) {
    Rational x = top + Rational(7, 3) + Rational(static_cast<long>(5 * i), 11);
    x.canonicalize();
    pts.push_back(x);
  }
  return pts;
}

struct VacuumData {
  std::size_t local_slot = 0;
  std::size_t index = 0;
  Triangularity convention = Triangularity::Lower;
};

/// Coefficient c with T^i_i(x) ω = c ω; throws if the image is not proportional to ω.
template <class S>
S diagonal_weight(const MonodromyGrid<S>& grid, const VacuumData& vac, std::size_t slot) {
  const auto& op = grid.entry(slot, slot);
  S c(0);
  for (std::size_t r = 0; r < op.dim(); ++r) {
    S v = op.at(r, vac.index);
    if (r == vac.index) c = v;
    else if (!ScalarTraits<S>::is_zero(v)) throw NoVacuumError("diagonal generator does not preserve the vacuum line");
  }
  return c;
}

/// All weights λ_i(x), indexed by slot, read off by applying T^i_i(x) to ω.
template <class S>
std::vector<S> weights(const ChainSpec& spec, const VacuumData& vac, const S& x) {
  auto grid = build_monodromy<S>(spec, x);
  std::vector<S> out;
  for (std::size_t i = 0; i < spec.local_dim(); ++i) out.push_back(diagonal_weight(grid, vac, i));
  return out;
}

namespace detail {

inline bool annihilated(const MonodromyGrid<Rational>& grid, std::size_t idx, Triangularity conv) {
  const std::size_t d = grid.aux_dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      bool want = conv == Triangularity::Lower ? i > k : i < k;
      if (!want) continue;
      const auto& op = grid.entry(i, k);
      for (std::size_t r = 0; r < op.dim(); ++r)
        if (sgn(op.at(r, idx)) != 0) return false;
    }
  for (std::size_t i = 0; i < d; ++i) {
    const auto& op = grid.entry(i, i);
    for (std::size_t r = 0; r < op.dim(); ++r)
      if (r != idx && sgn(op.at(r, idx)) != 0) return false;
  }
  return true;
}

}  // namespace detail

/// Scans repeated single-index product states; gl chains try the i>k convention
/// first and sp(4) chains the i<k convention, falling back to the other.
inline VacuumData detect_vacuum(const ChainSpec& spec) {
  const std::size_t d = spec.local_dim();
  std::vector<MonodromyGrid<Rational>> grids;
  for (const auto& x : chain_sample_points(spec, 5)) grids.push_back(build_monodromy<Rational>(spec, x));
  std::vector<Triangularity> order = spec.model() == Model::SP4
                                         ? std::vector<Triangularity>{Triangularity::Upper, Triangularity::Lower}
                                         : std::vector<Triangularity>{Triangularity::Lower, Triangularity::Upper};
  for (Triangularity conv : order)
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < spec.length(); ++j) idx = idx * d + c;
      bool ok = true;
      for (const auto& grid : grids) ok = ok && detail::annihilated(grid, idx, conv);
      if (ok) return VacuumData{c, idx, conv};
    }
  throw NoVacuumError("no repeated-index product state is annihilated by a triangular half");
}

/// A chain together with its detected vacuum.
struct Chain {
  ChainSpec spec;
  VacuumData vacuum;

  explicit Chain(ChainSpec s) : spec(std::move(s)), vacuum(detect_vacuum(spec)) {}

  template <class S>
  Vector<S> omega() const {
    return basis_vector<S>(spec.space_dim(), vacuum.index);
  }

  template <class S>
  MonodromyGrid<S> monodromy(const S& x) const {
    return build_monodromy<S>(spec, x);
  }

  template <class S>
  std::vector<S> lambda(const S& x) const {
    return weights<S>(spec, vacuum, x);
  }
};

// ---------------------------------------------------------------------------
// Dense spectrum oracle

struct SpectralLine {
  Complex value;
  int multiplicity;
};

inline Eigen::MatrixXcd to_dense(const Operator<Complex>& op) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(op.dim()), static_cast<Eigen::Index>(op.dim()));
  for (std::size_t r = 0; r < op.dim(); ++r)
    for (const auto& [c, v] : op.row(r)) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
  return m;
}

inline bool spectral_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Eigenvalues of H(x) by dense diagonalization, sorted by real then imaginary part.
inline std::vector<Complex> eigenvalues(const ChainSpec& spec, const Complex& x) {
  if (spec.space_dim() > kMaxSpectrumDim) throw CapacityError("spectrum requires chain dimension <= 256");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(to_dense(transfer<Complex>(spec, x)), false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("diagonalization failed");
  std::vector<Complex> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), spectral_less);
  return ev;
}

/// Eigenvalues grouped into lines of equal value (within `tol`) with multiplicities.
inline std::vector<SpectralLine> spectrum(const ChainSpec& spec, const Complex& x, double tol = 1e-8) {
  std::vector<SpectralLine> lines;
  for (const auto& e : eigenvalues(spec, x)) {
    auto it = std::find_if(lines.begin(), lines.end(),
                           [&](const SpectralLine& l) { return std::abs(l.value - e) <= tol; });
    if (it == lines.end()) lines.push_back({e, 1});
    else ++it->multiplicity;
  }
  return lines;
}

/// Distance from `value` to the nearest eigenvalue of H(x).
inline double spectrum_gap(const ChainSpec& spec, const Complex& x, const Complex& value) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : eigenvalues(spec, x)) best = std::min(best, std::abs(e - value));
  return best;
}

}  // namespace betheforge
