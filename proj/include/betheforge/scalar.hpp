#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace betheforge {

using Rational = mpq_class;
using Complex = std::complex<double>;

/// Raised when a scalar function or R-matrix is evaluated at a zero denominator.
struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Raised when a constructed state vanishes identically.
struct ZeroVectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";
  static bool is_zero(const Rational& a) { return sgn(a) == 0; }
  static double magnitude(const Rational& a) { return std::fabs(a.get_d()); }
  static Rational from_rational(const Rational& a) { return a; }
  static Rational from_int(long v) { return Rational(v); }
  static Complex to_complex(const Rational& a) { return {a.get_d(), 0.0}; }
};

template <>
struct ScalarTraits<Complex> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static constexpr double pole_threshold = 1e-12;
  static bool is_zero(const Complex& a) { return std::abs(a) < pole_threshold; }
  static double magnitude(const Complex& a) { return std::abs(a); }
  static Complex from_rational(const Rational& a) { return {a.get_d(), 0.0}; }
  static Complex from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static Complex to_complex(const Complex& a) { return a; }
};

template <class S>
S checked_inverse(const S& den, const char* what) {
  if (ScalarTraits<S>::is_zero(den)) throw PoleError(std::string("pole in ") + what);
  return S(S(1) / den);
}

/// f(x,y) = (x-y+1)/(x-y).
template <class S>
S f(const S& x, const S& y) {
  S d = x - y;
  S inv = checked_inverse<S>(d, "f");
  return S((d + S(1)) * inv);
}

/// g(x,y) = 1/(x-y).
template <class S>
S g(const S& x, const S& y) {
  return checked_inverse<S>(S(x - y), "g");
}

/// h(x,y) = 1/(x-y+3).
template <class S>
S h(const S& x, const S& y) {
  return checked_inverse<S>(S(x - y + S(3)), "h");
}

/// k(x,y) = 1/(x-y-1).
template <class S>
S k(const S& x, const S& y) {
  return checked_inverse<S>(S(x - y - S(1)), "k");
}

/// 1/f(x,y) = (x-y)/(x-y+1), regular at x = y.
template <class S>
S f_inv(const S& x, const S& y) {
  S d = x - y;
  S inv = checked_inverse<S>(S(d + S(1)), "1/f");
  return S(d * inv);
}

/// Ordered root set. Removal and extension keep insertion order.
template <class S>
using RootSet = std::vector<S>;

template <class S>
RootSet<S> without(const RootSet<S>& us, std::size_t idx) {
  RootSet<S> out;
  out.reserve(us.size());
  for (std::size_t i = 0; i < us.size(); ++i)
    if (i != idx) out.push_back(us[i]);
  return out;
}

template <class S>
RootSet<S> with(const RootSet<S>& us, const S& x) {
  RootSet<S> out = us;
  out.push_back(x);
  return out;
}

template <class S>
RootSet<S> shifted(const RootSet<S>& us, long c) {
  RootSet<S> out;
  for (const auto& u : us) out.push_back(S(u + S(c)));
  return out;
}

/// F(u,x) = prod_k f(u_k, x).
template <class S>
S F_left(const RootSet<S>& us, const S& x) {
  S p(1);
  for (const auto& u : us) p = S(p * f(u, x));
  return p;
}

/// F(x,u) = prod_k f(x, u_k).
template <class S>
S F_right(const S& x, const RootSet<S>& us) {
  S p(1);
  for (const auto& u : us) p = S(p * f(x, u));
  return p;
}

/// prod_k 1/f(u_k, x), regular when x is one of the roots.
template <class S>
S F_left_inv(const RootSet<S>& us, const S& x) {
  S p(1);
  for (const auto& u : us) p = S(p * f_inv(u, x));
  return p;
}

/// Residuals of both summation identities over a root set.
/// First: sum_k g(x,u_k) g(u_k,y) F(u_k,u_k^) = g(x,y) (F(x,u) - F(y,u)).
/// Second: sum_k g(x,u_k) g(u_k,y) F(u_k^,u_k) = g(x,y) (F(u,y) - F(u,x)).
template <class S>
std::pair<double, double> check_sum_identities(const RootSet<S>& us, const S& x, const S& y) {
  S lhs1(0), lhs2(0);
  for (std::size_t i = 0; i < us.size(); ++i) {
    RootSet<S> rest = without(us, i);
    S c = g(x, us[i]) * g(us[i], y);
    lhs1 = S(lhs1 + c * F_right(us[i], rest));
    lhs2 = S(lhs2 + c * F_left(rest, us[i]));
  }
  S gxy = g(x, y);
  S rhs1 = S(gxy * (F_right(x, us) - F_right(y, us)));
  S rhs2 = S(gxy * (F_left(us, y) - F_left(us, x)));
  return {ScalarTraits<S>::magnitude(S(lhs1 - rhs1)), ScalarTraits<S>::magnitude(S(lhs2 - rhs2))};
}

// ---------------------------------------------------------------------------
// Parsing and formatting

/// Parses "p/q", "p", or a decimal such as "0.25" into an exact rational.
inline Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  if (s.find_first_of("eE") != std::string::npos) {
    std::size_t used = 0;
    double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad rational literal: " + text);
    return Rational(d);
  }
  auto dot = s.find('.');
  if (dot != std::string::npos && s.find('/') == std::string::npos) {
    bool neg = s[0] == '-';
    std::string body = (neg || s[0] == '+') ? s.substr(1) : s;
    dot = body.find('.');
    std::string digits = body.substr(0, dot) + body.substr(dot + 1);
    std::string den = "1" + std::string(body.size() - dot - 1, '0');
    Rational r(mpz_class(digits.empty() ? "0" : digits, 10), mpz_class(den, 10));
    r.canonicalize();
    return neg ? Rational(-r) : r;
  }
  Rational r;
  if (s[0] == '+') s = s.substr(1);
  if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
  r.canonicalize();
  return r;
}

/// Parses "a", "a+bi", "a-bi", "bi", or "p/q" into a complex double.
inline Complex parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw std::invalid_argument("empty complex literal");
  if (s.back() != 'i' && s.back() != 'j') return {parse_rational(s).get_d(), 0.0};
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto num = [](const std::string& t) -> double {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    if (t.find('/') != std::string::npos) return parse_rational(t).get_d();
    return std::stod(t);
  };
  if (split == std::string::npos) return {0.0, num(s)};
  return {num(s.substr(0, split)), num(s.substr(split))};
}

/// Splits a comma-separated list; an empty string yields an empty list.
inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string to_string(const Rational& a) { return a.get_str(); }

inline std::string to_string(const Complex& a) {
  std::ostringstream os;
  os.precision(17);
  os << a.real() << (a.imag() < 0 ? "-" : "+") << std::fabs(a.imag()) << "i";
  return os.str();
}

// ---------------------------------------------------------------------------
// Random sample points

/// Deterministic generator of rational and complex sample points.
class SampleSource {
 public:
  explicit SampleSource(std::uint64_t seed) : rng_(seed) {}

  /// Random rational p/q with |p| <= num_bound and 1 <= q <= den_bound.
  Rational rational(long num_bound = 40, long den_bound = 7) {
    std::uniform_int_distribution<long> pn(-num_bound, num_bound);
    std::uniform_int_distribution<long> qd(1, den_bound);
    Rational r(pn(rng_), qd(rng_));
    r.canonicalize();
    return r;
  }

  Complex complex(double radius = 2.0) {
    std::uniform_real_distribution<double> u(-radius, radius);
    return {u(rng_), u(rng_)};
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Draws `count` rationals avoiding all pairwise differences in `bad` and all values in `avoid`.
inline std::vector<Rational> distinct_rationals(SampleSource& src, std::size_t count,
                                                const std::vector<long>& bad = {0},
                                                const std::vector<Rational>& avoid = {}) {
  std::vector<Rational> out;
  auto clashes = [&](const Rational& a, const Rational& b) {
    for (long o : bad)
      if (a - b == o || b - a == o) return true;
    return false;
  };
  while (out.size() < count) {
    Rational c = src.rational();
    bool ok = true;
    for (const auto& o : out) ok = ok && !clashes(c, o);
    for (const auto& o : avoid) ok = ok && !clashes(c, o);
    if (ok) out.push_back(c);
  }
  return out;
}

}  // namespace betheforge
