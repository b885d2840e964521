// Exact algebra of exponential-trigonometric polynomials
//
//     sum_i  c_i * t^{k_i} * exp(lambda_i t) * trig_i(omega_i t),   trig in {1, sin, cos}.
//
// The class is closed under addition, multiplication (products of sines and
// cosines are rewritten as sums) and definite integration, which is all that
// is needed to integrate M^{-1}(t) F_1(x(t)) along the linear flows handled
// here.  TermSum is registered as an Eigen scalar so symbolic matrices of
// integrands can be multiplied with the usual expression syntax.
#ifndef ORBIT_AVERAGER_INTEGRAND_HPP
#define ORBIT_AVERAGER_INTEGRAND_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <tuple>
#include <vector>

namespace orbit_averager {

enum class Trig { None, Sin, Cos };

template <typename Scalar>
struct ExpTrigTerm {
  Scalar coeff{0};
  int power = 0;
  Scalar rate{0};
  Trig trig = Trig::None;
  Scalar freq{0};

  Scalar operator()(Scalar t) const {
    Scalar v = coeff * std::exp(rate * t);
    if (power > 0) v *= std::pow(t, power);
    switch (trig) {
      case Trig::None: return v;
      case Trig::Sin: return v * std::sin(freq * t);
      case Trig::Cos: return v * std::cos(freq * t);
    }
    return v;
  }
};

namespace detail {

/// Rates and frequencies are compared with this absolute tolerance when
/// merging like terms.  Exact for the integer rates that occur in practice.
inline constexpr double kKeyTolerance = 1e-14;

template <typename Scalar>
bool same_real(Scalar a, Scalar b) {
  using std::abs;
  return abs(a - b) <= Scalar(kKeyTolerance) * std::max(Scalar(1), std::max(abs(a), abs(b)));
}

template <typename Scalar>
bool same_key(const ExpTrigTerm<Scalar>& a, const ExpTrigTerm<Scalar>& b) {
  return a.power == b.power && a.trig == b.trig && same_real(a.rate, b.rate) && same_real(a.freq, b.freq);
}

template <typename Scalar>
bool key_less(const ExpTrigTerm<Scalar>& a, const ExpTrigTerm<Scalar>& b) {
  if (a.power != b.power) return a.power < b.power;
  if (!same_real(a.rate, b.rate)) return a.rate < b.rate;
  if (a.trig != b.trig) return a.trig < b.trig;
  if (!same_real(a.freq, b.freq)) return a.freq < b.freq;
  return false;
}

/// Folds sign and zero frequencies: sin(-w t) = -sin(w t), cos(-w t) = cos(w t),
/// sin(0) = 0, cos(0) = 1.
template <typename Scalar>
ExpTrigTerm<Scalar> canonical_term(ExpTrigTerm<Scalar> t) {
  if (t.trig == Trig::None) {
    t.freq = Scalar(0);
    return t;
  }
  if (t.freq == Scalar(0)) {
    if (t.trig == Trig::Sin) t.coeff = Scalar(0);
    t.trig = Trig::None;
    return t;
  }
  if (t.freq < Scalar(0)) {
    t.freq = -t.freq;
    if (t.trig == Trig::Sin) t.coeff = -t.coeff;
  }
  return t;
}

}  // namespace detail

template <typename Scalar>
class TermSum {
 public:
  using Term = ExpTrigTerm<Scalar>;

  TermSum() = default;
  /// Constant; also what Eigen uses for Scalar(0) and Scalar(1).
  TermSum(Scalar constant) {  // NOLINT(google-explicit-constructor)
    if (constant != Scalar(0)) terms_.push_back(Term{constant, 0, Scalar(0), Trig::None, Scalar(0)});
  }
  TermSum(int constant) : TermSum(Scalar(constant)) {}  // NOLINT(google-explicit-constructor)
  explicit TermSum(std::vector<Term> terms) : terms_(std::move(terms)) { canonicalize(); }

  static TermSum term(Scalar coeff, int power, Scalar rate = Scalar(0), Trig trig = Trig::None,
                      Scalar freq = Scalar(0)) {
    return TermSum(std::vector<Term>{Term{coeff, power, rate, trig, freq}});
  }
  static TermSum t() { return term(Scalar(1), 1); }
  static TermSum exp(Scalar rate) { return term(Scalar(1), 0, rate); }
  static TermSum sin(Scalar freq) { return term(Scalar(1), 0, Scalar(0), Trig::Sin, freq); }
  static TermSum cos(Scalar freq) { return term(Scalar(1), 0, Scalar(0), Trig::Cos, freq); }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Scalar operator()(Scalar t) const {
    Scalar v(0);
    for (const auto& term : terms_) v += term(t);
    return v;
  }

  TermSum& operator+=(const TermSum& other) {
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    canonicalize();
    return *this;
  }
  TermSum& operator-=(const TermSum& other) { return *this += -other; }
  TermSum& operator*=(const TermSum& other) { return *this = *this * other; }

  friend TermSum operator+(TermSum a, const TermSum& b) { return a += b; }
  friend TermSum operator-(TermSum a, const TermSum& b) { return a -= b; }
  friend TermSum operator-(TermSum a) {
    for (auto& term : a.terms_) term.coeff = -term.coeff;
    return a;
  }

  friend TermSum operator*(const TermSum& a, const TermSum& b) {
    std::vector<Term> out;
    out.reserve(2 * a.terms_.size() * b.terms_.size());
    for (const auto& x : a.terms_) {
      for (const auto& y : b.terms_) multiply_terms(x, y, out);
    }
    return TermSum(std::move(out));
  }

  friend bool operator==(const TermSum& a, const TermSum& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      if (!detail::same_key(a.terms_[i], b.terms_[i]) || a.terms_[i].coeff != b.terms_[i].coeff) return false;
    }
    return true;
  }
  friend bool operator!=(const TermSum& a, const TermSum& b) { return !(a == b); }

  friend std::ostream& operator<<(std::ostream& os, const TermSum& s) {
    if (s.terms_.empty()) return os << "0";
    bool first = true;
    for (const auto& term : s.terms_) {
      if (!first) os << " + ";
      first = false;
      os << term.coeff;
      if (term.power > 0) os << "*t^" << term.power;
      if (term.rate != Scalar(0)) os << "*exp(" << term.rate << "t)";
      if (term.trig == Trig::Sin) os << "*sin(" << term.freq << "t)";
      if (term.trig == Trig::Cos) os << "*cos(" << term.freq << "t)";
    }
    return os;
  }

 private:
  static void multiply_terms(const Term& x, const Term& y, std::vector<Term>& out) {
    const int power = x.power + y.power;
    const Scalar rate = x.rate + y.rate;
    const Scalar c = x.coeff * y.coeff;
    if (x.trig == Trig::None || y.trig == Trig::None) {
      const Term& trig = x.trig == Trig::None ? y : x;
      out.push_back(detail::canonical_term(Term{c, power, rate, trig.trig, trig.freq}));
      return;
    }
    const Scalar half = c / Scalar(2);
    const Scalar sum = x.freq + y.freq;
    if (x.trig == Trig::Sin && y.trig == Trig::Sin) {
      // sin a sin b = (cos(a - b) - cos(a + b)) / 2
      out.push_back(detail::canonical_term(Term{half, power, rate, Trig::Cos, x.freq - y.freq}));
      out.push_back(detail::canonical_term(Term{-half, power, rate, Trig::Cos, sum}));
    } else if (x.trig == Trig::Cos && y.trig == Trig::Cos) {
      // cos a cos b = (cos(a - b) + cos(a + b)) / 2
      out.push_back(detail::canonical_term(Term{half, power, rate, Trig::Cos, x.freq - y.freq}));
      out.push_back(detail::canonical_term(Term{half, power, rate, Trig::Cos, sum}));
    } else {
      // sin a cos b = (sin(a + b) + sin(a - b)) / 2
      const Term& s = x.trig == Trig::Sin ? x : y;
      const Term& co = x.trig == Trig::Sin ? y : x;
      out.push_back(detail::canonical_term(Term{half, power, rate, Trig::Sin, s.freq + co.freq}));
      out.push_back(detail::canonical_term(Term{half, power, rate, Trig::Sin, s.freq - co.freq}));
    }
  }

  void canonicalize() {
    for (auto& term : terms_) term = detail::canonical_term(term);
    std::stable_sort(terms_.begin(), terms_.end(), detail::key_less<Scalar>);
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const auto& term : terms_) {
      if (!merged.empty() && detail::same_key(merged.back(), term)) {
        merged.back().coeff += term.coeff;
      } else {
        merged.push_back(term);
      }
    }
    std::erase_if(merged, [](const Term& term) { return term.coeff == Scalar(0); });
    terms_ = std::move(merged);
  }

  std::vector<Term> terms_;
};

template <typename Scalar>
TermSum<Scalar> operator*(Scalar s, const TermSum<Scalar>& a) {
  return TermSum<Scalar>(s) * a;
}

namespace detail {

/// Antiderivative of t^k e^{mu t} (mu complex, nonzero), obtained by
/// repeated integration by parts:
///   e^{mu t} sum_{j=0}^{k} (-1)^j k!/(k-j)! t^{k-j} / mu^{j+1}.
template <typename Scalar>
std::complex<Scalar> exp_poly_antiderivative(int k, std::complex<Scalar> mu, Scalar t) {
  std::complex<Scalar> sum(0);
  Scalar falling(1);  // k!/(k-j)!
  std::complex<Scalar> mu_pow = mu;
  for (int j = 0; j <= k; ++j) {
    const Scalar sign = (j % 2 == 0) ? Scalar(1) : Scalar(-1);
    sum += sign * falling * std::pow(t, k - j) / mu_pow;
    falling *= Scalar(k - j);
    mu_pow *= mu;
  }
  return std::exp(mu * t) * sum;
}

/// Integral of t^k e^{mu t} over [0, x] as a power series in mu x; used when
/// |mu x| is small and the closed form cancels badly.
template <typename Scalar>
std::complex<Scalar> exp_poly_series(int k, std::complex<Scalar> mu, Scalar x) {
  std::complex<Scalar> sum(0);
  std::complex<Scalar> factor(std::pow(x, k + 1));  // (mu x)^n x^{k+1} / n!
  for (int n = 0; n < 80; ++n) {
    const std::complex<Scalar> add = factor / Scalar(k + n + 1);
    sum += add;
    if (std::abs(add) <= Scalar(1e-18) * std::abs(sum)) break;
    factor *= mu * x / Scalar(n + 1);
  }
  return sum;
}

}  // namespace detail

/// Closed-form antiderivative G of a single term, normalised so the
/// definite integral over [a, b] is G(b) - G(a).
template <typename Scalar>
Scalar antiderivative(const ExpTrigTerm<Scalar>& term, Scalar t) {
  if (term.rate == Scalar(0) && (term.trig == Trig::None || term.freq == Scalar(0))) {
    if (term.trig == Trig::Sin) return Scalar(0);
    return term.coeff * std::pow(t, term.power + 1) / Scalar(term.power + 1);
  }
  const std::complex<Scalar> mu(term.rate, term.trig == Trig::None ? Scalar(0) : term.freq);
  const auto g = detail::exp_poly_antiderivative(term.power, mu, t);
  switch (term.trig) {
    case Trig::None: return term.coeff * g.real();
    case Trig::Cos: return term.coeff * g.real();
    case Trig::Sin: return term.coeff * g.imag();
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar antiderivative(const TermSum<Scalar>& sum, Scalar t) {
  Scalar v(0);
  for (const auto& term : sum.terms()) v += antiderivative(term, t);
  return v;
}

template <typename Scalar>
Scalar definite_integral(const ExpTrigTerm<Scalar>& term, Scalar lower, Scalar upper) {
  const std::complex<Scalar> mu(term.rate, term.trig == Trig::None ? Scalar(0) : term.freq);
  const Scalar reach = std::abs(mu) * std::max(std::abs(lower), std::abs(upper));
  if (mu != std::complex<Scalar>(0) && reach <= Scalar(2)) {
    const auto g = detail::exp_poly_series(term.power, mu, upper) - detail::exp_poly_series(term.power, mu, lower);
    return term.coeff * (term.trig == Trig::Sin ? g.imag() : g.real());
  }
  return antiderivative(term, upper) - antiderivative(term, lower);
}

/// Exact integral over [0, T].
template <typename Scalar>
Scalar definite_integral(const TermSum<Scalar>& sum, Scalar period) {
  Scalar v(0);
  for (const auto& term : sum.terms()) v += definite_integral(term, Scalar(0), period);
  return v;
}

/// Entrywise definite integral of a symbolic matrix.
template <typename Scalar, int R, int C>
Eigen::Matrix<Scalar, R, C> definite_integral(const Eigen::Matrix<TermSum<Scalar>, R, C>& m, Scalar period) {
  Eigen::Matrix<Scalar, R, C> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = definite_integral(m(i, j), period);
  return out;
}

using Integrand = TermSum<double>;
using SymbolicMatrix = Eigen::Matrix<Integrand, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace orbit_averager

namespace Eigen {

template <typename Scalar>
struct NumTraits<orbit_averager::TermSum<Scalar>> : GenericNumTraits<orbit_averager::TermSum<Scalar>> {
  using Real = orbit_averager::TermSum<Scalar>;
  using NonInteger = orbit_averager::TermSum<Scalar>;
  using Nested = orbit_averager::TermSum<Scalar>;
  using Literal = orbit_averager::TermSum<Scalar>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 50,
    MulCost = 100
  };
};

}  // namespace Eigen

#endif  // ORBIT_AVERAGER_INTEGRAND_HPP
