#include "nrc/lti.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nrc {

namespace {

// Sums whose magnitude falls below this fraction of the summands are treated
// as exact cancellation (e.g. the s^0 term of the gamma = 1 inner loop).
constexpr double kCancelTol = 1e-12;

double horner_abs(const Polynomial& p, double x) {
  double acc = 0.0;
  for (int i = p.degree(); i >= 0; --i) acc = acc * x + std::abs(p[static_cast<std::size_t>(i)]);
  return acc;
}

Polynomial derivative(const Polynomial& p) {
  if (p.degree() == 0) return Polynomial{0.0};
  std::vector<double> d(static_cast<std::size_t>(p.degree()));
  for (std::size_t i = 1; i <= d.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
  return Polynomial(std::move(d));
}

Complex polish(const Polynomial& p, const Polynomial& dp, Complex r) {
  for (int it = 0; it < 3; ++it) {
    const Complex f = p(r);
    const Complex df = dp(r);
    if (std::abs(df) == 0.0) break;
    const Complex cand = r - f / df;
    if (!(std::abs(p(cand)) < std::abs(f))) break;
    r = cand;
  }
  return r;
}

}  // namespace

Polynomial::Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { trim(); }

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(); }

void Polynomial::trim() {
  if (coeffs_.empty()) throw Error("polynomial needs at least one coefficient; use {0} for zero");
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw Error("polynomial coefficient is not finite");
  }
}

Polynomial Polynomial::from_real_roots(std::span<const double> roots) {
  Polynomial p{1.0};
  for (double r : roots) p = p * Polynomial{-r, 1.0};
  return p;
}

double Polynomial::norm_inf() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

double Polynomial::norm2() const {
  double s = 0.0;
  for (double c : coeffs_) s += c * c;
  return std::sqrt(s);
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Complex Polynomial::operator()(Complex s) const {
  Complex acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (double& c : r.coeffs_) c = -c;
  return r;
}

Polynomial& Polynomial::operator*=(double k) {
  for (double& c : coeffs_) c *= k;
  trim();
  return *this;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  const std::size_t n = std::max(a.coeffs_.size(), b.coeffs_.size());
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a[i];
    const double y = b[i];
    const double s = x + y;
    c[i] = std::abs(s) < kCancelTol * std::max(std::abs(x), std::abs(y)) ? 0.0 : s;
  }
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  return Polynomial(std::move(c));
}

RationalTF::RationalTF(Polynomial n, Polynomial d, double delay)
    : num(std::move(n)), den(std::move(d)), delay_s(delay) {
  if (den.is_zero()) throw Error("transfer function denominator is the zero polynomial");
  if (!(delay_s >= 0.0)) throw Error("delay must be nonnegative");
}

Complex RationalTF::at(double omega) const {
  const Complex s{0.0, omega};
  Complex v = eval_rational(s);
  if (delay_s > 0.0) v *= std::polar(1.0, -omega * delay_s);
  return v;
}

std::vector<Complex> poly_roots(const Polynomial& p) {
  if (p.degree() < 1) throw Error("constant polynomial has no roots");
  if (p.degree() > kMaxRootDegree) {
    throw Error("polynomial degree " + std::to_string(p.degree()) + " exceeds supported maximum " +
                std::to_string(kMaxRootDegree));
  }

  std::vector<Complex> roots;
  std::size_t lo = 0;
  while (p[lo] == 0.0) {
    roots.emplace_back(0.0, 0.0);
    ++lo;
  }
  const int deg = p.degree() - static_cast<int>(lo);
  if (deg == 0) return roots;

  std::vector<double> reduced(p.coeffs().begin() + static_cast<std::ptrdiff_t>(lo), p.coeffs().end());
  // Scale s = rho * x so the monic companion matrix is well balanced.
  const double rho = std::pow(std::abs(reduced.front() / reduced.back()), 1.0 / deg);
  const double lead = reduced.back();
  std::vector<double> q(reduced.size());
  double rp = 1.0;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    q[i] = reduced[i] * rp / (lead * std::pow(rho, deg));
    rp *= rho;
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -q[static_cast<std::size_t>(i)];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw Error("companion eigenvalue iteration did not converge");

  const Polynomial pr(reduced);
  const Polynomial dpr = derivative(pr);
  const auto& ev = solver.eigenvalues();
  for (int i = 0; i < deg; ++i) {
    const Complex r = ev(i) * rho;
    if (r.imag() == 0.0) {
      roots.push_back(Complex{polish(pr, dpr, r).real(), 0.0});
    } else if (r.imag() > 0.0) {
      const Complex rr = polish(pr, dpr, r);
      roots.push_back(rr);
      roots.push_back(std::conj(rr));
    }
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return roots;
}

RationalTF tf_series(const RationalTF& a, const RationalTF& b) {
  return {a.num * b.num, a.den * b.den, a.delay_s + b.delay_s};
}

RationalTF tf_feedback(const RationalTF& g, const RationalTF& h) {
  if (g.delay_s != 0.0 || h.delay_s != 0.0) {
    throw Error("delay inside algebraic loop; use Pade or FRF closure");
  }
  Polynomial num = g.num * h.den;
  Polynomial den = g.den * h.den + g.num * h.num;
  if (den.is_zero()) throw Error("feedback closure is singular (1 + GH == 0)");
  return {std::move(num), std::move(den)};
}

RationalTF tf_parallel(const RationalTF& a, const RationalTF& b) {
  if (a.delay_s != b.delay_s) throw Error("parallel sum requires equal delays");
  return {a.num * b.den + b.num * a.den, a.den * b.den, a.delay_s};
}

std::vector<FrfSample> freq_response(const RationalTF& tf, std::span<const double> omegas) {
  std::vector<FrfSample> out;
  out.reserve(omegas.size());
  double prev = -1.0;
  for (double w : omegas) {
    if (!(w >= 0.0) || !(w > prev)) throw Error("frequency grid must be nonnegative and strictly increasing");
    prev = w;
    const Complex s{0.0, w};
    const Complex d = tf.den(s);
    FrfSample smp{w, {}, false};
    if (std::abs(d) <= 1e-12 * horner_abs(tf.den, w)) {
      smp.singular = true;
      smp.value = Complex{std::numeric_limits<double>::infinity(), 0.0};
    } else {
      smp.value = tf.num(s) / d;
      if (tf.delay_s > 0.0) smp.value *= std::polar(1.0, -w * tf.delay_s);
    }
    out.push_back(smp);
  }
  return out;
}

PoleZeroSet poles_zeros(const RationalTF& tf) {
  PoleZeroSet pz;
  if (tf.den.degree() > 0) pz.poles = poly_roots(tf.den);
  if (tf.num.degree() > 0) pz.zeros = poly_roots(tf.num);
  pz.gain = tf.num.leading() / tf.den.leading();
  return pz;
}

double dc_gain(const RationalTF& tf) {
  const double n0 = tf.num[0];
  const double d0 = tf.den[0];
  if (d0 != 0.0) return n0 / d0;
  if (n0 == 0.0) throw Error("indeterminate DC gain; cancel common factor s first");
  std::size_t i = 1;
  while (tf.den[i] == 0.0) ++i;
  return std::copysign(std::numeric_limits<double>::infinity(), n0 * tf.den[i]);
}

RationalTF pade1(double tau_s) {
  if (!(tau_s > 0.0)) throw Error("Pade approximation needs a positive delay");
  const double wb = 2.0 / tau_s;
  return {Polynomial{wb, -1.0}, Polynomial{wb, 1.0}};
}

std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi > lo)) throw Error("log grid needs 0 < lo < hi");
  if (points_per_decade < 1) throw Error("points per decade must be positive");
  const double decades = std::log10(hi / lo);
  const auto n = static_cast<std::size_t>(std::ceil(decades * points_per_decade)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

double mag_db(Complex v) { return 20.0 * std::log10(std::abs(v)); }

double phase_deg(Complex v) { return std::arg(v) * 180.0 / std::numbers::pi; }

std::vector<double> unwrapped_phase_deg(std::span<const Complex> values) {
  std::vector<double> out;
  out.reserve(values.size());
  double offset = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double ph = phase_deg(values[i]);
    if (i > 0) {
      const double jump = ph + offset - prev;
      offset -= 360.0 * std::round(jump / 360.0);
    }
    prev = ph + offset;
    out.push_back(prev);
  }
  return out;
}

}  // namespace nrc
