#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nrc {

using Complex = std::complex<double>;

/// Error raised by every module on contract violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real polynomial in s, coefficients stored in ascending powers.
///
/// The zero polynomial is stored as {0}. Exact leading zeros are trimmed on
/// construction; cancellation noise from sums is handled in operator+.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  Polynomial(std::initializer_list<double> ascending);
  explicit Polynomial(std::vector<double> ascending);

  static Polynomial constant(double c) { return Polynomial({c}); }
  /// Monic polynomial with the given real roots.
  static Polynomial from_real_roots(std::span<const double> roots);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
  std::span<const double> coeffs() const { return coeffs_; }
  /// Coefficient of s^i, zero beyond the degree.
  double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
  double leading() const { return coeffs_.back(); }
  double norm_inf() const;
  double norm2() const;

  double operator()(double s) const;
  Complex operator()(Complex s) const;

  Polynomial operator-() const;
  Polynomial& operator*=(double k);

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double k, Polynomial p) { return p *= k; }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// Rational function num(s)/den(s) followed by a pure delay e^{-delay_s * s}.
struct RationalTF {
  Polynomial num{1.0};
  Polynomial den{1.0};
  double delay_s = 0.0;

  RationalTF() = default;
  RationalTF(Polynomial n, Polynomial d, double delay = 0.0);

  static RationalTF gain(double k) { return {Polynomial{k}, Polynomial{1.0}}; }
  static RationalTF delay(double tau_s) { return {Polynomial{1.0}, Polynomial{1.0}, tau_s}; }

  /// Rational part only; the delay factor is not applied.
  Complex eval_rational(Complex s) const { return num(s) / den(s); }
  /// Full response at s = i*omega including the exact delay phase.
  Complex at(double omega) const;

  bool is_proper() const { return num.degree() <= den.degree(); }
  bool is_strictly_proper() const { return num.degree() < den.degree(); }
};

struct FrfSample {
  double omega_rad_s = 0.0;
  Complex value;
  /// Set when omega sits on an imaginary-axis pole; value is then infinite.
  bool singular = false;
};

struct PoleZeroSet {
  std::vector<Complex> poles;
  std::vector<Complex> zeros;
  double gain = 0.0;
};

inline constexpr int kMaxRootDegree = 12;

/// Roots of p via companion-matrix eigenvalues, Newton-polished and
/// conjugate-paired. Zero roots from trailing zero coefficients are exact.
std::vector<Complex> poly_roots(const Polynomial& p);

RationalTF tf_series(const RationalTF& a, const RationalTF& b);
/// Negative feedback closure g / (1 + g h). Both arguments must be delay-free.
RationalTF tf_feedback(const RationalTF& g, const RationalTF& h);
/// Parallel sum a + b (delay-free).
RationalTF tf_parallel(const RationalTF& a, const RationalTF& b);

std::vector<FrfSample> freq_response(const RationalTF& tf, std::span<const double> omegas);
PoleZeroSet poles_zeros(const RationalTF& tf);

/// num(0)/den(0); +/-infinity when only den(0) vanishes.
double dc_gain(const RationalTF& tf);

/// First-order Pade approximant (w_b - s)/(w_b + s), w_b = 2/tau.
RationalTF pade1(double tau_s);

/// Logarithmic grid from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int points_per_decade = 400);

double mag_db(Complex v);
double phase_deg(Complex v);
/// Unwrapped phase in degrees along a sequence of samples.
std::vector<double> unwrapped_phase_deg(std::span<const Complex> values);

}  // namespace nrc
