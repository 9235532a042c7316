#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's algorithms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using C = std::complex<double>;

/// Horner evaluation of ascending coefficients.
inline C horner(const std::vector<double>& asc, C s) {
  C acc = 0.0;
  for (auto it = asc.rbegin(); it != asc.rend(); ++it) acc = acc * s + *it;
  return acc;
}

/// Ascending coefficients of a product of polynomials.
inline std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

inline std::vector<double> add(std::vector<double> a, const std::vector<double>& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

/// Durand-Kerner simultaneous iteration for all roots.
inline std::vector<C> durand_kerner(std::vector<double> asc) {
  while (asc.size() > 1 && asc.back() == 0.0) asc.pop_back();
  const std::size_t n = asc.size() - 1;
  const double lead = asc.back();
  for (auto& c : asc) c /= lead;
  double radius = 0.0;
  for (std::size_t i = 0; i < n; ++i) radius = std::max(radius, std::abs(asc[i]));
  radius += 1.0;
  std::vector<C> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = std::polar(radius * 0.9, 0.4 + 2.0 * M_PI * k / n);
  for (int it = 0; it < 2000; ++it) {
    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      C den = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) den *= z[k] - z[j];
      }
      const C step = horner(asc, z[k]) / den;
      z[k] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15 * radius) break;
  }
  return z;
}

/// Largest distance between two root sets after greedy matching.
inline double root_set_distance(std::vector<C> a, std::vector<C> b) {
  double worst = 0.0;
  for (const auto& r : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](C x, C y) { return std::abs(x - r) < std::abs(y - r); });
    if (it == b.end()) return INFINITY;
    worst = std::max(worst, std::abs(*it - r));
    b.erase(it);
  }
  return worst;
}

/// Dense log scan for the first omega where outside() holds, refined by bisection.
inline double first_exit(const std::function<bool(double)>& outside, double lo, double hi, int samples) {
  double prev = lo;
  for (int i = 1; i <= samples; ++i) {
    const double w = lo * std::pow(hi / lo, static_cast<double>(i) / samples);
    if (outside(w)) {
      double a = prev, b = w;
      for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (a + b);
        (outside(m) ? b : a) = m;
      }
      return 0.5 * (a + b);
    }
    prev = w;
  }
  return INFINITY;
}

inline std::mt19937_64 rng(std::uint64_t seed = 20240611) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

}  // namespace oracle
