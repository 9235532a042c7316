#include "nrc/loop_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "nrc/nrc_design.hpp"

namespace nrc {

namespace {

constexpr double kRealTol = 1e-9;

std::optional<double> min_pair_damping(std::span<const Complex> poles) {
  std::optional<double> best;
  for (Complex p : poles) {
    if (p.imag() > kRealTol * std::abs(p)) {
      const double z = damping_ratio(p);
      if (!best || z < *best) best = z;
    }
  }
  return best;
}

// Roots of s^2 + b s + c without cancellation; the "+" branch first.
std::array<Complex, 2> monic_quadratic_roots(double b, double c) {
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0) {
    const double im = std::sqrt(-disc) / 2.0;
    return {Complex{-b / 2.0, im}, Complex{-b / 2.0, -im}};
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q == 0.0) return {Complex{0.0, 0.0}, Complex{0.0, 0.0}};
  const double r1 = q;
  const double r2 = c / q;
  // "+" branch is the larger (less negative) root for b > 0.
  return r1 > r2 ? std::array<Complex, 2>{Complex{r1, 0.0}, Complex{r2, 0.0}}
                 : std::array<Complex, 2>{Complex{r2, 0.0}, Complex{r1, 0.0}};
}

Complex polish_cubic(const Polynomial& p, Complex r) {
  const Polynomial dp({p[1], 2.0 * p[2], 3.0 * p[3]});
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

// Sign of the cubic discriminant after normalizing s by scale.
double cubic_discriminant(const Polynomial& p, double scale) {
  const double a = p[3];
  const double b = p[2] / (a * scale);
  const double c = p[1] / (a * scale * scale);
  const double d = p[0] / (a * scale * scale * scale);
  return 18.0 * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * c * c * c - 27.0 * d * d;
}

}  // namespace

bool InnerLoopResult::has_integrator() const { return std::isinf(dc); }

InnerLoopResult describe_loop(RationalTF g_d) {
  InnerLoopResult r;
  if (g_d.den.degree() > 0) r.poles = poly_roots(g_d.den);
  if (g_d.num.degree() > 0) r.zeros = poly_roots(g_d.num);
  r.dc = dc_gain(g_d);
  r.min_resonant_damping = min_pair_damping(r.poles);
  r.g_d = std::move(g_d);
  return r;
}

InnerLoopResult inner_closed_loop(const PlantSpec& plant, const RationalTF& nrc) {
  if (plant.delay_s != 0.0) {
    throw Error("inner_closed_loop needs a delay-free plant; use the Pade or FRF path for delayed plants");
  }
  return describe_loop(tf_feedback(build_plant(plant), nrc));
}

Polynomial inner_charpoly(double omega_n, double zeta_n, double gamma, double n) {
  const double w = omega_n;
  return Polynomial{n * (1.0 - gamma) * w * w * w, (2.0 * zeta_n * n + 1.0 + gamma) * w * w,
                    (n + 2.0 * zeta_n) * w, 1.0};
}

RouthReport routh_cubic(const Polynomial& charpoly) {
  if (charpoly.degree() != 3) throw Error("routh_cubic needs a degree-3 polynomial");
  const double a3 = charpoly[3];
  const double a2 = charpoly[2];
  const double a1 = charpoly[1];
  const double a0 = charpoly[0];
  if (!(a3 > 0.0)) throw Error("routh_cubic needs a positive leading coefficient");
  double s1 = 0.0;
  if (a2 != 0.0) {
    s1 = (a2 * a1 - a3 * a0) / a2;
  } else {
    s1 = -std::numeric_limits<double>::infinity();
  }
  RouthReport r;
  r.first_column = {a3, a2, s1, a0};
  r.stable = a3 > 0.0 && a2 > 0.0 && s1 > 0.0 && a0 > 0.0;
  const double tol = 1e-12 * charpoly.norm_inf();
  r.marginal = a2 > 0.0 && s1 > 0.0 && std::abs(a0) <= tol;
  return r;
}

std::array<Complex, 3> cubic_roots(const Polynomial& cubic) {
  if (cubic.degree() != 3) throw Error("cubic_roots needs a degree-3 polynomial");
  const double a = cubic[3];
  const double b = cubic[2] / a;
  const double c = cubic[1] / a;
  const double d = cubic[0] / a;
  if (d == 0.0) {
    const auto q = monic_quadratic_roots(b, c);
    return {Complex{0.0, 0.0}, q[0], q[1]};
  }
  const double p = c - b * b / 3.0;
  const double qq = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double shift = -b / 3.0;
  std::array<Complex, 3> roots;
  const double big = 4.0 * p * p * p + 27.0 * qq * qq;
  if (big < 0.0) {
    const double r = std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * qq / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      const double t = 2.0 * r * std::cos(phi / 3.0 - 2.0 * std::numbers::pi * k / 3.0);
      roots[static_cast<std::size_t>(k)] = Complex{polish_cubic(cubic, Complex{t + shift, 0.0}).real(), 0.0};
    }
  } else {
    const double disc = std::sqrt(std::max(0.0, qq * qq / 4.0 + p * p * p / 27.0));
    const double u = std::cbrt(-qq / 2.0 + std::copysign(disc, -qq));
    const double v = u != 0.0 ? -p / (3.0 * u) : 0.0;
    const double re = -(u + v) / 2.0 + shift;
    const double im = std::sqrt(3.0) / 2.0 * std::abs(u - v);
    roots[0] = Complex{polish_cubic(cubic, Complex{u + v + shift, 0.0}).real(), 0.0};
    if (im == 0.0) {
      roots[1] = roots[2] = Complex{re, 0.0};
    } else {
      const Complex pr = polish_cubic(cubic, Complex{re, im});
      roots[1] = Complex{pr.real(), std::abs(pr.imag())};
      roots[2] = std::conj(roots[1]);
    }
  }
  return roots;
}

std::array<Complex, 3> inner_poles_closed_form(double omega_n, double zeta_n, double n) {
  const double b = (2.0 * zeta_n + n) * omega_n;
  const double c = (2.0 * zeta_n * n + 2.0) * omega_n * omega_n;
  const auto q = monic_quadratic_roots(b, c);
  return {Complex{0.0, 0.0}, q[0], q[1]};
}

double damping_ratio(Complex p) {
  const double m = std::abs(p);
  if (m == 0.0) throw Error("damping ratio undefined for a pole at the origin");
  return std::clamp(-p.real() / m, -1.0, 1.0);
}

RootLocusTrace root_locus_n(const PlantSpec& plant, double gamma, std::span<const double> n_grid) {
  plant.validate();
  if (plant.modes.size() != 1 || plant.delay_s != 0.0 || plant.amp_corner_rad_s) {
    throw Error("root_locus_n needs a single-mode plant without delay or amplifier");
  }
  if (!(gamma > 0.0)) throw Error("gamma must be positive");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (!(n_grid[i] > n_grid[i - 1])) throw Error("n grid must be strictly increasing");
  }
  const double wn = plant.modes.front().omega_rad_s;
  const double zeta = plant.modes.front().zeta;
  const bool closed_form = gamma == 1.0;

  RootLocusTrace trace;
  trace.n_values.assign(n_grid.begin(), n_grid.end());

  // All-real predicate in normalized units; closed form for gamma = 1.
  auto all_real = [&](double n) {
    if (closed_form) return (n + 2.0 * zeta) * (n + 2.0 * zeta) - 8.0 * (1.0 + zeta * n) >= 0.0;
    return cubic_discriminant(inner_charpoly(wn, zeta, gamma, n), wn) >= 0.0;
  };

  if (closed_form) {
    for (double n : n_grid) {
      const auto p = inner_poles_closed_form(wn, zeta, n);
      trace.p2.push_back(p[1]);
      trace.p3.push_back(p[2]);
    }
  } else {
    auto roots_at = [&](double n) { return cubic_roots(inner_charpoly(wn, zeta, gamma, n)); };
    auto assign = [](const std::array<Complex, 3>& prev, const std::array<Complex, 3>& r, bool& ambiguous) {
      std::array<int, 3> perm{0, 1, 2};
      std::array<int, 3> best_perm = perm;
      double best = std::numeric_limits<double>::infinity();
      double second = best;
      do {
        double cost = 0.0;
        for (int i = 0; i < 3; ++i) cost += std::abs(r[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] - prev[static_cast<std::size_t>(i)]);
        if (cost < best) {
          second = best;
          best = cost;
          best_perm = perm;
        } else if (cost < second) {
          second = cost;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      ambiguous = second < 1.1 * best && best > 0.0;
      return std::array<Complex, 3>{r[static_cast<std::size_t>(best_perm[0])], r[static_cast<std::size_t>(best_perm[1])],
                                    r[static_cast<std::size_t>(best_perm[2])]};
    };

    std::array<Complex, 3> cur{};
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      const double n = n_grid[i];
      if (i == 0) {
        auto r = roots_at(n);
        // p1 is the real root nearest the origin; p2 takes the upper half plane.
        std::size_t i1 = 0;
        for (std::size_t j = 1; j < 3; ++j) {
          const bool better_real = r[j].imag() == 0.0 && (r[i1].imag() != 0.0 || std::abs(r[j]) < std::abs(r[i1]));
          if (better_real) i1 = j;
        }
        std::array<Complex, 3> ordered{r[i1], {}, {}};
        std::size_t k = 1;
        for (std::size_t j = 0; j < 3; ++j) {
          if (j != i1) ordered[k++] = r[j];
        }
        if (ordered[1].imag() < ordered[2].imag()) std::swap(ordered[1], ordered[2]);
        cur = ordered;
      } else {
        // Walk from the previous grid point, halving the step while the matching is ambiguous.
        const double n0 = n_grid[i - 1];
        double from = n0;
        for (int walk = 0; from < n; ++walk) {
          double step = n - from;
          std::array<Complex, 3> next{};
          for (int depth = 0;; ++depth) {
            bool ambiguous = false;
            next = assign(cur, roots_at(from + step), ambiguous);
            if (!ambiguous || depth >= 6 || walk >= 64) break;
            step /= 2.0;
          }
          cur = next;
          from += step;
          if (walk >= 64) break;
        }
      }
      trace.p2.push_back(cur[1]);
      trace.p3.push_back(cur[2]);
    }
  }

  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!all_real(n_grid[i])) continue;
    if (i == 0) break;
    double lo = n_grid[i - 1];
    double hi = n_grid[i];
    while (hi - lo > 1e-7) {
      const double mid = 0.5 * (lo + hi);
      (all_real(mid) ? hi : lo) = mid;
    }
    trace.bifurcation_n = hi;
    break;
  }
  return trace;
}

void write_root_locus_csv(std::ostream& os, const RootLocusTrace& trace) {
  const auto old = os.precision(12);
  os << "n,re_p2,im_p2,re_p3,im_p3\n";
  for (std::size_t i = 0; i < trace.n_values.size(); ++i) {
    os << trace.n_values[i] << ',' << trace.p2[i].real() << ',' << trace.p2[i].imag() << ','
       << trace.p3[i].real() << ',' << trace.p3[i].imag() << '\n';
  }
  os.precision(old);
}

RationalTF delayed_inner_cl(double omega_n, double n, double m) {
  if (!(m > 0.0) || !(n > 0.0)) throw Error("delayed_inner_cl needs n > 0 and m > 0");
  const double w = omega_n;
  const double w2 = w * w;
  Polynomial num{m * n * w2 * w2, -(n - m) * w2 * w, -w2};
  Polynomial den{0.0, 2.0 * (n + m) * w2 * w, n * m * w2, (n + m) * w, 1.0};
  return {std::move(num), std::move(den)};
}

double pade_m_from_delay(double tau_s, double omega_n) {
  if (!(tau_s > 0.0) || !(omega_n > 0.0)) throw Error("delay and omega_n must be positive");
  return 2.0 / (tau_s * omega_n);
}

double m_for_phase_lag(double phi_deg) {
  if (!(phi_deg > 0.0 && phi_deg < 180.0)) throw Error("Pade phase lag must lie in (0, 180) degrees");
  return 1.0 / std::tan(phi_deg * std::numbers::pi / 360.0);
}

std::array<double, 4> phase_lag_preset_m() {
  return {m_for_phase_lag(10.0), m_for_phase_lag(30.0), m_for_phase_lag(60.0), m_for_phase_lag(85.0)};
}

Polynomial loaded_charpoly(double omega_n, double zeta_n, double n, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error("load scaling eta must lie in (0,1]");
  const double w = omega_n;
  const double wl = eta * omega_n;
  return Polynomial{0.0, 2.0 * zeta_n * n * w * wl + 2.0 * wl * wl, n * w + 2.0 * zeta_n * wl, 1.0};
}

bool loaded_damping_check(double zeta_n, double n, double eta) {
  const double threshold = min_damping_n(zeta_n, eta);
  const bool by_formula = n >= threshold;
  if (std::abs(n - threshold) > 1e-6 * threshold) {
    const auto roots = cubic_roots(loaded_charpoly(1.0, zeta_n, n, eta));
    const bool by_roots = std::all_of(roots.begin(), roots.end(), [](Complex r) { return r.imag() == 0.0; });
    if (by_roots != by_formula) throw std::logic_error("loaded damping condition disagrees with pole locations");
  }
  return by_formula;
}

RationalTF two_mode_inner_cl(double alpha, double beta, double gamma, double n, double omega_n) {
  if (!(alpha > 1.0) || !(beta > 0.0)) throw Error("two-mode loop needs alpha > 1 and beta > 0");
  const double w = omega_n;
  const double w2 = w * w;
  const double a2 = alpha * alpha;
  const double k = gamma / (1.0 + beta);
  Polynomial modal{a2 * w2 * w2 * (1.0 + beta), 0.0, (1.0 + a2 * beta) * w2};
  Polynomial num = modal * Polynomial{n * w, 1.0};
  const double c5 = 1.0;
  const double c4 = n * w;
  const double c3 = ((1.0 + a2) + k * (1.0 + a2 * beta)) * w2;
  const double c2 = ((1.0 + a2) - k * (1.0 + a2 * beta)) * n * w2 * w;
  const double c1 = a2 * w2 * w2 * (1.0 + k * (1.0 + beta));
  const double c0 = a2 * n * w2 * w2 * w * (1.0 - k * (1.0 + beta));
  return {std::move(num), Polynomial{c0, c1, c2, c3, c4, c5}};
}

SecondPeak damped_second_peak(double alpha, double beta, double gamma, double n, double omega_n) {
  const RationalTF g = two_mode_inner_cl(alpha, beta, gamma, n, omega_n);
  const double wz = two_mode_zero(alpha, beta, omega_n);
  const auto grid = log_grid(wz * (1.0 + 1e-6), 3.0 * alpha * omega_n, 20000);
  auto mag = [&](double w) { return std::abs(g.at(w)); };
  std::vector<double> m(grid.size());
  std::transform(grid.begin(), grid.end(), m.begin(), mag);
  std::optional<std::size_t> best;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (m[i] >= m[i - 1] && m[i] > m[i + 1] && (!best || m[i] > m[*best])) best = i;
  }
  if (!best) throw Error("no local maximum of the damped two-mode response above the zero");
  // Golden-section refinement on the bracketing interval.
  double lo = grid[*best - 1];
  double hi = grid[*best + 1];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = mag(x1);
  double f2 = mag(x2);
  while (hi - lo > 1e-12 * hi) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = mag(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = mag(x2);
    }
  }
  SecondPeak peak;
  peak.omega_rad_s = 0.5 * (lo + hi);
  peak.magnitude = mag(peak.omega_rad_s);
  if (std::abs(n - alpha) <= 1e-12 * alpha) {
    peak.expected = PeakShift::unchanged;
  } else {
    peak.expected = n < alpha ? PeakShift::raised : PeakShift::lowered;
  }
  return peak;
}

InnerLoopResult tamed_inner_cl(double omega_n, double n, double l) {
  if (!(n > 0.0) || !(l > 0.0)) throw Error("tamed loop needs n > 0 and l > 0");
  const double w = omega_n;
  const double w2 = w * w;
  const Polynomial cubic{(n + 2.0 * l) * w2 * w, (n * l + 1.0) * w2, (n + l) * w, 1.0};
  InnerLoopResult r;
  r.g_d = RationalTF{Polynomial{n * l * w2 * w2, (n + l) * w2 * w, w2}, cubic * Polynomial{0.0, 1.0}};
  const auto cr = cubic_roots(cubic);
  r.poles = {Complex{0.0, 0.0}, cr[0], cr[1], cr[2]};
  r.zeros = poly_roots(r.g_d.num);
  r.dc = dc_gain(r.g_d);
  r.min_resonant_damping = min_pair_damping(cr);
  return r;
}

}  // namespace nrc
