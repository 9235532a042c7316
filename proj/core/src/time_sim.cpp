#include "nrc/time_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

#include <unsupported/Eigen/FFT>

namespace nrc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DiscreteSS static_gain(double k, double ts) {
  DiscreteSS s;
  s.a = MatrixXd::Zero(0, 0);
  s.b = MatrixXd::Zero(0, 1);
  s.c = MatrixXd::Zero(1, 0);
  s.d = MatrixXd::Constant(1, 1, k);
  s.ts = ts;
  return s;
}

void require_ts(double ts) {
  if (!(ts > 0.0) || !std::isfinite(ts)) throw Error("sampling time must be positive");
}

void require_same_ts(const DiscreteSS& a, const DiscreteSS& b) {
  if (std::abs(a.ts - b.ts) > 1e-12 * std::max(a.ts, b.ts)) throw Error("systems use different sampling times");
}

double scalar(const MatrixXd& m) { return m(0, 0); }

}  // namespace

Complex DiscreteSS::at(double omega) const {
  const Complex z = std::polar(1.0, omega * ts);
  Complex h = d(0, 0);
  if (order() > 0) {
    const Eigen::MatrixXcd zi = z * Eigen::MatrixXcd::Identity(order(), order()) - a.cast<Complex>();
    const Eigen::VectorXcd x = zi.partialPivLu().solve(b.cast<Complex>());
    h += (c.cast<Complex>() * x)(0, 0);
  }
  return h * std::pow(z, -input_delay_samples);
}

double DiscreteSS::dc_gain() const {
  double h = d(0, 0);
  if (order() > 0) {
    const MatrixXd m = MatrixXd::Identity(order(), order()) - a;
    h += (c * m.partialPivLu().solve(b))(0, 0);
  }
  return h;
}

DiscreteSS discretize(const RationalTF& tf, double ts, std::optional<double> prewarp_rad_s) {
  require_ts(ts);
  if (!tf.is_proper()) throw Error("cannot discretize an improper transfer function");
  if (tf.delay_s < 0.0) throw Error("delay must be nonnegative");
  const int n = tf.den.degree();
  double t_map = ts;
  if (prewarp_rad_s) {
    const double w0 = *prewarp_rad_s;
    if (!(w0 > 0.0) || w0 * ts >= std::numbers::pi) throw Error("prewarp frequency must lie in (0, Nyquist)");
    t_map = 2.0 * std::tan(w0 * ts / 2.0) / w0;
  }
  DiscreteSS out;
  if (n == 0) {
    out = static_gain(tf.num[0] / tf.den[0], ts);
  } else {
    const double an = tf.den.leading();
    double ws = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ai = std::abs(tf.den[i] / an);
      if (ai > 0.0) ws = std::max(ws, std::pow(ai, 1.0 / (n - i)));
    }
    if (ws == 0.0) ws = 1.0;
    // Coefficients of den(ws * sigma) / (an ws^n), likewise for num.
    std::vector<double> ad(n + 1), bn(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double scale = std::pow(ws, i - n) / an;
      ad[i] = tf.den[i] * scale;
      bn[i] = tf.num[i] * scale;
    }
    const double dd = bn[n];
    MatrixXd a = MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) a(n - 1, i) = -ad[i];
    MatrixXd b = MatrixXd::Zero(n, 1);
    b(n - 1, 0) = 1.0;
    MatrixXd c(1, n);
    for (int i = 0; i < n; ++i) c(0, i) = bn[i] - dd * ad[i];
    a *= ws;
    b *= ws;

    const MatrixXd id = MatrixXd::Identity(n, n);
    const Eigen::PartialPivLU<MatrixXd> lu(id - a * (t_map / 2.0));
    out.a = lu.solve(id + a * (t_map / 2.0));
    out.b = lu.solve(b) * t_map;
    out.c = c * lu.solve(id);
    out.d = MatrixXd::Constant(1, 1, dd) + out.c * b * (t_map / 2.0);
    out.ts = ts;
  }
  out.input_delay_samples = static_cast<int>(std::lround(tf.delay_s / ts));
  return out;
}

DiscreteSS ss_series(const DiscreteSS& first, const DiscreteSS& second) {
  require_same_ts(first, second);
  if (second.input_delay_samples != 0) throw Error("series connection supports a delay on the first system only");
  const Eigen::Index n1 = first.order();
  const Eigen::Index n2 = second.order();
  DiscreteSS s;
  s.ts = first.ts;
  s.input_delay_samples = first.input_delay_samples;
  s.a = MatrixXd::Zero(n1 + n2, n1 + n2);
  s.a.topLeftCorner(n1, n1) = first.a;
  s.a.bottomLeftCorner(n2, n1) = second.b * first.c;
  s.a.bottomRightCorner(n2, n2) = second.a;
  s.b = MatrixXd::Zero(n1 + n2, 1);
  s.b.topRows(n1) = first.b;
  s.b.bottomRows(n2) = second.b * first.d;
  s.c = MatrixXd::Zero(1, n1 + n2);
  s.c.leftCols(n1) = second.d * first.c;
  s.c.rightCols(n2) = second.c;
  s.d = second.d * first.d;
  return s;
}

DiscreteSS ss_parallel(const DiscreteSS& a, const DiscreteSS& b) {
  require_same_ts(a, b);
  if (a.input_delay_samples != 0 || b.input_delay_samples != 0) {
    throw Error("parallel connection requires delay-free systems");
  }
  const Eigen::Index n1 = a.order();
  const Eigen::Index n2 = b.order();
  DiscreteSS s;
  s.ts = a.ts;
  s.a = MatrixXd::Zero(n1 + n2, n1 + n2);
  s.a.topLeftCorner(n1, n1) = a.a;
  s.a.bottomRightCorner(n2, n2) = b.a;
  s.b = MatrixXd::Zero(n1 + n2, 1);
  s.b.topRows(n1) = a.b;
  s.b.bottomRows(n2) = b.b;
  s.c = MatrixXd::Zero(1, n1 + n2);
  s.c.leftCols(n1) = a.c;
  s.c.rightCols(n2) = b.c;
  s.d = a.d + b.d;
  return s;
}

DiscreteSS discretize_plant(const PlantSpec& spec, double ts, bool prewarp_modes) {
  spec.validate();
  require_ts(ts);
  std::optional<DiscreteSS> sum;
  for (const auto& m : spec.modes) {
    const double w2 = m.omega_rad_s * m.omega_rad_s;
    const RationalTF sec{Polynomial{spec.gain * m.weight * w2}, Polynomial{w2, 2.0 * m.zeta * m.omega_rad_s, 1.0}};
    const auto warp = prewarp_modes ? std::optional<double>(m.omega_rad_s) : std::nullopt;
    const DiscreteSS d = discretize(sec, ts, warp);
    sum = sum ? ss_parallel(*sum, d) : d;
  }
  DiscreteSS out = *sum;
  if (spec.amp_corner_rad_s) {
    const double wa = *spec.amp_corner_rad_s;
    out = ss_series(discretize(RationalTF{Polynomial{wa}, Polynomial{wa, 1.0}}, ts), out);
  }
  out.input_delay_samples = static_cast<int>(std::lround(spec.delay_s / ts));
  return out;
}

DiscreteSS discretize_tracker(const TrackerSpec& spec, double ts) {
  spec.validate();
  DiscreteSS out = discretize(pi_controller(spec.pi), ts);
  for (const auto& nt : spec.notches) out = ss_series(out, discretize(notch_filter(nt), ts));
  if (spec.lowpass_corner_rad_s) {
    const double wl = *spec.lowpass_corner_rad_s;
    out = ss_series(out, discretize(RationalTF{Polynomial{wl}, Polynomial{wl, 1.0}}, ts));
  }
  return out;
}

DiscreteFilter::DiscreteFilter(const DiscreteSS& sys) : sys_(sys), x_(VectorXd::Zero(sys.order())) {}

double DiscreteFilter::peek(double u) const {
  double y = sys_.d(0, 0) * u;
  if (sys_.order() > 0) y += sys_.c.row(0).dot(x_);
  return y;
}

void DiscreteFilter::advance(double u) {
  if (sys_.order() > 0) x_ = sys_.a * x_ + sys_.b.col(0) * u;
}

double DiscreteFilter::step(double u) {
  const double y = peek(u);
  advance(u);
  return y;
}

void DiscreteFilter::reset() { x_.setZero(); }

SimTrace simulate_dual_loop(const DiscreteSS& plant, const DiscreteSS& tracker, const DiscreteSS& nrc,
                            std::span<const double> r, std::span<const double> d, std::span<const double> n) {
  require_same_ts(plant, tracker);
  require_same_ts(plant, nrc);
  if (tracker.input_delay_samples != 0 || nrc.input_delay_samples != 0) {
    throw Error("controllers must be delay-free");
  }
  const std::size_t len = r.size();
  if (d.size() != len || n.size() != len) throw Error("r, d and n must have equal lengths");

  const std::size_t lag = static_cast<std::size_t>(std::max(plant.input_delay_samples, 1));
  std::vector<double> line(lag, 0.0);
  std::size_t head = 0;  // oldest entry, the plant input at the current sample

  DiscreteFilter g(plant);
  DiscreteFilter ct(tracker);
  DiscreteFilter cd(nrc);

  SimTrace t;
  for (auto* v : {&t.time_s, &t.r, &t.d, &t.n, &t.u, &t.x_true, &t.y_meas, &t.e}) v->resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double u_in = line[head];
    const double x = g.peek(u_in);
    const double y = x + n[k];
    const double e = r[k] - y;
    const double u = ct.step(e) - cd.step(y);
    g.advance(u_in);
    line[head] = u + d[k];
    head = (head + 1) % lag;

    t.time_s[k] = static_cast<double>(k) * plant.ts;
    t.r[k] = r[k];
    t.d[k] = d[k];
    t.n[k] = n[k];
    t.u[k] = u;
    t.x_true[k] = x;
    t.y_meas[k] = y;
    t.e[k] = e;
  }
  return t;
}

double closed_loop_spectral_radius(const DiscreteSS& plant, const DiscreteSS& tracker, const DiscreteSS& nrc) {
  require_same_ts(plant, tracker);
  require_same_ts(plant, nrc);
  const Eigen::Index np = plant.order();
  const Eigen::Index nl = std::max(plant.input_delay_samples, 1);
  const Eigen::Index nt = tracker.order();
  const Eigen::Index nn = nrc.order();
  const Eigen::Index op = 0, ob = np, ot = np + nl, on = np + nl + nt;
  const Eigen::Index dim = on + nn;

  // Buffer slot 0 holds the newest input, slot nl-1 the one applied now.
  Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(dim);
  y.segment(op, np) = plant.c.row(0);
  y(ob + nl - 1) = scalar(plant.d);
  const Eigen::RowVectorXd e = -y;
  Eigen::RowVectorXd ut = scalar(tracker.d) * e;
  ut.segment(ot, nt) += tracker.c.row(0);
  Eigen::RowVectorXd un = scalar(nrc.d) * y;
  un.segment(on, nn) += nrc.c.row(0);
  const Eigen::RowVectorXd u = ut - un;

  MatrixXd m = MatrixXd::Zero(dim, dim);
  m.block(op, op, np, np) = plant.a;
  m.block(op, ob + nl - 1, np, 1) = plant.b;
  m.row(ob) = u;
  for (Eigen::Index j = 1; j < nl; ++j) m(ob + j, ob + j - 1) = 1.0;
  m.block(ot, ot, nt, nt) += tracker.a;
  m.block(ot, 0, nt, dim) += tracker.b * e;
  m.block(on, on, nn, nn) += nrc.a;
  m.block(on, 0, nn, dim) += nrc.b * y;

  const Eigen::VectorXcd ev = m.eigenvalues();
  double rho = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) rho = std::max(rho, std::abs(ev(i)));
  return rho;
}

int phase_shift_samples(double phi_deg, double f_hz, double ts) {
  if (!(f_hz > 0.0)) throw Error("compensation frequency must be positive");
  require_ts(ts);
  const double td = phi_deg / (f_hz * 360.0);
  return static_cast<int>(std::lround(std::abs(td) / ts));
}

std::vector<double> phase_compensate(std::span<const double> y, double phi_deg, double f_hz, double ts) {
  const auto nd = static_cast<std::size_t>(phase_shift_samples(phi_deg, f_hz, ts));
  if (nd >= y.size()) throw Error("phase shift of " + std::to_string(nd) + " samples exceeds the record length");
  return {y.begin() + static_cast<std::ptrdiff_t>(nd), y.end()};
}

TrackingMetrics tracking_metrics(std::span<const double> r, std::span<const double> y) {
  if (r.empty() || y.empty()) throw Error("tracking metrics need nonempty records");
  if (r.size() != y.size()) throw Error("reference and output lengths differ");
  TrackingMetrics m;
  double ss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double e = y[i] - r[i];
    m.e_max = std::max(m.e_max, std::abs(e));
    ss += e * e;
  }
  m.e_rms = std::sqrt(ss / static_cast<double>(r.size()));
  return m;
}

FrfEstimate chirp_identify(std::span<const double> u, std::span<const double> y, double fs, std::size_t segment_len) {
  if (!(fs > 0.0)) throw Error("sampling frequency must be positive");
  if (segment_len < 4 || segment_len % 2 != 0) throw Error("segment length must be an even number of at least 4");
  if (u.size() != y.size()) throw Error("input and output lengths differ");
  if (u.size() < 2 * segment_len) throw Error("records must span at least two segments");

  const std::size_t len = segment_len;
  const std::size_t bins = len / 2 + 1;
  std::vector<double> win(len);
  for (std::size_t i = 0; i < len; ++i) {
    win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
  }
  std::vector<double> suu(bins, 0.0), syy(bins, 0.0);
  std::vector<Complex> suy(bins, Complex{});
  Eigen::FFT<double> fft;
  std::vector<double> su(len), sy(len);
  std::vector<Complex> fu, fy;
  for (std::size_t start = 0; start + len <= u.size(); start += len / 2) {
    double mu = 0.0, my = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      mu += u[start + i];
      my += y[start + i];
    }
    mu /= static_cast<double>(len);
    my /= static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) {
      su[i] = (u[start + i] - mu) * win[i];
      sy[i] = (y[start + i] - my) * win[i];
    }
    fft.fwd(fu, su);
    fft.fwd(fy, sy);
    for (std::size_t k = 0; k < bins; ++k) {
      suu[k] += std::norm(fu[k]);
      syy[k] += std::norm(fy[k]);
      suy[k] += std::conj(fu[k]) * fy[k];
    }
  }
  const double peak = *std::max_element(suu.begin(), suu.end());
  if (!(peak > 0.0)) throw Error("input has no spectral power");

  FrfEstimate est;
  for (std::size_t k = 1; k < bins; ++k) {
    if (suu[k] <= 1e-20 * peak) continue;
    const Complex h = suy[k] / suu[k];
    est.freq_hz.push_back(static_cast<double>(k) * fs / static_cast<double>(len));
    est.mag_db.push_back(mag_db(h));
    est.phase_deg.push_back(phase_deg(h));
    est.coherence.push_back(syy[k] > 0.0 ? std::min(1.0, std::norm(suy[k]) / (suu[k] * syy[k])) : 0.0);
  }
  if (est.freq_hz.empty()) throw Error("input has no spectral power");
  std::vector<Complex> unit(est.phase_deg.size());
  for (std::size_t i = 0; i < unit.size(); ++i) unit[i] = std::polar(1.0, est.phase_deg[i] * std::numbers::pi / 180.0);
  est.phase_deg = unwrapped_phase_deg(unit);
  return est;
}

std::vector<double> log_chirp(const ChirpPreset& p, double fs) {
  if (!(p.f0_hz > 0.0 && p.f1_hz > p.f0_hz)) throw Error("chirp needs 0 < f0 < f1");
  if (!(p.duration_s > 0.0) || !(fs > 0.0)) throw Error("chirp duration and sampling frequency must be positive");
  if (!(p.taper_fraction >= 0.0 && p.taper_fraction <= 0.5)) throw Error("chirp taper fraction must lie in [0, 0.5]");
  const auto len = static_cast<std::size_t>(std::lround(p.duration_s * fs));
  const double ratio = p.f1_hz / p.f0_hz;
  const double beta = p.duration_s / std::log(ratio);
  std::vector<double> x(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double phase = 2.0 * std::numbers::pi * p.f0_hz * beta * (std::pow(ratio, t / p.duration_s) - 1.0);
    x[i] = p.amplitude * std::cos(phase);
  }
  const auto nt = static_cast<std::size_t>(p.taper_fraction * static_cast<double>(len));
  for (std::size_t i = 0; i < nt; ++i) {
    const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(nt));
    x[i] *= w;
    x[len - 1 - i] *= w;
  }
  return x;
}

std::vector<double> simulate_open_loop(const DiscreteSS& sys, std::span<const double> u) {
  DiscreteFilter f(sys);
  const auto lag = static_cast<std::size_t>(sys.input_delay_samples);
  std::vector<double> y(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) y[k] = f.step(k >= lag ? u[k - lag] : 0.0);
  return y;
}

Complex sine_phasor(std::span<const double> x, double ts, double f_hz, std::size_t first_sample) {
  if (first_sample >= x.size() || x.size() - first_sample < 3) throw Error("sine fit needs at least three samples");
  if (!(f_hz > 0.0)) throw Error("sine fit frequency must be positive");
  const auto m = static_cast<Eigen::Index>(x.size() - first_sample);
  MatrixXd basis(m, 3);
  VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i) + first_sample;
    const double wt = 2.0 * std::numbers::pi * f_hz * static_cast<double>(k) * ts;
    basis(i, 0) = std::sin(wt);
    basis(i, 1) = std::cos(wt);
    basis(i, 2) = 1.0;
    rhs(i) = x[k];
  }
  const VectorXd coef = basis.colPivHouseholderQr().solve(rhs);
  // a sin + b cos = A sin(wt + phi) with A cos(phi) = a, A sin(phi) = b.
  return {coef(0), coef(1)};
}

std::vector<double> sine_signal(std::size_t len, double ts, double amplitude, double f_hz, double phase_rad) {
  std::vector<double> x(len);
  for (std::size_t k = 0; k < len; ++k) {
    x[k] = amplitude * std::sin(2.0 * std::numbers::pi * f_hz * static_cast<double>(k) * ts + phase_rad);
  }
  return x;
}

std::vector<double> uniform_noise(std::size_t len, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(len);
  // Fixed 53-bit mapping keeps the stream identical across standard libraries.
  for (auto& v : x) v = amplitude * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
  return x;
}

void write_sim_trace_csv(std::ostream& os, const SimTrace& t) {
  os << "time_s,r,d,n,u,x_true,y_meas,e\n" << std::setprecision(12);
  for (std::size_t k = 0; k < t.time_s.size(); ++k) {
    os << t.time_s[k] << ',' << t.r[k] << ',' << t.d[k] << ',' << t.n[k] << ',' << t.u[k] << ',' << t.x_true[k]
       << ',' << t.y_meas[k] << ',' << t.e[k] << '\n';
  }
}

void write_frf_estimate_csv(std::ostream& os, const FrfEstimate& f) {
  os << "freq_hz,mag_db,phase_deg,coherence\n" << std::setprecision(12);
  for (std::size_t k = 0; k < f.freq_hz.size(); ++k) {
    os << f.freq_hz[k] << ',' << f.mag_db[k] << ',' << f.phase_deg[k] << ',' << f.coherence[k] << '\n';
  }
}

}  // namespace nrc
