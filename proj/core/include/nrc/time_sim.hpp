#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nrc/lti.hpp"
#include "nrc/plant.hpp"
#include "nrc/tracking.hpp"

namespace nrc {

/// x[k+1] = A x[k] + B u[k - N], y[k] = C x[k] + D u[k - N].
struct DiscreteSS {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  Eigen::MatrixXd d;
  double ts = 0.0;
  int input_delay_samples = 0;

  Eigen::Index order() const { return a.rows(); }
  /// Response on the unit circle at z = exp(i omega ts), delay included.
  Complex at(double omega) const;
  /// Output for a held constant input once transients decay.
  double dc_gain() const;
};

/// Bilinear map of a controllable canonical realization.
///
/// The realization is built in frequency-normalized time so coefficient
/// spreads of high-order filters stay well conditioned. With `prewarp_rad_s`
/// the map is exact at that frequency.
DiscreteSS discretize(const RationalTF& tf, double ts, std::optional<double> prewarp_rad_s = std::nullopt);

/// Series connection: output of `first` drives `second`. Delays must be zero except on `first`.
DiscreteSS ss_series(const DiscreteSS& first, const DiscreteSS& second);
/// Sum of outputs for a shared input; neither may carry a delay.
DiscreteSS ss_parallel(const DiscreteSS& a, const DiscreteSS& b);

/// Modal plant: each mode bilinear-mapped on its own (optionally prewarped at
/// its own frequency), summed, then the amplifier section in series.
DiscreteSS discretize_plant(const PlantSpec& spec, double ts, bool prewarp_modes = true);

/// Tracker discretized section by section (PI, notches, low-pass).
DiscreteSS discretize_tracker(const TrackerSpec& spec, double ts);

/// Running state of a DiscreteSS; the input delay line is not applied here.
class DiscreteFilter {
 public:
  explicit DiscreteFilter(const DiscreteSS& sys);

  /// y[k] for input u[k], then advances the state.
  double step(double u);
  /// y[k] from the current state for input u[k], without advancing.
  double peek(double u) const;
  void advance(double u);
  void reset();

 private:
  DiscreteSS sys_;
  Eigen::VectorXd x_;
};

struct SimTrace {
  std::vector<double> time_s;
  std::vector<double> r;
  std::vector<double> d;
  std::vector<double> n;
  std::vector<double> u;
  std::vector<double> x_true;
  std::vector<double> y_meas;
  std::vector<double> e;
};

/// Dual loop: e = r - y, u = C_t(e) - C_d(y), x = G(u + d), y = x + n.
///
/// The measurement used at sample k is the plant output formed from its
/// state and delayed input. A plant without input delay gets one sample of
/// computation delay so the biproper controllers never see a same-sample loop.
SimTrace simulate_dual_loop(const DiscreteSS& plant, const DiscreteSS& tracker, const DiscreteSS& nrc,
                            std::span<const double> r, std::span<const double> d, std::span<const double> n);

/// Spectral radius of the closed-loop state matrix used by simulate_dual_loop.
double closed_loop_spectral_radius(const DiscreteSS& plant, const DiscreteSS& tracker, const DiscreteSS& nrc);

/// Samples the phase lag phi_deg represents at f_hz: round(|phi / (f 360)| / ts).
int phase_shift_samples(double phi_deg, double f_hz, double ts);
/// y shifted forward by phase_shift_samples, tail truncated.
std::vector<double> phase_compensate(std::span<const double> y, double phi_deg, double f_hz, double ts);

struct TrackingMetrics {
  double e_max = 0.0;
  double e_rms = 0.0;
};

TrackingMetrics tracking_metrics(std::span<const double> r, std::span<const double> y);

struct FrfEstimate {
  std::vector<double> freq_hz;
  std::vector<double> mag_db;
  std::vector<double> phase_deg;
  std::vector<double> coherence;
};

/// Welch H1 estimate S_uy / S_uu over Hann-windowed half-overlapping segments.
FrfEstimate chirp_identify(std::span<const double> u, std::span<const double> y, double fs, std::size_t segment_len);

struct ChirpPreset {
  double f0_hz = 10.0;
  double f1_hz = 5000.0;
  double duration_s = 10.0;
  double amplitude = 0.1;
  /// Raised-cosine taper length at each end as a fraction of the duration.
  double taper_fraction = 0.05;
};

/// Logarithmic sine sweep sampled at fs.
std::vector<double> log_chirp(const ChirpPreset& preset, double fs);

/// Open-loop response of a discrete system to u, including its input delay.
std::vector<double> simulate_open_loop(const DiscreteSS& sys, std::span<const double> u);

/// Least-squares phasor of the f_hz component of x (offset removed), as A e^{i phi} for A sin(w t + phi).
Complex sine_phasor(std::span<const double> x, double ts, double f_hz, std::size_t first_sample = 0);

std::vector<double> sine_signal(std::size_t len, double ts, double amplitude, double f_hz, double phase_rad = 0.0);
/// Seeded uniform noise on [-amplitude, amplitude].
std::vector<double> uniform_noise(std::size_t len, double amplitude, std::uint64_t seed);

void write_sim_trace_csv(std::ostream& os, const SimTrace& trace);
void write_frf_estimate_csv(std::ostream& os, const FrfEstimate& frf);

}  // namespace nrc
