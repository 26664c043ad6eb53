#pragma once

// Synthetic 5G/IMU/odometer observables from a ground-truth trajectory.
//
// The IMU stream is produced by inverting the mechanization step by step
// (attitude increments -> body rates, velocity increments -> specific force)
// so that a zero-error stream mechanizes back onto the truth; errors are then
// layered on as first-order Gauss-Markov biases plus white noise.

#include <cstdint>
#include <optional>
#include <vector>

#include "navfuse/scenario.hpp"
#include "navfuse/sensors.hpp"
#include "navfuse/trajectory.hpp"

namespace navfuse {

struct FivegSimConfig {
  double rate_hz = 10;
  double sigma_rtt_s = 2e-9;            // timing noise on the RTT
  double sigma_aod_rad = 0.1 * kDegToRad<>;
  double sigma_power_db = 0.05;
  double tx_power_dbm = 30.0;
  double pathloss_exponent = 2.0;       // LOS log-distance exponent
  double pathloss_ref_m = 1.0;
  double carrier_hz = 28e9;
  double nlos_bias_min_m = 10.0;        // excess time-path range under NLOS
  double nlos_bias_max_m = 80.0;
  // Extra NLOS power loss. Nonzero values push the power-implied range long
  // and eat into the detector margin; the range-differencing invariant is
  // guaranteed at 0.
  double nlos_extra_atten_db = 0.0;
};

// Free-space reference loss at distance d, dB.
double fspl_db(double d_m, double carrier_hz);

// Received power of the LOS log-distance model at geometric range r.
double log_distance_power_dbm(double r_m, const FivegSimConfig& cfg);

// Inversion used by the NLOS detector: range implied by a received power
// under the LOS model.
double power_implied_range_m(double rx_power_dbm, double tx_power_dbm,
                             double pathloss_exponent, double pathloss_ref_m,
                             double carrier_hz);

std::vector<Meas5G> gen_5g(const Trajectory& traj, const std::vector<BsSite>& sites,
                           const VisibilityModel& vis, const FivegSimConfig& cfg,
                           int zone, bool north, std::uint64_t seed);

// Exact discretization of the first-order Gauss-Markov bias:
//   b_k = exp(-beta dt) b_{k-1} + n_k,  var(n_k) = sigma^2 (1 - exp(-2 beta dt)).
// noise_draw is a unit-variance draw; beta = 0 degenerates to a constant.
double gm_discrete_step(double bias, double beta, double sigma, double dt,
                        double noise_draw);

struct ImuSimConfig {
  double rate_hz = 100;
  GaussMarkovParams gm;
  // Fixed initial bias instead of a draw from the stationary distribution
  // (used by truth-injection experiments).
  std::optional<BiasState> initial_bias;
};

struct ImuStream {
  std::vector<ImuSample> samples;
  std::vector<BiasState> bias_truth;  // bias realization at each sample
};

ImuStream gen_imu(const Trajectory& traj, const ImuSimConfig& cfg, std::uint64_t seed);

struct OdoSimConfig {
  double rate_hz = 10;
  double scale_error = 0.0;       // deterministic scale-factor error
  double sigma_scale = 0.0;       // random per-run scale factor draw
  double sigma_speed_mps = 0.05;  // additive white speed noise
};

std::vector<OdoSample> gen_odo(const Trajectory& traj, const WheelConfig& wheel,
                               const OdoSimConfig& cfg, std::uint64_t seed);

}  // namespace navfuse
