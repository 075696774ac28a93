#include "sgin/channel.hpp"

#include <cmath>
#include <fmt/format.h>

#include "sgin/geometry.hpp"

namespace sgin::channel {

namespace {

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(fmt::format("link.{} = {} must be finite and positive", field, v));
}

}  // namespace

void LinkParams::validate() const {
  require_positive(eta_s, "eta_s");
  if (eta_s > 1.0) throw ConfigError(fmt::format("link.eta_s = {} is outside (0, 1]", eta_s));
  require_positive(divergence_rad, "divergence_rad");
  require_positive(rx_diameter_m, "rx_diameter_m");
  require_positive(pointing_error_rad, "pointing_error_rad");
  require_positive(beamwidth_3db_rad, "beamwidth_3db_rad");
  require_positive(carrier_hz, "carrier_hz");
  require_positive(bandwidth_fraction, "bandwidth_fraction");
  require_positive(t_solar_k, "t_solar_k");
  require_positive(t_system_k, "t_system_k");
  require_positive(t_cmb_k, "t_cmb_k");
  require_positive(boltzmann, "boltzmann");
  require_positive(sigma_p, "sigma_p");
  require_positive(payload_bits, "payload_bits");
  require_positive(tx_power_min_w, "tx_power_min_w");
  require_positive(tx_power_max_w, "tx_power_max_w");
  require_positive(gsl_wavelength_m, "gsl_wavelength_m");
  if (tx_power_max_w < tx_power_min_w)
    throw ConfigError(fmt::format("link.tx_power_max_w = {} is below link.tx_power_min_w = {}",
                                  tx_power_max_w, tx_power_min_w));
  if (!std::isfinite(snr_threshold_db))
    throw ConfigError("link.snr_threshold_db must be finite");
  if (frames_per_slot < 1)
    throw ConfigError(fmt::format("link.frames_per_slot = {} must be at least 1", frames_per_slot));
}

double LinkParams::snr_threshold_linear() const { return std::pow(10.0, snr_threshold_db / 10.0); }

double transmitter_gain(const LinkParams& p) { return 16.0 / (p.divergence_rad * p.divergence_rad); }

double receiver_gain(const LinkParams& p) {
  const double g = p.rx_diameter_m * geo::kPi / p.wavelength_m();
  return g * g;
}

double pointing_coefficient(const LinkParams& p) {
  return 4.0 * std::log(2.0) / (p.beamwidth_3db_rad * p.beamwidth_3db_rad);
}

double pointing_loss(double theta_rad, const LinkParams& p) {
  return std::exp(-pointing_coefficient(p) * theta_rad * theta_rad);
}

double free_space_loss(double distance_km, const LinkParams& p) {
  if (!(distance_km > 0.0))
    throw DomainError(fmt::format("free-space loss undefined at distance {} km", distance_km));
  const double g = p.wavelength_m() / (4.0 * geo::kPi * distance_km * 1e3);
  return g * g;
}

double received_power(double tx_power_w, double distance_km, const LinkParams& p) {
  return tx_power_w * p.eta_s * transmitter_gain(p) * receiver_gain(p) *
         pointing_loss(p.pointing_error_rad, p) * free_space_loss(distance_km, p);
}

double noise_power(const LinkParams& p) {
  return p.boltzmann * p.bandwidth_hz() * (p.t_solar_k + p.t_system_k + p.t_cmb_k);
}

double achievable_rate(double rx_power_w, double noise_w, const LinkParams& p) {
  // log1p keeps the deep low-SNR regime (SNR ~ 1e-9) accurate.
  return p.bandwidth_hz() * std::log1p(rx_power_w / noise_w) / std::log(2.0);
}

double frame_energy(double tx_power_w, double rate_bps, const LinkParams& p) {
  if (!(rate_bps > 0.0)) throw DomainError("frame energy undefined for a zero-rate link");
  return p.payload_bits * tx_power_w / (p.frames_per_slot * rate_bps);
}

double pointing_loss_pdf(double loss, const LinkParams& p) {
  if (!(loss > 0.0 && loss < 1.0))
    throw DomainError(fmt::format("pointing-loss density is defined on (0, 1), got {}", loss));
  const double c = 2.0 * pointing_coefficient(p) * p.sigma_p * p.sigma_p;
  return std::pow(loss, 1.0 / c - 1.0) / std::sqrt(-geo::kPi * c * std::log(loss));
}

double outage_loss_threshold(double tx_power_w, double distance_km, const LinkParams& p) {
  const double budget = tx_power_w * p.eta_s * transmitter_gain(p) * receiver_gain(p) *
                        free_space_loss(distance_km, p);
  return noise_power(p) * p.snr_threshold_linear() / budget;
}

double outage_probability_from_threshold(double gamma0, const LinkParams& p) {
  if (gamma0 >= 1.0) return 1.0;
  if (gamma0 <= 0.0) return 0.0;
  const double c = 2.0 * pointing_coefficient(p) * p.sigma_p * p.sigma_p;
  return std::erfc(std::sqrt(-std::log(gamma0) / c));
}

double outage_probability(double tx_power_w, double distance_km, const LinkParams& p) {
  return outage_probability_from_threshold(outage_loss_threshold(tx_power_w, distance_km, p), p);
}

LinkMetrics link_metrics(double tx_power_w, double distance_km, const LinkParams& p) {
  LinkMetrics m;
  m.distance_km = distance_km;
  m.rx_power_w = received_power(tx_power_w, distance_km, p);
  const double noise = noise_power(p);
  m.snr_linear = m.rx_power_w / noise;
  m.rate_bps = achievable_rate(m.rx_power_w, noise, p);
  m.energy_j = frame_energy(tx_power_w, m.rate_bps, p);
  m.outage_prob = outage_probability(tx_power_w, distance_km, p);
  return m;
}

GammaApprox gsl_gamma_approx(double m, double b0, double omega) {
  if (!(m > 0.0) || !(b0 > 0.0) || !(omega >= 0.0))
    throw DomainError(fmt::format("gamma approximation needs m > 0, b0 > 0, omega >= 0 (got {}, {}, {})",
                                  m, b0, omega));
  const double s = 2.0 * b0 + omega;
  const double q = 4.0 * m * b0 * b0 + 4.0 * m * b0 * omega + omega * omega;
  return {m * s * s / q, q / (m * s)};
}

double sample_pointing_error(const LinkParams& p, std::mt19937_64& rng) {
  if (p.pointing_model == PointingErrorModel::Rayleigh) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return p.sigma_p * std::sqrt(-2.0 * std::log1p(-u(rng)));
  }
  std::normal_distribution<double> n(0.0, p.sigma_p);
  return std::abs(n(rng));
}

bool sample_outage(double gamma0, const LinkParams& p, std::mt19937_64& rng) {
  if (gamma0 >= 1.0) return true;
  if (gamma0 <= 0.0) return false;
  return pointing_loss(sample_pointing_error(p, rng), p) < gamma0;
}

}  // namespace sgin::channel
