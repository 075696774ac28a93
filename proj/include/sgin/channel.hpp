#pragma once

#include <random>
#include <stdexcept>
#include <string>

namespace sgin::channel {

inline constexpr double kSpeedOfLight = 299792458.0;

/// How the pointing error theta_0 is drawn when outages are realized.
///
/// HalfNormal is the law under which P{L_PL < g} = 1 - erf(sqrt(-ln g / (2 G0 sigma_p^2))),
/// i.e. the one that matches outage_probability(). Rayleigh gives P{L_PL < g} = g^(1/(2 G0 sigma_p^2)).
enum class PointingErrorModel { HalfNormal, Rayleigh };

/// Optical ISL transceiver constants. SI units throughout.
struct LinkParams {
  double eta_s = 0.8;                  // optical efficiency
  double divergence_rad = 0.1;         // full transmit divergence angle Theta_T
  double rx_diameter_m = 0.006;        // receiver telescope diameter D_R
  double pointing_error_rad = 0.01;    // nominal theta_0
  double beamwidth_3db_rad = 0.1;      // theta_3dB
  double carrier_hz = 193e12;          // f_c
  double bandwidth_fraction = 0.02;    // B = fraction * f_c
  double t_solar_k = 6000.0;
  double t_system_k = 1000.0;
  double t_cmb_k = 2.725;
  double boltzmann = 1.38e-23;
  double sigma_p = 0.05;               // pointing-error scale
  double snr_threshold_db = -110.0;
  double payload_bits = 5e3;           // s
  int frames_per_slot = 25;            // U
  double tx_power_min_w = 0.0316;
  double tx_power_max_w = 5.0;
  double gsl_wavelength_m = 0.0214;    // GSL radio wavelength; not used by the optical budget
  PointingErrorModel pointing_model = PointingErrorModel::HalfNormal;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
  double bandwidth_hz() const { return bandwidth_fraction * carrier_hz; }
  double snr_threshold_linear() const;
};

struct LinkMetrics {
  double distance_km = 0.0;
  double rx_power_w = 0.0;
  double snr_linear = 0.0;
  double rate_bps = 0.0;
  double energy_j = 0.0;
  double outage_prob = 0.0;
};

struct GammaApprox {
  double alpha = 0.0;  // shape
  double beta = 0.0;   // scale
};

class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

double transmitter_gain(const LinkParams& p);           // 16 / Theta_T^2
double receiver_gain(const LinkParams& p);              // (D_R pi / lambda)^2
double pointing_coefficient(const LinkParams& p);       // G0 = 4 ln 2 / theta_3dB^2
double pointing_loss(double theta_rad, const LinkParams& p);
double free_space_loss(double distance_km, const LinkParams& p);

/// P_R = P_T eta_S G_T G_R L_PL L_PS with L_PL at the nominal pointing error.
double received_power(double tx_power_w, double distance_km, const LinkParams& p);

/// sigma^2 = k_b B (T_s + T_0 + T_CMB)
double noise_power(const LinkParams& p);

/// B log2(1 + P_R / sigma^2), bits per second.
double achievable_rate(double rx_power_w, double noise_w, const LinkParams& p);

/// s P_T / (U rate); throws DomainError for a zero rate.
double frame_energy(double tx_power_w, double rate_bps, const LinkParams& p);

/// Density of L_PL on (0, 1) whose CDF is 1 - erf(sqrt(-ln x / (2 G0 sigma_p^2))).
double pointing_loss_pdf(double loss, const LinkParams& p);

/// Pointing-loss level below which the SNR misses the threshold:
/// Gamma_0 = sigma^2 SNR_th / (P_T eta_S G_T G_R L_PS).
double outage_loss_threshold(double tx_power_w, double distance_km, const LinkParams& p);

/// P{L_PL < Gamma_0}, clamped to 1 for Gamma_0 >= 1 and 0 for Gamma_0 <= 0.
double outage_probability(double tx_power_w, double distance_km, const LinkParams& p);
double outage_probability_from_threshold(double gamma0, const LinkParams& p);

/// One pointing-error draw under p.pointing_model with scale sigma_p.
double sample_pointing_error(const LinkParams& p, std::mt19937_64& rng);

/// True when a fresh pointing-error draw puts L_PL below gamma0.
bool sample_outage(double gamma0, const LinkParams& p, std::mt19937_64& rng);

/// All of the above for a single directed link.
LinkMetrics link_metrics(double tx_power_w, double distance_km, const LinkParams& p);

/// Moment-matched Gamma approximation of the shadowed-Rician power gain.
GammaApprox gsl_gamma_approx(double m, double b0, double omega);

}  // namespace sgin::channel
