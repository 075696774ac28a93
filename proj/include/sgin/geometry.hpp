#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgin {

/// Thrown when a scenario or constellation description violates its invariants.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthMuKm3PerS2 = 398600.4418;
inline constexpr double kSiderealDayS = 86164.0;
inline constexpr double kGeoAltitudeKm = 35786.0;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

using Vec3 = std::array<double, 3>;

double norm(const Vec3& v);
double distance(const Vec3& a, const Vec3& b);
double dot(const Vec3& a, const Vec3& b);

enum class WalkerPattern { Star, Delta };

struct ConstellationSpec {
  int total_sats = 80;
  int num_orbits = 4;
  int sats_per_orbit = 20;
  double altitude_km = 500.0;
  double inclination_deg = 45.0;
  int phasing_factor = 1;
  WalkerPattern pattern = WalkerPattern::Delta;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  double orbit_radius_km() const { return kEarthRadiusKm + altitude_km; }
  double period_s() const;
  /// Ascending-node spread: 180 deg for Star, 360 deg for Delta.
  double node_spread_deg() const;
  std::string walker_notation() const;

  static ConstellationSpec walker(WalkerPattern pattern, int total, int orbits, int phasing,
                                  double altitude_km, double inclination_deg);
};

struct SatId {
  int orbit = 0;
  int slot = 0;
  auto operator<=>(const SatId&) const = default;
};

struct SatelliteEphemeris {
  SatId id;
  Vec3 position_km{};
  double epoch_s = 0.0;
};

/// Position on a circular orbit: Rz(raan) * Rx(inclination) * (r cos u, r sin u, 0).
Vec3 orbital_position(double radius_km, double raan_rad, double inclination_rad, double arg_latitude_rad);

/// Dense index of a satellite: orbit * sats_per_orbit + slot.
inline int sat_index(const ConstellationSpec& spec, SatId id) {
  return id.orbit * spec.sats_per_orbit + id.slot;
}
inline SatId sat_from_index(const ConstellationSpec& spec, int index) {
  return {index / spec.sats_per_orbit, index % spec.sats_per_orbit};
}

/// One ephemeris per satellite at time t (seconds from scenario start), in sat_index order.
std::vector<SatelliteEphemeris> propagate(const ConstellationSpec& spec, double t_s);

/// Maximum line-of-sight range for a satellite at the given altitude: 2*sqrt((R+h)^2 - R^2).
double comm_radius(double altitude_km);

/// Distance predicate used for inter-orbit links; symmetric in (a, b).
bool within_comm_range(const SatelliteEphemeris& a, const SatelliteEphemeris& b,
                       const ConstellationSpec& spec);

/// Nearest satellite of `orbit` within range of `from`, or -1. Ties go to the lower slot.
int nearest_in_orbit(const SatelliteEphemeris& from, int orbit,
                     std::span<const SatelliteEphemeris> ephemerides, const ConstellationSpec& spec);

/// Whether a -> b is an admissible ISL given the full ephemeris set at the same epoch.
bool isl_feasible(const SatelliteEphemeris& a, const SatelliteEphemeris& b,
                  std::span<const SatelliteEphemeris> ephemerides, const ConstellationSpec& spec);

struct GroundCluster {
  int cluster_id = 0;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  std::vector<double> device_weights;
};

/// Surface point of a cluster in the inertial frame. Longitude advances with Earth rotation
/// when `earth_rotation` is set.
Vec3 cluster_position(const GroundCluster& cluster, double t_s, bool earth_rotation = true);

/// Satellite with the smallest central angle to the cluster; ties go to lower (orbit, slot).
SatId serving_satellite(const GroundCluster& cluster, std::span<const SatelliteEphemeris> ephemerides,
                        double t_s, bool earth_rotation = true);

/// Half-angle of the coverage cap seen from the satellite altitude (no elevation mask).
double coverage_half_angle_rad(double altitude_km);

/// Central angle between two geocentric vectors.
double central_angle(const Vec3& a, const Vec3& b);

/// Inertial position of a geostationary satellite fixed at the given longitude.
Vec3 geo_position(double lon_deg, double t_s, bool earth_rotation = true);

}  // namespace geo
}  // namespace sgin
