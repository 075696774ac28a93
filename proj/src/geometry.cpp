#include "sgin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace sgin::geo {

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void ConstellationSpec::validate() const {
  if (num_orbits <= 0)
    throw ConfigError(fmt::format("constellation.num_orbits = {} must be positive", num_orbits));
  if (sats_per_orbit <= 0)
    throw ConfigError(fmt::format("constellation.sats_per_orbit = {} must be positive", sats_per_orbit));
  if (total_sats != num_orbits * sats_per_orbit)
    throw ConfigError(fmt::format("constellation.total_sats = {} is not num_orbits x sats_per_orbit = {}",
                                  total_sats, num_orbits * sats_per_orbit));
  if (!(altitude_km > 0.0))
    throw ConfigError(fmt::format("constellation.altitude_km = {} must be positive", altitude_km));
  if (!(inclination_deg >= 0.0 && inclination_deg <= 180.0))
    throw ConfigError(fmt::format("constellation.inclination_deg = {} is outside [0, 180]", inclination_deg));
  if (phasing_factor < 0 || phasing_factor >= num_orbits)
    throw ConfigError(fmt::format("constellation.phasing_factor = {} is outside [0, num_orbits)", phasing_factor));
}

double ConstellationSpec::period_s() const {
  const double a = orbit_radius_km();
  return 2.0 * kPi * std::sqrt(a * a * a / kEarthMuKm3PerS2);
}

double ConstellationSpec::node_spread_deg() const {
  return pattern == WalkerPattern::Star ? 180.0 : 360.0;
}

std::string ConstellationSpec::walker_notation() const {
  return fmt::format("{}/{}/{} Walker-{}", total_sats, num_orbits, phasing_factor,
                     pattern == WalkerPattern::Star ? "Star" : "Delta");
}

ConstellationSpec ConstellationSpec::walker(WalkerPattern pattern, int total, int orbits, int phasing,
                                            double altitude_km, double inclination_deg) {
  ConstellationSpec spec;
  spec.pattern = pattern;
  spec.total_sats = total;
  spec.num_orbits = orbits;
  spec.sats_per_orbit = orbits > 0 ? total / orbits : 0;
  spec.phasing_factor = phasing;
  spec.altitude_km = altitude_km;
  spec.inclination_deg = inclination_deg;
  spec.validate();
  return spec;
}

Vec3 orbital_position(double radius_km, double raan_rad, double inclination_rad, double arg_latitude_rad) {
  const double cu = std::cos(arg_latitude_rad), su = std::sin(arg_latitude_rad);
  const double cO = std::cos(raan_rad), sO = std::sin(raan_rad);
  const double ci = std::cos(inclination_rad), si = std::sin(inclination_rad);
  return {radius_km * (cu * cO - su * ci * sO),
          radius_km * (cu * sO + su * ci * cO),
          radius_km * (su * si)};
}

std::vector<SatelliteEphemeris> propagate(const ConstellationSpec& spec, double t_s) {
  spec.validate();
  if (!(t_s >= 0.0)) throw ConfigError(fmt::format("propagation time {} must be non-negative", t_s));

  const double radius = spec.orbit_radius_km();
  const double mean_motion = 2.0 * kPi / spec.period_s();
  const double inclination = deg2rad(spec.inclination_deg);
  const double node_step = deg2rad(spec.node_spread_deg()) / spec.num_orbits;
  const double slot_step = 2.0 * kPi / spec.sats_per_orbit;
  const double phase_step = 2.0 * kPi * spec.phasing_factor / spec.total_sats;
  // Reduce the elapsed angle first so long horizons stay periodic to round-off.
  const double advance = std::fmod(mean_motion * t_s, 2.0 * kPi);

  std::vector<SatelliteEphemeris> out;
  out.reserve(static_cast<std::size_t>(spec.total_sats));
  for (int n = 0; n < spec.num_orbits; ++n) {
    const double raan = n * node_step;
    for (int k = 0; k < spec.sats_per_orbit; ++k) {
      const double u = k * slot_step + n * phase_step + advance;
      out.push_back({{n, k}, orbital_position(radius, raan, inclination, u), t_s});
    }
  }
  return out;
}

double comm_radius(double altitude_km) {
  const double r = kEarthRadiusKm + altitude_km;
  return 2.0 * std::sqrt(r * r - kEarthRadiusKm * kEarthRadiusKm);
}

bool within_comm_range(const SatelliteEphemeris& a, const SatelliteEphemeris& b,
                       const ConstellationSpec& spec) {
  // Uniform shell: min{d_comm(a), d_comm(b)} is the shell's radius.
  return distance(a.position_km, b.position_km) <= comm_radius(spec.altitude_km);
}

int nearest_in_orbit(const SatelliteEphemeris& from, int orbit,
                     std::span<const SatelliteEphemeris> ephemerides, const ConstellationSpec& spec) {
  int best = -1;
  double best_d = 0.0;
  for (const auto& e : ephemerides) {
    if (e.id.orbit != orbit || e.id == from.id) continue;
    if (!within_comm_range(from, e, spec)) continue;
    const double d = distance(from.position_km, e.position_km);
    if (best < 0 || d < best_d) {
      best = e.id.slot;
      best_d = d;
    }
  }
  return best;
}

bool isl_feasible(const SatelliteEphemeris& a, const SatelliteEphemeris& b,
                  std::span<const SatelliteEphemeris> ephemerides, const ConstellationSpec& spec) {
  if (a.id == b.id) return false;
  if (a.id.orbit == b.id.orbit) {
    const int s = spec.sats_per_orbit;
    const int gap = std::abs(a.id.slot - b.id.slot);
    return gap == 1 || gap == s - 1;
  }
  if (!within_comm_range(a, b, spec)) return false;
  return nearest_in_orbit(a, b.id.orbit, ephemerides, spec) == b.id.slot;
}

Vec3 cluster_position(const GroundCluster& cluster, double t_s, bool earth_rotation) {
  const double rot = earth_rotation ? 2.0 * kPi * std::fmod(t_s, kSiderealDayS) / kSiderealDayS : 0.0;
  const double lat = deg2rad(cluster.lat_deg);
  const double lon = deg2rad(cluster.lon_deg) + rot;
  return {kEarthRadiusKm * std::cos(lat) * std::cos(lon),
          kEarthRadiusKm * std::cos(lat) * std::sin(lon),
          kEarthRadiusKm * std::sin(lat)};
}

double central_angle(const Vec3& a, const Vec3& b) {
  const double c = dot(a, b) / (norm(a) * norm(b));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

SatId serving_satellite(const GroundCluster& cluster, std::span<const SatelliteEphemeris> ephemerides,
                        double t_s, bool earth_rotation) {
  if (ephemerides.empty()) throw ConfigError("serving_satellite: empty ephemeris list");
  const Vec3 ground = cluster_position(cluster, t_s, earth_rotation);
  const SatelliteEphemeris* best = nullptr;
  double best_angle = 0.0;
  for (const auto& e : ephemerides) {
    const double angle = central_angle(ground, e.position_km);
    if (best == nullptr || angle < best_angle || (angle == best_angle && e.id < best->id)) {
      best = &e;
      best_angle = angle;
    }
  }
  return best->id;
}

double coverage_half_angle_rad(double altitude_km) {
  return std::acos(kEarthRadiusKm / (kEarthRadiusKm + altitude_km));
}

Vec3 geo_position(double lon_deg, double t_s, bool earth_rotation) {
  GroundCluster point{0, 0.0, lon_deg, {}};
  Vec3 p = cluster_position(point, t_s, earth_rotation);
  const double scale = (kEarthRadiusKm + kGeoAltitudeKm) / kEarthRadiusKm;
  for (auto& c : p) c *= scale;
  return p;
}

}  // namespace sgin::geo
