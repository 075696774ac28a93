#include "sgin/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <map>
#include <sstream>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace sgin::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ConfigError(fmt::format("{}: '{}' is not a number", field, text));
  return v;
}

long long to_integer(const std::string& field, const std::string& text) {
  long long v = 0;
  const auto t = trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ConfigError(fmt::format("{}: '{}' is not an integer", field, text));
  return v;
}

int to_int(const std::string& field, const std::string& text) {
  const long long v = to_integer(field, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(fmt::format("{}: {} is out of range", field, v));
  return static_cast<int>(v);
}

std::size_t to_size(const std::string& field, const std::string& text) {
  const long long v = to_integer(field, text);
  if (v < 0) throw ConfigError(fmt::format("{}: {} must not be negative", field, v));
  return static_cast<std::size_t>(v);
}

std::uint64_t to_u64(const std::string& field, const std::string& text) {
  std::uint64_t v = 0;
  const auto t = trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ConfigError(fmt::format("{}: '{}' is not an unsigned 64-bit integer", field, text));
  return v;
}

bool to_bool(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", field, text));
}

std::vector<double> to_doubles(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(to_double(field, p));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v, std::string_view sep = ", ") {
  return fmt::format("{}", fmt::join(v, sep));
}

struct Field {
  std::function<void(AppConfig&, const std::string& field, const std::string& value)> set;
  std::function<std::string(const AppConfig&)> get;
};

using Section = std::vector<std::pair<std::string, Field>>;

#define SGIN_NUM(KEY, MEMBER, CONV)                                                                    \
  {KEY, Field{[](AppConfig& c, const std::string& f, const std::string& v) { c.MEMBER = CONV(f, v); }, \
              [](const AppConfig& c) { return fmt::format("{}", c.MEMBER); }}}

std::string pattern_name(geo::WalkerPattern p) { return p == geo::WalkerPattern::Star ? "star" : "delta"; }

const std::vector<std::pair<std::string, Section>>& schema() {
  static const std::vector<std::pair<std::string, Section>> s = {
      {"constellation",
       {
           {"pattern", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                               const auto t = trim(v);
                               if (t == "star" || t == "Star") c.scenario.constellation.pattern = geo::WalkerPattern::Star;
                               else if (t == "delta" || t == "Delta") c.scenario.constellation.pattern = geo::WalkerPattern::Delta;
                               else throw ConfigError(fmt::format("{}: '{}' must be star or delta", f, v));
                             },
                             [](const AppConfig& c) { return pattern_name(c.scenario.constellation.pattern); }}},
           SGIN_NUM("total_sats", scenario.constellation.total_sats, to_int),
           SGIN_NUM("num_orbits", scenario.constellation.num_orbits, to_int),
           SGIN_NUM("phasing_factor", scenario.constellation.phasing_factor, to_int),
           SGIN_NUM("altitude_km", scenario.constellation.altitude_km, to_double),
           SGIN_NUM("inclination_deg", scenario.constellation.inclination_deg, to_double),
       }},
      {"link",
       {
           SGIN_NUM("eta_s", scenario.link.eta_s, to_double),
           SGIN_NUM("divergence_rad", scenario.link.divergence_rad, to_double),
           SGIN_NUM("rx_diameter_m", scenario.link.rx_diameter_m, to_double),
           SGIN_NUM("pointing_error_rad", scenario.link.pointing_error_rad, to_double),
           SGIN_NUM("beamwidth_3db_rad", scenario.link.beamwidth_3db_rad, to_double),
           SGIN_NUM("carrier_hz", scenario.link.carrier_hz, to_double),
           SGIN_NUM("bandwidth_fraction", scenario.link.bandwidth_fraction, to_double),
           SGIN_NUM("t_solar_k", scenario.link.t_solar_k, to_double),
           SGIN_NUM("t_system_k", scenario.link.t_system_k, to_double),
           SGIN_NUM("t_cmb_k", scenario.link.t_cmb_k, to_double),
           SGIN_NUM("boltzmann", scenario.link.boltzmann, to_double),
           SGIN_NUM("sigma_p", scenario.link.sigma_p, to_double),
           SGIN_NUM("snr_threshold_db", scenario.link.snr_threshold_db, to_double),
           SGIN_NUM("payload_bits", scenario.link.payload_bits, to_double),
           SGIN_NUM("tx_power_min_w", scenario.link.tx_power_min_w, to_double),
           SGIN_NUM("tx_power_max_w", scenario.link.tx_power_max_w, to_double),
           SGIN_NUM("gsl_wavelength_m", scenario.link.gsl_wavelength_m, to_double),
           {"pointing_model", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                                      const auto t = trim(v);
                                      if (t == "half-normal") c.scenario.link.pointing_model = channel::PointingErrorModel::HalfNormal;
                                      else if (t == "rayleigh") c.scenario.link.pointing_model = channel::PointingErrorModel::Rayleigh;
                                      else throw ConfigError(fmt::format("{}: '{}' must be half-normal or rayleigh", f, v));
                                    },
                                    [](const AppConfig& c) {
                                      return std::string(c.scenario.link.pointing_model == channel::PointingErrorModel::Rayleigh
                                                             ? "rayleigh"
                                                             : "half-normal");
                                    }}},
       }},
      {"time",
       {
           SGIN_NUM("slot_len_s", scenario.slot_target_s, to_double),
           // frame_len_s is resolved against slot_len_s after parsing; see parse_config.
           {"frame_len_s", Field{nullptr, [](const AppConfig& c) {
                                   return fmt::format("{}", c.scenario.slot_target_s / c.scenario.link.frames_per_slot);
                                 }}},
           SGIN_NUM("slot_stride", scenario.slot_stride, to_int),
           {"earth_rotation", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                                      c.scenario.snapshot.earth_rotation = to_bool(f, v);
                                    },
                                    [](const AppConfig& c) { return std::string(c.scenario.snapshot.earth_rotation ? "true" : "false"); }}},
           {"geo_longitudes_deg", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                                          const auto lons = to_doubles(f, v);
                                          if (lons.size() != 3) throw ConfigError(fmt::format("{}: expected 3 longitudes, got {}", f, lons.size()));
                                          std::copy(lons.begin(), lons.end(), c.scenario.snapshot.geo_longitudes_deg.begin());
                                        },
                                        [](const AppConfig& c) {
                                          return fmt::format("{}", fmt::join(c.scenario.snapshot.geo_longitudes_deg, ", "));
                                        }}},
       }},
      {"clusters",
       {
           SGIN_NUM("count", scenario.clusters.count, to_int),
           SGIN_NUM("max_abs_lat_deg", scenario.clusters.max_abs_lat_deg, to_double),
           {"points", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                              auto& out = c.scenario.clusters.explicit_clusters;
                              out.clear();
                              for (const auto& item : split(v, ';')) {
                                const auto ll = split(item, ':');
                                if (ll.size() != 2) throw ConfigError(fmt::format("{}: '{}' is not lat:lon", f, item));
                                geo::GroundCluster g;
                                g.cluster_id = static_cast<int>(out.size());
                                g.lat_deg = to_double(f, ll[0]);
                                g.lon_deg = to_double(f, ll[1]);
                                g.device_weights = {1.0};
                                out.push_back(std::move(g));
                              }
                            },
                            [](const AppConfig& c) {
                              std::vector<std::string> items;
                              for (const auto& g : c.scenario.clusters.explicit_clusters)
                                items.push_back(fmt::format("{}:{}", g.lat_deg, g.lon_deg));
                              return join(items, "; ");
                            }}},
       }},
      {"algorithms",
       {
           {"list", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                            c.scenario.algorithms.clear();
                            for (const auto& name : split(v, ',')) {
                              const auto a = sim::parse_algorithm(name);
                              if (!a) throw ConfigError(fmt::format("{}: unknown algorithm '{}' (taeer, d-merge, orbit-greedy)", f, name));
                              c.scenario.algorithms.push_back(*a);
                            }
                          },
                          [](const AppConfig& c) {
                            std::vector<std::string> names;
                            for (auto a : c.scenario.algorithms) names.push_back(sim::to_string(a));
                            return join(names);
                          }}},
           {"substitute", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                                  const auto t = trim(v);
                                  if (t == "path-union") c.scenario.taeer.substitute = routing::SubstituteMode::PathUnion;
                                  else if (t == "induced") c.scenario.taeer.substitute = routing::SubstituteMode::Induced;
                                  else throw ConfigError(fmt::format("{}: '{}' must be path-union or induced", f, v));
                                },
                                [](const AppConfig& c) {
                                  return std::string(c.scenario.taeer.substitute == routing::SubstituteMode::Induced ? "induced"
                                                                                                                    : "path-union");
                                }}},
           {"root", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                            const auto t = trim(v);
                            if (t == "min-geo-weight") c.scenario.root_rule = sim::RootRule::MinGeoWeight;
                            else if (t == "random") c.scenario.root_rule = sim::RootRule::Random;
                            else throw ConfigError(fmt::format("{}: '{}' must be min-geo-weight or random", f, v));
                          },
                          [](const AppConfig& c) {
                            return std::string(c.scenario.root_rule == sim::RootRule::Random ? "random" : "min-geo-weight");
                          }}},
       }},
      {"sim",
       {
           SGIN_NUM("rho", scenario.rho, to_double),
           SGIN_NUM("rounds", scenario.rounds, to_int),
           SGIN_NUM("seed", scenario.seed, to_u64),
           SGIN_NUM("max_attempts", scenario.max_attempts, to_int),
           {"outage_sampling", Field{[](AppConfig& c, const std::string& f, const std::string& v) {
                                       const auto t = trim(v);
                                       if (t == "auto") c.scenario.outage_sampling = sim::OutageSampling::Auto;
                                       else if (t == "on") c.scenario.outage_sampling = sim::OutageSampling::On;
                                       else if (t == "off") c.scenario.outage_sampling = sim::OutageSampling::Off;
                                       else throw ConfigError(fmt::format("{}: '{}' must be auto, on or off", f, v));
                                     },
                                     [](const AppConfig& c) {
                                       switch (c.scenario.outage_sampling) {
                                         case sim::OutageSampling::On: return std::string("on");
                                         case sim::OutageSampling::Off: return std::string("off");
                                         default: return std::string("auto");
                                       }
                                     }}},
       }},
      {"training",
       {
           SGIN_NUM("dim", training.synthetic.dim, to_size),
           SGIN_NUM("devices", training.synthetic.devices, to_int),
           SGIN_NUM("samples_min", training.synthetic.samples_min, to_size),
           SGIN_NUM("samples_max", training.synthetic.samples_max, to_size),
           SGIN_NUM("heterogeneity", training.synthetic.heterogeneity, to_double),
           SGIN_NUM("noise", training.synthetic.noise, to_double),
           SGIN_NUM("local_steps", training.synthetic.local_steps, to_int),
           SGIN_NUM("batch_size", training.synthetic.batch_size, to_size),
           SGIN_NUM("learning_rate", training.synthetic.learning_rate, to_double),
           SGIN_NUM("rounds", training.rounds, to_int),
           SGIN_NUM("smoothness", training.smoothness, to_double),
           SGIN_NUM("dissimilarity_alpha", training.dissimilarity_alpha, to_double),
       }},
      {"sweep",
       {
           SGIN_NUM("distance_min_km", sweep.distance_min_km, to_double),
           SGIN_NUM("distance_max_km", sweep.distance_max_km, to_double),
           SGIN_NUM("distance_steps", sweep.distance_steps, to_int),
           {"powers_w", Field{[](AppConfig& c, const std::string& f, const std::string& v) { c.sweep.powers_w = to_doubles(f, v); },
                              [](const AppConfig& c) { return join(c.sweep.powers_w); }}},
       }},
      {"output",
       {
           {"dir", Field{[](AppConfig& c, const std::string&, const std::string& v) { c.scenario.out_dir = trim(v); },
                         [](const AppConfig& c) { return c.scenario.out_dir; }}},
       }},
  };
  return s;
}

#undef SGIN_NUM

}  // namespace

void SweepConfig::validate() const {
  if (!(distance_min_km > 0.0)) throw ConfigError(fmt::format("sweep.distance_min_km = {} must be positive", distance_min_km));
  if (!(distance_max_km >= distance_min_km))
    throw ConfigError(fmt::format("sweep.distance_max_km = {} must be >= sweep.distance_min_km", distance_max_km));
  if (distance_steps < 1) throw ConfigError(fmt::format("sweep.distance_steps = {} must be at least 1", distance_steps));
  if (powers_w.empty()) throw ConfigError("sweep.powers_w must list at least one power");
  for (double p : powers_w)
    if (!(p > 0.0)) throw ConfigError(fmt::format("sweep.powers_w: {} must be positive", p));
}

void AppConfig::validate() const {
  scenario.validate();
  sweep.validate();
  const auto& t = training;
  if (t.rounds < 1) throw ConfigError(fmt::format("training.rounds = {} must be at least 1", t.rounds));
  if (t.synthetic.local_steps < 1)
    throw ConfigError(fmt::format("training.local_steps = {} must be at least 1", t.synthetic.local_steps));
  if (!(t.synthetic.learning_rate > 0.0))
    throw ConfigError(fmt::format("training.learning_rate = {} must be positive", t.synthetic.learning_rate));
  if (t.synthetic.batch_size < 1) throw ConfigError("training.batch_size must be at least 1");
  if (t.synthetic.devices < 1) throw ConfigError(fmt::format("training.devices = {} must be at least 1", t.synthetic.devices));
  if (t.synthetic.samples_min < 1 || t.synthetic.samples_max < t.synthetic.samples_min)
    throw ConfigError("training.samples_min/samples_max must satisfy 1 <= min <= max");
  if (!(t.smoothness >= 0.0)) throw ConfigError(fmt::format("training.smoothness = {} must be >= 0", t.smoothness));
  if (!(t.dissimilarity_alpha >= 1.0))
    throw ConfigError(fmt::format("training.dissimilarity_alpha = {} must be >= 1", t.dissimilarity_alpha));
}

AppConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config syntax error at line {}: {}", e.line(), e.message()));
  }

  AppConfig cfg;
  std::optional<double> frame_len;
  const auto& sections = schema();
  for (const auto& [section_name, section] : tree) {
    auto sit = std::find_if(sections.begin(), sections.end(), [&](const auto& s) { return s.first == section_name; });
    if (sit == sections.end()) throw ConfigError(fmt::format("unknown config section [{}]", section_name));
    if (!section.data().empty()) throw ConfigError(fmt::format("{}: expected a [section]", section_name));
    for (const auto& [key, node] : section) {
      const auto field = fmt::format("{}.{}", section_name, key);
      auto fit = std::find_if(sit->second.begin(), sit->second.end(), [&](const auto& f) { return f.first == key; });
      if (fit == sit->second.end()) throw ConfigError(fmt::format("unknown config key {}", field));
      if (field == "time.frame_len_s") {
        frame_len = to_double(field, node.data());
        continue;
      }
      fit->second.set(cfg, field, node.data());
    }
  }
  if (frame_len) {
    if (!(*frame_len > 0.0)) throw ConfigError(fmt::format("time.frame_len_s = {} must be positive", *frame_len));
    const double u = std::round(cfg.scenario.slot_target_s / *frame_len);
    if (u < 1.0) throw ConfigError(fmt::format("time.frame_len_s = {} exceeds time.slot_len_s", *frame_len));
    cfg.scenario.link.frames_per_slot = static_cast<int>(u);
  }
  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string dump_config(const AppConfig& cfg) {
  std::string out;
  for (const auto& [name, section] : schema()) {
    out += fmt::format("[{}]\n", name);
    for (const auto& [key, field] : section) {
      const auto v = field.get(cfg);
      out += v.empty() ? fmt::format("; {} =\n", key) : fmt::format("{} = {}\n", key, v);
    }
    out += "\n";
  }
  return out;
}

}  // namespace sgin::config
