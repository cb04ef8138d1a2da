#include "footif/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "footif/error.hpp"
#include "footif/format.hpp"

namespace footif {
namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(RunConfig&, const std::string&)>;
using KeyTable = std::map<std::string, Setter>;

double to_double(const std::string& v) { return parse_double(v); }

long to_long(const std::string& v) {
  const double d = parse_double(v);
  if (d != static_cast<double>(static_cast<long>(d))) {
    throw Error(ErrorCode::ParseError, "expected an integer, got '" + v + "'");
  }
  return static_cast<long>(d);
}

std::size_t to_size(const std::string& v) {
  const long n = to_long(v);
  if (n < 0) throw Error(ErrorCode::ParseError, "expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

std::uint64_t to_u64(const std::string& v) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size() || v.front() == '-') {
    throw Error(ErrorCode::ParseError, "expected an unsigned integer, got '" + v + "'");
  }
  return n;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::ParseError, "expected a boolean, got '" + v + "'");
}

std::map<std::string, KeyTable> key_tables() {
  std::map<std::string, KeyTable> t;
  auto& g = t["geometry"];
  g["base_length_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.base_length_cm = to_double(v); };
  g["base_width_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.base_width_cm = to_double(v); };
  g["mf_length_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.mf_length_cm = to_double(v); };
  g["mf_width_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.mf_width_cm = to_double(v); };
  g["base_guide_spacing_cm"] = [](RunConfig& c, const std::string& v) {
    c.geometry.base_guide_spacing_cm = to_double(v);
  };
  g["mf_guide_spacing_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.mf_guide_spacing_cm = to_double(v); };
  g["sole_lever_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.sole_lever_cm = to_double(v); };
  g["heel_lever_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.heel_lever_cm = to_double(v); };
  g["reference_offset_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.reference_offset_cm = to_double(v); };
  g["placement"] = [](RunConfig& c, const std::string& v) {
    if (v == "outside") {
      c.geometry.placement = SpringPlacement::OutsideBase;
    } else if (v == "inside") {
      c.geometry.placement = SpringPlacement::InsideBase;
    } else {
      throw Error(ErrorCode::ParseError, "placement must be 'outside' or 'inside'");
    }
  };

  auto& w = t["workspace"];
  w["translation_cm"] = [](RunConfig& c, const std::string& v) { c.geometry.limits.translation_cm = to_double(v); };
  w["yaw_deg"] = [](RunConfig& c, const std::string& v) { c.geometry.limits.yaw_rad = deg_to_rad(to_double(v)); };
  w["pitch_deg"] = [](RunConfig& c, const std::string& v) { c.geometry.limits.pitch_rad = deg_to_rad(to_double(v)); };

  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    auto& s = t["spring" + std::to_string(i + 1)];
    s["stiffness_n_per_cm"] = [i](RunConfig& c, const std::string& v) {
      c.geometry.springs.compression[i].stiffness_n_per_cm = to_double(v);
    };
    s["free_length_cm"] = [i](RunConfig& c, const std::string& v) {
      c.geometry.springs.compression[i].free_length_cm = to_double(v);
    };
    s["installed_length_cm"] = [i](RunConfig& c, const std::string& v) {
      c.geometry.springs.compression[i].installed_length_cm = to_double(v);
    };
    s["fully_compressed_length_cm"] = [i](RunConfig& c, const std::string& v) {
      c.geometry.springs.compression[i].fully_compressed_length_cm = to_double(v);
    };
    s["pretension_n"] = [i](RunConfig& c, const std::string& v) {
      c.geometry.springs.compression[i].pretension_n = to_double(v);
    };
  }
  for (std::size_t i = 0; i < 2; ++i) {
    auto& s = t["spring" + std::to_string(i + 7)];
    s["stiffness_ncm_per_deg"] = [i](RunConfig& c, const std::string& v) {
      c.geometry.springs.torsion[i].stiffness_ncm_per_rad = to_double(v) * 180.0 / std::numbers::pi;
    };
    s["pretension_n"] = [i](RunConfig& c, const std::string& v) {
      c.geometry.springs.torsion[i].pretension_n = to_double(v);
    };
  }

  auto& p = t["pipeline"];
  p["window"] = [](RunConfig& c, const std::string& v) { c.pipeline.window = to_size(v); };
  p["velocity_threshold_m_per_s"] = [](RunConfig& c, const std::string& v) {
    c.pipeline.velocity_threshold_m_per_s = to_double(v);
  };
  p["yaw_scale"] = [](RunConfig& c, const std::string& v) { c.pipeline.yaw_scale = to_double(v); };
  p["home_samples"] = [](RunConfig& c, const std::string& v) { c.pipeline.home_samples = to_size(v); };

  auto& sp = t["sparc"];
  sp["cutoff_hz"] = [](RunConfig& c, const std::string& v) { c.sparc.cutoff_hz = to_double(v); };
  sp["amplitude_threshold"] = [](RunConfig& c, const std::string& v) { c.sparc.amplitude_threshold = to_double(v); };
  sp["pad_level"] = [](RunConfig& c, const std::string& v) { c.sparc.pad_level = static_cast<int>(to_long(v)); };

  auto& m = t["mapping"];
  m["seed"] = [](RunConfig& c, const std::string& v) { c.mapping.seed = to_u64(v); };
  m["tolerance"] = [](RunConfig& c, const std::string& v) { c.mapping.tolerance = to_double(v); };
  m["max_iterations"] = [](RunConfig& c, const std::string& v) {
    c.mapping.max_iterations = static_cast<int>(to_long(v));
  };
  m["band_fraction_translation"] = [](RunConfig& c, const std::string& v) {
    c.mapping.band_fractions[0] = c.mapping.band_fractions[1] = to_double(v);
  };
  m["band_fraction_rotation"] = [](RunConfig& c, const std::string& v) {
    c.mapping.band_fractions[2] = c.mapping.band_fractions[3] = to_double(v);
  };

  auto& s = t["simulation"];
  s["seed"] = [](RunConfig& c, const std::string& v) { c.cohort.seed = to_u64(v); };
  s["subjects"] = [](RunConfig& c, const std::string& v) { c.cohort.n_subjects = static_cast<int>(to_long(v)); };
  s["rotation_min_deg"] = [](RunConfig& c, const std::string& v) { c.cohort.rotation_min_deg = to_double(v); };
  s["rotation_max_deg"] = [](RunConfig& c, const std::string& v) { c.cohort.rotation_max_deg = to_double(v); };
  s["skew_max"] = [](RunConfig& c, const std::string& v) { c.cohort.skew_max = to_double(v); };
  s["gain_min"] = [](RunConfig& c, const std::string& v) { c.cohort.gain_min = to_double(v); };
  s["gain_max"] = [](RunConfig& c, const std::string& v) { c.cohort.gain_max = to_double(v); };
  s["channel_gain_min"] = [](RunConfig& c, const std::string& v) { c.cohort.channel_gain_min = to_double(v); };
  s["channel_gain_max"] = [](RunConfig& c, const std::string& v) { c.cohort.channel_gain_max = to_double(v); };
  s["noise_sigma"] = [](RunConfig& c, const std::string& v) { c.cohort.noise_sigma = to_double(v); };
  s["trials_per_direction"] = [](RunConfig& c, const std::string& v) {
    c.cohort.trials_per_direction = static_cast<int>(to_long(v));
  };
  s["profile"] = [](RunConfig& c, const std::string& v) {
    if (v == "minimum_jerk") {
      c.cohort.profile.shape = ProfileShape::MinimumJerk;
    } else if (v == "trapezoid") {
      c.cohort.profile.shape = ProfileShape::Trapezoid;
    } else {
      throw Error(ErrorCode::ParseError, "profile must be 'minimum_jerk' or 'trapezoid'");
    }
  };
  s["rest_s"] = [](RunConfig& c, const std::string& v) { c.cohort.profile.rest_s = to_double(v); };
  s["stroke_s"] = [](RunConfig& c, const std::string& v) { c.cohort.profile.duration_s = to_double(v); };
  s["hold_s"] = [](RunConfig& c, const std::string& v) { c.cohort.profile.hold_s = to_double(v); };
  s["return_home"] = [](RunConfig& c, const std::string& v) { c.cohort.profile.return_home = to_bool(v); };
  s["sample_rate_hz"] = [](RunConfig& c, const std::string& v) { c.cohort.profile.sample_rate_hz = to_double(v); };
  return t;
}

void apply(RunConfig& cfg, const pt::ptree& tree, const std::map<std::string, KeyTable>& tables, bool allow_run) {
  for (const auto& [section, body] : tree) {
    if (section == "run") {
      if (!allow_run) throw Error(ErrorCode::ParseError, "[run] is not allowed in a geometry file");
      continue;
    }
    const auto table = tables.find(section);
    if (table == tables.end()) throw Error(ErrorCode::ParseError, "unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorCode::ParseError, "key '" + section + "' must live inside a section");
    }
    for (const auto& [key, value] : body) {
      const auto setter = table->second.find(key);
      if (setter == table->second.end()) {
        throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in [" + section + "]");
      }
      try {
        setter->second(cfg, value.data());
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, "[" + section + "] " + key + ": " + e.what());
      }
    }
  }
}

pt::ptree read_tree(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return tree;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  const auto tables = key_tables();
  const pt::ptree tree = read_tree(in);
  RunConfig cfg;

  if (const auto run = tree.get_child_optional("run")) {
    for (const auto& [key, value] : *run) {
      if (key == "geometry_file") {
        std::filesystem::path path = value.data();
        if (path.is_relative()) path = base_dir / path;
        std::ifstream gin(path);
        if (!gin) throw Error(ErrorCode::IoError, "geometry file not found: " + path.string());
        apply(cfg, read_tree(gin), tables, false);
      } else if (key == "output_dir") {
        std::filesystem::path path = value.data();
        if (path.is_relative()) path = base_dir / path;
        cfg.output_dir = path;
      } else {
        throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in [run]");
      }
    }
  }
  apply(cfg, tree, tables, true);
  // Validates the geometry now so errors surface at load time.
  (void)DeviceGeometry(cfg.geometry);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "config file not found: " + path.string());
  try {
    return parse_config(in, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace footif
