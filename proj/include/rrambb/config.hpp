#pragma once

// INI configuration. Every accepted key is listed once in the registry
// below; the loader rejects unknown sections and keys, and the same table
// renders the resolved configuration back to text for run manifests.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <filesystem>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rrambb/channel_est.hpp"
#include "rrambb/crossbar.hpp"
#include "rrambb/detector.hpp"
#include "rrambb/error.hpp"
#include "rrambb/system_config.hpp"

namespace rrambb {

struct SweepSettings {
  std::vector<double> snr_db{10, 15, 20, 25, 30};
  // Any of ideal, verify, no_verify; one CSV row per (snr, entry).
  std::vector<std::string> schemes{"ideal", "verify", "no_verify"};
  std::size_t frames_per_trial = 14;
  std::size_t trials = 1;
};

struct DemoSettings {
  std::vector<double> snr_db{40, 30, 20};
  std::size_t frames = 256;
};

struct ScanSettings {
  std::vector<int> sizes{8, 16, 32, 64, 128};
  std::vector<std::string> schemes{"verify", "no_verify"};
  std::size_t trials = 30;
  double tolerance = 0.01;
  double target_fraction = -1.0;  // < 0: uniform random targets
};

struct RunConfig {
  SystemConfig system;
  SweepSettings sweep;
  DemoSettings demo;
  ScanSettings scan;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string w;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!w.empty()) out.push_back(w);
      w.clear();
    } else {
      w.push_back(c);
    }
  }
  if (!w.empty()) out.push_back(w);
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::ConfigError, key + ": expected a number, got '" + v + "'");
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::ConfigError, key + ": expected an integer, got '" + v + "'");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::ConfigError, key + ": expected true or false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    if constexpr (std::is_floating_point_v<T>)
      os << fmt(v[i]);
    else
      os << v[i];
  }
  return os.str();
}

template <typename E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> names) {
  std::string allowed;
  for (const auto& [n, e] : names) {
    if (v == n) return e;
    allowed += allowed.empty() ? n : std::string("|") + n;
  }
  fail(ErrorKind::ConfigError, key + ": expected " + allowed + ", got '" + v + "'");
}

// "a b; c d" row-major.
inline RealMatrix parse_matrix(const std::string& key, const std::string& v) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(v);
  std::string row;
  while (std::getline(ss, row, ';')) {
    std::vector<double> r;
    for (const auto& w : split_words(row)) r.push_back(parse_double(key, w));
    if (!r.empty()) rows.push_back(std::move(r));
  }
  if (rows.empty()) return {};
  RealMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) fail(ErrorKind::ConfigError, key + ": ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

inline std::string format_matrix(const RealMatrix& m) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << fmt(m(i, j));
  }
  return os.str();
}

struct ConfigKey {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define RRAMBB_NUM(sec, key, field)                                                                 \
  ConfigKey {                                                                                       \
    sec, #key, [](RunConfig& c, const std::string& v) { c.field = parse_double(sec "." #key, v); }, \
        [](const RunConfig& c) { return fmt(c.field); }                                             \
  }
#define RRAMBB_INT(sec, key, field, type)                                                                           \
  ConfigKey {                                                                                                       \
    sec, #key, [](RunConfig& c, const std::string& v) { c.field = static_cast<type>(parse_int(sec "." #key, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                                                  \
  }
#define RRAMBB_BOOL(sec, key, field)                                                              \
  ConfigKey {                                                                                     \
    sec, #key, [](RunConfig& c, const std::string& v) { c.field = parse_bool(sec "." #key, v); }, \
        [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }                \
  }
#define RRAMBB_ENUM(sec, key, field, ...)                                          \
  ConfigKey {                                                                      \
    sec, #key,                                                                     \
        [](RunConfig& c, const std::string& v) {                                   \
          c.field = parse_enum<decltype(c.field)>(sec "." #key, v, {__VA_ARGS__}); \
        },                                                                         \
        [](const RunConfig& c) { return std::string(to_string(c.field)); }         \
  }

inline const std::vector<ConfigKey>& config_registry() {
  using P = ProcessorKind;
  using C = ChannelModel;
  static const std::vector<ConfigKey> keys = {
      RRAMBB_INT("system", n_c, system.n_c, int),
      RRAMBB_INT("system", n_t, system.n_t, int),
      RRAMBB_INT("system", n_r, system.n_r, int),
      RRAMBB_INT("system", modulation, system.modulation, int),
      RRAMBB_INT("system", cp_len, system.cp_len, int),
      RRAMBB_INT("system", channel_taps, system.channel_taps, int),
      RRAMBB_NUM("system", snr_db, system.snr_db),
      RRAMBB_BOOL("system", channel_noise, system.channel_noise),
      RRAMBB_INT("system", channel_update_period, system.channel_update_period, int),
      RRAMBB_NUM("system", mer_cap_db, system.mer_cap_db),
      RRAMBB_INT("system", constellation_samples, system.constellation_samples, std::size_t),
      RRAMBB_INT("system", seed, system.seed, std::uint64_t),

      RRAMBB_ENUM("channel", model, system.channel, {"rayleigh", C::rayleigh}, {"awgn", C::awgn}, {"fixed", C::fixed}),
      RRAMBB_ENUM("channel", csi, system.csi, {"estimated", CsiMode::estimated}, {"perfect", CsiMode::perfect}),
      RRAMBB_ENUM("channel", pilot, system.pilot, {"identity", PilotKind::identity}, {"dft", PilotKind::dft},
                  {"hadamard", PilotKind::hadamard}),
      ConfigKey{"channel", "fixed_re",
                [](RunConfig& c, const std::string& v) {
                  const RealMatrix re = parse_matrix("channel.fixed_re", v);
                  const RealMatrix im = c.system.fixed_channel.size() == re.size()
                                            ? RealMatrix(c.system.fixed_channel.imag())
                                            : RealMatrix::Zero(re.rows(), re.cols());
                  c.system.fixed_channel = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
                },
                [](const RunConfig& c) { return format_matrix(c.system.fixed_channel.real()); }},
      ConfigKey{"channel", "fixed_im",
                [](RunConfig& c, const std::string& v) {
                  const RealMatrix im = parse_matrix("channel.fixed_im", v);
                  const RealMatrix re = c.system.fixed_channel.size() == im.size()
                                            ? RealMatrix(c.system.fixed_channel.real())
                                            : RealMatrix::Zero(im.rows(), im.cols());
                  c.system.fixed_channel = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
                },
                [](const RunConfig& c) { return format_matrix(c.system.fixed_channel.imag()); }},

      RRAMBB_ENUM("receiver", processor, system.processor, {"ideal", P::ideal}, {"crossbar", P::crossbar}),
      RRAMBB_ENUM("receiver", equalizer, system.equalizer, {"detector", Equalizer::detector},
                  {"none", Equalizer::none}),
      RRAMBB_ENUM("receiver", detector, system.detector, {"lmmse", DetectorMode::lmmse}, {"zf", DetectorMode::zf}),

      RRAMBB_ENUM("program", scheme, system.detector_program.scheme, {"verify", WriteScheme::verify},
                  {"no_verify", WriteScheme::no_verify}),
      RRAMBB_NUM("program", tolerance, system.detector_program.tolerance),
      RRAMBB_NUM("program", tolerance_floor, system.detector_program.tolerance_floor),
      RRAMBB_NUM("program", zero_threshold, system.detector_program.zero_threshold),
      RRAMBB_INT("program", max_pulses, system.detector_program.max_pulses, std::uint64_t),
      RRAMBB_NUM("static_program", tolerance, system.static_program.tolerance),
      RRAMBB_NUM("static_program", tolerance_floor, system.static_program.tolerance_floor),
      RRAMBB_NUM("static_program", zero_threshold, system.static_program.zero_threshold),
      RRAMBB_INT("static_program", max_pulses, system.static_program.max_pulses, std::uint64_t),

      RRAMBB_NUM("device", g_min, system.device.g_min),
      RRAMBB_NUM("device", g_max, system.device.g_max),
      RRAMBB_INT("device", n_states, system.device.n_states, int),
      RRAMBB_NUM("device", step_override, system.device.step_override),
      RRAMBB_NUM("device", potentiation_amplitude, system.device.potentiation.amplitude),
      RRAMBB_NUM("device", potentiation_width, system.device.potentiation.width),
      RRAMBB_NUM("device", depression_amplitude, system.device.depression.amplitude),
      RRAMBB_NUM("device", depression_width, system.device.depression.width),
      RRAMBB_NUM("device", read_voltage, system.device.read_voltage),
      RRAMBB_NUM("device", read_width, system.device.read_width),
      RRAMBB_NUM("device", sigma_c2c, system.device.sigma_c2c),
      RRAMBB_NUM("device", sigma_prog, system.device.sigma_prog),
      RRAMBB_NUM("device", sigma_read, system.device.sigma_read),
      RRAMBB_BOOL("device", fast_forward, system.device.fast_forward),

      ConfigKey{"sweep", "snr_db",
                [](RunConfig& c, const std::string& v) {
                  c.sweep.snr_db.clear();
                  for (const auto& w : split_words(v)) c.sweep.snr_db.push_back(parse_double("sweep.snr_db", w));
                },
                [](const RunConfig& c) { return join(c.sweep.snr_db); }},
      ConfigKey{"sweep", "schemes",
                [](RunConfig& c, const std::string& v) {
                  c.sweep.schemes = split_words(v);
                  for (const auto& s : c.sweep.schemes)
                    if (s != "ideal" && s != "verify" && s != "no_verify")
                      fail(ErrorKind::ConfigError, "sweep.schemes: unknown entry '" + s + "'");
                },
                [](const RunConfig& c) { return join(c.sweep.schemes); }},
      RRAMBB_INT("sweep", frames_per_trial, sweep.frames_per_trial, std::size_t),
      RRAMBB_INT("sweep", trials, sweep.trials, std::size_t),

      ConfigKey{"demo", "snr_db",
                [](RunConfig& c, const std::string& v) {
                  c.demo.snr_db.clear();
                  for (const auto& w : split_words(v)) c.demo.snr_db.push_back(parse_double("demo.snr_db", w));
                },
                [](const RunConfig& c) { return join(c.demo.snr_db); }},
      RRAMBB_INT("demo", frames, demo.frames, std::size_t),

      ConfigKey{"scan", "sizes",
                [](RunConfig& c, const std::string& v) {
                  c.scan.sizes.clear();
                  for (const auto& w : split_words(v))
                    c.scan.sizes.push_back(static_cast<int>(parse_int("scan.sizes", w)));
                },
                [](const RunConfig& c) { return join(c.scan.sizes); }},
      ConfigKey{"scan", "schemes",
                [](RunConfig& c, const std::string& v) {
                  c.scan.schemes = split_words(v);
                  for (const auto& s : c.scan.schemes)
                    if (s != "verify" && s != "no_verify")
                      fail(ErrorKind::ConfigError, "scan.schemes: unknown entry '" + s + "'");
                },
                [](const RunConfig& c) { return join(c.scan.schemes); }},
      RRAMBB_INT("scan", trials, scan.trials, std::size_t),
      RRAMBB_NUM("scan", tolerance, scan.tolerance),
      RRAMBB_NUM("scan", target_fraction, scan.target_fraction),
  };
  return keys;
}

#undef RRAMBB_NUM
#undef RRAMBB_INT
#undef RRAMBB_BOOL
#undef RRAMBB_ENUM

}  // namespace detail

inline void validate(const RunConfig& c) {
  c.system.validate();
  if (c.sweep.snr_db.empty()) fail(ErrorKind::ConfigError, "sweep.snr_db is empty");
  if (c.sweep.schemes.empty()) fail(ErrorKind::ConfigError, "sweep.schemes is empty");
  if (c.sweep.frames_per_trial < 1 || c.sweep.trials < 1)
    fail(ErrorKind::ConfigError, "sweep needs at least one frame and one trial");
  if (c.demo.snr_db.empty() || c.demo.frames < 1) fail(ErrorKind::ConfigError, "demo needs SNR points and frames");
  if (c.scan.tolerance <= 0.0) fail(ErrorKind::ConfigError, "scan.tolerance must be positive");
  if (c.scan.target_fraction > 1.0) fail(ErrorKind::ConfigError, "scan.target_fraction must be at most 1");
}

/// Applies INI text on top of `base`.
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::ConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  const auto& keys = detail::config_registry();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      fail(ErrorKind::ConfigError, "key '" + section + "' must live in a section");
    for (const auto& [name, value] : body) {
      const detail::ConfigKey* k = nullptr;
      for (const auto& cand : keys)
        if (cand.section == section && cand.name == name) k = &cand;
      if (k == nullptr) fail(ErrorKind::ConfigError, "unknown key " + section + "." + name);
      k->set(base, detail::trim(value.data()));
    }
  }
  validate(base);
  return base;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// section -> key -> value for every registered key.
inline std::map<std::string, std::map<std::string, std::string>> config_snapshot(const RunConfig& c) {
  std::map<std::string, std::map<std::string, std::string>> out;
  for (const auto& k : detail::config_registry()) out[k.section][k.name] = k.get(c);
  return out;
}

inline std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : detail::config_registry()) {
    if (k.section != section) {
      os << (section.empty() ? "" : "\n") << "[" << k.section << "]\n";
      section = k.section;
    }
    os << k.name << " = " << k.get(c) << "\n";
  }
  return os.str();
}

}  // namespace rrambb
