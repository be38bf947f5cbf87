// SPDX-License-Identifier: Apache-2.0
//
// Experiment front end shared by the command-line tool and the tests:
// key/value config parsing with strict validation, sweep orchestration over
// multiple schemes, and deterministic CSV serialization of result tables.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "agmp/evaluation.hpp"

namespace agmp {

// Invalid or out-of-range configuration input; `key` names the offender.
struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string k, const std::string& message)
      : std::runtime_error(message), key(std::move(k)) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

struct ExperimentSpec {
  TrialConfig base;
  SweepAxis axis = SweepAxis::snr;
  std::vector<double> values;
  int n_trials = 1;
  std::vector<Scheme> schemes = {Scheme::agmp};
  std::string output_path;
};

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* description;
};

// Single source of truth for accepted config-file keys; the README table
// mirrors this list and a test keeps the two in sync.
inline const std::vector<ConfigKey>& accepted_keys() {
  static const std::vector<ConfigKey> keys = {
      {"n_bs", "64", "base-station antennas"},
      {"n_irs", "64", "reflecting-surface elements"},
      {"n_ue", "16", "user antennas"},
      {"spacing", "0.5", "element spacing over wavelength"},
      {"n_paths", "3", "user-side propagation paths (first is LOS)"},
      {"rician_k_db", "20", "LOS-to-NLOS power ratio in dB"},
      {"snr_db", "10", "pilot SNR in dB; noise power is 10^(-snr_db/10)"},
      {"g_tilde", "5", "dictionary points per angle axis"},
      {"zeta", "7", "pursuit iterations"},
      {"m_probes", "0", "pilot probes; 0 means max(4*g_tilde, 2*zeta)"},
      {"r_irs", "64", "surface phase resolution"},
      {"r_ue", "16", "user codebook resolution"},
      {"seed", "1", "base seed; trial t uses seed + t"},
      {"adi_error_model", "cosine", "coarse-error range rule: paper or cosine"},
      {"normalize_selection", "on", "norm-weighted pursuit selection: on or off"},
      {"training_reps", "8192", "pilot repetitions per training measurement"},
      {"probe_reps", "8192", "pilot repetitions per estimation probe"},
      {"direct_link_gain_db", "-20", "relative direct-link power for no_irs"},
      {"sweep", "snr", "sweep axis: snr, g_tilde or zeta"},
      {"values", "", "comma-separated sweep values"},
      {"trials", "1", "Monte-Carlo trials per sweep point"},
      {"schemes", "agmp", "comma-separated scheme list"},
      {"out", "", "CSV output path (empty: no file written)"},
  };
  return keys;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "config key '" + key + "': not a number: '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError(key, "config key '" + key + "': trailing characters in '" + value + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "config key '" + key + "': not an integer: '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError(key, "config key '" + key + "': trailing characters in '" + value + "'");
  return out;
}

inline int parse_positive_int(const std::string& key, const std::string& value, int lo) {
  const long long v = parse_int(key, value);
  if (v < lo)
    throw ConfigError(key, "config key '" + key + "': value " + value + " is below " +
                               std::to_string(lo));
  if (v > (1ll << 30)) throw ConfigError(key, "config key '" + key + "': value too large");
  return static_cast<int>(v);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace detail

inline std::vector<double> parse_value_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const std::string& part : detail::split_list(s)) {
    if (part.empty()) throw ConfigError(key, "config key '" + key + "': empty list entry");
    out.push_back(detail::parse_double(key, part));
  }
  return out;
}

inline std::vector<Scheme> parse_scheme_list(const std::string& key, const std::string& s) {
  std::vector<Scheme> out;
  for (const std::string& part : detail::split_list(s)) {
    try {
      out.push_back(scheme_from_string(part));
    } catch (const std::exception&) {
      throw ConfigError(key, "config key '" + key + "': unknown scheme '" + part + "'");
    }
  }
  return out;
}

/// Applies one key/value pair to the spec; throws ConfigError naming the key
/// for anything unknown, malformed or out of range.
inline void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_positive_int;

  if (key == "n_bs") spec.base.arrays.n_bs = parse_positive_int(key, value, 1);
  else if (key == "n_irs") spec.base.arrays.n_irs = parse_positive_int(key, value, 1);
  else if (key == "n_ue") spec.base.arrays.n_ue = parse_positive_int(key, value, 1);
  else if (key == "spacing") {
    const double v = parse_double(key, value);
    if (!(v > 0.0)) throw ConfigError(key, "config key 'spacing': must be positive");
    spec.base.arrays.spacing_over_wavelength = v;
  } else if (key == "n_paths") spec.base.n_paths = parse_positive_int(key, value, 1);
  else if (key == "rician_k_db") spec.base.rician_k_db = parse_double(key, value);
  else if (key == "snr_db") spec.base.snr_db = parse_double(key, value);
  else if (key == "g_tilde") spec.base.g_tilde = parse_positive_int(key, value, 1);
  else if (key == "zeta") spec.base.zeta = parse_positive_int(key, value, 1);
  else if (key == "m_probes") spec.base.m_probes = parse_positive_int(key, value, 0);
  else if (key == "r_irs") spec.base.r_irs = parse_positive_int(key, value, 2);
  else if (key == "r_ue") spec.base.r_ue = parse_positive_int(key, value, 2);
  else if (key == "seed") {
    const long long v = detail::parse_int(key, value);
    if (v < 0) throw ConfigError(key, "config key 'seed': must be non-negative");
    spec.base.seed = static_cast<std::uint64_t>(v);
  } else if (key == "adi_error_model") {
    if (value == "paper") spec.base.adi_error_model = AdiErrorModel::paper;
    else if (value == "cosine") spec.base.adi_error_model = AdiErrorModel::cosine;
    else throw ConfigError(key, "config key 'adi_error_model': expected paper or cosine");
  } else if (key == "normalize_selection") {
    if (value == "on") spec.base.normalize_selection = true;
    else if (value == "off") spec.base.normalize_selection = false;
    else throw ConfigError(key, "config key 'normalize_selection': expected on or off");
  } else if (key == "training_reps") {
    const double v = parse_double(key, value);
    if (!(v >= 1.0)) throw ConfigError(key, "config key 'training_reps': must be >= 1");
    spec.base.training_reps = v;
  } else if (key == "probe_reps") {
    const double v = parse_double(key, value);
    if (!(v >= 1.0)) throw ConfigError(key, "config key 'probe_reps': must be >= 1");
    spec.base.probe_reps = v;
  } else if (key == "direct_link_gain_db") {
    spec.base.direct_link_gain_db = parse_double(key, value);
  } else if (key == "sweep") {
    try {
      spec.axis = sweep_axis_from_string(value);
    } catch (const std::exception&) {
      throw ConfigError(key, "config key 'sweep': expected snr, g_tilde or zeta");
    }
  } else if (key == "values") {
    spec.values = parse_value_list(key, value);
  } else if (key == "trials") {
    spec.n_trials = parse_positive_int(key, value, 1);
  } else if (key == "schemes") {
    spec.schemes = parse_scheme_list(key, value);
    if (spec.schemes.empty()) throw ConfigError(key, "config key 'schemes': empty list");
  } else if (key == "out") {
    spec.output_path = value;
  } else {
    throw ConfigError(key, "unknown config key '" + key + "'");
  }
}

/// Reads `key = value` lines ('#' starts a comment, blank lines ignored).
/// Returns pairs in file order; missing files raise IoError.
inline std::vector<std::pair<std::string, std::string>> load_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(stripped, "config line " + std::to_string(lineno) +
                                      ": expected key = value");
    entries.emplace_back(detail::trim(stripped.substr(0, eq)),
                         detail::trim(stripped.substr(eq + 1)));
  }
  return entries;
}

inline double axis_base_value(const ExperimentSpec& spec) {
  switch (spec.axis) {
    case SweepAxis::snr: return spec.base.snr_db;
    case SweepAxis::g_tilde: return static_cast<double>(spec.base.g_tilde);
    case SweepAxis::zeta: return static_cast<double>(spec.base.zeta);
  }
  return 0.0;
}

/// Threads for trial execution: AGMP_SIM_THREADS when set (positive integer),
/// otherwise the hardware concurrency. Results never depend on this value.
inline int resolve_thread_count() {
  const char* env = std::getenv("AGMP_SIM_THREADS");
  if (env != nullptr && *env != '\0') {
    const std::string value(env);
    const long long v = detail::parse_int("AGMP_SIM_THREADS", value);
    if (v < 1) throw ConfigError("AGMP_SIM_THREADS", "AGMP_SIM_THREADS must be >= 1");
    return static_cast<int>(std::min<long long>(v, 256));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

/// Runs the sweep for every scheme and interleaves rows value-major, one row
/// per (value, scheme) pair.
inline ResultTable run_experiment(const ExperimentSpec& spec, int n_threads = 1) {
  if (spec.values.empty()) throw ConfigError("values", "no sweep values configured");
  if (spec.schemes.empty()) throw ConfigError("schemes", "no schemes configured");

  std::vector<ResultTable> per_scheme;
  per_scheme.reserve(spec.schemes.size());
  for (const Scheme s : spec.schemes) {
    TrialConfig base = spec.base;
    base.scheme = s;
    per_scheme.push_back(run_sweep(base, spec.axis, spec.values, spec.n_trials, n_threads));
  }

  ResultTable merged;
  merged.rows.reserve(spec.values.size() * spec.schemes.size());
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi)
    for (std::size_t si = 0; si < spec.schemes.size(); ++si)
      merged.rows.push_back(per_scheme[si].rows[vi]);
  return merged;
}

namespace detail {

inline std::string format_double(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline const char* csv_header() {
  return "sweep_axis,sweep_value,scheme,mean_nmse_db,se_mean,se_stderr,nmse_stderr,"
         "n_trials,seed";
}

/// Fixed-format serialization; identical tables produce identical bytes.
inline std::string to_csv(const ResultTable& table) {
  std::string out = csv_header();
  out += '\n';
  for (const SweepRow& row : table.rows) {
    out += row.sweep_axis;
    out += ',';
    out += detail::format_double(row.sweep_value);
    out += ',';
    out += to_string(row.scheme);
    out += ',';
    out += detail::format_double(row.mean_nmse_db);
    out += ',';
    out += detail::format_double(row.se_mean);
    out += ',';
    out += detail::format_double(row.se_stderr);
    out += ',';
    out += detail::format_double(row.nmse_stderr);
    out += ',';
    out += std::to_string(row.n_trials);
    out += ',';
    out += std::to_string(row.seed);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing output file: " + path);
}

/// Fixed-width summary of a result table for terminal output.
inline std::string format_summary(const ResultTable& table) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %12s %-20s %14s %12s %10s\n", "axis", "value",
                "scheme", "mean_nmse_db", "se_mean", "trials");
  os << line;
  for (const SweepRow& row : table.rows) {
    std::snprintf(line, sizeof(line), "%-8s %12.4g %-20s %14s %12.5g %10d\n",
                  row.sweep_axis.c_str(), row.sweep_value, to_string(row.scheme),
                  detail::format_double(row.mean_nmse_db).c_str(), row.se_mean, row.n_trials);
    os << line;
  }
  return os.str();
}

}  // namespace agmp
