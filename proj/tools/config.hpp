#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "frontlab/dispersal.hpp"
#include "frontlab/families.hpp"

namespace frontlab::cli {

using ojson = nlohmann::ordered_json;

struct GridBlock {
  double x_min = 0.0;
  double x_max = 600.0;
  double dx = 0.1;
  double dt = 0.0;  // 0: min(0.01, 0.9 of the largest stable step)
  double T = 200.0;
  double level = 0.5;
  double sample_interval = 1.0;
  std::optional<std::pair<double, double>> window;  // default: last 40% of [0, T]
  double init_a = 0.0;
  double init_b = 10.0;
  double init_width = 1.0;
  bool write_field = true;
};

struct WaveBlock {
  std::optional<double> c;  // empty: minimal wave
  double speed_tol = 0.0;
  bool cross_check = false;  // compare a nonlocal minimal speed with a simulated one
};

struct SpeedCurveBlock {
  std::vector<double> s_list;
  double speed_tol = 0.0;
};

struct ThresholdBlock {
  double s_lo = 0.0;
  double s_hi = 8.0;
  double tol_s = 0.02;
  double eps_c = 1e-6;
  double speed_tol = 0.0;
  bool certificate = true;
};

struct SupersolBlock {
  double delta0 = 1e-9;
  std::optional<double> lambda1;
  bool allow_invalid = false;
  bool dump_csv = true;
  double speed_tol = 0.0;
};

struct ExperimentConfig {
  FamilySpec family = FamilySpec::hadeler_rothe();
  KernelSpec kernel = KernelSpec::local();
  std::optional<double> s;
  GridBlock grid;
  WaveBlock wave;
  SpeedCurveBlock speed_curve;
  ThresholdBlock threshold;
  SupersolBlock supersol;
  std::string output_dir = "out";
  bool deterministic = true;
  ojson echo;  // the parsed document, for the manifest
};

// Parses a JSON config. Relative file references resolve against base_dir.
// Throws ConfigError with "<source>:<line>: field '<path>': <message>".
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace frontlab::cli
