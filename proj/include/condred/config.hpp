#pragma once

// Study configuration: flat-section key-value text.
//
//   scenario = "polarized_baseline"     # catalog preset, applied first
//   [grid]      dim_n dim_d nx half_width num_modes num_quad
//   [phase]     kind (zero | linear | quadratic | gaussian_bump), b, c, a, w
//   [amplitude] kind (polarized_gaussian | two_mode), center, width, w0, w2
//   [sweep]     eps alpha fixed_alpha fixed_eps t_final dt_safety records
//               regularity guard pairs
//   [output]    dir formats timings
//
// Values are numbers, "strings", true/false or [arrays]; several
// `key = value` pairs may share a line; `#` starts a comment.

#include <string>
#include <string_view>
#include <vector>

#include "condred/convergence_lab.hpp"

namespace condred {

struct StudyConfig {
  std::string scenario = "polarized_baseline";

  GridSpec grid;  // 1 + 1 dimensions, nx 256 on [-12, 12), 32 modes, 96 nodes

  std::string phase_kind = "zero";
  double phase_b = 0.0;  // linear slope
  double phase_c = 0.0;  // quadratic curvature
  double phase_a = 0.0;  // bump height
  double phase_w = 1.0;  // bump width

  std::string amplitude_kind = "polarized_gaussian";
  double amplitude_center = 0.0;
  double amplitude_width = 1.0;
  double amplitude_w0 = 1.0;
  double amplitude_w2 = 0.0;

  std::vector<double> eps{0.5, 0.4, 0.3, 0.22};
  std::vector<double> alpha{0.4, 0.28, 0.2, 0.14};
  double fixed_alpha = 0.2;
  double fixed_eps = 0.35;
  double t_final = 0.5;
  double dt_safety = 1.0;
  int records = 20;
  int regularity = 4;
  bool guard = true;
  std::vector<std::string> pairs{"eq17", "eq18", "eq19", "eq20", "eq21"};

  std::string output_dir = "out";
  std::vector<std::string> formats{"csv", "json", "svg"};
  bool timings = true;

  bool operator==(const StudyConfig&) const = default;
};

/// Names in the scenario catalog.
std::vector<std::string> scenario_names();
/// Default config for a catalog scenario.
StudyConfig catalog_config(std::string_view scenario);

StudyConfig parse_config(std::string_view text);
StudyConfig load_config(const std::string& path);
std::string serialize_config(const StudyConfig& config);

/// Throws validation_error naming the offending key.
void validate_config(const StudyConfig& config);

InitialPhase phase_of(const StudyConfig& config);
InitialAmplitude amplitude_of(const StudyConfig& config);
Scenario scenario_of(const StudyConfig& config);
SweepSpec sweep_of(const StudyConfig& config);
StudyResources resources_of(const StudyConfig& config);

}  // namespace condred
