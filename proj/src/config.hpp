#pragma once

// Run configuration: flat `section.key = value` text, one file per run.

#include <map>
#include <string>
#include <vector>

#include "discretize.hpp"
#include "model.hpp"
#include "simulate.hpp"

namespace hypoctl {

struct RunConfig {
  AxisSpec x_axis;
  AxisSpec v_axis;
  ConfinementPotential potential;
  std::vector<ControlShape> shapes;
  /// Source text of control.shapes, kept for metadata comparisons.
  std::string shapes_spec = "logistic:1,logistic:2,logistic:3,logistic:4";

  double delta = 0.2;
  double cost_beta = 1.0;
  int max_iter = 50;
  double step_tol = 1e-5;
  double residual_tol = 1e-8;

  double hautus_tol = 1e-8;
  int gap_modes = 10;

  IntegratorConfig integrator;
  double horizon = 40.0;
  int samples = 401;
  std::vector<double> snapshot_times;
  std::string gain_file;

  InitialParams initial;
  std::string initial_file;

  std::string output_dir = "out";
  unsigned long seed = 0;

  RunConfig();

  /// Parses config text; relative file references resolve against base_dir.
  static RunConfig parse(const std::string& text, const std::string& base_dir = "");
  static RunConfig load(const std::string& path);

  /// Applies one `key = value` override; call validate() afterwards.
  void set(const std::string& key, const std::string& value,
           const std::string& base_dir = "");
  void validate() const;

  /// Every key with its effective value, sorted by key.
  std::map<std::string, std::string> entries() const;
  std::string to_text() const;

  PhaseGrid grid() const { return PhaseGrid(x_axis, v_axis); }
  /// Keys that pin a feedback gain to a problem: grid, potential, shapes,
  /// shift and cost weight.
  std::map<std::string, std::string> problem_metadata() const;
};

std::vector<ControlShape> parse_shapes(const std::string& spec,
                                       const std::string& base_dir = "");
ControlShape read_tabulated_shape(const std::string& path);
Vector read_grid_values(const std::string& path);
std::vector<double> parse_number_list(const std::string& text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace hypoctl
