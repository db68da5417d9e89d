#include "config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "error.hpp"

namespace hypoctl {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(ErrorCode::kConfig, key + ": expected a finite number, got '" + value + "'");
  }
  return v;
}

long to_long(const std::string& key, const std::string& value) {
  long v = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    fail(ErrorCode::kConfig, key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const long v = to_long(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(ErrorCode::kConfig, key + ": integer out of range");
  }
  return static_cast<int>(v);
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

const char* potential_kind_name(ConfinementPotential::Kind k) {
  switch (k) {
    case ConfinementPotential::Kind::kTripleWell: return "triple_well";
    case ConfinementPotential::Kind::kQuadratic: return "quadratic";
    case ConfinementPotential::Kind::kPolynomial: return "polynomial";
  }
  return "";
}

const char* initial_kind_name(InitialKind k) {
  switch (k) {
    case InitialKind::kPerturbed: return "perturbed";
    case InitialKind::kRotated: return "rotated";
    case InitialKind::kCustom: return "custom";
    case InitialKind::kEquilibrium: return "equilibrium";
  }
  return "";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split(text, ',')) {
    out.push_back(to_double("list", item));
  }
  return out;
}

ControlShape read_tabulated_shape(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open shape table '" + path + "'");
  std::vector<double> nodes, values, slopes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 3) {
      fail(ErrorCode::kConfig, path + ":" + std::to_string(lineno) +
                                   ": expected x,alpha,alpha_prime");
    }
    if (nodes.empty() && lineno == 1 && !cols[0].empty() &&
        (std::isalpha(static_cast<unsigned char>(cols[0][0])) != 0)) {
      continue;  // header row
    }
    nodes.push_back(to_double("x", cols[0]));
    values.push_back(to_double("alpha", cols[1]));
    slopes.push_back(to_double("alpha_prime", cols[2]));
  }
  ControlShape s = ControlShape::tabulated(nodes, values, slopes);
  s.validate();
  return s;
}

Vector read_grid_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open grid values '" + path + "'");
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    for (const std::string& item : split(token, ',')) {
      if (!item.empty()) values.push_back(to_double(path, item));
    }
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<ControlShape> parse_shapes(const std::string& spec,
                                       const std::string& base_dir) {
  std::vector<ControlShape> shapes;
  for (const std::string& item : split(spec, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const std::string kind = trim(item.substr(0, colon));
    const std::string arg = colon == std::string::npos ? "" : trim(item.substr(colon + 1));
    if (kind == "logistic") {
      shapes.push_back(ControlShape::logistic(to_int("control.shapes", arg)));
    } else if (kind == "constant") {
      shapes.push_back(ControlShape::constant_shape(to_double("control.shapes", arg)));
    } else if (kind == "tabulated") {
      shapes.push_back(read_tabulated_shape(resolve(arg, base_dir)));
    } else {
      fail(ErrorCode::kConfig, "control.shapes: unknown shape kind '" + kind +
                                   "' (logistic:i, constant:c, tabulated:file)");
    }
    shapes.back().validate();
  }
  if (shapes.empty()) fail(ErrorCode::kConfig, "control.shapes: at least one shape");
  return shapes;
}

RunConfig::RunConfig() { shapes = parse_shapes(shapes_spec); }

void RunConfig::set(const std::string& key, const std::string& value,
                    const std::string& base_dir) {
  const std::string& v = value;
  if (key == "grid.x_min") x_axis.lower = to_double(key, v);
  else if (key == "grid.x_max") x_axis.upper = to_double(key, v);
  else if (key == "grid.v_min") v_axis.lower = to_double(key, v);
  else if (key == "grid.v_max") v_axis.upper = to_double(key, v);
  else if (key == "grid.points_x") x_axis.points = to_int(key, v);
  else if (key == "grid.points_v") v_axis.points = to_int(key, v);
  else if (key == "potential.kind") {
    if (v == "triple_well") potential.kind = ConfinementPotential::Kind::kTripleWell;
    else if (v == "quadratic") potential.kind = ConfinementPotential::Kind::kQuadratic;
    else if (v == "polynomial") potential.kind = ConfinementPotential::Kind::kPolynomial;
    else fail(ErrorCode::kConfig, key + ": expected triple_well, quadratic or polynomial");
  } else if (key == "potential.coefficients") potential.coefficients = parse_number_list(v);
  else if (key == "potential.omega") potential.omega = to_double(key, v);
  else if (key == "potential.gamma") potential.gamma = to_double(key, v);
  else if (key == "potential.beta") potential.beta = to_double(key, v);
  else if (key == "control.shapes") {
    shapes = parse_shapes(v, base_dir);
    shapes_spec = v;
  } else if (key == "riccati.delta") delta = to_double(key, v);
  else if (key == "riccati.cost_beta") cost_beta = to_double(key, v);
  else if (key == "riccati.max_iter") max_iter = to_int(key, v);
  else if (key == "riccati.step_tol") step_tol = to_double(key, v);
  else if (key == "riccati.residual_tol") residual_tol = to_double(key, v);
  else if (key == "analyze.hautus_tol") hautus_tol = to_double(key, v);
  else if (key == "analyze.gap_modes") gap_modes = to_int(key, v);
  else if (key == "integrator.rtol") integrator.rtol = to_double(key, v);
  else if (key == "integrator.atol") integrator.atol = to_double(key, v);
  else if (key == "integrator.max_step") integrator.max_step = to_double(key, v);
  else if (key == "simulate.horizon") horizon = to_double(key, v);
  else if (key == "simulate.samples") samples = to_int(key, v);
  else if (key == "simulate.snapshot_times") snapshot_times = parse_number_list(v);
  else if (key == "simulate.gain_file") gain_file = resolve(v, base_dir);
  else if (key == "initial.kind") {
    if (v == "perturbed") initial.kind = InitialKind::kPerturbed;
    else if (v == "rotated") initial.kind = InitialKind::kRotated;
    else if (v == "custom") initial.kind = InitialKind::kCustom;
    else if (v == "equilibrium") initial.kind = InitialKind::kEquilibrium;
    else fail(ErrorCode::kConfig, key + ": expected perturbed, rotated, custom or equilibrium");
  } else if (key == "initial.amplitude") initial.amplitude = to_double(key, v);
  else if (key == "initial.theta") initial.theta = to_double(key, v);
  else if (key == "initial.file") initial_file = resolve(v, base_dir);
  else if (key == "output.dir") output_dir = resolve(v, base_dir);
  else if (key == "seed") {
    const long s = to_long(key, v);
    if (s < 0) fail(ErrorCode::kConfig, "seed must be non-negative");
    seed = static_cast<unsigned long>(s);
  } else {
    fail(ErrorCode::kConfig, "unknown configuration key '" + key + "'");
  }
}

RunConfig RunConfig::parse(const std::string& text, const std::string& base_dir) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) {
      fail(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    try {
      cfg.set(key, trim(line.substr(eq + 1)), base_dir);
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const fs::path dir = fs::path(path).parent_path();
  return parse(ss.str(), dir.string());
}

void RunConfig::validate() const {
  (void)grid();
  potential.validate();
  for (const ControlShape& s : shapes) s.validate();
  if (!(delta > 0.0)) fail(ErrorCode::kConfig, "riccati.delta must be positive");
  if (!(cost_beta > 0.0)) fail(ErrorCode::kConfig, "riccati.cost_beta must be positive");
  if (max_iter < 1) fail(ErrorCode::kConfig, "riccati.max_iter must be >= 1");
  if (!(step_tol > 0.0) || !(residual_tol > 0.0)) {
    fail(ErrorCode::kConfig, "riccati tolerances must be positive");
  }
  if (!(hautus_tol > 0.0)) fail(ErrorCode::kConfig, "analyze.hautus_tol must be positive");
  if (gap_modes < 2) fail(ErrorCode::kConfig, "analyze.gap_modes must be >= 2");
  if (!(integrator.rtol > 0.0) || !(integrator.atol > 0.0)) {
    fail(ErrorCode::kConfig, "integrator tolerances must be positive");
  }
  if (integrator.max_step < 0.0) fail(ErrorCode::kConfig, "integrator.max_step must be >= 0");
  if (!(horizon > 0.0)) fail(ErrorCode::kConfig, "simulate.horizon must be positive");
  if (samples < 2) fail(ErrorCode::kConfig, "simulate.samples must be >= 2");
  for (double t : snapshot_times) {
    if (t < 0.0 || t > horizon) {
      fail(ErrorCode::kConfig, "simulate.snapshot_times must lie in [0, horizon]");
    }
  }
  if (!(initial.theta >= 0.0 && initial.theta <= 1.0)) {
    fail(ErrorCode::kConfig, "initial.theta must lie in [0, 1]");
  }
  if (initial.kind == InitialKind::kCustom) {
    if (initial_file.empty()) fail(ErrorCode::kConfig, "initial.kind = custom needs initial.file");
    if (!fs::exists(initial_file)) {
      fail(ErrorCode::kConfig, "initial.file '" + initial_file + "' does not exist");
    }
  }
  if (output_dir.empty()) fail(ErrorCode::kConfig, "output.dir must not be empty");
}

std::map<std::string, std::string> RunConfig::problem_metadata() const {
  return {
      {"grid.x_min", format_double(x_axis.lower)},
      {"grid.x_max", format_double(x_axis.upper)},
      {"grid.v_min", format_double(v_axis.lower)},
      {"grid.v_max", format_double(v_axis.upper)},
      {"grid.points_x", std::to_string(x_axis.points)},
      {"grid.points_v", std::to_string(v_axis.points)},
      {"potential", potential.describe()},
      {"control.shapes", [&] {
         std::string s;
         for (std::size_t i = 0; i < shapes.size(); ++i) {
           s += (i ? "|" : "") + shapes[i].describe();
         }
         return s;
       }()},
      {"riccati.delta", format_double(delta)},
      {"riccati.cost_beta", format_double(cost_beta)},
  };
}

std::map<std::string, std::string> RunConfig::entries() const {
  return {
      {"grid.x_min", format_double(x_axis.lower)},
      {"grid.x_max", format_double(x_axis.upper)},
      {"grid.v_min", format_double(v_axis.lower)},
      {"grid.v_max", format_double(v_axis.upper)},
      {"grid.points_x", std::to_string(x_axis.points)},
      {"grid.points_v", std::to_string(v_axis.points)},
      {"potential.kind", potential_kind_name(potential.kind)},
      {"potential.coefficients", join_numbers(potential.coefficients)},
      {"potential.omega", format_double(potential.omega)},
      {"potential.gamma", format_double(potential.gamma)},
      {"potential.beta", format_double(potential.beta)},
      {"control.shapes", shapes_spec},
      {"riccati.delta", format_double(delta)},
      {"riccati.cost_beta", format_double(cost_beta)},
      {"riccati.max_iter", std::to_string(max_iter)},
      {"riccati.step_tol", format_double(step_tol)},
      {"riccati.residual_tol", format_double(residual_tol)},
      {"analyze.hautus_tol", format_double(hautus_tol)},
      {"analyze.gap_modes", std::to_string(gap_modes)},
      {"integrator.rtol", format_double(integrator.rtol)},
      {"integrator.atol", format_double(integrator.atol)},
      {"integrator.max_step", format_double(integrator.max_step)},
      {"simulate.horizon", format_double(horizon)},
      {"simulate.samples", std::to_string(samples)},
      {"simulate.snapshot_times", join_numbers(snapshot_times)},
      {"simulate.gain_file", gain_file},
      {"initial.kind", initial_kind_name(initial.kind)},
      {"initial.amplitude", format_double(initial.amplitude)},
      {"initial.theta", format_double(initial.theta)},
      {"initial.file", initial_file},
      {"output.dir", output_dir},
      {"seed", std::to_string(seed)},
  };
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace hypoctl
