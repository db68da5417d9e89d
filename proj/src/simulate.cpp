#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "model.hpp"

namespace hypoctl {

namespace {

double rms_scaled(const Vector& v, const Vector& scale) {
  if (v.size() == 0) return 0.0;
  return std::sqrt((v.array() / scale.array()).square().mean());
}

double initial_step(const OdeRhs& rhs, double t0, const Vector& y0,
                    const Vector& f0, const IntegratorConfig& cfg, double hmax,
                    long& evaluations) {
  const Vector scale = (cfg.atol + cfg.rtol * y0.array().abs()).matrix();
  const double d0 = rms_scaled(y0, scale);
  const double d1 = rms_scaled(f0, scale);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, hmax);
  const Vector y1 = y0 + h0 * f0;
  Vector f1(y0.size());
  rhs(t0 + h0, y1, f1);
  ++evaluations;
  const double d2 = rms_scaled(f1 - f0, scale) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 =
      dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::cbrt(0.01 / dmax);
  return std::min({100.0 * h0, h1, hmax});
}

}  // namespace

IntegrationStats integrate_rk23(const OdeRhs& rhs, const VectorRef& y0,
                                double t0, double t1,
                                const std::vector<double>& output_times,
                                const IntegratorConfig& config,
                                const OdeObserver& observer) {
  if (!(config.rtol > 0.0) || !(config.atol > 0.0)) {
    fail(ErrorCode::kConfig, "integrator tolerances must be positive");
  }
  if (!(t1 >= t0)) fail(ErrorCode::kInvalidArgument, "integrate_rk23: t1 < t0");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    const double t = output_times[i];
    if (t < t0 || t > t1 || (i > 0 && !(t > output_times[i - 1]))) {
      fail(ErrorCode::kInvalidArgument,
           "integrate_rk23: output times must increase strictly inside the span");
    }
  }

  IntegrationStats stats;
  const Eigen::Index n = y0.size();
  Vector y = y0;
  Vector f(n), k2(n), k3(n), y_new(n), f_new(n), stage(n), err(n), out(n);
  std::size_t next_out = 0;
  auto emit_until = [&](double t_end, double t, double h) {
    while (next_out < output_times.size() && output_times[next_out] <= t_end) {
      const double s = (output_times[next_out] - t) / h;
      const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
      const double h10 = s * (1.0 - s) * (1.0 - s);
      const double h01 = s * s * (3.0 - 2.0 * s);
      const double h11 = s * s * (s - 1.0);
      out = h00 * y + (h10 * h) * f + h01 * y_new + (h11 * h) * f_new;
      if (output_times[next_out] == t_end) out = y_new;
      observer(output_times[next_out], out);
      ++next_out;
    }
  };
  while (next_out < output_times.size() && output_times[next_out] <= t0) {
    observer(output_times[next_out], y);
    ++next_out;
  }
  const double span = t1 - t0;
  if (span == 0.0) return stats;

  rhs(t0, y, f);
  ++stats.evaluations;
  const double hmax = config.max_step > 0.0 ? config.max_step : 0.1 * span;
  double h = initial_step(rhs, t0, y, f, config, hmax, stats.evaluations);
  double t = t0;
  double err_prev = 1e-4;
  bool rejected_last = false;

  while (t < t1) {
    if (h < 1e-12 * span) {
      std::ostringstream os;
      os << "integrate_rk23: step size underflow at t = " << t
         << " (h = " << h << "); the system is too stiff for an explicit pair";
      fail(ErrorCode::kNumeric, os.str());
    }
    bool last = false;
    if (t + h >= t1 - 1e-12 * span) {
      h = t1 - t;
      last = true;
    }
    stage = y + (0.5 * h) * f;
    rhs(t + 0.5 * h, stage, k2);
    stage = y + (0.75 * h) * k2;
    rhs(t + 0.75 * h, stage, k3);
    y_new = y + h * ((2.0 / 9.0) * f + (1.0 / 3.0) * k2 + (4.0 / 9.0) * k3);
    const double t_new = last ? t1 : t + h;
    rhs(t_new, y_new, f_new);
    stats.evaluations += 3;
    err = h * ((-5.0 / 72.0) * f + (1.0 / 12.0) * k2 + (1.0 / 9.0) * k3 -
               0.125 * f_new);
    double en = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc =
          config.atol + config.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
      en = std::max(en, std::abs(err(i)) / sc);
    }
    if (!std::isfinite(en)) en = 1e10;

    if (en <= 1.0) {
      emit_until(t_new, t, h);
      ++stats.steps;
      stats.error_estimate += err.norm();
      double factor =
          en == 0.0 ? 5.0
                    : 0.9 * std::pow(en, -0.7 / 3.0) * std::pow(err_prev, 0.4 / 3.0);
      factor = std::clamp(factor, 0.2, 5.0);
      if (rejected_last) factor = std::min(factor, 1.0);
      err_prev = std::max(en, 1e-4);
      rejected_last = false;
      t = t_new;
      std::swap(y, y_new);
      std::swap(f, f_new);
      h = std::min(h * factor, hmax);
    } else {
      ++stats.rejected;
      rejected_last = true;
      h *= std::max(0.2, 0.9 * std::pow(en, -1.0 / 3.0));
    }
  }
  return stats;
}

Vector closed_loop_rhs(const VectorRef& zeta, const MatrixRef& a_hat,
                       const std::vector<Matrix>& n_hat, const MatrixRef& b_hat,
                       const MatrixRef& gain) {
  Vector out = a_hat * zeta;
  if (gain.size() == 0) return out;
  const Vector u = -(gain * zeta);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out += u(i) * (n_hat[static_cast<std::size_t>(i)] * zeta + b_hat.col(i));
  }
  return out;
}

ClosedLoopModel::ClosedLoopModel(const DeflatedSystem& deflated,
                                 const KroneckerOperators& operators,
                                 Vector sqrt_weight, Matrix gain)
    : deflated_(&deflated),
      operators_(&operators),
      sqrt_weight_(std::move(sqrt_weight)),
      gain_(std::move(gain)) {
  const Eigen::Index n = deflated.dimension();
  if (operators.size() != n + 1 || sqrt_weight_.size() != n + 1 ||
      operators.inputs() != deflated.b_hat.cols()) {
    fail(ErrorCode::kInvalidArgument, "ClosedLoopModel: dimension mismatch");
  }
  if (gain_.size() > 0 && (gain_.rows() != inputs() || gain_.cols() != n)) {
    fail(ErrorCode::kMismatch, "ClosedLoopModel: gain has the wrong shape");
  }
}

Vector ClosedLoopModel::controls(const VectorRef& zeta) const {
  if (!controlled()) return Vector::Zero(inputs());
  return -(gain_ * zeta);
}

void ClosedLoopModel::rhs(const VectorRef& zeta, Eigen::Ref<Vector> out) const {
  const Vector z = deflated_->lift(zeta);
  Vector w(z.size());
  operators_->apply_generator(z, w);
  Vector u;
  if (controlled()) {
    u = -(gain_ * zeta);
    Vector nz(z.size());
    operators_->apply_controls(u, z, nz);
    w += nz;
  }
  out = deflated_->restrict(w);
  if (controlled()) out.noalias() += deflated_->b_hat * u;
}

Vector ClosedLoopModel::full_state(double coefficient, const VectorRef& zeta) const {
  Vector z = deflated_->lift(zeta);
  z += coefficient * deflated_->s_hat;
  return z;
}

Vector ClosedLoopModel::grid_values(double coefficient, const VectorRef& zeta) const {
  const Vector z = full_state(coefficient, zeta);
  Vector y(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    y(i) = sqrt_weight_(i) > 0.0 ? z(i) / sqrt_weight_(i) : 0.0;
  }
  return y;
}

double ClosedLoopModel::mass(double coefficient, const VectorRef& zeta) const {
  return sqrt_weight_.dot(full_state(coefficient, zeta));
}

InitialState make_initial(const InitialParams& params, const PhaseGrid& grid,
                          const InvariantWeight& weight,
                          const DeflatedSystem& deflated) {
  const Eigen::Index n = grid.size();
  if (weight.sqrt_weight.size() != n || deflated.dimension() != n - 1) {
    fail(ErrorCode::kInvalidArgument, "make_initial: dimension mismatch");
  }
  const Vector& t = weight.sqrt_weight;
  InitialState s;

  if (params.kind == InitialKind::kEquilibrium) {
    // The discrete equilibrium is the computed null direction itself.
    const double m = t.dot(deflated.s_hat);
    s.coefficient = 1.0 / m;
    s.zeta0 = Vector::Zero(n - 1);
    s.y0.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      s.y0(i) = t(i) > 0.0 ? s.coefficient * deflated.s_hat(i) / t(i) : 0.0;
    }
    s.mass = 1.0;
    return s;
  }

  Vector y(n);
  switch (params.kind) {
    case InitialKind::kPerturbed:
      for (int i = 0; i < grid.nx(); ++i) {
        for (int j = 0; j < grid.nv(); ++j) {
          const double x = grid.x()(i);
          const double v = grid.v()(j);
          y(grid.index(i, j)) =
              1.0 + params.amplitude * std::cos(2.0 * std::numbers::pi * x) *
                        std::sin(0.5 * std::numbers::pi * v);
        }
      }
      break;
    case InitialKind::kRotated: {
      if (!(params.theta >= 0.0 && params.theta <= 1.0)) {
        fail(ErrorCode::kConfig, "initial.theta must lie in [0, 1]");
      }
      const Vector& mu = weight.density;
      // mu sampled at R(x, v) = (v, -x); zero outside the grid.
      auto sample = [&](double xq, double vq) {
        const double fx = (xq - grid.x()(0)) / grid.hx();
        const double fv = (vq - grid.v()(0)) / grid.hv();
        if (fx < 0.0 || fv < 0.0 || fx > grid.nx() - 1 || fv > grid.nv() - 1) {
          return 0.0;
        }
        const int i = std::min(static_cast<int>(fx), grid.nx() - 2);
        const int j = std::min(static_cast<int>(fv), grid.nv() - 2);
        const double a = fx - i;
        const double b = fv - j;
        return (1 - a) * (1 - b) * mu(grid.index(i, j)) +
               a * (1 - b) * mu(grid.index(i + 1, j)) +
               (1 - a) * b * mu(grid.index(i, j + 1)) +
               a * b * mu(grid.index(i + 1, j + 1));
      };
      Vector rotated(n);
      for (int i = 0; i < grid.nx(); ++i) {
        for (int j = 0; j < grid.nv(); ++j) {
          rotated(grid.index(i, j)) = sample(grid.v()(j), -grid.x()(i));
        }
      }
      if (params.theta > 0.0 && !(rotated.sum() > 0.0)) {
        fail(ErrorCode::kNumeric,
             "make_initial: rotated density underflows on the whole grid");
      }
      Vector rho = (1.0 - params.theta) * mu + params.theta * rotated;
      const double total = rho.sum() * weight.cell_area;
      if (!(total > 0.0)) {
        fail(ErrorCode::kNumeric, "make_initial: rotated density has no mass");
      }
      rho /= total;
      for (Eigen::Index k = 0; k < n; ++k) {
        y(k) = mu(k) > 0.0 ? rho(k) / mu(k) : 0.0;
      }
      break;
    }
    case InitialKind::kCustom:
      if (params.custom.size() != n || !params.custom.allFinite()) {
        fail(ErrorCode::kConfig,
             "make_initial: custom state must hold one finite value per node");
      }
      y = params.custom;
      break;
    case InitialKind::kEquilibrium:
      break;
  }
  const double m = mass(y, t);
  if (!(std::abs(m) > 0.0) || !std::isfinite(m)) {
    fail(ErrorCode::kNumeric, "make_initial: initial state has zero mass");
  }
  s.y0 = y / m;
  s.mass = mass(s.y0, t);
  const Vector z = t.cwiseProduct(s.y0);
  s.coefficient = deflated.s_hat.dot(z);
  s.zeta0 = deflated.restrict(z);
  return s;
}

Trajectory simulate(const ClosedLoopModel& model, const InitialState& initial,
                    const SimulationConfig& config) {
  if (!(config.horizon > 0.0) || config.samples < 2) {
    fail(ErrorCode::kConfig, "simulate: need horizon > 0 and at least 2 samples");
  }
  if (initial.zeta0.size() != model.dimension()) {
    fail(ErrorCode::kInvalidArgument, "simulate: initial state dimension mismatch");
  }
  std::vector<double> sample_times(static_cast<std::size_t>(config.samples));
  for (int k = 0; k < config.samples; ++k) {
    sample_times[static_cast<std::size_t>(k)] =
        config.horizon * k / (config.samples - 1);
  }
  std::vector<double> snaps = config.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  for (double s : snaps) {
    if (s < 0.0 || s > config.horizon) {
      fail(ErrorCode::kConfig, "simulate: snapshot time outside [0, horizon]");
    }
  }
  std::vector<double> outputs;
  std::set_union(sample_times.begin(), sample_times.end(), snaps.begin(),
                 snaps.end(), std::back_inserter(outputs));

  Trajectory traj;
  traj.controls.resize(config.samples, model.inputs());
  std::size_t next_sample = 0;
  std::size_t next_snap = 0;
  const double c = initial.coefficient;
  auto observer = [&](double t, const Vector& zeta) {
    if (next_sample < sample_times.size() && sample_times[next_sample] == t) {
      traj.times.push_back(t);
      traj.norms.push_back(zeta.norm());
      traj.controls.row(static_cast<Eigen::Index>(next_sample)) =
          model.controls(zeta).transpose();
      traj.mass.push_back(model.mass(c, zeta));
      ++next_sample;
    }
    if (next_snap < snaps.size() && snaps[next_snap] == t) {
      traj.snapshot_times.push_back(t);
      traj.snapshots.push_back(model.grid_values(c, zeta));
      ++next_snap;
    }
  };
  const OdeRhs rhs = [&model](double, const VectorRef& z, Eigen::Ref<Vector> dz) {
    model.rhs(z, dz);
  };
  traj.stats = integrate_rk23(rhs, initial.zeta0, 0.0, config.horizon, outputs,
                              config.integrator, observer);
  return traj;
}

DecayFit decay_fit(const std::vector<double>& times,
                   const std::vector<double>& norms, double window_start,
                   double window_end) {
  if (times.size() != norms.size() || times.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "decay_fit: need matching samples");
  }
  const double t_first = times.front();
  const double t_last = times.back();
  if (window_start < 0.0) window_start = 0.5 * (t_first + t_last);
  if (window_end < 0.0) window_end = t_last;
  if (window_start < t_first || window_end > t_last || !(window_end > window_start)) {
    fail(ErrorCode::kInvalidArgument, "decay_fit: window outside the time span");
  }
  const double peak = *std::max_element(norms.begin(), norms.end());
  const double floor = 1e-15 * peak;

  DecayFit fit;
  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < window_start || times[k] > window_end) continue;
    if (!(norms[k] > floor)) {
      fit.underflow = true;
      break;
    }
    ts.push_back(times[k]);
    ls.push_back(std::log(norms[k]));
  }
  if (ts.size() < 2) {
    fail(ErrorCode::kNumeric,
         "decay_fit: fewer than two positive samples in the window");
  }
  const double nn = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    ml += ls[k];
  }
  mt /= nn;
  ml /= nn;
  double stt = 0.0, stl = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    stl += (ts[k] - mt) * (ls[k] - ml);
  }
  fit.slope = stl / stt;
  fit.intercept = ml - fit.slope * mt;
  double ss = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double r = ls[k] - (fit.intercept + fit.slope * ts[k]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / nn);
  fit.points = static_cast<int>(ts.size());
  return fit;
}

}  // namespace hypoctl
