#include "hypoctl/hypoctl.h"

#include <dlfcn.h>

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "error.hpp"
#include "pipeline.hpp"
#include "verify.hpp"

struct hypoctl_config {
  hypoctl::RunConfig cfg;
};

struct hypoctl_problem {
  std::unique_ptr<hypoctl::Problem> problem;
};

struct hypoctl_riccati {
  hypoctl::StoredGain gain;
};

struct hypoctl_trajectory {
  hypoctl::Trajectory traj;
  bool controlled = false;
  hypoctl::RunConfig cfg;
  std::map<std::string, std::string> metadata;
};

namespace {

thread_local std::string g_last_error;

hypoctl_status to_status(hypoctl::ErrorCode code) {
  using hypoctl::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return HYPOCTL_INVALID_ARG;
    case ErrorCode::kConfig: return HYPOCTL_CONFIG;
    case ErrorCode::kIo: return HYPOCTL_IO;
    case ErrorCode::kNumeric: return HYPOCTL_NUMERIC;
    case ErrorCode::kNotStabilizable: return HYPOCTL_NOT_STABILIZABLE;
    case ErrorCode::kConvergence: return HYPOCTL_CONVERGENCE;
    case ErrorCode::kMismatch: return HYPOCTL_MISMATCH;
  }
  return HYPOCTL_INTERNAL;
}

template <typename F>
hypoctl_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return HYPOCTL_OK;
  } catch (const hypoctl::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HYPOCTL_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HYPOCTL_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) hypoctl::fail(hypoctl::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* hypoctl_version(void) { return "1.0.0"; }

const char* hypoctl_last_error(void) { return g_last_error.c_str(); }

const char* hypoctl_status_name(hypoctl_status status) {
  switch (status) {
    case HYPOCTL_OK: return "OK";
    case HYPOCTL_INVALID_ARG: return "INVALID_ARG";
    case HYPOCTL_CONFIG: return "CONFIG";
    case HYPOCTL_IO: return "IO";
    case HYPOCTL_NUMERIC: return "NUMERIC";
    case HYPOCTL_NOT_STABILIZABLE: return "NOT_STABILIZABLE";
    case HYPOCTL_CONVERGENCE: return "CONVERGENCE";
    case HYPOCTL_MISMATCH: return "MISMATCH";
    case HYPOCTL_INTERNAL: return "INTERNAL";
  }
  return "UNKNOWN";
}

void hypoctl_string_free(char* s) { std::free(s); }

hypoctl_status hypoctl_set_num_threads(int threads) {
  return guarded([&] {
    require(threads >= 1, "thread count must be >= 1");
    using SetThreads = void (*)(int);
    if (auto* fn = reinterpret_cast<SetThreads>(dlsym(RTLD_DEFAULT, "openblas_set_num_threads"))) {
      fn(threads);
    }
  });
}

hypoctl_status hypoctl_config_default(hypoctl_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new hypoctl_config{};
  });
}

hypoctl_status hypoctl_config_load(const char* path, hypoctl_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new hypoctl_config{hypoctl::RunConfig::load(path)};
  });
}

hypoctl_status hypoctl_config_parse(const char* text, const char* base_dir,
                                    hypoctl_config** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new hypoctl_config{hypoctl::RunConfig::parse(text, base_dir ? base_dir : "")};
  });
}

hypoctl_status hypoctl_config_set(hypoctl_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr, "null argument");
    hypoctl::RunConfig next = cfg->cfg;
    next.set(key, value);
    next.validate();
    cfg->cfg = std::move(next);
  });
}

hypoctl_status hypoctl_config_get(const hypoctl_config* cfg, const char* key, char** value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr, "null argument");
    const auto entries = cfg->cfg.entries();
    const auto it = entries.find(key);
    if (it == entries.end()) {
      hypoctl::fail(hypoctl::ErrorCode::kConfig, std::string("unknown configuration key '") +
                                                     key + "'");
    }
    *value = dup_string(it->second);
  });
}

hypoctl_status hypoctl_config_text(const hypoctl_config* cfg, char** text) {
  return guarded([&] {
    require(cfg != nullptr && text != nullptr, "null argument");
    *text = dup_string(cfg->cfg.to_text());
  });
}

void hypoctl_config_free(hypoctl_config* cfg) { delete cfg; }

hypoctl_status hypoctl_problem_create(const hypoctl_config* cfg, hypoctl_problem** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    auto p = std::make_unique<hypoctl::Problem>(cfg->cfg);
    *out = new hypoctl_problem{std::move(p)};
  });
}

hypoctl_status hypoctl_problem_create_with_gain(const hypoctl_config* cfg,
                                                const hypoctl_riccati* gain,
                                                hypoctl_problem** out) {
  return guarded([&] {
    require(cfg != nullptr && gain != nullptr && out != nullptr, "null argument");
    const auto diff = hypoctl::metadata_diff(gain->gain.metadata, cfg->cfg.problem_metadata());
    if (!diff.empty()) {
      std::string msg = "stored gain does not match the configuration:";
      for (const std::string& d : diff) msg += "\n  " + d;
      hypoctl::fail(hypoctl::ErrorCode::kMismatch, msg);
    }
    const hypoctl::Vector s = gain->gain.s_hat;
    auto p = std::make_unique<hypoctl::Problem>(cfg->cfg, &s);
    p->check_gain(gain->gain);
    *out = new hypoctl_problem{std::move(p)};
  });
}

hypoctl_status hypoctl_problem_dims(const hypoctl_problem* p, size_t* n, size_t* m) {
  return guarded([&] {
    require(p != nullptr, "null problem");
    if (n) *n = static_cast<size_t>(p->problem->grid().size());
    if (m) *m = static_cast<size_t>(p->problem->deflated().b_hat.cols());
  });
}

void hypoctl_problem_free(hypoctl_problem* p) { delete p; }

hypoctl_status hypoctl_analyze(const hypoctl_problem* p, int* passed, char** json, char** csv) {
  return guarded([&] {
    require(p != nullptr, "null problem");
    const hypoctl::StabilizabilityReport rep = p->problem->analyze();
    std::string j = p->problem->analysis_json(rep);
    std::string c = p->problem->spectrum_csv(rep);
    if (passed) *passed = rep.passed ? 1 : 0;
    char* jout = json ? dup_string(j) : nullptr;
    if (csv) {
      try {
        *csv = dup_string(c);
      } catch (...) {
        std::free(jout);
        throw;
      }
    }
    if (json) *json = jout;
  });
}

hypoctl_status hypoctl_problem_save_operators(const hypoctl_problem* p, const char* path) {
  return guarded([&] {
    require(p != nullptr && path != nullptr, "null argument");
    hypoctl::write_container(path, p->problem->operators_container());
  });
}

hypoctl_status hypoctl_riccati_solve(const hypoctl_problem* p, hypoctl_iterate_fn on_iterate,
                                     void* user, hypoctl_riccati** out) {
  return guarded([&] {
    require(p != nullptr && out != nullptr, "null argument");
    hypoctl::IterateCallback cb;
    if (on_iterate != nullptr) {
      cb = [&](const hypoctl::RiccatiIterate& it, const hypoctl::Matrix&) {
        on_iterate(it.k, it.update_norm, it.residual, it.abscissa, user);
      };
    }
    *out = new hypoctl_riccati{p->problem->solve_riccati(cb)};
  });
}

hypoctl_status hypoctl_riccati_history_csv(const hypoctl_riccati* r, char** csv) {
  return guarded([&] {
    require(r != nullptr && csv != nullptr, "null argument");
    *csv = dup_string(r->gain.history_csv());
  });
}

hypoctl_status hypoctl_riccati_spectrum_csv(const hypoctl_riccati* r, char** csv) {
  return guarded([&] {
    require(r != nullptr && csv != nullptr, "null argument");
    *csv = dup_string(r->gain.closed_loop_csv());
  });
}

hypoctl_status hypoctl_riccati_summary_json(const hypoctl_riccati* r, char** json) {
  return guarded([&] {
    require(r != nullptr && json != nullptr, "null argument");
    *json = dup_string(r->gain.summary_json());
  });
}

hypoctl_status hypoctl_riccati_save(const hypoctl_riccati* r, const char* path) {
  return guarded([&] {
    require(r != nullptr && path != nullptr, "null argument");
    hypoctl::write_container(path, r->gain.to_container());
  });
}

hypoctl_status hypoctl_riccati_load(const char* path, const hypoctl_config* expected_cfg,
                                    hypoctl_riccati** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    hypoctl::StoredGain g = hypoctl::StoredGain::from_container(hypoctl::read_container(path));
    if (expected_cfg != nullptr) {
      const auto diff = hypoctl::metadata_diff(g.metadata, expected_cfg->cfg.problem_metadata());
      if (!diff.empty()) {
        std::string msg = std::string("'") + path + "' does not match the configuration:";
        for (const std::string& d : diff) msg += "\n  " + d;
        hypoctl::fail(hypoctl::ErrorCode::kMismatch, msg);
      }
    }
    *out = new hypoctl_riccati{std::move(g)};
  });
}

void hypoctl_riccati_free(hypoctl_riccati* r) { delete r; }

hypoctl_status hypoctl_simulate(const hypoctl_problem* p, const hypoctl_riccati* gain,
                                hypoctl_trajectory** out) {
  return guarded([&] {
    require(p != nullptr && out != nullptr, "null argument");
    const hypoctl::Problem& prob = *p->problem;
    hypoctl::Matrix k;
    if (gain != nullptr) {
      prob.check_gain(gain->gain);
      k = gain->gain.gain;
    }
    auto t = std::make_unique<hypoctl_trajectory>();
    t->traj = prob.simulate(k);
    t->controlled = gain != nullptr;
    t->cfg = prob.config();
    t->metadata = prob.config().problem_metadata();
    t->metadata["controlled"] = t->controlled ? "1" : "0";
    *out = t.release();
  });
}

hypoctl_status hypoctl_trajectory_csv(const hypoctl_trajectory* t, char** csv) {
  return guarded([&] {
    require(t != nullptr && csv != nullptr, "null argument");
    *csv = dup_string(hypoctl::trajectory_csv(t->traj));
  });
}

hypoctl_status hypoctl_trajectory_summary_json(const hypoctl_trajectory* t, char** json) {
  return guarded([&] {
    require(t != nullptr && json != nullptr, "null argument");
    *json = dup_string(hypoctl::trajectory_summary_json(t->traj, t->controlled, t->cfg));
  });
}

hypoctl_status hypoctl_trajectory_save_snapshots(const hypoctl_trajectory* t,
                                                 const char* path) {
  return guarded([&] {
    require(t != nullptr && path != nullptr, "null argument");
    hypoctl::write_container(path,
                             hypoctl::snapshots_container(t->traj, t->cfg.grid(), t->metadata));
  });
}

size_t hypoctl_trajectory_size(const hypoctl_trajectory* t) {
  return t == nullptr ? 0 : t->traj.times.size();
}

hypoctl_status hypoctl_trajectory_sample(const hypoctl_trajectory* t, size_t i, double* time,
                                         double* norm, double* mass) {
  return guarded([&] {
    require(t != nullptr, "null trajectory");
    require(i < t->traj.times.size(), "sample index out of range");
    if (time) *time = t->traj.times[i];
    if (norm) *norm = t->traj.norms[i];
    if (mass) *mass = t->traj.mass[i];
  });
}

void hypoctl_trajectory_free(hypoctl_trajectory* t) { delete t; }

hypoctl_status hypoctl_verify(const hypoctl_config* cfg, const int* only_ids, size_t only_count,
                              hypoctl_check_fn on_check, void* user, int* all_passed) {
  return guarded([&] {
    require(only_count == 0 || only_ids != nullptr, "null id list");
    const hypoctl::RunConfig base = cfg ? cfg->cfg : hypoctl::RunConfig{};
    const std::vector<int> only(only_ids, only_ids + only_count);
    bool all = true;
    hypoctl::run_acceptance(base, only, [&](const hypoctl::CheckResult& r) {
      all = all && r.passed;
      if (on_check) {
        on_check(r.id, r.name.c_str(), r.passed ? 1 : 0, r.measured.c_str(), r.seconds, user);
      }
    });
    if (all_passed) *all_passed = all ? 1 : 0;
  });
}

}  // extern "C"
