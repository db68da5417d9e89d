// Command-line front end: analyze -> riccati -> simulate, plus verify.

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypoctl/hypoctl.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
  int exit_code;
  std::string message;
};

// Exit codes follow hypoctl_status; 1 is reserved for usage and check failures.
[[noreturn]] void raise(hypoctl_status st) {
  throw Failure{static_cast<int>(st) + 1,
                std::string(hypoctl_status_name(st)) + ": " + hypoctl_last_error()};
}

void check(hypoctl_status st) {
  if (st != HYPOCTL_OK) raise(st);
}

struct FreeString {
  void operator()(char* s) const { hypoctl_string_free(s); }
};
using OwnedString = std::unique_ptr<char, FreeString>;

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<hypoctl_config, Deleter<hypoctl_config, hypoctl_config_free>>;
using ProblemHandle =
    std::unique_ptr<hypoctl_problem, Deleter<hypoctl_problem, hypoctl_problem_free>>;
using Riccati = std::unique_ptr<hypoctl_riccati, Deleter<hypoctl_riccati, hypoctl_riccati_free>>;
using TrajectoryHandle =
    std::unique_ptr<hypoctl_trajectory, Deleter<hypoctl_trajectory, hypoctl_trajectory_free>>;

std::string take(char* s) {
  OwnedString owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

std::string config_value(const hypoctl_config* cfg, const char* key) {
  char* out = nullptr;
  check(hypoctl_config_get(cfg, key, &out));
  return take(out);
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Failure{HYPOCTL_IO + 1, "IO: cannot write '" + tmp.string() + "'"};
  }
  fs::rename(tmp, path);
}

/// Exclusive marker in the output directory for the lifetime of a command.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".hypoctl.lock") {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw Failure{HYPOCTL_IO + 1, "IO: output directory '" + dir.string() +
                                        "' is locked by another run (remove " +
                                        path_.string() + " if stale)"};
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

struct Common {
  std::string config_path;
  std::string out_dir;
};

Config load_config(const Common& c) {
  hypoctl_config* raw = nullptr;
  if (c.config_path.empty()) {
    check(hypoctl_config_default(&raw));
  } else {
    check(hypoctl_config_load(c.config_path.c_str(), &raw));
  }
  Config cfg(raw);
  if (!c.out_dir.empty()) check(hypoctl_config_set(cfg.get(), "output.dir", c.out_dir.c_str()));
  return cfg;
}

fs::path prepare_output(const hypoctl_config* cfg) {
  const fs::path dir = config_value(cfg, "output.dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{HYPOCTL_IO + 1, "IO: cannot create '" + dir.string() + "'"};
  return dir;
}

ProblemHandle make_problem(const hypoctl_config* cfg) {
  hypoctl_problem* raw = nullptr;
  check(hypoctl_problem_create(cfg, &raw));
  return ProblemHandle(raw);
}

int cmd_analyze(const Common& c) {
  const Config cfg = load_config(c);
  const fs::path dir = prepare_output(cfg.get());
  const OutputLock lock(dir);
  const ProblemHandle p = make_problem(cfg.get());
  int passed = 0;
  char* json = nullptr;
  char* csv = nullptr;
  check(hypoctl_analyze(p.get(), &passed, &json, &csv));
  write_text(dir / "analysis.json", take(json));
  write_text(dir / "spectrum.csv", take(csv));
  check(hypoctl_problem_save_operators(p.get(), (dir / "operators.hcb").c_str()));
  std::cout << "hautus: " << (passed ? "pass" : "FAIL") << "\n"
            << "wrote " << (dir / "analysis.json").string() << ", spectrum.csv, operators.hcb\n";
  return passed ? 0 : HYPOCTL_NOT_STABILIZABLE + 1;
}

void print_iterate(int k, double update, double residual, double abscissa, void*) {
  std::printf("  iter %2d  update %.3e  residual %.3e  abscissa %+.4f\n", k, update, residual,
              abscissa);
  std::fflush(stdout);
}

int cmd_riccati(const Common& c, bool force) {
  const Config cfg = load_config(c);
  const fs::path dir = prepare_output(cfg.get());
  const OutputLock lock(dir);
  const fs::path target = dir / "riccati.hcb";
  if (fs::exists(target) && !force) {
    throw Failure{HYPOCTL_IO + 1,
                  "IO: '" + target.string() + "' exists; pass --force to overwrite"};
  }
  const ProblemHandle p = make_problem(cfg.get());
  hypoctl_riccati* raw = nullptr;
  check(hypoctl_riccati_solve(p.get(), print_iterate, nullptr, &raw));
  const Riccati r(raw);
  char* text = nullptr;
  check(hypoctl_riccati_history_csv(r.get(), &text));
  write_text(dir / "riccati_history.csv", take(text));
  check(hypoctl_riccati_spectrum_csv(r.get(), &text));
  write_text(dir / "closed_loop_spectrum.csv", take(text));
  check(hypoctl_riccati_summary_json(r.get(), &text));
  const std::string summary = take(text);
  write_text(dir / "riccati_summary.json", summary);
  check(hypoctl_riccati_save(r.get(), target.c_str()));
  std::cout << summary << "wrote " << target.string() << "\n";
  return 0;
}

int cmd_simulate(const Common& c, bool controlled, const std::string& gain_path,
                 const std::string& snapshot_times) {
  const Config cfg = load_config(c);
  if (!snapshot_times.empty()) {
    check(hypoctl_config_set(cfg.get(), "simulate.snapshot_times", snapshot_times.c_str()));
  }
  const fs::path dir = prepare_output(cfg.get());
  const OutputLock lock(dir);

  ProblemHandle p;
  Riccati gain;
  if (controlled) {
    std::string path = gain_path;
    if (path.empty()) path = config_value(cfg.get(), "simulate.gain_file");
    if (path.empty()) path = (dir / "riccati.hcb").string();
    hypoctl_riccati* raw = nullptr;
    check(hypoctl_riccati_load(path.c_str(), cfg.get(), &raw));
    gain.reset(raw);
    hypoctl_problem* praw = nullptr;
    check(hypoctl_problem_create_with_gain(cfg.get(), gain.get(), &praw));
    p.reset(praw);
  } else {
    p = make_problem(cfg.get());
  }

  hypoctl_trajectory* traw = nullptr;
  check(hypoctl_simulate(p.get(), gain.get(), &traw));
  const TrajectoryHandle t(traw);
  const std::string tag = controlled ? "controlled" : "uncontrolled";
  char* text = nullptr;
  check(hypoctl_trajectory_csv(t.get(), &text));
  write_text(dir / ("trajectory_" + tag + ".csv"), take(text));
  check(hypoctl_trajectory_summary_json(t.get(), &text));
  const std::string summary = take(text);
  write_text(dir / ("summary_" + tag + ".json"), summary);
  if (!config_value(cfg.get(), "simulate.snapshot_times").empty()) {
    check(hypoctl_trajectory_save_snapshots(t.get(),
                                            (dir / ("snapshots_" + tag + ".hcb")).c_str()));
  }
  std::cout << summary << "wrote " << (dir / ("trajectory_" + tag + ".csv")).string() << "\n";
  return 0;
}

void print_check(int id, const char* name, int passed, const char* measured, double seconds,
                 void*) {
  std::printf("[%s] %2d  %-46s %7.2fs  %s\n", passed ? "PASS" : "FAIL", id, name, seconds,
              measured);
  std::fflush(stdout);
}

int cmd_verify(const Common& c, const std::vector<int>& only) {
  const Config cfg = load_config(c);
  int all = 0;
  check(hypoctl_verify(cfg.get(), only.data(), only.size(), print_check, nullptr, &all));
  std::cout << (all ? "all checks passed" : "some checks FAILED") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("HYPOCTL_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) hypoctl_set_num_threads(n);
  }

  CLI::App app{"Feedback stabilization of the discretized kinetic Fokker-Planck equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hypoctl_version()));

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "run configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "output directory (overrides output.dir)");
  };

  auto* analyze = app.add_subcommand("analyze", "spectrum, spectral gap and Hautus test");
  add_common(analyze);

  bool force = false;
  auto* riccati = app.add_subcommand("riccati", "solve the shifted Riccati equation");
  add_common(riccati);
  riccati->add_flag("--force", force, "overwrite an existing riccati.hcb");

  bool uncontrolled = false;
  std::string gain_path;
  std::string snapshot_times;
  auto* simulate = app.add_subcommand("simulate", "integrate the (un)controlled system");
  add_common(simulate);
  auto* ctl = simulate->add_flag("--controlled", "apply the stored feedback (default)");
  auto* unctl = simulate->add_flag("--uncontrolled", uncontrolled, "run without feedback");
  ctl->excludes(unctl);
  simulate->add_option("--gain", gain_path, "Riccati container (default: OUT/riccati.hcb)");
  simulate->add_option("--snapshot-times", snapshot_times,
                       "comma separated times at which to store full states");

  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  add_common(verify);
  verify->add_option("--only", only, "check ids to run")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(common);
    if (riccati->parsed()) return cmd_riccati(common, force);
    if (simulate->parsed()) return cmd_simulate(common, !uncontrolled, gain_path, snapshot_times);
    if (verify->parsed()) return cmd_verify(common, only);
  } catch (const Failure& f) {
    std::cerr << "hypoctl: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "hypoctl: " << e.what() << "\n";
    return HYPOCTL_INTERNAL + 1;
  }
  return 1;
}
