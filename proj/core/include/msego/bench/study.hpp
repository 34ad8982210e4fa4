#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "msego/bench/problems.hpp"
#include "msego/bench/stats.hpp"
#include "msego/sego.hpp"

namespace msego::bench {

/// Method string: "krg" | "kpls:<d>" | "kpls-auto" | "ga" | "random".
struct MethodSpec {
  enum class Kind { Sego, Ga, Random };
  Kind kind = Kind::Sego;
  KernelMode kernel = KernelMode::FullSe;
  int components = 2;
  std::string label;

  static MethodSpec parse(const std::string& text);  // throws ConfigError
};

/// "mean" or "utb:<kappa>".
FeasibilityRule parse_feasibility(const std::string& text);
/// "ei", "wb2" or "wb2s".
AcquisitionType parse_acquisition(const std::string& text);

struct StudyConfig {
  std::vector<std::string> problems;
  std::vector<std::string> methods;
  int repetitions = 20;
  int doe_size = 5;
  int budget = 50;
  std::uint64_t base_seed = 0;
  std::string feasibility = "utb:3";
  std::string acquisition = "wb2s";
  double violation_tol = 1e-4;
  std::filesystem::path out_dir;
  int threads = 0;  // 0: hardware concurrency, capped by MIXED_SEGO_THREADS

  static StudyConfig from_json(const nlohmann::json& j);
  static StudyConfig from_file(const std::filesystem::path& path);
};

/// Worker width after applying the MIXED_SEGO_THREADS cap.
int worker_count(int requested);

/// Dispatch one run of `method` on `problem` (SEGO loop, GA or random
/// search); GA spends the same total evaluation count as the SEGO methods.
RunRecord execute_method(const Problem& problem, const MethodSpec& method, const SegoConfig& base);

/// Fixed-order CSV log of one run, written atomically (tmp + rename).
/// Columns: eval_index, iter, x.., z.., c.., f, g.., violation, feasible,
/// incumbent, d_f, d_g.., acq_value, wall_ms; floats at 17 significant digits.
void write_run_csv(const std::filesystem::path& path, const RunRecord& record);

/// Sidecar metadata (problem, method, seed, reference, config echo).
void write_run_meta(const std::filesystem::path& path, const RunRecord& record,
                    const std::optional<double>& reference, const nlohmann::json& config_echo);

/// Adaptive-selection PRESS traces, one row per evaluated component count.
void write_press_trace_csv(const std::filesystem::path& path, const RunRecord& record);

struct LoadedRun {
  std::string problem;
  std::string method;
  std::uint64_t seed = 0;
  std::optional<double> reference;
  std::vector<double> objective;
  std::vector<bool> feasible;
  std::vector<double> incumbent;
};

/// Reads a per-run CSV (plus its .meta.json sidecar when present).
LoadedRun read_run_csv(const std::filesystem::path& csv_path);

/// Executes every (problem, method, repetition) run, writes per-run CSV logs
/// and aggregate artifacts (summary.json, convergence curves, mean-error
/// table) under cfg.out_dir.  Individual run failures are recorded and do not
/// abort the study.
void run_study(const StudyConfig& cfg);

}  // namespace msego::bench
