#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "msego/bench/baselines.hpp"
#include "msego/bench/problems.hpp"
#include "msego/bench/stats.hpp"
#include "msego/bench/study.hpp"
#include "msego/errors.hpp"
#include "msego/sego.hpp"
#include "msego/subprocess.hpp"

namespace {

using namespace msego;
namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// A problem defined by a JSON file: a mixed space plus a child-process
/// evaluator speaking the line-delimited JSON protocol.
struct ExternalProblem {
  Problem problem;
  std::shared_ptr<SubprocessEvaluator> evaluator;
};

ExternalProblem load_external_problem(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read problem file: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("bad problem file " + path.string() + ": " + e.what());
  }

  ExternalProblem ext;
  ext.problem.name = j.value("name", path.stem().string());
  ext.problem.space = MixedSpace::from_json(j.at("space"));

  SubprocessEvaluator::Options opts;
  opts.command = j.at("command").get<std::vector<std::string>>();
  opts.n_constraints = j.value("constraints", 0);
  opts.timeout_ms = j.value("timeout_ms", 30000);
  ext.evaluator = std::make_shared<SubprocessEvaluator>(opts);

  ext.problem.joint_constraint_count = opts.n_constraints;
  ext.problem.joint_evaluator = [ev = ext.evaluator](const MixedPoint& w) { return ev->evaluate(w); };
  if (j.contains("reference")) ext.problem.reference_value = j["reference"].get<double>();
  return ext;
}

struct ResolvedProblem {
  Problem problem;
  std::optional<double> reference;
  std::shared_ptr<SubprocessEvaluator> keep_alive;
};

ResolvedProblem resolve_problem(const std::string& spec) {
  ResolvedProblem out;
  if (bench::is_registered(spec)) {
    out.problem = bench::find_problem(spec).problem;
    out.reference = bench::reference_value(spec);
    return out;
  }
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
    ExternalProblem ext = load_external_problem(spec);
    out.problem = ext.problem;
    out.reference = ext.problem.reference_value;
    out.keep_alive = ext.evaluator;
    return out;
  }
  throw ConfigError("unknown problem: " + spec + " (not registered, not a .json file)");
}

int cmd_optimize(const std::string& problem_spec, const std::string& method_str, int doe, int budget,
                 std::uint64_t seed, std::string feasibility, const std::string& acquisition,
                 double tau_v, const std::string& out_dir) {
  ResolvedProblem rp = resolve_problem(problem_spec);
  const bench::MethodSpec method = bench::MethodSpec::parse(method_str);

  // auto: trust-bound widening for the cheap analytical suite, plain mean
  // prediction for external (expensive) black boxes
  if (feasibility == "auto") {
    feasibility = rp.keep_alive ? "mean" : "utb:3";
    std::cout << "feasibility: " << feasibility << " (auto)\n";
  }

  SegoConfig cfg;
  cfg.doe_size = doe;
  cfg.budget = budget;
  cfg.seed = seed;
  cfg.feasibility = bench::parse_feasibility(feasibility);
  cfg.acquisition = bench::parse_acquisition(acquisition);
  cfg.violation_tol = tau_v;

  RunRecord rec = bench::execute_method(rp.problem, method, cfg);

  fs::create_directories(out_dir);
  std::string label = method.label;
  for (char& c : label) {
    if (c == ':') c = '_';
  }
  const std::string stem = rec.problem + "__" + label + "__seed" + std::to_string(seed);
  const fs::path csv = fs::path(out_dir) / (stem + ".csv");
  nlohmann::json echo = {{"doe_size", doe},       {"budget", budget},
                         {"feasibility", feasibility}, {"acquisition", acquisition},
                         {"violation_tol", tau_v}};
  bench::write_run_csv(csv, rec);
  bench::write_run_meta(fs::path(out_dir) / (stem + ".meta.json"), rec, rp.reference, echo);
  bool any_trace = false;
  for (const auto& info : rec.iterations) any_trace = any_trace || !info.press_traces.empty();
  if (any_trace) bench::write_press_trace_csv(fs::path(out_dir) / (stem + ".presstrace.csv"), rec);

  std::cout << "run: " << stem << "\n"
            << "evaluations: " << rec.evaluations.size() << "\n";
  if (rec.has_feasible()) {
    std::cout << "best_feasible: " << fmt17(rec.best_feasible()) << "\n";
    if (rp.reference) {
      std::cout << "relative_error: " << fmt17(bench::final_relative_error(rec, *rp.reference)) << "\n";
    }
  } else {
    std::cout << "best_feasible: none (no point met the violation tolerance)\n";
  }
  std::cout << "log: " << csv.string() << "\n";
  return 0;
}

int cmd_profile(const std::string& runs_dir, double tol, const std::string& out_csv) {
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
    if (name.find(".presstrace.") != std::string::npos) continue;
    csvs.push_back(entry.path());
  }
  if (csvs.empty()) throw ConfigError("no run logs found in " + runs_dir);
  std::sort(csvs.begin(), csvs.end());

  std::map<std::string, std::vector<bench::ProfileInstance>> by_method;
  for (const fs::path& p : csvs) {
    bench::LoadedRun run = bench::read_run_csv(p);
    double reference;
    if (run.reference) {
      reference = *run.reference;
    } else if (!run.problem.empty() && bench::is_registered(run.problem)) {
      reference = bench::reference_value(run.problem);
    } else {
      throw ConfigError("no reference value for run " + p.string());
    }
    bench::ProfileInstance inst;
    inst.objective = run.objective;
    inst.feasible = run.feasible;
    inst.reference = reference;
    const std::string method = run.method.empty() ? "unknown" : run.method;
    by_method[method].push_back(std::move(inst));
  }

  std::size_t max_budget = 0;
  std::map<std::string, bench::DataProfile> profiles;
  for (const auto& [method, instances] : by_method) {
    profiles[method] = bench::data_profile(instances, tol);
    max_budget = std::max(max_budget, profiles[method].solved_fraction.size());
  }

  std::ostringstream os;
  os << "budget";
  for (const auto& [method, _] : profiles) os << ',' << method;
  os << '\n';
  for (std::size_t b = 1; b <= max_budget; ++b) {
    os << b;
    for (const auto& [method, prof] : profiles) {
      const auto& v = prof.solved_fraction;
      const double frac = v.empty() ? 0.0 : v[std::min(b, v.size()) - 1];
      os << ',' << fmt17(frac);
    }
    os << '\n';
  }
  if (out_csv == "-") {
    std::cout << os.str();
  } else {
    std::ofstream of(out_csv, std::ios::trunc);
    if (!of) throw ConfigError("cannot write " + out_csv);
    of << os.str();
    std::cout << "profile (tol " << tol << ") written to " << out_csv << "\n";
  }
  return 0;
}

int cmd_list_problems() {
  std::printf("%-10s %4s %4s %4s %8s %12s  %s\n", "name", "n", "m", "l", "relaxed", "constraints",
              "oracle");
  for (const std::string& name : bench::problem_names()) {
    const bench::RegisteredProblem& rp = bench::find_problem(name);
    const MixedSpace& s = rp.problem.space;
    std::printf("%-10s %4d %4d %4d %8d %12d  %s\n", name.c_str(), s.n_continuous(), s.n_integer(),
                s.n_categorical(), s.relaxed_dim(), rp.problem.constraint_count(),
                rp.oracle_note.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-variable constrained Bayesian optimization (continuous relaxation + "
               "PLS-reduced Gaussian processes) with a benchmark harness"};
  app.require_subcommand(1);

  // optimize
  std::string problem_spec, method = "krg", feasibility = "auto", acquisition = "wb2s", out_dir = "runs";
  int doe = 5, budget = 50;
  std::uint64_t seed = 0;
  double tau_v = 1e-4;
  auto* opt = app.add_subcommand("optimize", "Run one optimization and write its CSV log");
  opt->add_option("--problem", problem_spec, "Registered problem name or external problem .json")
      ->required();
  opt->add_option("--method", method, "krg|kpls:<d>|kpls-auto|ga|random");
  opt->add_option("--doe", doe, "Initial DoE size");
  opt->add_option("--budget", budget, "Enrichment iterations (one evaluation each)");
  opt->add_option("--seed", seed, "Random seed");
  opt->add_option("--feasibility", feasibility,
                  "mean|utb:<kappa>|auto (auto: utb:3 for built-in problems, mean for external)");
  opt->add_option("--acq", acquisition, "ei|wb2|wb2s");
  opt->add_option("--tau-v", tau_v, "Constraint violation tolerance");
  opt->add_option("--out", out_dir, "Output directory");

  // study
  std::string study_config;
  auto* study = app.add_subcommand("study", "Run a repeated-run study from a JSON config");
  study->add_option("--config", study_config, "Study configuration JSON")->required();

  // profile
  std::string runs_dir, profile_out = "-";
  double tol = 0.02;
  auto* profile = app.add_subcommand("profile", "Data profile from a directory of run CSVs");
  profile->add_option("--runs", runs_dir, "Directory containing per-run CSV logs")->required();
  profile->add_option("--tol", tol, "Relative-error tolerance (e.g. 0.02 or 0.005)");
  profile->add_option("--out", profile_out, "Output CSV path ('-' for stdout)");

  auto* list = app.add_subcommand("list-problems", "List registered benchmark problems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (opt->parsed()) {
      return cmd_optimize(problem_spec, method, doe, budget, seed, feasibility, acquisition, tau_v,
                          out_dir);
    }
    if (study->parsed()) {
      bench::run_study(bench::StudyConfig::from_file(study_config));
      std::cout << "study complete\n";
      return 0;
    }
    if (profile->parsed()) return cmd_profile(runs_dir, tol, profile_out);
    if (list->parsed()) return cmd_list_problems();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
