#include "msego/bench/study.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "msego/bench/baselines.hpp"
#include "msego/errors.hpp"

namespace msego::bench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize_label(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    if (c == ':') c = '_';
  }
  return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec spec;
  spec.label = text;
  if (text == "krg") {
    spec.kind = Kind::Sego;
    spec.kernel = KernelMode::FullSe;
  } else if (text == "kpls-auto") {
    spec.kind = Kind::Sego;
    spec.kernel = KernelMode::KplsAuto;
  } else if (text.rfind("kpls:", 0) == 0) {
    spec.kind = Kind::Sego;
    spec.kernel = KernelMode::KplsFixed;
    try {
      spec.components = std::stoi(text.substr(5));
    } catch (const std::exception&) {
      throw ConfigError("bad method: " + text);
    }
    if (spec.components < 1) throw ConfigError("bad component count in method: " + text);
  } else if (text == "ga") {
    spec.kind = Kind::Ga;
  } else if (text == "random") {
    spec.kind = Kind::Random;
  } else {
    throw ConfigError("unknown method: " + text + " (expected krg|kpls:<d>|kpls-auto|ga|random)");
  }
  return spec;
}

FeasibilityRule parse_feasibility(const std::string& text) {
  FeasibilityRule rule;
  if (text == "mean") {
    rule.mode = FeasibilityMode::MeanPrediction;
  } else if (text == "utb") {
    rule.mode = FeasibilityMode::Utb;
  } else if (text.rfind("utb:", 0) == 0) {
    rule.mode = FeasibilityMode::Utb;
    try {
      rule.kappa = std::stod(text.substr(4));
    } catch (const std::exception&) {
      throw ConfigError("bad feasibility rule: " + text);
    }
    if (!(rule.kappa >= 0.0)) throw ConfigError("bad feasibility kappa: " + text);
  } else {
    throw ConfigError("unknown feasibility rule: " + text + " (expected mean|utb:<kappa>)");
  }
  return rule;
}

AcquisitionType parse_acquisition(const std::string& text) {
  if (text == "ei") return AcquisitionType::Ei;
  if (text == "wb2") return AcquisitionType::Wb2;
  if (text == "wb2s") return AcquisitionType::Wb2s;
  throw ConfigError("unknown acquisition: " + text + " (expected ei|wb2|wb2s)");
}

StudyConfig StudyConfig::from_json(const nlohmann::json& j) {
  StudyConfig cfg;
  cfg.problems = j.at("problems").get<std::vector<std::string>>();
  cfg.methods = j.at("methods").get<std::vector<std::string>>();
  cfg.repetitions = j.value("repetitions", 20);
  cfg.doe_size = j.value("doe_size", 5);
  cfg.budget = j.value("budget", 50);
  cfg.base_seed = j.value("seed", std::uint64_t{0});
  cfg.feasibility = j.value("feasibility", std::string("utb:3"));
  cfg.acquisition = j.value("acquisition", std::string("wb2s"));
  cfg.violation_tol = j.value("violation_tol", 1e-4);
  cfg.out_dir = j.at("out").get<std::string>();
  cfg.threads = j.value("threads", 0);
  return cfg;
}

StudyConfig StudyConfig::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read study config: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("bad study config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

int worker_count(int requested) {
  int width = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (width < 1) width = 1;
  if (const char* env = std::getenv("MIXED_SEGO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) width = std::min(width, cap);
  }
  return width;
}

RunRecord execute_method(const Problem& problem, const MethodSpec& method, const SegoConfig& base) {
  RunRecord rec;
  switch (method.kind) {
    case MethodSpec::Kind::Sego: {
      SegoConfig cfg = base;
      cfg.kernel_mode = method.kernel;
      cfg.kpls_components = method.components;
      rec = optimize(problem, cfg);
      break;
    }
    case MethodSpec::Kind::Ga: {
      GaOptions ga;
      ga.violation_tol = base.violation_tol;
      const int total = base.doe_size + base.budget;
      rec = ga_baseline(problem, std::max(0, total - ga.population), base.seed, ga);
      break;
    }
    case MethodSpec::Kind::Random:
      rec = random_search(problem, base.doe_size, base.budget, base.seed, base.violation_tol);
      break;
  }
  rec.method = method.label;
  return rec;
}

void write_run_csv(const std::filesystem::path& path, const RunRecord& record) {
  const int nx = record.evaluations.empty() ? 0 : static_cast<int>(record.evaluations[0].point.x.size());
  const int nz = record.evaluations.empty() ? 0 : static_cast<int>(record.evaluations[0].point.z.size());
  const int nc = record.evaluations.empty() ? 0 : static_cast<int>(record.evaluations[0].point.c.size());
  const int ng = record.evaluations.empty() ? 0 : static_cast<int>(record.evaluations[0].constraints.size());

  std::ostringstream os;
  os << "eval_index,iter";
  for (int i = 0; i < nx; ++i) os << ",x" << i;
  for (int i = 0; i < nz; ++i) os << ",z" << i;
  for (int i = 0; i < nc; ++i) os << ",c" << i;
  os << ",f";
  for (int i = 0; i < ng; ++i) os << ",g" << i;
  os << ",violation,feasible,incumbent,d_f";
  for (int i = 0; i < ng; ++i) os << ",d_g" << i;
  os << ",acq_value,wall_ms\n";

  for (std::size_t e = 0; e < record.evaluations.size(); ++e) {
    const Evaluation& ev = record.evaluations[e];
    os << (e + 1) << ',' << ev.iteration;
    for (double x : ev.point.x) os << ',' << fmt17(x);
    for (std::int64_t z : ev.point.z) os << ',' << z;
    for (int c : ev.point.c) os << ',' << c;
    os << ',' << fmt17(ev.objective);
    for (double g : ev.constraints) os << ',' << fmt17(g);
    os << ',' << fmt17(ev.violation);
    os << ',' << (ev.feasible ? 1 : 0);
    os << ',' << fmt17(record.incumbent[e]);

    const IterationInfo* info = nullptr;
    if (ev.iteration >= 1 && static_cast<std::size_t>(ev.iteration) <= record.iterations.size()) {
      info = &record.iterations[static_cast<std::size_t>(ev.iteration - 1)];
    }
    os << ',' << (info ? info->d_objective : 0);
    for (int i = 0; i < ng; ++i) {
      os << ',' << (info && i < static_cast<int>(info->d_constraints.size()) ? info->d_constraints[static_cast<std::size_t>(i)] : 0);
    }
    os << ',' << fmt17(info ? info->acquisition_value : std::numeric_limits<double>::quiet_NaN());
    os << ',' << ev.wall_ns / 1000000 << '\n';
  }
  atomic_write(path, os.str());
}

void write_run_meta(const std::filesystem::path& path, const RunRecord& record,
                    const std::optional<double>& reference, const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["problem"] = record.problem;
  j["method"] = record.method;
  j["seed"] = record.seed;
  j["doe_size"] = record.doe_size;
  j["evaluations"] = record.evaluations.size();
  j["feasible_found"] = record.has_feasible();
  if (record.has_feasible()) j["best_feasible"] = record.best_feasible();
  if (reference) j["reference"] = *reference;
  j["config"] = config_echo;
  atomic_write(path, j.dump(2) + "\n");
}

void write_press_trace_csv(const std::filesystem::path& path, const RunRecord& record) {
  std::ostringstream os;
  os << "iter,output,d,press,wold_r\n";
  for (const IterationInfo& info : record.iterations) {
    for (const auto& [output, trace] : info.press_traces) {
      for (const ComponentTraceEntry& e : trace) {
        os << info.iteration << ',' << output << ',' << e.components << ',' << fmt17(e.press) << ','
           << fmt17(e.wold_r) << '\n';
      }
    }
  }
  atomic_write(path, os.str());
}

LoadedRun read_run_csv(const std::filesystem::path& csv_path) {
  std::ifstream is(csv_path);
  if (!is) throw ConfigError("cannot read run log: " + csv_path.string());
  std::string header;
  if (!std::getline(is, header)) throw ConfigError("empty run log: " + csv_path.string());
  const auto cols = split_csv_line(header);
  int f_col = -1, viol_col = -1, feas_col = -1, inc_col = -1;
  for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
    if (cols[static_cast<std::size_t>(i)] == "f") f_col = i;
    if (cols[static_cast<std::size_t>(i)] == "violation") viol_col = i;
    if (cols[static_cast<std::size_t>(i)] == "feasible") feas_col = i;
    if (cols[static_cast<std::size_t>(i)] == "incumbent") inc_col = i;
  }
  if (f_col < 0 || feas_col < 0 || inc_col < 0 || viol_col < 0) {
    throw ConfigError("run log missing required columns: " + csv_path.string());
  }

  LoadedRun run;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) <= inc_col) {
      throw ConfigError("short row in run log: " + csv_path.string());
    }
    run.objective.push_back(std::strtod(fields[static_cast<std::size_t>(f_col)].c_str(), nullptr));
    run.feasible.push_back(fields[static_cast<std::size_t>(feas_col)] == "1");
    run.incumbent.push_back(std::strtod(fields[static_cast<std::size_t>(inc_col)].c_str(), nullptr));
  }

  const std::filesystem::path meta = csv_path.string().substr(0, csv_path.string().size() - 4) + ".meta.json";
  if (std::filesystem::exists(meta)) {
    std::ifstream ms(meta);
    nlohmann::json j;
    ms >> j;
    run.problem = j.value("problem", std::string{});
    run.method = j.value("method", std::string{});
    run.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("reference")) run.reference = j["reference"].get<double>();
  }
  return run;
}

void run_study(const StudyConfig& cfg) {
  if (cfg.repetitions < 1) throw ConfigError("study: repetitions must be >= 1");
  if (cfg.problems.empty() || cfg.methods.empty()) throw ConfigError("study: problems and methods required");

  // Validate the whole configuration before any work.
  std::vector<MethodSpec> methods;
  for (const std::string& m : cfg.methods) methods.push_back(MethodSpec::parse(m));
  std::vector<const RegisteredProblem*> problems;
  for (const std::string& p : cfg.problems) problems.push_back(&find_problem(p));
  const FeasibilityRule feas = parse_feasibility(cfg.feasibility);
  const AcquisitionType acq = parse_acquisition(cfg.acquisition);
  if (cfg.out_dir.empty()) throw ConfigError("study: output directory required");

  const std::filesystem::path runs_dir = cfg.out_dir / "runs";
  const std::filesystem::path curves_dir = cfg.out_dir / "curves";
  std::filesystem::create_directories(runs_dir);
  std::filesystem::create_directories(curves_dir);

  // References once, up front (memoized).
  std::vector<double> references;
  for (const auto* rp : problems) references.push_back(reference_value(rp->problem.name));

  struct Job {
    std::size_t problem_index;
    std::size_t method_index;
    int repetition;
  };
  std::vector<Job> jobs;
  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      for (int rep = 0; rep < cfg.repetitions; ++rep) jobs.push_back({pi, mi, rep});
    }
  }

  std::vector<std::optional<RunRecord>> results(jobs.size());
  std::vector<std::string> failures(jobs.size());
  std::atomic<std::size_t> next_job{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next_job.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job job = jobs[k];
      const RegisteredProblem& rp = *problems[job.problem_index];
      const MethodSpec& method = methods[job.method_index];
      SegoConfig base;
      base.doe_size = cfg.doe_size;
      base.budget = cfg.budget;
      base.feasibility = feas;
      base.acquisition = acq;
      base.violation_tol = cfg.violation_tol;
      base.seed = cfg.base_seed + static_cast<std::uint64_t>(job.repetition);
      try {
        RunRecord rec = execute_method(rp.problem, method, base);
        const std::string stem = rec.problem + "__" + sanitize_label(method.label) + "__seed" +
                                 std::to_string(rec.seed);
        nlohmann::json echo = {{"doe_size", cfg.doe_size},
                               {"budget", cfg.budget},
                               {"feasibility", cfg.feasibility},
                               {"acquisition", cfg.acquisition},
                               {"violation_tol", cfg.violation_tol}};
        write_run_csv(runs_dir / (stem + ".csv"), rec);
        write_run_meta(runs_dir / (stem + ".meta.json"), rec, references[job.problem_index], echo);
        bool any_trace = false;
        for (const auto& info : rec.iterations) any_trace = any_trace || !info.press_traces.empty();
        if (any_trace) write_press_trace_csv(runs_dir / (stem + ".presstrace.csv"), rec);
        results[k] = std::move(rec);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };

  const int width = std::min<int>(worker_count(cfg.threads), static_cast<int>(jobs.size()));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(width));
  for (int t = 0; t < width; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  // Aggregate: summary JSON, convergence curves, mean-error table.
  nlohmann::json summary;
  summary["config"] = {{"problems", cfg.problems}, {"methods", cfg.methods},
                       {"repetitions", cfg.repetitions}, {"doe_size", cfg.doe_size},
                       {"budget", cfg.budget}, {"seed", cfg.base_seed},
                       {"feasibility", cfg.feasibility}, {"acquisition", cfg.acquisition},
                       {"violation_tol", cfg.violation_tol}};

  std::map<std::string, std::map<bool, std::vector<double>>> method_scope_errors;

  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    const RegisteredProblem& rp = *problems[pi];
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const MethodSpec& method = methods[mi];
      std::vector<const RunRecord*> recs;
      std::vector<std::string> errors;
      for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (jobs[k].problem_index != pi || jobs[k].method_index != mi) continue;
        if (results[k]) {
          recs.push_back(&*results[k]);
        } else {
          errors.push_back(failures[k]);
        }
      }

      nlohmann::json node;
      node["runs"] = recs.size();
      node["run_failures"] = errors;
      node["reference"] = references[pi];
      node["oracle"] = rp.oracle_note;

      std::vector<double> final_errors;
      std::vector<double> best_values;
      std::vector<std::vector<double>> traces;
      int feasible_runs = 0;
      for (const RunRecord* r : recs) {
        traces.push_back(r->incumbent);
        const double err = final_relative_error(*r, references[pi]);
        if (std::isfinite(err)) {
          final_errors.push_back(err);
          best_values.push_back(r->best_feasible());
          ++feasible_runs;
        }
      }
      node["feasible_runs"] = feasible_runs;
      if (!best_values.empty()) node["best_feasible"] = best_values;
      if (!final_errors.empty()) {
        double mean = 0.0;
        for (double e : final_errors) mean += e;
        mean /= static_cast<double>(final_errors.size());
        node["final_errors"] = final_errors;
        node["mean_error"] = mean;
        const BoxplotSummary box = boxplot_summary(final_errors);
        node["boxplot"] = {{"min", box.minimum}, {"q1", box.q1},     {"median", box.median},
                           {"q3", box.q3},       {"max", box.maximum}, {"outliers", box.outliers}};
        method_scope_errors[method.label][rp.constrained].insert(
            method_scope_errors[method.label][rp.constrained].end(), final_errors.begin(),
            final_errors.end());
      }

      if (!traces.empty()) {
        std::ostringstream cs;
        cs << "eval_index,median,q25,q75\n";
        for (const ConvergencePoint& p : convergence_curve(traces)) {
          cs << p.eval_index << ',' << fmt17(p.median) << ',' << fmt17(p.q25) << ',' << fmt17(p.q75)
             << '\n';
        }
        atomic_write(curves_dir / (rp.problem.name + "__" + sanitize_label(method.label) + ".csv"),
                     cs.str());
      }

      summary["results"][rp.problem.name][method.label] = std::move(node);
    }
  }

  {
    std::ostringstream ms;
    ms << "method,scope,mean_error,n_runs\n";
    for (const auto& [label, by_scope] : method_scope_errors) {
      std::vector<double> all;
      for (const auto& [constrained, errs] : by_scope) {
        double mean = 0.0;
        for (double e : errs) mean += e;
        if (!errs.empty()) mean /= static_cast<double>(errs.size());
        ms << label << ',' << (constrained ? "constrained" : "unconstrained") << ',' << fmt17(mean)
           << ',' << errs.size() << '\n';
        all.insert(all.end(), errs.begin(), errs.end());
      }
      if (!all.empty()) {
        double mean = 0.0;
        for (double e : all) mean += e;
        mean /= static_cast<double>(all.size());
        ms << label << ",all," << fmt17(mean) << ',' << all.size() << '\n';
      }
    }
    atomic_write(cfg.out_dir / "mean_errors.csv", ms.str());
  }

  atomic_write(cfg.out_dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace msego::bench
