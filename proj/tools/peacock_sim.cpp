// peacock-sim: run the Peacock / Sparrow / Eagle simulator from the command
// line and write machine-readable reports.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "peacock/engine.hpp"
#include "peacock/errors.hpp"
#include "peacock/metrics.hpp"
#include "peacock/workload.hpp"

namespace {

using namespace peacock;
using ojson = nlohmann::ordered_json;

constexpr int kUsageError = 2;
constexpr int kRunError = 3;

struct Options {
  std::string algo = "peacock";
  std::string algos = "peacock,sparrow,eagle";
  std::uint32_t workers = 100;
  std::uint32_t schedulers = 10;
  double load = 0.8;
  std::size_t jobs = 1000;
  std::string trace;
  std::string trace_out;
  double rotation_interval_s = 1.0;
  double net_delay_ms = 5.0;
  std::uint64_t seed = 1;
  std::uint32_t seeds = 1;
  std::string out;
  std::string format = "json";
  std::string placement = "random";
  std::string job_assignment = "round-robin";
  std::string bypass_rule = "guarded";
  bool jitter = false;
  bool audit = false;
  bool with_jobs = true;
  double long_fraction = 0.1;
  double short_tasks = 10.0;
  double short_duration_s = 10.0;
  double long_tasks = 20.0;
  double long_duration_s = 200.0;
  double class_sigma = 0.8;
  double within_sigma = 0.5;
  std::uint32_t sparrow_ratio = 2;
  double eagle_cutoff_s = 60.0;
  double eagle_short_fraction = 0.15;
  std::uint32_t eagle_ratio = 2;
  double eagle_bound_s = 100.0;
  std::uint32_t eagle_resamples = 1;
};

SimConfig make_config(const Options& o, Algorithm algo, std::uint64_t seed) {
  SimConfig c;
  c.workers = o.workers;
  c.schedulers = o.schedulers;
  c.rotation_interval = from_seconds(o.rotation_interval_s);
  c.network_delay = from_seconds(o.net_delay_ms / 1000.0);
  c.seed = seed;
  c.algorithm = algo;
  c.placement = o.placement == "round-robin" ? PlacementPolicy::kRoundRobin : PlacementPolicy::kRandom;
  c.job_assignment =
      o.job_assignment == "random" ? JobAssignment::kRandom : JobAssignment::kRoundRobin;
  c.bypass_rule = o.bypass_rule == "literal" ? BypassRule::kLiteral : BypassRule::kGuarded;
  c.rotation_jitter = o.jitter;
  c.audit = o.audit;
  c.sparrow.probe_ratio = o.sparrow_ratio;
  c.eagle.long_job_cutoff = from_seconds(o.eagle_cutoff_s);
  c.eagle.short_partition_fraction = o.eagle_short_fraction;
  c.eagle.probe_ratio = o.eagle_ratio;
  c.eagle.srpt_starvation_bound = from_seconds(o.eagle_bound_s);
  c.eagle.resample_limit = o.eagle_resamples;
  return c;
}

Workload make_workload(const Options& o, std::uint64_t seed) {
  if (!o.trace.empty()) {
    TraceLoad t = load_trace(o.trace);
    if (t.pruned != 0) std::cerr << "trace: pruned " << t.pruned << " invalid job(s)\n";
    return workload_from_trace(t.records, o.load, o.workers, seed);
  }
  SyntheticSpec spec;
  spec.target_load = o.load;
  spec.job_count = o.jobs;
  spec.seed = seed;
  spec.classes = {{1.0 - o.long_fraction, o.short_tasks, o.short_duration_s, o.class_sigma},
                  {o.long_fraction, o.long_tasks, o.long_duration_s, o.class_sigma}};
  spec.within_job_sigma = o.within_sigma;
  return generate(spec, o.workers);
}

ojson config_json(const Options& o) {
  return {{"workers", o.workers},
          {"schedulers", o.schedulers},
          {"load", o.load},
          {"jobs", o.trace.empty() ? ojson(o.jobs) : ojson(nullptr)},
          {"trace", o.trace.empty() ? ojson(nullptr) : ojson(o.trace)},
          {"rotation_interval_s", o.rotation_interval_s},
          {"net_delay_ms", o.net_delay_ms},
          {"seed", o.seed},
          {"seeds", o.seeds},
          {"placement", o.placement},
          {"job_assignment", o.job_assignment},
          {"bypass_rule", o.bypass_rule},
          {"rotation_jitter", o.jitter},
          {"long_fraction", o.long_fraction},
          {"short_tasks", o.short_tasks},
          {"short_duration_s", o.short_duration_s},
          {"long_tasks", o.long_tasks},
          {"long_duration_s", o.long_duration_s},
          {"class_sigma", o.class_sigma},
          {"within_sigma", o.within_sigma},
          {"sparrow.probe_ratio", o.sparrow_ratio},
          {"eagle.long_job_cutoff_s", o.eagle_cutoff_s},
          {"eagle.short_partition_fraction", o.eagle_short_fraction},
          {"eagle.probe_ratio", o.eagle_ratio},
          {"eagle.srpt_starvation_bound_s", o.eagle_bound_s},
          {"eagle.resample_limit", o.eagle_resamples}};
}

std::vector<Algorithm> parse_algos(const std::string& list) {
  std::vector<Algorithm> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_algorithm(item));
  }
  return out;
}

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<std::pair<Algorithm, RunResult>> runs;
};

SeedResult run_seed(const Options& o, const std::vector<Algorithm>& algos, std::uint64_t seed) {
  SeedResult r{seed, {}};
  const Workload workload = make_workload(o, seed);
  for (Algorithm a : algos) r.runs.emplace_back(a, run(make_config(o, a, seed), workload));
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::string sidecar(const std::string& out, const std::string& suffix) {
  return (out.empty() || out == "-") ? std::string("peacock") + suffix : out + suffix;
}

int emit(const Options& o, const std::string& command, const std::vector<Algorithm>& algos,
         const std::vector<SeedResult>& results) {
  if (o.format == "csv") {
    std::string csv = report_csv_header();
    std::string fractions = "seed,a,b,a_faster,b_faster,ties\n";
    for (const SeedResult& sr : results) {
      for (const auto& [algo, rr] : sr.runs) {
        const std::string label = to_string(algo) + "@" + std::to_string(sr.seed);
        csv += report_csv_row(label, summarize(rr.jobs, rr.counters));
        if (o.with_jobs) write_text(sidecar(o.out, "." + to_string(algo) + "." + std::to_string(sr.seed) + ".jobs.csv"),
                                    records_csv(rr.jobs));
      }
      for (std::size_t i = 0; i < sr.runs.size(); ++i) {
        for (std::size_t j = i + 1; j < sr.runs.size(); ++j) {
          FractionFaster f = fraction_faster(sr.runs[i].second.jobs, sr.runs[j].second.jobs);
          std::ostringstream row;
          row.precision(17);
          row << sr.seed << ',' << to_string(sr.runs[i].first) << ',' << to_string(sr.runs[j].first)
              << ',' << f.a << ',' << f.b << ',' << f.ties << '\n';
          fractions += row.str();
        }
      }
    }
    write_text(o.out, csv);
    if (command == "compare") write_text(sidecar(o.out, ".fraction.csv"), fractions);
    return 0;
  }

  ojson doc;
  doc["schema"] = "peacock-sim";
  doc["version"] = 1;
  doc["command"] = command;
  ojson names = ojson::array();
  for (Algorithm a : algos) names.push_back(to_string(a));
  doc["algorithms"] = names;
  doc["config"] = config_json(o);
  ojson runs = ojson::array();
  for (const SeedResult& sr : results) {
    ojson entry;
    entry["seed"] = sr.seed;
    ojson reports = ojson::object();
    ojson jobs = ojson::object();
    for (const auto& [algo, rr] : sr.runs) {
      reports[to_string(algo)] = report_json(summarize(rr.jobs, rr.counters));
      if (o.with_jobs) jobs[to_string(algo)] = records_json(rr.jobs);
    }
    entry["reports"] = std::move(reports);
    if (command == "compare") {
      ojson matrix = ojson::array();
      for (std::size_t i = 0; i < sr.runs.size(); ++i) {
        for (std::size_t j = i + 1; j < sr.runs.size(); ++j) {
          FractionFaster f = fraction_faster(sr.runs[i].second.jobs, sr.runs[j].second.jobs);
          matrix.push_back({{"a", to_string(sr.runs[i].first)},
                            {"b", to_string(sr.runs[j].first)},
                            {"a_faster", f.a},
                            {"b_faster", f.b},
                            {"ties", f.ties}});
        }
      }
      entry["fraction_faster"] = std::move(matrix);
    }
    if (o.with_jobs) entry["jobs"] = std::move(jobs);
    runs.push_back(std::move(entry));
  }
  doc["runs"] = std::move(runs);
  write_text(o.out, doc.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App& cmd, Options& o) {
  cmd.add_option("--workers", o.workers, "Number of single-slot workers")->check(CLI::PositiveNumber);
  cmd.add_option("--schedulers", o.schedulers, "Number of distributed schedulers")->check(CLI::PositiveNumber);
  cmd.add_option("--load", o.load, "Target offered load (1.0 = cluster capacity)")->check(CLI::PositiveNumber);
  auto* jobs = cmd.add_option("--jobs", o.jobs, "Synthetic job count")->check(CLI::PositiveNumber);
  auto* trace = cmd.add_option("--trace", o.trace, "Trace file (JSON lines, optionally gzip)")
                    ->check(CLI::ExistingFile);
  trace->excludes(jobs);
  cmd.add_option("--trace-out", o.trace_out, "Also write the generated workload as a trace");
  cmd.add_option("--rotation-interval", o.rotation_interval_s, "Rotation round length (s)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--net-delay", o.net_delay_ms, "One-way network delay (ms)")->check(CLI::NonNegativeNumber);
  cmd.add_option("--seed", o.seed, "Base random seed");
  cmd.add_option("--seeds", o.seeds, "Run seeds seed..seed+k-1, one row each")->check(CLI::PositiveNumber);
  cmd.add_option("--out", o.out, "Report path (default stdout)");
  cmd.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd.add_option("--placement", o.placement, "Probe targets: random or round-robin")
      ->check(CLI::IsMember({"random", "round-robin"}));
  cmd.add_option("--job-assignment", o.job_assignment, "Job to scheduler: round-robin or random")
      ->check(CLI::IsMember({"round-robin", "random"}));
  cmd.add_option("--bypass-rule", o.bypass_rule, "Queue bypass rule: guarded or literal")
      ->check(CLI::IsMember({"guarded", "literal"}));
  cmd.add_flag("--rotation-jitter", o.jitter, "Per-worker random rotation phase");
  cmd.add_flag("--audit", o.audit, "Check the no-idle-with-work invariant after every timestamp");
  cmd.add_flag("!--no-jobs", o.with_jobs, "Omit per-job records");
  cmd.add_option("--long-fraction", o.long_fraction, "Share of jobs drawn from the long class")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--short-tasks", o.short_tasks, "Mean tasks per short job")->check(CLI::Range(1.0, 1e6));
  cmd.add_option("--short-duration", o.short_duration_s, "Mean task duration of short jobs (s)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--long-tasks", o.long_tasks, "Mean tasks per long job")->check(CLI::Range(1.0, 1e6));
  cmd.add_option("--long-duration", o.long_duration_s, "Mean task duration of long jobs (s)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--class-sigma", o.class_sigma, "Lognormal spread of job means within a class")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--within-sigma", o.within_sigma, "Lognormal spread of tasks within a job")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--sparrow.probe-ratio", o.sparrow_ratio, "Sparrow probes per task")->check(CLI::PositiveNumber);
  cmd.add_option("--eagle.cutoff", o.eagle_cutoff_s, "Eagle long-job cutoff (s)")->check(CLI::PositiveNumber);
  cmd.add_option("--eagle.short-fraction", o.eagle_short_fraction, "Eagle short partition share")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--eagle.probe-ratio", o.eagle_ratio, "Eagle probes per short task")->check(CLI::PositiveNumber);
  cmd.add_option("--eagle.starvation-bound", o.eagle_bound_s, "Eagle SRPT starvation bound (s)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--eagle.resamples", o.eagle_resamples, "Eagle re-samples per short probe");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for probe-based cluster schedulers"};
  app.require_subcommand(1);
  Options o;
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one algorithm");
  add_common(*run_cmd, o);
  run_cmd->add_option("--algo", o.algo, "peacock, sparrow or eagle")
      ->check(CLI::IsMember({"peacock", "sparrow", "eagle"}));
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Simulate several algorithms on one workload");
  add_common(*cmp_cmd, o);
  cmp_cmd->add_option("--algos", o.algos, "Comma-separated algorithm list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  const bool compare = cmp_cmd->parsed();
  std::vector<Algorithm> algos;
  try {
    algos = compare ? parse_algos(o.algos) : std::vector<Algorithm>{parse_algorithm(o.algo)};
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  if (compare && algos.size() < 2) {
    std::cerr << "error: compare needs at least two algorithms\n";
    return kUsageError;
  }
  if (o.format == "csv" && (o.out.empty() || o.out == "-") && o.with_jobs) {
    std::cerr << "error: --format csv with per-job records needs --out (or --no-jobs)\n";
    return kUsageError;
  }

  try {
    make_config(o, algos.front(), o.seed).validate();
    if (!o.trace_out.empty()) {
      const Workload w = make_workload(o, o.seed);
      write_trace(o.trace_out, to_trace(w), o.trace_out.ends_with(".gz"));
    }
    std::vector<std::future<SeedResult>> pending;
    for (std::uint32_t k = 0; k < o.seeds; ++k) {
      pending.push_back(std::async(o.seeds > 1 ? std::launch::async : std::launch::deferred,
                                   run_seed, std::cref(o), std::cref(algos), o.seed + k));
    }
    std::vector<SeedResult> results;
    for (auto& f : pending) results.push_back(f.get());
    return emit(o, compare ? "compare" : "run", algos, results);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunError;
  }
}
