// Batch CLI: data generation, clustering runs (oracle / i.i.d. / stationary
// modes), the three-sample solver, the oracle-vs-brute-force demo and the
// recovery benchmark. All randomness flows from --seed; results are JSON.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "indclust/indclust.hpp"

namespace {

using nlohmann::json;
using namespace indclust;

constexpr int kSchemaVersion = 1;

struct JobConfig {
  std::string command;
  std::string mode = "stationary";  // oracle | iid | stationary
  std::string input;
  std::string output;
  std::size_t k = 2;
  RunConfig run;
  unsigned threads = 0;  // 0 = hardware default
  std::string compressor;  // optional backend name
};

unsigned effective_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void add_run_options(CLI::App* cmd, JobConfig& job) {
  cmd->add_option("--m-max", job.run.m_max, "Max block length")->envname("INDCLUST_M_MAX");
  cmd->add_option("--l-max", job.run.l_max, "Max quantization level")->envname("INDCLUST_L_MAX");
  cmd->add_option("--alpha", job.run.alpha, "Confidence level of the independence test")
      ->envname("INDCLUST_ALPHA");
  cmd->add_option("--threshold-c", job.run.threshold_c,
                  "Constant c in the decision threshold t'(n) = c n^(-1/3)")
      ->envname("INDCLUST_THRESHOLD_C");
  cmd->add_option("--permutations", job.run.permutation_count,
                  "Surrogate count for the shift test")
      ->envname("INDCLUST_PERMUTATIONS");
  cmd->add_option("--seed", job.run.seed, "Master seed")->envname("INDCLUST_SEED");
  cmd->add_option("--threads", job.threads, "Worker cap (0 = hardware)")
      ->envname("INDCLUST_THREADS");
}

json config_json(const JobConfig& job) {
  return json{{"m_max", job.run.m_max},
              {"l_max", job.run.l_max},
              {"alpha", job.run.alpha},
              {"threshold_c", job.run.threshold_c},
              {"permutation_count", job.run.permutation_count},
              {"threads", job.threads}};
}

void write_json(const std::string& path, const json& payload) {
  if (path.empty() || path == "-") {
    std::cout << payload.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  out << payload.dump(2) << '\n';
}

SeriesSet load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  return read_csv(in);
}

FiniteJoint load_joint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  return read_finite_joint(in);
}

std::vector<std::string> joint_names(const FiniteJoint& d) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d.variable_count(); ++i) names.push_back("v" + std::to_string(i + 1));
  return names;
}

// ---------------------------------------------------------------- generate

int run_generate(const JobConfig& job, const ProcessSpec& spec, const std::string& truth_path) {
  const GeneratedData gen = spec.generate();
  std::ofstream out(job.output);
  if (!out) throw DataError("cannot open output file: " + job.output);
  write_csv(out, gen.series);

  json truth{{"schema_version", kSchemaVersion},
             {"command", "generate"},
             {"process", process_spec_json(spec)},
             {"ground_truth", partition_json(gen.ground_truth, gen.series.names())}};
  write_json(truth_path, truth);
  return 0;
}

// ----------------------------------------------------------------- cluster

int run_cluster(const JobConfig& job) {
  json result{{"schema_version", kSchemaVersion},
              {"command", "cluster"},
              {"mode", job.mode},
              {"input", job.input},
              {"seed", job.run.seed},
              {"config", config_json(job)}};
  const unsigned threads = effective_threads(job.threads);

  if (job.mode == "oracle") {
    const FiniteJoint d = load_joint(job.input);
    const ClusteringResult r = clin_exact(d);
    result["series_names"] = joint_names(d);
    result["partition"] = partition_json(r.partition, joint_names(d));
    result["score"] = nullptr;
    result["oracle_calls"] = r.oracle_calls;
    result["estimator_calls"] = nullptr;
    result["candidates_examined"] = nullptr;
    result["call_bound"] =
        2.0 * r.partition.cluster_count() * d.variable_count() * d.variable_count();
  } else if (job.mode == "iid") {
    const SeriesSet s = load_csv(job.input);
    const ClusteringResult r = clin_iid(s, job.run, threads);
    result["series_names"] = s.names();
    result["partition"] = partition_json(r.partition, s.names());
    result["score"] = nullptr;
    result["oracle_calls"] = r.oracle_calls;
    result["estimator_calls"] = nullptr;
    result["candidates_examined"] = nullptr;
    result["call_bound"] = 2.0 * r.partition.cluster_count() * s.count() * s.count();
  } else if (job.mode == "stationary") {
    const SeriesSet s = load_csv(job.input);
    if (job.k < 2) throw UsageError("stationary mode requires --k >= 2");
    if (job.k > s.count()) throw UsageError("--k exceeds the number of series");
    const ClusteringResult r = clink(s, job.k, job.run, threads);
    result["k"] = job.k;
    result["series_names"] = s.names();
    result["partition"] = partition_json(r.partition, s.names());
    result["score"] = r.score.has_value() ? json(*r.score) : json(nullptr);
    result["oracle_calls"] = nullptr;
    result["estimator_calls"] = r.estimator_calls;
    result["candidates_examined"] = r.candidates_examined;
    result["call_bound"] = std::pow(static_cast<double>(s.count()),
                                    2.0 * static_cast<double>(job.k) - 2.0);
    if (!job.compressor.empty()) {
      const QuantizerSpec q = fit_normalizer(s);
      const double bits = compression_sum_rate(s, r.partition.clusters(),
                                               make_compressor(job.compressor), job.run, q);
      result["compression_estimate"] =
          json{{"backend", job.compressor}, {"bits", bits}, {"heuristic", true}};
    }
  } else {
    throw UsageError("unknown mode: " + job.mode);
  }
  write_json(job.output, result);
  return 0;
}

// ------------------------------------------------------------ three-sample

int run_three_sample(const JobConfig& job) {
  const SeriesSet s = load_csv(job.input);
  const ThreeSampleResult r = three_sample(s, job.run, effective_threads(job.threads));
  json result{{"schema_version", kSchemaVersion},
              {"command", "three-sample"},
              {"label", r.label},
              {"margin", r.margin},
              {"low_margin", r.low_margin},
              {"seed", job.run.seed},
              {"config", config_json(job)}};
  write_json(job.output, result);
  return 0;
}

// ------------------------------------------------------------- oracle-demo

int run_oracle_demo(const JobConfig& job) {
  const FiniteJoint d = load_joint(job.input);
  const ClusteringResult r = clin_exact(d);
  const Partition reference = brute_force_finest(d);
  const bool agree = same_clustering(r.partition, reference);
  json result{{"schema_version", kSchemaVersion},
              {"command", "oracle-demo"},
              {"input", job.input},
              {"clin", partition_json(r.partition, joint_names(d))},
              {"brute_force", partition_json(reference, joint_names(d))},
              {"agree", agree},
              {"oracle_calls", r.oracle_calls},
              {"call_bound",
               2.0 * r.partition.cluster_count() * d.variable_count() * d.variable_count()}};
  write_json(job.output, result);
  if (!agree) {
    std::cerr << "oracle-demo: recursive clustering disagrees with exhaustive search\n";
    return 5;
  }
  return 0;
}

// ------------------------------------------------------------------- bench

struct BenchOptions {
  std::string kind = "translation-pairs";
  std::vector<std::size_t> n_grid{1000, 10000, 100000};
  std::size_t seeds = 10;
  double rho = 0.8;
  std::vector<std::size_t> sizes{3, 3};
  double delta = 0.1;
};

int run_bench(const JobConfig& job, const BenchOptions& opts) {
  const unsigned threads = effective_threads(job.threads);
  json rows = json::array();
  std::printf("%10s %8s %8s %10s\n", "n", "runs", "correct", "fraction");
  for (const std::size_t n : opts.n_grid) {
    std::size_t correct = 0;
    for (std::size_t run = 0; run < opts.seeds; ++run) {
      const std::uint64_t seed = job.run.seed + run;
      SeriesSet series(std::vector<std::vector<double>>{{0.0}});
      Partition truth({0}, 1);
      if (opts.kind == "translation-pairs") {
        const auto a = gen_translation_pair(kGoldenRotation, OffsetMode::kFixed, opts.delta, n,
                                            seed * 2 + 1);
        const auto b = gen_translation_pair(kSilverRotation, OffsetMode::kFixed, opts.delta, n,
                                            seed * 2 + 2);
        series = concat(a.series, b.series);
        truth = Partition({0, 0, 1, 1}, 2);
      } else if (opts.kind == "gaussian-clusters") {
        auto gen = gen_gaussian_clusters(opts.sizes, opts.rho, n, seed);
        series = std::move(gen.series);
        truth = gen.ground_truth;
      } else if (opts.kind == "parity") {
        auto gen = gen_parity_series(opts.sizes, n, seed);
        series = std::move(gen.series);
        truth = gen.ground_truth;
      } else {
        throw UsageError("unknown bench kind: " + opts.kind);
      }

      RunConfig cfg = job.run;
      cfg.seed = seed;
      Partition recovered({0}, 1);
      if (job.mode == "stationary") {
        recovered = clink(series, job.k, cfg, threads).partition;
      } else if (job.mode == "iid") {
        recovered = clin_iid(series, cfg, threads).partition;
      } else {
        throw UsageError("bench supports iid and stationary modes");
      }
      if (same_clustering(recovered, truth)) ++correct;
    }
    const double fraction = static_cast<double>(correct) / static_cast<double>(opts.seeds);
    std::printf("%10zu %8zu %8zu %10.2f\n", n, opts.seeds, correct, fraction);
    rows.push_back(json{{"n", n}, {"runs", opts.seeds}, {"correct", correct},
                        {"fraction", fraction}});
  }
  json result{{"schema_version", kSchemaVersion},
              {"command", "bench"},
              {"mode", job.mode},
              {"kind", opts.kind},
              {"k", job.k},
              {"seed", job.run.seed},
              {"rows", rows},
              {"config", config_json(job)}};
  if (!job.output.empty()) write_json(job.output, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Independence clustering of jointly sampled time series"};
  app.require_subcommand(1);

  JobConfig job;

  // generate
  auto* generate = app.add_subcommand("generate", "Write a synthetic sample as CSV + truth JSON");
  ProcessSpec spec;
  std::string kind_name = "parity";
  std::string offset_mode = "fixed";
  std::string truth_path;
  std::vector<std::size_t> sizes{3, 3};
  generate->add_option("--kind", kind_name,
                       "parity | translation | translation-pair | perturbed-translation | "
                       "gaussian-clusters");
  generate->add_option("--groups,--cluster-sizes", sizes, "Group/cluster sizes");
  generate->add_option("--alpha-rot", spec.alpha_rot, "Rotation angle in (0,1)");
  generate->add_option("--offset-mode", offset_mode, "fixed | independent");
  generate->add_option("--delta", spec.delta, "Fixed phase offset");
  generate->add_option("--epsilon", spec.epsilon, "Perturbation spread");
  generate->add_option("--rho", spec.rho_within, "Within-cluster correlation");
  generate->add_option("--n", spec.n, "Sample length")->required();
  generate->add_option("--output", job.output, "CSV path")->required();
  generate->add_option("--truth", truth_path, "Ground-truth JSON path (default <output>.truth.json)");
  generate->add_option("--seed", spec.seed, "Master seed")->envname("INDCLUST_SEED");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster a sample into independent groups");
  cluster->add_option("--mode", job.mode, "oracle | iid | stationary")
      ->required()
      ->envname("INDCLUST_MODE");
  cluster->add_option("--input", job.input, "CSV (iid/stationary) or finite-joint text (oracle)")
      ->required()
      ->envname("INDCLUST_INPUT");
  cluster->add_option("--output", job.output, "Result JSON path ('-' = stdout)")
      ->envname("INDCLUST_OUTPUT");
  cluster->add_option("--k", job.k, "Cluster count (stationary mode)")->envname("INDCLUST_K");
  cluster->add_option("--compressor", job.compressor,
                      "Also report the compression-based estimate (zlib | lz78)")
      ->envname("INDCLUST_COMPRESSOR");
  add_run_options(cluster, job);

  // three-sample
  auto* three = app.add_subcommand("three-sample",
                                   "Decide (x1,x2)|x3 vs x1|(x2,x3) for a 3-column CSV");
  three->add_option("--input", job.input, "CSV with exactly three columns")->required();
  three->add_option("--output", job.output, "Result JSON path ('-' = stdout)");
  add_run_options(three, job);

  // oracle-demo
  auto* demo = app.add_subcommand("oracle-demo",
                                  "Run the oracle-mode algorithm against exhaustive search");
  demo->add_option("--input", job.input, "Finite-joint text file")->required();
  demo->add_option("--output", job.output, "Result JSON path ('-' = stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Recovery-fraction sweep over a grid of n");
  BenchOptions bench_opts;
  bench->add_option("--mode", job.mode, "iid | stationary")->required();
  bench->add_option("--kind", bench_opts.kind, "translation-pairs | gaussian-clusters | parity");
  bench->add_option("--k", job.k, "Cluster count (stationary mode)");
  bench->add_option("--n-grid", bench_opts.n_grid, "Sample lengths to sweep");
  bench->add_option("--seeds", bench_opts.seeds, "Seeded runs per grid point");
  bench->add_option("--rho", bench_opts.rho, "Within-cluster correlation (gaussian)");
  bench->add_option("--sizes", bench_opts.sizes, "Group/cluster sizes");
  bench->add_option("--delta", bench_opts.delta, "Fixed phase offset (translation pairs)");
  bench->add_option("--output", job.output, "Result JSON path");
  add_run_options(bench, job);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion") {
      return app.exit(e);
    }
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    job.run.validate();
    if (generate->parsed()) {
      spec.kind = parse_process_kind(kind_name);
      spec.group_sizes = sizes;
      if (offset_mode == "fixed") spec.offset_mode = OffsetMode::kFixed;
      else if (offset_mode == "independent") spec.offset_mode = OffsetMode::kIndependent;
      else throw UsageError("unknown offset mode: " + offset_mode);
      if (truth_path.empty()) truth_path = job.output + ".truth.json";
      return run_generate(job, spec, truth_path);
    }
    if (cluster->parsed()) return run_cluster(job);
    if (three->parsed()) return run_three_sample(job);
    if (demo->parsed()) return run_oracle_demo(job);
    if (bench->parsed()) return run_bench(job, bench_opts);
    throw UsageError("no command given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 4;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
