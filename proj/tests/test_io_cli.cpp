#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "indclust/indclust.hpp"

using namespace indclust;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("indclust_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(INDCLUST_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("csv round trip") {
  const SeriesSet s({{1.5, -2.25, 0.1}, {4.0, 5.0, 6.0}}, {"alpha", "beta"});
  std::stringstream buf;
  write_csv(buf, s);
  const SeriesSet back = read_csv(buf);
  REQUIRE(back.count() == 2);
  REQUIRE(back.length() == 3);
  CHECK(back.name(0) == "alpha");
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t t = 0; t < 3; ++t) CHECK(back.values(i)[t] == s.values(i)[t]);
}

TEST_CASE("csv errors carry line numbers") {
  std::stringstream ragged("a,b\n1,2\n3\n");
  try {
    read_csv(ragged);
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::stringstream alpha("a,b\n1,x\n");
  try {
    read_csv(alpha);
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("not numeric") != std::string::npos);
  }

  std::stringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), DataError);
  std::stringstream header_only("a,b\n");
  CHECK_THROWS_AS(read_csv(header_only), DataError);
}

TEST_CASE("finite joint text round trip") {
  const FiniteJoint d = parity_distribution({2, 2});
  std::stringstream buf;
  write_finite_joint(buf, d);
  const FiniteJoint back = read_finite_joint(buf);
  REQUIRE(back.alphabet_sizes() == d.alphabet_sizes());
  for (std::size_t i = 0; i < d.table_size(); ++i) CHECK(back.pmf()[i] == d.pmf()[i]);

  std::stringstream with_comments("# header\n2 2\n0 0 0.5  # half\n1 1 0.5\n");
  const FiniteJoint commented = read_finite_joint(with_comments);
  CHECK(commented.pmf()[0] == 0.5);
  CHECK(commented.pmf()[3] == 0.5);

  std::stringstream bad_index("2 2\n0 2 1.0\n");
  CHECK_THROWS_AS(read_finite_joint(bad_index), DataError);
  std::stringstream dup("2 2\n0 0 0.5\n0 0 0.5\n");
  CHECK_THROWS_AS(read_finite_joint(dup), DataError);
  std::stringstream short_row("2 2\n0 0.5\n");
  CHECK_THROWS_AS(read_finite_joint(short_row), DataError);
  std::stringstream bad_sum("2 2\n0 0 0.5\n1 1 0.4\n");
  CHECK_THROWS_AS(read_finite_joint(bad_sum), DataError);
}

TEST_CASE("partition json") {
  const Partition p = Partition::from_clusters({{0, 2}, {1}}, 3);
  const nlohmann::json j = partition_json(p, {"a", "b", "c"});
  CHECK(j["k"] == 2);
  CHECK(j["assignment"] == nlohmann::json::array({1, 2, 1}));
  CHECK(j["clusters"][0] == nlohmann::json::array({1, 3}));
  CHECK(j["cluster_names"][1][0] == "b");
}

TEST_CASE("process kind names round trip") {
  for (ProcessKind kind :
       {ProcessKind::kParity, ProcessKind::kTranslation, ProcessKind::kTranslationPair,
        ProcessKind::kPerturbedTranslation, ProcessKind::kGaussianClusters}) {
    CHECK(parse_process_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_process_kind("brownian"), UsageError);
}

TEST_CASE("cli generate + cluster round trip is reproducible") {
  TempDir dir;
  const std::string csv = dir.file("data.csv");
  REQUIRE(run_cli("generate --kind gaussian-clusters --cluster-sizes 2 2 --rho 0.8 --n 2000 "
                  "--seed 3 --output " + csv) == 0);

  // header with 4 columns, 2000 rows
  const SeriesSet loaded = [&] {
    std::ifstream in(csv);
    return read_csv(in);
  }();
  CHECK(loaded.count() == 4);
  CHECK(loaded.length() == 2000);

  // ground truth JSON exists and matches the construction
  const auto truth = nlohmann::json::parse(slurp(csv + ".truth.json"));
  CHECK(truth["ground_truth"]["k"] == 2);

  const std::string flags = " --m-max 3 --l-max 4 --alpha 0.01 --permutations 60 --seed 5";
  const std::string r1 = dir.file("r1.json");
  const std::string r2 = dir.file("r2.json");
  REQUIRE(run_cli("cluster --mode iid --input " + csv + " --output " + r1 + flags) == 0);
  REQUIRE(run_cli("cluster --mode iid --input " + csv + " --output " + r2 + flags) == 0);
  CHECK(slurp(r1) == slurp(r2));  // bit-identical result JSON

  const auto result = nlohmann::json::parse(slurp(r1));
  CHECK(result["schema_version"] == 1);
  CHECK(result["partition"]["k"] == 2);
  CHECK(result["oracle_calls"].is_number());
  CHECK(result["call_bound"].is_number());
  CHECK(result["oracle_calls"].get<double>() <= result["call_bound"].get<double>());
}

TEST_CASE("cli stationary mode with compression report") {
  TempDir dir;
  const std::string csv = dir.file("pairs.csv");
  // two coupled translation pairs at different angles, written by hand
  const auto a = gen_translation_pair(kGoldenRotation, OffsetMode::kFixed, 0.1, 4000, 21);
  const auto b = gen_translation_pair(kSilverRotation, OffsetMode::kFixed, 0.1, 4000, 22);
  {
    std::ofstream out(csv);
    write_csv(out, concat(a.series, b.series));
  }
  const std::string result_path = dir.file("result.json");
  REQUIRE(run_cli("cluster --mode stationary --k 2 --input " + csv + " --output " + result_path +
                  " --m-max 5 --l-max 5 --seed 2 --compressor zlib") == 0);
  const auto result = nlohmann::json::parse(slurp(result_path));
  CHECK(result["estimator_calls"].is_number());
  CHECK(result["estimator_calls"].get<double>() <= result["call_bound"].get<double>());
  CHECK(result["score"].is_number());
  CHECK(result["compression_estimate"]["backend"] == "zlib");
  CHECK(result["compression_estimate"]["heuristic"] == true);
  CHECK(result["partition"]["clusters"][0] == nlohmann::json::array({1, 2}));
}

TEST_CASE("cli three-sample and oracle-demo") {
  TempDir dir;
  const std::string csv = dir.file("three.csv");
  const auto couple = gen_translation_pair(kGoldenRotation, OffsetMode::kFixed, 0.1, 8000, 51);
  const auto lone = gen_translation(kSilverRotation, 8000, 99);
  {
    std::ofstream out(csv);
    write_csv(out, concat(couple.series, SeriesSet({lone}, {"t3"})));
  }
  const std::string out_path = dir.file("three.json");
  REQUIRE(run_cli("three-sample --input " + csv + " --output " + out_path +
                  " --m-max 4 --l-max 4") == 0);
  const auto result = nlohmann::json::parse(slurp(out_path));
  CHECK(result["label"] == "(12)|3");
  CHECK(result["margin"].is_number());

  const std::string joint_path = dir.file("joint.txt");
  {
    std::ofstream out(joint_path);
    write_finite_joint(out, parity_distribution({2, 2}));
  }
  const std::string demo_path = dir.file("demo.json");
  REQUIRE(run_cli("oracle-demo --input " + joint_path + " --output " + demo_path) == 0);
  const auto demo = nlohmann::json::parse(slurp(demo_path));
  CHECK(demo["agree"] == true);
}

TEST_CASE("cli bench emits a recovery table") {
  TempDir dir;
  const std::string out_path = dir.file("bench.json");
  REQUIRE(run_cli("bench --mode stationary --kind translation-pairs --k 2 --n-grid 500 1000 "
                  "--seeds 2 --m-max 4 --l-max 4 --seed 0 --output " + out_path) == 0);
  const auto bench = nlohmann::json::parse(slurp(out_path));
  REQUIRE(bench["rows"].size() == 2);
  CHECK(bench["rows"][0]["n"] == 500);
  CHECK(bench["rows"][0]["runs"] == 2);
  CHECK(bench["rows"][1]["fraction"].get<double>() >= 0.0);
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  // usage: unknown flag
  CHECK(run_cli("cluster --mode iid") == 2);           // missing --input
  CHECK(run_cli("cluster --nonsense x") == 2);
  // usage: k too small for stationary mode
  const std::string csv = dir.file("tiny.csv");
  {
    std::ofstream out(csv);
    out << "a,b\n0,1\n1,0\n0,1\n1,0\n0,1\n1,0\n0,1\n1,0\n";
  }
  CHECK(run_cli("cluster --mode stationary --k 1 --input " + csv) == 2);
  CHECK(run_cli("cluster --mode stationary --k 5 --input " + csv) == 2);
  // data: malformed csv (ragged row of non-numeric text)
  const std::string bad = dir.file("bad.csv");
  {
    std::ofstream out(bad);
    out << "a,b\n1,2\nnope,really\n";
  }
  CHECK(run_cli("cluster --mode iid --input " + bad) == 3);
  // data: missing file
  CHECK(run_cli("cluster --mode iid --input " + dir.file("nope.csv")) == 3);
  // capacity: oversized joint
  const std::string big = dir.file("big.txt");
  {
    std::ofstream out(big);
    for (int i = 0; i < 30; ++i) out << "2 ";
    out << "\n";
  }
  CHECK(run_cli("cluster --mode oracle --input " + big) == 4);
  // help exits 0
  CHECK(run_cli("--help") == 0);
}
