#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "indclust/clustering.hpp"
#include "indclust/datagen.hpp"
#include "indclust/rng.hpp"

using namespace indclust;

namespace {

FiniteJoint independent_coins(std::size_t n) {
  const std::size_t total = std::size_t(1) << n;
  return FiniteJoint(std::vector<std::size_t>(n, 2),
                     std::vector<double>(total, 1.0 / static_cast<double>(total)));
}

// Random ground-truth-structured joint over at most `max_vars` binary
// variables: independent blocks, each a parity group or a random table.
FiniteJoint random_clustered_joint(SplitMix64& rng, std::size_t max_vars) {
  std::vector<FiniteJoint> blocks;
  std::size_t used = 0;
  while (used < max_vars) {
    const std::size_t remaining = max_vars - used;
    const std::size_t size = 1 + rng.next_below(std::min<std::size_t>(3, remaining));
    if (size >= 2 && rng.next_bit()) {
      blocks.push_back(parity_distribution({size}));
    } else {
      const std::size_t cells = std::size_t(1) << size;
      std::vector<double> pmf(cells);
      double sum = 0.0;
      for (auto& v : pmf) {
        v = 0.05 + rng.next_double();
        sum += v;
      }
      for (auto& v : pmf) v /= sum;
      blocks.push_back(FiniteJoint(std::vector<std::size_t>(size, 2), pmf));
    }
    used += size;
    if (rng.next_below(3) == 0) break;
  }
  FiniteJoint joint = blocks.front();
  for (std::size_t i = 1; i < blocks.size(); ++i) joint = tensor_product(joint, blocks[i]);
  return joint;
}

// An oracle that contradicts itself: claims dependence but never admits that
// any removal decreases the information.
class LyingOracle : public DependenceOracle {
 protected:
  bool do_compare(const IndexSet&, const IndexSet&, const IndexSet&, const IndexSet&) override {
    return false;
  }
  bool do_is_positive(const IndexSet&, const IndexSet&) override { return true; }
};

}  // namespace

TEST_CASE("clin_split traces with the exact oracle") {
  // a parity triple absorbs everything into C
  const FiniteJoint triple = parity_distribution({3});
  ExactOracle o1(triple);
  const SplitResult r1 = clin_split({0, 1, 2}, o1);
  CHECK(r1.head == IndexSet{0, 1, 2});
  CHECK(r1.rest.empty());

  // two independent coins split immediately
  const FiniteJoint coins = independent_coins(2);
  ExactOracle o2(coins);
  const SplitResult r2 = clin_split({0, 1}, o2);
  CHECK(r2.head == IndexSet{0});
  CHECK(r2.rest == IndexSet{1});

  // two parity triples: starting from variable 0, C grows to its group
  const FiniteJoint pair = parity_distribution({3, 3});
  ExactOracle o3(pair);
  const SplitResult r3 = clin_split({0, 1, 2, 3, 4, 5}, o3);
  CHECK(r3.head == IndexSet{0, 1, 2});
  CHECK(r3.rest == IndexSet{3, 4, 5});
}

TEST_CASE("clin on parity constructions") {
  const FiniteJoint three_groups = parity_distribution({4, 4, 4});
  ExactOracle oracle(three_groups);
  const ClusteringResult result = clin(three_groups, oracle);
  CHECK(same_clustering(result.partition,
                        Partition({0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2}, 3)));
  CHECK(result.oracle_calls <= 2 * 3 * 12 * 12);  // 864

  const FiniteJoint coins = independent_coins(5);
  ExactOracle o2(coins);
  const ClusteringResult singles = clin(coins, o2);
  CHECK(singles.partition.cluster_count() == 5);
}

TEST_CASE("clin agrees with brute force on random instances") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const FiniteJoint d = random_clustered_joint(rng, 2 + rng.next_below(5));
    ExactOracle oracle(d);
    const ClusteringResult result = clin(d, oracle);
    CHECK(same_clustering(result.partition, brute_force_finest(d)));
    const double bound = 2.0 * result.partition.cluster_count() *
                         static_cast<double>(d.variable_count() * d.variable_count());
    CHECK(static_cast<double>(result.oracle_calls) <= bound);
    // recursion correctness: the output blocks are mutually independent
    CHECK(multi_information(d, result.partition.clusters()) < 1e-9);
  }
}

TEST_CASE("inconsistent oracles are detected, not looped on") {
  LyingOracle liar;
  CHECK_THROWS_AS(clin_split({0, 1, 2}, liar), IntegrityError);
}

TEST_CASE("clink_split structure") {
  const FiniteJoint coins = independent_coins(3);
  ExactMultiInfoSource source(coins);
  TieBreak tb;

  const CandidateSplits single = clink_split({2}, source, tb);
  REQUIRE(single.snapshots.size() == 1);
  CHECK(single.snapshots[0].head == IndexSet{2});
  CHECK(single.snapshots[0].rest.empty());

  const CandidateSplits full = clink_split({0, 1, 2}, source, tb);
  REQUIRE(full.snapshots.size() == 3);
  CHECK(full.snapshots[0].head == IndexSet{0});
  CHECK(full.snapshots[0].rest == IndexSet{1, 2});
  CHECK(full.snapshots[1].head.size() == 2);
  CHECK(full.snapshots[2].head.size() == 3);
  CHECK(full.snapshots[2].rest.empty());
}

TEST_CASE("clink_split finds the coupled pair with analytic values") {
  // {0,1} and {2,3} are independent couples; splitting either couple carries
  // a fixed positive information value
  CoupleStructureSource source(Partition({0, 0, 1, 1}, 2), 0.278);
  TieBreak tb;
  const CandidateSplits splits = clink_split({0, 1, 2, 3}, source, tb);
  bool found = false;
  for (const auto& snap : splits.snapshots)
    if (snap.head == IndexSet{0, 1} && snap.rest == IndexSet{2, 3}) found = true;
  CHECK(found);
}

TEST_CASE("clink with the exact evaluator") {
  // parity [3,3] embedded as six variables, k = 2
  const FiniteJoint pair = parity_distribution({3, 3});
  ExactMultiInfoSource source(pair);
  TieBreak tb;
  const ClusteringResult result = clink(6, 2, source, tb);
  CHECK(same_clustering(result.partition, Partition({0, 0, 0, 1, 1, 1}, 2)));
  REQUIRE(result.score.has_value());
  CHECK(*result.score < 1e-9);
  CHECK(result.estimator_calls <= 36);  // N^(2k-2) with N=6, k=2
  CHECK(result.candidates_examined >= 1);

  // k = N: the all-singletons partition is reachable and wins on
  // mutually independent variables
  const FiniteJoint coins = independent_coins(4);
  ExactMultiInfoSource csource(coins);
  const ClusteringResult singles = clink(4, 4, csource, tb);
  CHECK(singles.partition.cluster_count() == 4);
  CHECK(*singles.score < 1e-9);

  // k = 2: the candidate set is exactly the deduplicated snapshot splits
  ExactMultiInfoSource csource2(coins);
  const ClusteringResult two = clink(4, 2, csource2, tb);
  CHECK(two.candidates_examined == 3);

  CHECK_THROWS_AS(clink(4, 1, csource, tb), UsageError);
  CHECK_THROWS_AS(clink(4, 5, csource, tb), UsageError);
}

TEST_CASE("clink under adversarial tie-breaking stays correct") {
  const FiniteJoint pair = parity_distribution({3, 3});
  MarginalEntropyCache reference(pair);
  for (std::uint64_t policy = 0; policy < 25; ++policy) {
    ExactMultiInfoSource source(pair);
    FickleTieBreak tb(policy);
    const ClusteringResult result = clink(6, 2, source, tb);
    // any returned partition must be exactly independent
    CHECK(multi_information(pair, result.partition.clusters()) < 1e-9);
  }

  // coupled translation pairs with analytic values
  for (std::uint64_t policy = 100; policy < 125; ++policy) {
    CoupleStructureSource source(Partition({0, 0, 1, 1}, 2), 0.278);
    FickleTieBreak tb(policy);
    const ClusteringResult result = clink(4, 2, source, tb);
    CHECK(same_clustering(result.partition, Partition({0, 0, 1, 1}, 2)));
  }
}

TEST_CASE("fickle oracle honors exact gaps and is deterministic per seed") {
  const FiniteJoint triple = parity_distribution({3});
  // 1.0 vs 0.0: the answer is exact regardless of the policy
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FickleOracle o = make_fickle(triple, seed);
    CHECK(o.compare({0, 1}, {2}, {0}, {2}));
    CHECK_FALSE(o.compare({0}, {2}, {0, 1}, {2}));
  }
  // tie: answers may differ across seeds but are reproducible per seed
  std::vector<bool> answers;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    FickleOracle a = make_fickle(triple, seed);
    FickleOracle b = make_fickle(triple, seed);
    const bool tie_answer = a.compare({0}, {1}, {0}, {2});  // 0.0 vs 0.0
    CHECK(tie_answer == b.compare({0}, {1}, {0}, {2}));
    answers.push_back(tie_answer);
  }
  CHECK(std::count(answers.begin(), answers.end(), true) > 0);
  CHECK(std::count(answers.begin(), answers.end(), false) > 0);
}

TEST_CASE("plug-in oracle drives clin on i.i.d. data") {
  RunConfig cfg;
  cfg.m_max = 3;
  cfg.l_max = 4;
  cfg.alpha = 0.01;
  cfg.permutation_count = 60;
  cfg.seed = 5;

  const auto gen = gen_gaussian_clusters({2, 2}, 0.8, 4096, 12);
  const ClusteringResult result = clin_iid(gen.series, cfg);
  CHECK(same_clustering(result.partition, gen.ground_truth));
  CHECK(result.oracle_calls > 0);
}

TEST_CASE("three-sample solver") {
  RunConfig cfg;
  cfg.m_max = 4;
  cfg.l_max = 6;

  const std::size_t n = 20000;
  // coupled pair (1,2) plus an independent third process
  const auto couple = gen_translation_pair(kGoldenRotation, OffsetMode::kFixed, 0.1, n, 51);
  const auto lone = gen_translation(kSilverRotation, n, 99);
  const SeriesSet forward = concat(couple.series, SeriesSet({lone}, {"t3"}));
  const ThreeSampleResult fwd = three_sample(forward, cfg);
  CHECK(fwd.label == "(12)|3");
  CHECK_FALSE(fwd.low_margin);

  // mirrored: x1 independent, (x2,x3) coupled
  const SeriesSet mirrored = concat(SeriesSet({lone}, {"t0"}), couple.series);
  const ThreeSampleResult mir = three_sample(mirrored, cfg);
  CHECK(mir.label == "1|(23)");

  const SeriesSet two({{0.0, 1.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(three_sample(two, cfg), UsageError);
}

TEST_CASE("clink on generated translation clusters") {
  RunConfig cfg;
  cfg.m_max = 6;
  cfg.l_max = 6;
  const std::size_t n = 20000;
  const auto c1 = gen_translation_pair(kGoldenRotation, OffsetMode::kFixed, 0.1, n, 7);
  const auto c2 = gen_translation_pair(kSilverRotation, OffsetMode::kFixed, 0.1, n, 8);
  const SeriesSet joined = concat(c1.series, c2.series);
  const ClusteringResult result = clink(joined, 2, cfg);
  CHECK(same_clustering(result.partition, Partition({0, 0, 1, 1}, 2)));
  CHECK(static_cast<double>(result.estimator_calls) <= std::pow(4.0, 2.0));
  REQUIRE(result.score.has_value());
}
