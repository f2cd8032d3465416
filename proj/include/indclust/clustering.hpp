// The clustering algorithms: recursive two-way splitting driven by a
// dependence oracle (exact or plug-in), and the known-k candidate-split
// search driven by a sum-information estimator, including the adversarial
// tie-breaking harness used to probe robustness on exact ties.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "indclust/common.hpp"
#include "indclust/core.hpp"
#include "indclust/estimators.hpp"
#include "indclust/finite_dist.hpp"
#include "indclust/quantizer.hpp"
#include "indclust/rng.hpp"

namespace indclust {

// Comparison contract: "is I(A,B) > I(C,D)?" and "is I(A,B) > 0?".
// Every query counts as one oracle call.
class DependenceOracle {
 public:
  virtual ~DependenceOracle() = default;

  bool compare(const IndexSet& a, const IndexSet& b, const IndexSet& c, const IndexSet& d) {
    budget_.record();
    return do_compare(a, b, c, d);
  }

  bool is_positive(const IndexSet& a, const IndexSet& b) {
    budget_.record();
    return do_is_positive(a, b);
  }

  std::uint64_t calls() const { return budget_.count(); }

 protected:
  virtual bool do_compare(const IndexSet&, const IndexSet&, const IndexSet&, const IndexSet&) = 0;
  virtual bool do_is_positive(const IndexSet&, const IndexSet&) = 0;

 private:
  EstimatorBudget budget_;
};

// Known-distribution oracle over an explicit finite joint.
class ExactOracle : public DependenceOracle {
 public:
  explicit ExactOracle(const FiniteJoint& d) : cache_(d) {}

 protected:
  bool do_compare(const IndexSet& a, const IndexSet& b, const IndexSet& c,
                  const IndexSet& d) override {
    return mi(a, b) > mi(c, d) + kExactTol;
  }
  bool do_is_positive(const IndexSet& a, const IndexSet& b) override {
    return mi(a, b) > kExactTol;
  }

 private:
  double mi(const IndexSet& a, const IndexSet& b) {
    return cache_.mutual_information_masks(detail::mask_of(cache_.joint(), a),
                                           detail::mask_of(cache_.joint(), b));
  }
  MarginalEntropyCache cache_;
};

// Plug-in oracle for i.i.d. samples: comparisons go through the thresholded
// sum-information gap, positivity through the circular-shift surrogate test.
// Answers are memoized so identical queries are answered identically (and
// cheaply) within a run.
class PluginOracle : public DependenceOracle {
 public:
  PluginOracle(const SeriesSet& s, RunConfig cfg, unsigned threads = 1)
      : series_(&s),
        quant_(fit_normalizer(s)),
        cfg_(cfg),
        threads_(threads),
        eval_(s, quant_, cfg, threads) {}

 protected:
  bool do_compare(const IndexSet& a, const IndexSet& b, const IndexSet& c,
                  const IndexSet& d) override {
    return info_value(a, b) > info_value(c, d) + cfg_.threshold(series_->length());
  }

  bool do_is_positive(const IndexSet& a, const IndexSet& b) override {
    if (a.empty() || b.empty()) return false;
    const auto key = std::make_pair(sorted_unique(a), sorted_unique(b));
    auto it = positive_memo_.find(key);
    if (it != positive_memo_.end()) return it->second;
    const bool result =
        shift_independence_test(*series_, key.first, key.second, cfg_, quant_, threads_);
    positive_memo_.emplace(key, result);
    return result;
  }

 private:
  double info_value(const IndexSet& a, const IndexSet& b) {
    if (a.empty() || b.empty()) return 0.0;
    const auto key = std::make_pair(sorted_unique(a), sorted_unique(b));
    auto it = value_memo_.find(key);
    if (it != value_memo_.end()) return it->second;
    const double v = eval_.value({key.first, key.second});
    value_memo_.emplace(key, v);
    return v;
  }

  const SeriesSet* series_;
  QuantizerSpec quant_;
  RunConfig cfg_;
  unsigned threads_;
  SumInfoEvaluator eval_;
  std::map<std::pair<IndexSet, IndexSet>, double> value_memo_;
  std::map<std::pair<IndexSet, IndexSet>, bool> positive_memo_;
};

// Oracle that is correct whenever the two exact values differ by more than
// the tie tolerance, and answers adversarially (seeded) on ties.
class FickleOracle : public DependenceOracle {
 public:
  using ValueFn = std::function<double(const IndexSet&, const IndexSet&)>;

  FickleOracle(ValueFn exact_mi, std::uint64_t policy_seed, double tie_tol = kExactTol)
      : mi_(std::move(exact_mi)), policy_(derive_stream(policy_seed, 0)), tol_(tie_tol) {}

 protected:
  bool do_compare(const IndexSet& a, const IndexSet& b, const IndexSet& c,
                  const IndexSet& d) override {
    const double lhs = mi_(a, b);
    const double rhs = mi_(c, d);
    if (std::abs(lhs - rhs) > tol_) return lhs > rhs;
    return policy_.next_bit();
  }
  bool do_is_positive(const IndexSet& a, const IndexSet& b) override {
    const double v = mi_(a, b);
    if (v > tol_) return true;
    return policy_.next_bit();
  }

 private:
  ValueFn mi_;
  SplitMix64 policy_;
  double tol_;
};

// Fickle oracle whose exact values come from a finite joint distribution.
inline FickleOracle make_fickle(const FiniteJoint& d, std::uint64_t policy_seed) {
  auto cache = std::make_shared<MarginalEntropyCache>(d);
  return FickleOracle(
      [cache](const IndexSet& a, const IndexSet& b) {
        return cache->mutual_information_masks(detail::mask_of(cache->joint(), a),
                                               detail::mask_of(cache->joint(), b));
      },
      policy_seed);
}

struct SplitResult {
  IndexSet head;  // the candidate cluster C
  IndexSet rest;  // S \ C, possibly empty
};

// Function Split of the oracle-driven algorithm: grow C from the lowest
// index; as long as C and the rest R are dependent, scan R in ascending
// order, moving the first element whose removal decreases I(C,R) into C and
// restarting. Elements scanned without success are set aside for the rest of
// the scan. The loop guard converts oracle inconsistency into an error.
inline SplitResult clin_split(const IndexSet& s_in, DependenceOracle& oracle) {
  const IndexSet s = sorted_unique(s_in);
  if (s.empty()) throw UsageError("cannot split an empty set");
  IndexSet head = {s.front()};
  std::size_t iterations = 0;
  while (true) {
    IndexSet rest;
    std::set_difference(s.begin(), s.end(), head.begin(), head.end(), std::back_inserter(rest));
    if (rest.empty()) break;
    if (!oracle.is_positive(head, rest)) break;
    if (++iterations > s.size())
      throw IntegrityError("split did not converge: oracle answers are inconsistent");
    const IndexSet scan = rest;
    for (std::size_t x : scan) {
      const IndexSet reduced = set_minus(rest, x);
      if (oracle.compare(head, rest, head, reduced)) {
        head = set_union(head, {x});
        break;
      }
      rest = reduced;  // set aside; later queries see the depleted rest
    }
  }
  IndexSet rest;
  std::set_difference(s.begin(), s.end(), head.begin(), head.end(), std::back_inserter(rest));
  return {head, rest};
}

struct ClusteringResult {
  Partition partition;
  std::optional<double> score;  // sum-information of the partition (known-k mode)
  std::uint64_t oracle_calls = 0;
  std::uint64_t estimator_calls = 0;
  std::size_t candidates_examined = 0;
};

// Recursive splitting until no split produces a nonempty remainder; the
// returned partition is canonical. Asserts the 2kN^2 oracle-call bound.
inline ClusteringResult clin(std::size_t count, DependenceOracle& oracle) {
  if (count == 0) throw UsageError("cannot cluster an empty set");
  const std::uint64_t before = oracle.calls();
  std::vector<IndexSet> leaves;
  std::vector<IndexSet> stack;
  IndexSet full(count);
  for (std::size_t i = 0; i < count; ++i) full[i] = i;
  stack.push_back(std::move(full));
  while (!stack.empty()) {
    IndexSet s = std::move(stack.back());
    stack.pop_back();
    SplitResult split = clin_split(s, oracle);
    if (split.rest.empty()) {
      leaves.push_back(std::move(split.head));
    } else {
      stack.push_back(std::move(split.rest));
      stack.push_back(std::move(split.head));
    }
  }
  ClusteringResult result{canonicalize(Partition::from_clusters(leaves, count)), std::nullopt, 0,
                          0, 0};
  result.oracle_calls = oracle.calls() - before;
  const double bound = 2.0 * static_cast<double>(result.partition.cluster_count()) *
                       static_cast<double>(count) * static_cast<double>(count);
  if (static_cast<double>(result.oracle_calls) > bound)
    throw IntegrityError("oracle call bound exceeded: " + std::to_string(result.oracle_calls) +
                         " > 2kN^2 = " + std::to_string(bound));
  return result;
}

inline ClusteringResult clin(const FiniteJoint& d, DependenceOracle& oracle) {
  return clin(d.variable_count(), oracle);
}

// Known-distribution mode with the exact oracle.
inline ClusteringResult clin_exact(const FiniteJoint& d) {
  ExactOracle oracle(d);
  return clin(d.variable_count(), oracle);
}

// I.i.d. sample mode with the plug-in oracle.
inline ClusteringResult clin_iid(const SeriesSet& s, const RunConfig& cfg, unsigned threads = 1) {
  PluginOracle oracle(s, cfg, threads);
  return clin(s.count(), oracle);
}

// Value source for the known-k search; every value request counts one
// estimator call.
class SumInfoSource {
 public:
  virtual ~SumInfoSource() = default;

  double value(const std::vector<IndexSet>& parts) {
    budget_.record();
    return do_value(parts);
  }

  std::uint64_t calls() const { return budget_.count(); }

 protected:
  virtual double do_value(const std::vector<IndexSet>& parts) = 0;

 private:
  EstimatorBudget budget_;
};

// The empirical estimator as a value source.
class EmpiricalSumInfo : public SumInfoSource {
 public:
  EmpiricalSumInfo(const SeriesSet& s, const RunConfig& cfg, unsigned threads = 1)
      : quant_(fit_normalizer(s)), eval_(s, quant_, cfg, threads) {}

  const SumInfoEvaluator& evaluator() const { return eval_; }

 protected:
  double do_value(const std::vector<IndexSet>& parts) override { return eval_.value(parts); }

 private:
  QuantizerSpec quant_;
  SumInfoEvaluator eval_;
};

// Exact multi-information of a finite joint as a value source (each series
// identified with one variable). Used by the adversarial-tie harness.
class ExactMultiInfoSource : public SumInfoSource {
 public:
  explicit ExactMultiInfoSource(const FiniteJoint& d) : cache_(d) {}

 protected:
  double do_value(const std::vector<IndexSet>& parts) override {
    if (parts.size() < 2) return 0.0;
    double sum = 0.0;
    std::uint64_t all = 0;
    for (const auto& part : parts) {
      const std::uint64_t mask = detail::mask_of(cache_.joint(), part);
      if (mask & all) throw UsageError("parts overlap");
      all |= mask;
      sum += cache_.entropy_mask(mask);
    }
    const double v = sum - cache_.entropy_mask(all);
    return v < 0.0 ? 0.0 : v;
  }

 private:
  MarginalEntropyCache cache_;
};

// Analytic value source for constructions made of independent coupled
// groups: a group contributes its fixed information value whenever its
// members are split across (or partially missing from) different parts.
class CoupleStructureSource : public SumInfoSource {
 public:
  CoupleStructureSource(Partition truth, double couple_value)
      : truth_(std::move(truth)), value_(couple_value) {}

 protected:
  double do_value(const std::vector<IndexSet>& parts) override {
    double total = 0.0;
    for (const IndexSet& group : truth_.clusters()) {
      if (group.size() < 2) continue;
      // which parts contain members of this group?
      std::set<std::size_t> touched;
      std::size_t present = 0;
      for (std::size_t part_idx = 0; part_idx < parts.size(); ++part_idx) {
        for (std::size_t member : group) {
          if (std::binary_search(parts[part_idx].begin(), parts[part_idx].end(), member)) {
            touched.insert(part_idx);
            ++present;
          }
        }
      }
      if (present == group.size() && touched.size() > 1) total += value_;
    }
    return total;
  }

 private:
  Partition truth_;
  double value_;
};

// Deterministic comparison policy; the fickle variant answers arbitrarily
// (seeded) when the two values are within the tie tolerance.
class TieBreak {
 public:
  virtual ~TieBreak() = default;
  virtual bool greater(double a, double b) { return a > b; }
};

class FickleTieBreak : public TieBreak {
 public:
  explicit FickleTieBreak(std::uint64_t policy_seed, double tie_tol = kExactTol)
      : rng_(derive_stream(policy_seed, 1)), tol_(tie_tol) {}

  bool greater(double a, double b) override {
    if (std::abs(a - b) <= tol_) return rng_.next_bit();
    return a > b;
  }

 private:
  SplitMix64 rng_;
  double tol_;
};

struct CandidateSplits {
  std::vector<SplitResult> snapshots;  // (C, R) at the top of each iteration, plus final (C, {})
};

// Function Split of the known-k algorithm: snapshot (C,R), then move the
// element whose temporary removal from R yields the largest drop of the
// estimate (ties keep the lowest index) into C, until R is exhausted.
inline CandidateSplits clink_split(const IndexSet& s_in, SumInfoSource& est, TieBreak& tb) {
  const IndexSet s = sorted_unique(s_in);
  if (s.empty()) throw UsageError("cannot split an empty set");
  IndexSet head = {s.front()};
  IndexSet rest(s.begin() + 1, s.end());
  CandidateSplits out;
  while (!rest.empty()) {
    out.snapshots.push_back({head, rest});
    const double baseline = est.value({head, rest});
    std::size_t xmax = rest.front();
    double best_drop = 0.0;
    for (std::size_t x : rest) {
      const IndexSet reduced = set_minus(rest, x);
      const double without = reduced.empty() ? 0.0 : est.value({head, reduced});
      const double drop = baseline - without;
      if (tb.greater(drop, best_drop)) {
        best_drop = drop;
        xmax = x;
      }
    }
    head = set_union(head, {xmax});
    rest = set_minus(rest, xmax);
  }
  out.snapshots.push_back({head, {}});
  return out;
}

// Known-k clustering: breadth-first refinement of {S} through candidate
// splits until k parts, then argmin of the estimate over the deduplicated
// candidates (canonical-order first on ties). Asserts the N^(2k-2) bound on
// estimator calls.
inline ClusteringResult clink(std::size_t count, std::size_t k, SumInfoSource& est, TieBreak& tb) {
  if (k < 2)
    throw UsageError("k must be >= 2: with stationary sampling no consistent test can "
                     "distinguish one cluster from several");
  if (k > count) throw UsageError("k exceeds the number of series");
  const std::uint64_t before = est.calls();

  IndexSet full(count);
  for (std::size_t i = 0; i < count; ++i) full[i] = i;

  using Candidate = std::vector<IndexSet>;  // parts ordered by smallest member
  std::set<Candidate> frontier{{full}};
  std::map<IndexSet, std::vector<SplitResult>> split_memo;

  auto splits_of = [&](const IndexSet& part) -> const std::vector<SplitResult>& {
    auto it = split_memo.find(part);
    if (it == split_memo.end())
      it = split_memo.emplace(part, clink_split(part, est, tb).snapshots).first;
    return it->second;
  };

  for (std::size_t parts = 1; parts < k; ++parts) {
    std::set<Candidate> refined;
    for (const Candidate& candidate : frontier) {
      for (std::size_t pi = 0; pi < candidate.size(); ++pi) {
        if (candidate[pi].size() < 2) continue;
        for (const SplitResult& snap : splits_of(candidate[pi])) {
          if (snap.rest.empty()) continue;
          Candidate next;
          next.reserve(candidate.size() + 1);
          for (std::size_t qi = 0; qi < candidate.size(); ++qi)
            if (qi != pi) next.push_back(candidate[qi]);
          next.push_back(snap.head);
          next.push_back(snap.rest);
          std::sort(next.begin(), next.end(),
                    [](const IndexSet& a, const IndexSet& b) { return a.front() < b.front(); });
          refined.insert(std::move(next));
        }
      }
    }
    frontier = std::move(refined);
  }
  if (frontier.empty()) throw IntegrityError("no candidate clusterings generated");

  const Candidate* best = nullptr;
  double best_value = 0.0;
  for (const Candidate& candidate : frontier) {
    const double v = est.value(candidate);
    if (best == nullptr || tb.greater(best_value, v)) {
      best = &candidate;
      best_value = v;
    }
  }

  ClusteringResult result{canonicalize(Partition::from_clusters(*best, count)), best_value, 0, 0,
                          frontier.size()};
  result.estimator_calls = est.calls() - before;
  const double bound = std::pow(static_cast<double>(count), 2.0 * static_cast<double>(k) - 2.0);
  if (static_cast<double>(result.estimator_calls) > bound)
    throw IntegrityError("estimator call bound exceeded: " +
                         std::to_string(result.estimator_calls) +
                         " > N^(2k-2) = " + std::to_string(bound));
  return result;
}

// Stationary-sampling mode with the empirical estimator.
inline ClusteringResult clink(const SeriesSet& s, std::size_t k, const RunConfig& cfg,
                              unsigned threads = 1) {
  EmpiricalSumInfo source(s, cfg, threads);
  TieBreak tb;
  return clink(s.count(), k, source, tb);
}

struct ThreeSampleResult {
  std::string label;  // "(12)|3" or "1|(23)"
  double margin;      // absolute difference of the two estimates
  bool low_margin;    // margin below t'(n): no reliable ground to choose
};

// Decide which of (x1,x2) | x3 and x1 | (x2,x3) is the independent grouping
// by comparing the two sum-information estimates; the smaller side wins,
// ties go to "(12)|3".
inline ThreeSampleResult three_sample(const SeriesSet& s, const RunConfig& cfg,
                                      unsigned threads = 1) {
  if (s.count() != 3) throw UsageError("three-sample problem needs exactly 3 series");
  const QuantizerSpec q = fit_normalizer(s);
  SumInfoEvaluator eval(s, q, cfg, threads);
  const double first = eval.value({{0, 1}, {2}});
  const double second = eval.value({{0}, {1, 2}});
  ThreeSampleResult result;
  result.label = first <= second ? "(12)|3" : "1|(23)";
  result.margin = std::abs(first - second);
  result.low_margin = result.margin < cfg.threshold(s.length());
  return result;
}

}  // namespace indclust
