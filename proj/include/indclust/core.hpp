// Core data model: sample sets, partitions, the summable weight family and
// the run configuration shared by the estimator and clustering layers.
// All types are immutable values after construction.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "indclust/common.hpp"

namespace indclust {

// N aligned real-valued sample sequences of common length n.
class SeriesSet {
 public:
  SeriesSet(std::vector<std::vector<double>> data, std::vector<std::string> names = {})
      : data_(std::move(data)), names_(std::move(names)) {
    if (data_.empty()) throw DataError("series set must contain at least one series");
    const std::size_t n = data_.front().size();
    if (n == 0) throw DataError("series must have length >= 1");
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (data_[i].size() != n)
        throw DataError("series " + std::to_string(i + 1) + " has length " +
                        std::to_string(data_[i].size()) + ", expected " + std::to_string(n));
      for (double v : data_[i])
        if (!std::isfinite(v))
          throw DataError("series " + std::to_string(i + 1) + " contains a non-finite value");
    }
    if (names_.empty()) {
      names_.reserve(data_.size());
      for (std::size_t i = 0; i < data_.size(); ++i) names_.push_back("s" + std::to_string(i + 1));
    } else if (names_.size() != data_.size()) {
      throw DataError("name count does not match series count");
    }
  }

  std::size_t count() const { return data_.size(); }
  std::size_t length() const { return data_.front().size(); }
  std::span<const double> values(std::size_t i) const { return data_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::vector<double>> data_;
  std::vector<std::string> names_;
};

// Side-by-side merge of two aligned sets (used to compose test constructions).
inline SeriesSet concat(const SeriesSet& a, const SeriesSet& b) {
  if (a.length() != b.length()) throw DataError("cannot concat series sets of different lengths");
  std::vector<std::vector<double>> data;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < a.count(); ++i) {
    data.emplace_back(a.values(i).begin(), a.values(i).end());
    names.push_back(a.name(i));
  }
  for (std::size_t i = 0; i < b.count(); ++i) {
    data.emplace_back(b.values(i).begin(), b.values(i).end());
    names.push_back(b.name(i));
  }
  return SeriesSet(std::move(data), std::move(names));
}

// Assignment of N indices into k nonempty clusters. Labels are 0-based
// internally; the canonical form orders clusters by smallest member.
class Partition {
 public:
  Partition(std::vector<std::size_t> assignment, std::size_t k)
      : assignment_(std::move(assignment)), k_(k) {
    if (assignment_.empty()) throw DataError("partition over an empty index set");
    if (k_ == 0 || k_ > assignment_.size()) throw DataError("cluster count out of range");
    std::vector<bool> used(k_, false);
    for (std::size_t label : assignment_) {
      if (label >= k_) throw DataError("cluster label out of range");
      used[label] = true;
    }
    for (std::size_t label = 0; label < k_; ++label)
      if (!used[label]) throw DataError("cluster label " + std::to_string(label + 1) + " is unused");
  }

  static Partition from_clusters(const std::vector<IndexSet>& clusters, std::size_t n) {
    std::vector<std::size_t> assignment(n, SIZE_MAX);
    for (std::size_t label = 0; label < clusters.size(); ++label) {
      if (clusters[label].empty()) throw DataError("empty cluster");
      for (std::size_t idx : clusters[label]) {
        if (idx >= n) throw DataError("cluster member out of range");
        if (assignment[idx] != SIZE_MAX) throw DataError("index assigned twice");
        assignment[idx] = label;
      }
    }
    for (std::size_t idx = 0; idx < n; ++idx)
      if (assignment[idx] == SIZE_MAX) throw DataError("index " + std::to_string(idx + 1) + " unassigned");
    return Partition(std::move(assignment), clusters.size());
  }

  static Partition single_cluster(std::size_t n) {
    return Partition(std::vector<std::size_t>(n, 0), 1);
  }

  std::size_t size() const { return assignment_.size(); }
  std::size_t cluster_count() const { return k_; }
  std::size_t label_of(std::size_t index) const { return assignment_.at(index); }
  const std::vector<std::size_t>& assignment() const { return assignment_; }

  // Clusters as sorted member lists, ordered by label.
  std::vector<IndexSet> clusters() const {
    std::vector<IndexSet> out(k_);
    for (std::size_t i = 0; i < assignment_.size(); ++i) out[assignment_[i]].push_back(i);
    return out;
  }

  bool operator==(const Partition& other) const {
    return k_ == other.k_ && assignment_ == other.assignment_;
  }

 private:
  std::vector<std::size_t> assignment_;
  std::size_t k_;
};

// Unique representative: relabel so clusters appear in order of their
// smallest member. Idempotent; label-permutation invariant.
inline Partition canonicalize(const Partition& p) {
  std::vector<std::size_t> relabel(p.cluster_count(), SIZE_MAX);
  std::vector<std::size_t> assignment(p.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t old = p.label_of(i);
    if (relabel[old] == SIZE_MAX) relabel[old] = next++;
    assignment[i] = relabel[old];
  }
  return Partition(std::move(assignment), p.cluster_count());
}

inline bool same_clustering(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) return false;
  return canonicalize(a) == canonicalize(b);
}

// True iff every cluster of fine lies inside some cluster of coarse.
inline bool is_refinement(const Partition& fine, const Partition& coarse) {
  if (fine.size() != coarse.size())
    throw UsageError("refinement check requires partitions over the same index set");
  std::vector<std::size_t> image(fine.cluster_count(), SIZE_MAX);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const std::size_t f = fine.label_of(i);
    const std::size_t c = coarse.label_of(i);
    if (image[f] == SIZE_MAX) image[f] = c;
    else if (image[f] != c) return false;
  }
  return true;
}

// w_j = 1/(j(j+1)); sums to 1 over j >= 1.
inline double weight(std::size_t j) {
  if (j == 0) throw UsageError("weight index must be >= 1");
  const double jd = static_cast<double>(j);
  return 1.0 / (jd * (jd + 1.0));
}

// Knobs shared by the estimator stack. alpha is the confidence level of the
// surrogate independence test; threshold_c scales the i.i.d.-mode decision
// threshold t'(n) = c * n^(-1/3).
struct RunConfig {
  std::size_t m_max = 16;             // max block length
  std::size_t l_max = 16;             // max quantization level
  std::uint64_t seed = 0;
  double alpha = 0.05;                // test confidence level, in (0,1)
  double threshold_c = 1.0;           // constant in t'(n)
  std::size_t permutation_count = 200;  // surrogate count for the shift test

  void validate() const {
    if (m_max == 0 || m_max > 30) throw UsageError("m_max must be in [1, 30]");
    if (l_max == 0 || l_max > 30) throw UsageError("l_max must be in [1, 30]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must be in (0, 1)");
    if (!(threshold_c > 0.0)) throw UsageError("threshold_c must be positive");
    if (permutation_count == 0) throw UsageError("permutation_count must be >= 1");
  }

  // Decision threshold for the plug-in comparison; n^(-1/3) dominates the
  // sqrt(n) estimation rate, so thresholded differences are asymptotically
  // exact under the i.i.d. assumptions.
  double threshold(std::size_t n) const {
    return threshold_c * std::pow(static_cast<double>(n), -1.0 / 3.0);
  }
};

}  // namespace indclust
