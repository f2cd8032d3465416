// Exact information quantities over explicit finite joint distributions:
// the known-distribution oracle and the exhaustive finest-independent-
// partition search used as the correctness yardstick.
#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "indclust/common.hpp"
#include "indclust/core.hpp"

namespace indclust {

// Probability table over the product alphabet of N finite-valued variables.
// Layout is row-major with the first variable slowest.
class FiniteJoint {
 public:
  static constexpr std::size_t kDefaultCapacity = std::size_t(1) << 24;

  FiniteJoint(std::vector<std::size_t> alphabet_sizes, std::vector<double> pmf,
              std::size_t capacity = kDefaultCapacity)
      : sizes_(std::move(alphabet_sizes)), pmf_(std::move(pmf)) {
    if (sizes_.empty()) throw DataError("joint distribution needs at least one variable");
    if (sizes_.size() > 63) throw CapacityError("too many variables");
    std::size_t total = 1;
    for (std::size_t s : sizes_) {
      if (s == 0) throw DataError("alphabet size must be >= 1");
      if (total > capacity / s) throw CapacityError("product alphabet exceeds capacity cap");
      total *= s;
    }
    if (total > capacity) throw CapacityError("product alphabet exceeds capacity cap");
    if (pmf_.size() != total) throw DataError("pmf size does not match product alphabet");
    double sum = 0.0;
    for (double p : pmf_) {
      if (!(p >= 0.0)) throw DataError("pmf entries must be nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DataError("pmf entries must sum to 1");
  }

  std::size_t variable_count() const { return sizes_.size(); }
  std::size_t alphabet_size(std::size_t v) const { return sizes_[v]; }
  const std::vector<std::size_t>& alphabet_sizes() const { return sizes_; }
  const std::vector<double>& pmf() const { return pmf_; }
  std::size_t table_size() const { return pmf_.size(); }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> pmf_;
};

namespace detail {

inline double plogp_bits(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

// Marginal Shannon entropy for the variables selected by `mask`, walking the
// full table once with an odometer over the digit vector.
inline double marginal_entropy_bits(const FiniteJoint& d, std::uint64_t mask) {
  if (mask == 0) return 0.0;  // entropy of the empty tuple
  const std::size_t nvars = d.variable_count();
  std::size_t marg_size = 1;
  std::vector<std::size_t> stride(nvars, 0);
  for (std::size_t v = nvars; v-- > 0;) {
    if (mask & (std::uint64_t(1) << v)) {
      stride[v] = marg_size;
      marg_size *= d.alphabet_size(v);
    }
  }
  std::vector<double> marg(marg_size, 0.0);
  std::vector<std::size_t> digit(nvars, 0);
  std::size_t sub = 0;
  const auto& pmf = d.pmf();
  for (std::size_t idx = 0;; ++idx) {
    marg[sub] += pmf[idx];
    if (idx + 1 == pmf.size()) break;
    // odometer increment, last variable fastest
    std::size_t v = nvars - 1;
    while (true) {
      if (++digit[v] < d.alphabet_size(v)) {
        sub += stride[v];
        break;
      }
      sub -= stride[v] * (d.alphabet_size(v) - 1);
      digit[v] = 0;
      --v;
    }
  }
  double h = 0.0;
  for (double p : marg) h += plogp_bits(p);
  return h;
}

inline std::uint64_t mask_of(const FiniteJoint& d, const IndexSet& subset) {
  std::uint64_t mask = 0;
  for (std::size_t v : subset) {
    if (v >= d.variable_count()) throw UsageError("variable index out of range");
    mask |= std::uint64_t(1) << v;
  }
  return mask;
}

}  // namespace detail

// Memoizes subset entropies; the oracle and the brute-force search query the
// same masks many times.
class MarginalEntropyCache {
 public:
  explicit MarginalEntropyCache(const FiniteJoint& d) : d_(&d) {}

  double entropy_mask(std::uint64_t mask) {
    auto it = memo_.find(mask);
    if (it != memo_.end()) return it->second;
    const double h = detail::marginal_entropy_bits(*d_, mask);
    memo_.emplace(mask, h);
    return h;
  }

  double mutual_information_masks(std::uint64_t a, std::uint64_t b) {
    if (a & b) throw UsageError("mutual information requires disjoint sets");
    if (a == 0 || b == 0) return 0.0;
    const double mi = entropy_mask(a) + entropy_mask(b) - entropy_mask(a | b);
    return mi < 0.0 ? 0.0 : mi;
  }

  const FiniteJoint& joint() const { return *d_; }

 private:
  const FiniteJoint* d_;
  std::unordered_map<std::uint64_t, double> memo_;
};

// Shannon entropy (bits) of the marginal on `subset`; the empty subset has
// entropy 0, consistent with zero mutual information against the empty set.
inline double entropy(const FiniteJoint& d, const IndexSet& subset) {
  return detail::marginal_entropy_bits(d, detail::mask_of(d, subset));
}

// I(A,B) = H(A) + H(B) - H(A u B), clamped to >= 0.
inline double mutual_information(const FiniteJoint& d, const IndexSet& a, const IndexSet& b) {
  MarginalEntropyCache cache(d);
  return cache.mutual_information_masks(detail::mask_of(d, a), detail::mask_of(d, b));
}

// sum_i H(part_i) - H(union); zero iff the parts are mutually independent.
inline double multi_information(const FiniteJoint& d, const std::vector<IndexSet>& parts) {
  MarginalEntropyCache cache(d);
  std::uint64_t all = 0;
  double sum = 0.0;
  for (const auto& part : parts) {
    const std::uint64_t mask = detail::mask_of(d, part);
    if (mask & all) throw UsageError("multi-information requires disjoint parts");
    all |= mask;
    sum += cache.entropy_mask(mask);
  }
  if (all == 0) throw UsageError("multi-information over no variables");
  const double mi = sum - cache.entropy_mask(all);
  return mi < 0.0 ? 0.0 : mi;
}

// The known-distribution test: is I(A,B) > I(C,D)? Strict with tolerance.
inline bool exact_oracle_compare(const FiniteJoint& d, const IndexSet& a, const IndexSet& b,
                                 const IndexSet& c, const IndexSet& e) {
  MarginalEntropyCache cache(d);
  const double lhs = cache.mutual_information_masks(detail::mask_of(d, a), detail::mask_of(d, b));
  const double rhs = cache.mutual_information_masks(detail::mask_of(d, c), detail::mask_of(d, e));
  return lhs > rhs + kExactTol;
}

// Exhaustive search for the finest partition into mutually independent
// clusters. Enumerates all set partitions (restricted growth strings, which
// are exactly the canonical assignments) and keeps the independent one with
// the most blocks; the theory guarantees uniqueness, which is asserted.
inline Partition brute_force_finest(const FiniteJoint& d) {
  const std::size_t n = d.variable_count();
  if (n > 10) throw CapacityError("brute-force search limited to 10 variables");
  MarginalEntropyCache cache(d);

  std::vector<std::size_t> a(n, 0);
  std::size_t best_blocks = 0;
  std::vector<std::vector<std::size_t>> best;

  while (true) {
    const std::size_t k = *std::max_element(a.begin(), a.end()) + 1;
    if (k >= best_blocks || best.empty()) {
      // multi-information of this partition from per-block masks
      std::vector<std::uint64_t> masks(k, 0);
      for (std::size_t i = 0; i < n; ++i) masks[a[i]] |= std::uint64_t(1) << i;
      double sum = 0.0;
      std::uint64_t all = 0;
      for (std::uint64_t m : masks) {
        sum += cache.entropy_mask(m);
        all |= m;
      }
      const double mi = sum - cache.entropy_mask(all);
      if (mi < kExactTol) {
        if (k > best_blocks) {
          best_blocks = k;
          best.clear();
        }
        best.push_back(a);
      }
    }

    // next restricted growth string
    std::size_t i = n;
    while (i-- > 1) {
      std::size_t prefix_max = 0;
      for (std::size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, a[j]);
      if (a[i] <= prefix_max) break;
    }
    if (i == 0) break;
    ++a[i];
    for (std::size_t j = i + 1; j < n; ++j) a[j] = 0;
  }

  if (best.empty()) throw IntegrityError("no independent partition found (not even the trivial one)");
  if (best.size() > 1)
    throw IntegrityError("finest independent partition is not unique at the working tolerance");
  return Partition(best.front(), best_blocks);
}

// Independent groups of binary variables; within a group of size g the first
// g-1 bits are i.i.d. fair and the last is their XOR, so every strict subset
// of a group is i.i.d. while the whole group is dependent.
inline FiniteJoint parity_distribution(const std::vector<std::size_t>& group_sizes,
                                       std::size_t capacity = FiniteJoint::kDefaultCapacity) {
  if (group_sizes.empty()) throw UsageError("need at least one group");
  std::size_t n = 0;
  for (std::size_t g : group_sizes) {
    if (g < 2) throw UsageError("parity groups must have size >= 2");
    n += g;
  }
  if (n > 24 || (std::size_t(1) << n) > capacity)
    throw CapacityError("parity construction exceeds capacity cap");
  const std::size_t total = std::size_t(1) << n;
  const double p = std::ldexp(1.0, -static_cast<int>(n - group_sizes.size()));
  std::vector<double> pmf(total, 0.0);
  for (std::size_t outcome = 0; outcome < total; ++outcome) {
    bool valid = true;
    std::size_t offset = 0;
    for (std::size_t g : group_sizes) {
      // variable v takes bit (n-1-v): first variable slowest
      unsigned parity = 0;
      for (std::size_t v = offset; v < offset + g; ++v)
        parity ^= (outcome >> (n - 1 - v)) & 1u;
      if (parity != 0) {
        valid = false;
        break;
      }
      offset += g;
    }
    if (valid) pmf[outcome] = p;
  }
  return FiniteJoint(std::vector<std::size_t>(n, 2), std::move(pmf), capacity);
}

// Outer product of two independent joints (block-diagonal constructions).
inline FiniteJoint tensor_product(const FiniteJoint& a, const FiniteJoint& b,
                                  std::size_t capacity = FiniteJoint::kDefaultCapacity) {
  std::vector<std::size_t> sizes = a.alphabet_sizes();
  sizes.insert(sizes.end(), b.alphabet_sizes().begin(), b.alphabet_sizes().end());
  std::vector<double> pmf;
  pmf.reserve(a.table_size() * b.table_size());
  for (double pa : a.pmf())
    for (double pb : b.pmf()) pmf.push_back(pa * pb);
  return FiniteJoint(std::move(sizes), std::move(pmf), capacity);
}

}  // namespace indclust
