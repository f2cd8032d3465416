// Shared error taxonomy, index-set alias and numeric tolerances.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace indclust {

// Error classes map 1:1 onto the CLI exit codes (2..5).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or impossible requests (exit 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid data: ragged CSV, NaN samples, pmf that does not
// sum to one, invalid partition assignments (exit 3).
class DataError : public Error {
 public:
  using Error::Error;
};

// Requests past a hard resource cap, e.g. the product-alphabet or the
// Bell-number guard (exit 4).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Violated internal invariant: non-unique finest partition, inconsistent
// oracle, call-count bound exceeded (exit 5).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A sorted, duplicate-free set of 0-based series/variable indices.
using IndexSet = std::vector<std::size_t>;

// Information values below this many bits are treated as zero in exact mode.
inline constexpr double kExactTol = 1e-9;

// Per-term floating slack for empirical multi-information (must be >= 0
// mathematically; tiny negatives are rounding).
inline constexpr double kTermSlack = 1e-12;

inline IndexSet sorted_unique(IndexSet v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline bool disjoint(const IndexSet& a, const IndexSet& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    if (a[i] < b[j]) ++i; else ++j;
  }
  return true;
}

inline IndexSet set_minus(const IndexSet& a, std::size_t x) {
  IndexSet out;
  out.reserve(a.size());
  for (std::size_t v : a)
    if (v != x) out.push_back(v);
  return out;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace indclust
