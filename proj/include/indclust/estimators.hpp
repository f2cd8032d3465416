// Empirical information machinery: sliding-window block frequencies, plug-in
// entropies, the weighted sum-information estimate over all block lengths m
// and quantization levels l, the thresholded i.i.d.-mode comparison, a
// circular-shift surrogate independence test, and the compression-based
// information-rate heuristic.
//
// The estimator is quasilinear in n: for each m the level-L cell keys of all
// windows are sorted once, and the entropies of every coarser level l <= L
// fall out of one pass over the sorted keys (level-l cells are prefixes of
// level-L cells).
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <zlib.h>

#include "indclust/common.hpp"
#include "indclust/core.hpp"
#include "indclust/quantizer.hpp"
#include "indclust/rng.hpp"

namespace indclust {

// Sliding-window cell counts for one group of series at a fixed (m, l).
struct FrequencyTable {
  std::map<std::vector<std::uint64_t>, std::size_t> counts;  // cell tuple -> count
  std::size_t total = 0;
};

// Counts of the per-series level-l cell tuples over the n-m+1 overlapping
// windows of the subset's series.
inline FrequencyTable block_frequencies(const SeriesSet& s, const IndexSet& subset, std::size_t m,
                                        unsigned l, const QuantizerSpec& q) {
  if (subset.empty()) throw UsageError("block_frequencies requires a nonempty subset");
  if (m == 0) throw UsageError("block length must be >= 1");
  if (m > s.length()) throw UsageError("block length exceeds sample length");
  for (std::size_t idx : subset)
    if (idx >= s.count()) throw UsageError("series index out of range");

  const std::size_t windows = s.length() - m + 1;
  FrequencyTable table;
  std::vector<double> block(m);
  std::vector<std::uint64_t> key(subset.size());
  for (std::size_t t = 0; t < windows; ++t) {
    for (std::size_t si = 0; si < subset.size(); ++si) {
      const auto vals = s.values(subset[si]);
      for (std::size_t j = 0; j < m; ++j) block[j] = q.normalize(subset[si], vals[t + j]);
      key[si] = cell_index(block, l);
    }
    ++table.counts[key];
  }
  table.total = windows;
  return table;
}

// Plug-in entropy of the empirical cell distribution, no smoothing.
inline double empirical_entropy(const FrequencyTable& f) {
  if (f.total == 0) throw UsageError("empirical entropy of an empty table");
  const double total = static_cast<double>(f.total);
  double h = 0.0;
  for (const auto& [cell, count] : f.counts) {
    const double p = static_cast<double>(count) / total;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

struct SumInfoTerm {
  std::size_t m = 0;
  unsigned l = 0;
  double raw = 0.0;       // sum of part entropies minus joint entropy, bits
  double weighted = 0.0;  // (1/m) w_m (1/l) w_l * raw
};

struct SumInfoBreakdown {
  double value = 0.0;  // sum of weighted terms, clamped at >= 0
  std::vector<SumInfoTerm> terms;
  std::size_t m_used = 0;
  unsigned l_used = 0;
};

// Thread-safe call counter for estimator evaluations.
class EstimatorBudget {
 public:
  void record() { calls_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t count() const { return calls_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> calls_{0};
};

namespace detail {

inline int leading_zeros_128(unsigned __int128 v) {
  const std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) return __builtin_clzll(hi);
  const std::uint64_t lo = static_cast<std::uint64_t>(v);
  return lo ? 64 + __builtin_clzll(lo) : 128;
}

inline int leading_zeros_64(std::uint64_t v) { return v ? __builtin_clzll(v) : 64; }

// Entropies of every level l = 1..levels from one pass over sorted full-depth
// keys: two windows share a level-l cell iff their keys agree on the top
// g*l bits.
template <typename Key>
std::vector<double> entropies_by_level(const std::vector<Key>& sorted_keys, unsigned group_size,
                                       unsigned levels, unsigned key_width) {
  const std::size_t total = sorted_keys.size();
  std::vector<long double> clogc(levels + 1, 0.0L);
  std::vector<std::size_t> start(levels + 1, 0);
  const int pad = (sizeof(Key) == 16 ? 128 : 64) - static_cast<int>(key_width);
  for (std::size_t t = 1; t < total; ++t) {
    const Key diff = sorted_keys[t - 1] ^ sorted_keys[t];
    if (diff == Key(0)) continue;
    int lead;
    if constexpr (sizeof(Key) == 16) lead = leading_zeros_128(diff) - pad;
    else lead = leading_zeros_64(diff) - pad;
    const unsigned same_planes = static_cast<unsigned>(lead) / group_size;
    for (unsigned l = same_planes + 1; l <= levels; ++l) {
      const std::size_t c = t - start[l];
      clogc[l] += static_cast<long double>(c) * std::log2(static_cast<long double>(c));
      start[l] = t;
    }
  }
  std::vector<double> h(levels + 1, 0.0);
  const long double log_total = std::log2(static_cast<long double>(total));
  for (unsigned l = 1; l <= levels; ++l) {
    const std::size_t c = total - start[l];
    clogc[l] += static_cast<long double>(c) * std::log2(static_cast<long double>(c));
    const long double value = log_total - clogc[l] / static_cast<long double>(total);
    h[l] = value > 0.0L ? static_cast<double>(value) : 0.0;
  }
  return h;
}

}  // namespace detail

// Evaluator for the weighted sum-information of a partition of the series
// into parts. Quantized window keys are cached per (block length, series) at
// construction so that repeated evaluations over different part structures
// (as in the clustering search) only pay for sorting. Keys are stored for
// every circular window start, which makes evaluation under a common
// circular shift of some series a pure index remap (the surrogate test's
// hot path).
class SumInfoEvaluator {
 public:
  SumInfoEvaluator(const SeriesSet& s, QuantizerSpec q, RunConfig cfg, unsigned threads = 1)
      : series_(&s), quant_(std::move(q)), cfg_(cfg), threads_(std::max(1u, threads)) {
    cfg_.validate();
    if (quant_.lo.size() != s.count()) throw UsageError("quantizer does not match series set");
    n_ = s.length();
    const std::size_t log_n =
        n_ > 1 ? static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(n_)))) : 1;
    const std::size_t depth = std::max<std::size_t>(1, log_n);
    m_used_ = std::min(cfg_.m_max, depth);
    m_used_ = std::min(m_used_, n_);  // at least one window per block length
    l_used_ = static_cast<unsigned>(std::min(cfg_.l_max, depth));

    // per-sample expansion bits, then per-(m, series) window keys at level L
    // for every circular window start
    const unsigned L = l_used_;
    std::vector<std::vector<std::uint32_t>> bits(s.count());
    for (std::size_t si = 0; si < s.count(); ++si) {
      bits[si].resize(n_);
      const auto vals = s.values(si);
      for (std::size_t t = 0; t < n_; ++t)
        bits[si][t] = static_cast<std::uint32_t>(value_bits(quant_.normalize(si, vals[t]), L));
    }
    keys_.resize(m_used_);
    for (std::size_t m = 1; m <= m_used_; ++m) {
      keys_[m - 1].resize(s.count());
      for (std::size_t si = 0; si < s.count(); ++si) {
        auto& out = keys_[m - 1][si];
        out.resize(n_);
        for (std::size_t t = 0; t < n_; ++t) {
          // bit j of the cell key is expansion bit ceil(j/m) of coordinate
          // (j-1 mod m)+1, exactly as cell_index builds it
          std::uint32_t key = 0;
          for (unsigned j = 0; j < L; ++j) {
            std::size_t coord = t + (j % m);
            if (coord >= n_) coord -= n_;
            const unsigned plane = j / m;
            key = (key << 1) | ((bits[si][coord] >> (L - 1 - plane)) & 1u);
          }
          out[t] = key;
        }
      }
    }
  }

  const SeriesSet& series() const { return *series_; }
  const RunConfig& config() const { return cfg_; }
  const QuantizerSpec& quantizer() const { return quant_; }
  std::size_t m_used() const { return m_used_; }
  unsigned l_used() const { return l_used_; }
  std::uint64_t calls() const { return budget_.count(); }

  SumInfoBreakdown evaluate(const std::vector<IndexSet>& parts_in) const {
    return evaluate_shifted(parts_in, {}, 0);
  }

  // Sum-information of the parts after every series in `rotated` is
  // circularly shifted left by `offset` samples. Offset 0 reproduces the
  // plain estimate; the cached circular keys make this a remap, not a
  // recomputation.
  SumInfoBreakdown evaluate_shifted(const std::vector<IndexSet>& parts_in,
                                    const IndexSet& rotated, std::size_t offset) const {
    budget_.record();
    std::vector<IndexSet> parts = canonical_parts(parts_in);
    SumInfoBreakdown out;
    out.m_used = m_used_;
    out.l_used = l_used_;
    if (parts.size() < 2) return out;  // sum of marginals equals the joint

    IndexSet all;
    for (const auto& part : parts) all = set_union(all, part);
    if (all.size() * l_used_ > 128)
      throw CapacityError("joint cell key exceeds 128 bits; reduce l_max or the part sizes");

    std::vector<std::vector<SumInfoTerm>> terms_by_m(m_used_);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads_, m_used_));
    if (workers <= 1) {
      for (std::size_t m = 1; m <= m_used_; ++m)
        terms_by_m[m - 1] = terms_for_block_length(m, parts, all, rotated, offset);
    } else {
      std::atomic<std::size_t> next{1};
      std::exception_ptr error;
      std::mutex error_mutex;
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          try {
            while (true) {
              const std::size_t m = next.fetch_add(1);
              if (m > m_used_) break;
              terms_by_m[m - 1] = terms_for_block_length(m, parts, all, rotated, offset);
            }
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      if (error) std::rethrow_exception(error);
    }

    // fixed (m, l) reduction order for bit-reproducibility
    for (std::size_t m = 1; m <= m_used_; ++m) {
      for (const auto& term : terms_by_m[m - 1]) {
        out.value += term.weighted;
        out.terms.push_back(term);
      }
    }
    if (out.value < 0.0) out.value = 0.0;
    return out;
  }

  double value(const std::vector<IndexSet>& parts) const { return evaluate(parts).value; }

 private:
  std::vector<IndexSet> canonical_parts(const std::vector<IndexSet>& parts_in) const {
    std::vector<IndexSet> parts;
    for (const auto& p : parts_in) {
      if (p.empty()) throw UsageError("sum-information parts must be nonempty");
      parts.push_back(sorted_unique(p));
      if (parts.back().size() != p.size()) throw UsageError("duplicate index inside a part");
      if (parts.back().back() >= series_->count())
        throw UsageError("series index out of range");
    }
    std::sort(parts.begin(), parts.end(),
              [](const IndexSet& a, const IndexSet& b) { return a.front() < b.front(); });
    std::size_t total = 0;
    IndexSet all;
    for (const auto& p : parts) {
      total += p.size();
      all = set_union(all, p);
    }
    if (all.size() != total) throw UsageError("sum-information parts overlap");
    return parts;
  }

  template <typename Key>
  std::vector<double> group_entropies(std::size_t m, const IndexSet& group,
                                      const IndexSet& rotated, std::size_t offset) const {
    const unsigned L = l_used_;
    const auto& per_series = keys_[m - 1];
    const std::size_t windows = n_ - m + 1;
    const unsigned g = static_cast<unsigned>(group.size());
    // per-series start shift: windows of a left-rotated series are the
    // circular windows starting `offset` later
    std::vector<std::size_t> shift_of(group.size(), 0);
    for (std::size_t gi = 0; gi < group.size(); ++gi)
      if (std::binary_search(rotated.begin(), rotated.end(), group[gi])) shift_of[gi] = offset;

    std::vector<Key> keys(windows);
    if (g == 1) {
      const auto& src = per_series[group[0]];
      const std::size_t shift = shift_of[0];
      for (std::size_t t = 0; t < windows; ++t) {
        std::size_t pos = t + shift;
        if (pos >= n_) pos -= n_;
        keys[t] = static_cast<Key>(src[pos]);
      }
    } else {
      // plane-major interleave: level-l cells are key prefixes of g*l bits
      for (std::size_t t = 0; t < windows; ++t) {
        Key k = 0;
        for (unsigned p = 0; p < L; ++p) {
          const unsigned shift = L - 1 - p;
          for (std::size_t gi = 0; gi < group.size(); ++gi) {
            std::size_t pos = t + shift_of[gi];
            if (pos >= n_) pos -= n_;
            k = (k << 1) | static_cast<Key>((per_series[group[gi]][pos] >> shift) & 1u);
          }
        }
        keys[t] = k;
      }
    }
    std::sort(keys.begin(), keys.end());
    return detail::entropies_by_level(keys, g, L, g * L);
  }

  std::vector<SumInfoTerm> terms_for_block_length(std::size_t m, const std::vector<IndexSet>& parts,
                                                  const IndexSet& all, const IndexSet& rotated,
                                                  std::size_t offset) const {
    const unsigned L = l_used_;
    std::vector<std::vector<double>> part_h;
    part_h.reserve(parts.size());
    for (const auto& part : parts)
      part_h.push_back(dispatch_entropies(m, part, rotated, offset));
    const std::vector<double> joint_h = dispatch_entropies(m, all, rotated, offset);

    std::vector<SumInfoTerm> terms;
    terms.reserve(L);
    const double m_scale = weight(m) / static_cast<double>(m);
    for (unsigned l = 1; l <= L; ++l) {
      double raw = -joint_h[l];
      for (const auto& h : part_h) raw += h[l];
      if (raw < -kTermSlack)
        throw IntegrityError("negative multi-information term: " + std::to_string(raw));
      if (raw < 0.0) raw = 0.0;
      // the 1/m, 1/l scalings keep each summand bounded by the series count
      if (raw / (static_cast<double>(m) * l) >
          static_cast<double>(all.size()) + kExactTol)
        throw IntegrityError("sum-information term exceeds its scaling bound");
      SumInfoTerm term;
      term.m = m;
      term.l = l;
      term.raw = raw;
      term.weighted = m_scale * (weight(l) / static_cast<double>(l)) * raw;
      terms.push_back(term);
    }
    return terms;
  }

  std::vector<double> dispatch_entropies(std::size_t m, const IndexSet& group,
                                          const IndexSet& rotated, std::size_t offset) const {
    if (group.size() * l_used_ <= 64)
      return group_entropies<std::uint64_t>(m, group, rotated, offset);
    return group_entropies<unsigned __int128>(m, group, rotated, offset);
  }

  const SeriesSet* series_;
  QuantizerSpec quant_;
  RunConfig cfg_;
  unsigned threads_;
  std::size_t n_ = 0;
  std::size_t m_used_ = 0;
  unsigned l_used_ = 0;
  // keys_[m-1][series][window]: level-L cell key of the m-block at `window`
  std::vector<std::vector<std::vector<std::uint32_t>>> keys_;
  mutable EstimatorBudget budget_;
};

// One-shot form of the estimator.
inline SumInfoBreakdown sum_information(const SeriesSet& s, const std::vector<IndexSet>& parts,
                                        const RunConfig& cfg, const QuantizerSpec& q) {
  if (s.length() < 2) throw UsageError("sum-information requires n >= 2");
  return SumInfoEvaluator(s, q, cfg).evaluate(parts);
}

// I.i.d.-mode decision rule: declare I(C;R) > I(C;R\{x}) when the estimated
// gap clears t'(n) = c * n^(-1/3).
inline bool thresholded_compare(const SeriesSet& s, const IndexSet& c, const IndexSet& r,
                                std::size_t x, const RunConfig& cfg, const QuantizerSpec& q) {
  const IndexSet cs = sorted_unique(c);
  const IndexSet rs = sorted_unique(r);
  if (!disjoint(cs, rs)) throw UsageError("C and R must be disjoint");
  if (!std::binary_search(rs.begin(), rs.end(), x)) throw UsageError("x must be a member of R");
  if (cs.empty()) return false;  // information against the empty set is 0
  SumInfoEvaluator eval(s, q, cfg);
  const double with_x = eval.value({cs, rs});
  const IndexSet reduced = set_minus(rs, x);
  const double without_x = reduced.empty() ? 0.0 : eval.value({cs, reduced});
  return with_x - without_x > cfg.threshold(s.length());
}

// Surrogate independence test: the observed statistic Î(C;R) is compared
// against its distribution under common circular shifts of the R block.
// A shift preserves the internal dependence structure of both blocks while
// destroying their alignment, which is the null of independence for
// stationary data. Returns true when dependence is detected.
inline bool shift_independence_test(const SeriesSet& s, const IndexSet& c, const IndexSet& r,
                                    const RunConfig& cfg, const QuantizerSpec& q,
                                    unsigned threads = 1) {
  const IndexSet cs = sorted_unique(c);
  const IndexSet rs = sorted_unique(r);
  if (cs.empty() || rs.empty()) throw UsageError("shift test requires nonempty C and R");
  if (!disjoint(cs, rs)) throw UsageError("C and R must be disjoint");
  const std::size_t n = s.length();
  if (n < 8) throw UsageError("shift test requires n >= 8");

  const SumInfoEvaluator eval(s, q, cfg, 1);
  const double observed = eval.value({cs, rs});

  // offsets drawn from a stream tied to (seed, query) so identical queries
  // get identical answers
  std::uint64_t query_tag = 1469598103934665603ULL;
  for (std::size_t idx : cs) query_tag = (query_tag ^ (idx + 1)) * 1099511628211ULL;
  query_tag = (query_tag ^ 0xABCDULL) * 1099511628211ULL;
  for (std::size_t idx : rs) query_tag = (query_tag ^ (idx + 1)) * 1099511628211ULL;
  SplitMix64 rng = derive_stream(cfg.seed, query_tag);

  const std::size_t lo = n / 4;
  const std::size_t hi = (3 * n) / 4;
  std::vector<std::size_t> offsets(cfg.permutation_count);
  for (auto& offset : offsets) offset = lo + rng.next_below(hi - lo + 1);

  std::vector<double> surrogate(cfg.permutation_count);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, cfg.permutation_count));
  if (workers <= 1) {
    for (std::size_t b = 0; b < cfg.permutation_count; ++b)
      surrogate[b] = eval.evaluate_shifted({cs, rs}, rs, offsets[b]).value;
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          while (true) {
            const std::size_t b = next.fetch_add(1);
            if (b >= cfg.permutation_count) break;
            surrogate[b] = eval.evaluate_shifted({cs, rs}, rs, offsets[b]).value;
          }
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  std::sort(surrogate.begin(), surrogate.end());
  const std::size_t idx = std::min<std::size_t>(
      cfg.permutation_count - 1,
      static_cast<std::size_t>(std::floor((1.0 - cfg.alpha) * cfg.permutation_count)));
  return observed > surrogate[idx];
}

// Deterministic byte-sequence compressor: returns the compressed length in
// bytes. Backends are selected by name in the CLI.
using Compressor = std::function<std::size_t(const std::vector<unsigned char>&)>;

inline Compressor zlib_compressor() {
  return [](const std::vector<unsigned char>& data) -> std::size_t {
    uLongf bound = compressBound(static_cast<uLong>(data.size()));
    std::vector<unsigned char> out(bound);
    const int rc = compress2(out.data(), &bound, data.data(), static_cast<uLong>(data.size()), 9);
    if (rc != Z_OK) throw Error("zlib compression failed (code " + std::to_string(rc) + ")");
    return static_cast<std::size_t>(bound);
  };
}

// LZ78 phrase-count code length: phrase i costs ceil(log2 i) bits for the
// back-reference plus 8 for the literal. No allocation-free tricks; this is
// the portable fallback backend.
inline Compressor lz78_compressor() {
  return [](const std::vector<unsigned char>& data) -> std::size_t {
    std::map<std::pair<std::size_t, unsigned char>, std::size_t> trie;
    std::size_t node = 0, phrases = 0;
    unsigned long long bits = 0;
    auto emit = [&](void) {
      ++phrases;
      unsigned ref_bits = 0;
      while ((std::size_t(1) << ref_bits) < phrases) ++ref_bits;
      bits += ref_bits + 8;
    };
    for (unsigned char byte : data) {
      const auto it = trie.find({node, byte});
      if (it != trie.end()) {
        node = it->second;
        continue;
      }
      emit();
      trie[{node, byte}] = phrases;  // phrase ids start at 1
      node = 0;
    }
    if (node != 0) emit();  // trailing partial phrase
    return static_cast<std::size_t>((bits + 7) / 8);
  };
}

inline Compressor make_compressor(const std::string& name) {
  if (name == "zlib") return zlib_compressor();
  if (name == "lz78") return lz78_compressor();
  throw UsageError("unknown compressor backend: " + name);
}

// Compression-based information-rate estimate in bits: sum of per-part
// compressed sizes minus the compressed size of the interleaved joint.
// A heuristic: may be negative, and misses dependence that carries no
// entropy rate.
inline double compression_sum_rate(const SeriesSet& s, const std::vector<IndexSet>& parts_in,
                                   const Compressor& compressor, const RunConfig& cfg,
                                   const QuantizerSpec& q) {
  std::vector<IndexSet> parts;
  IndexSet all;
  for (const auto& p : parts_in) {
    if (p.empty()) throw UsageError("compression estimate parts must be nonempty");
    parts.push_back(sorted_unique(p));
    for (std::size_t idx : parts.back()) {
      if (idx >= s.count()) throw UsageError("series index out of range");
      all.push_back(idx);
    }
  }
  if (sorted_unique(all).size() != all.size()) throw UsageError("parts overlap");
  if (parts.size() <= 1) return 0.0;
  std::sort(all.begin(), all.end());

  // quantize to a byte alphabet at level min(l_max, 8)
  const unsigned level = static_cast<unsigned>(std::min<std::size_t>(cfg.l_max, 8));
  const std::size_t n = s.length();
  std::vector<std::vector<unsigned char>> symbols(s.count());
  for (std::size_t si : all) {
    symbols[si].resize(n);
    const auto vals = s.values(si);
    for (std::size_t t = 0; t < n; ++t) {
      const double norm = q.normalize(si, vals[t]);
      symbols[si][t] = static_cast<unsigned char>(cell_index(std::span<const double>(&norm, 1), level));
    }
  }
  auto serialize = [&](const IndexSet& group) {
    std::vector<unsigned char> bytes;
    bytes.reserve(group.size() * n);
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t si : group) bytes.push_back(symbols[si][t]);
    return bytes;
  };

  double total_bits = 0.0;
  for (const auto& part : parts)
    total_bits += 8.0 * static_cast<double>(compressor(serialize(part)));
  total_bits -= 8.0 * static_cast<double>(compressor(serialize(all)));
  return total_bits;
}

}  // namespace indclust
