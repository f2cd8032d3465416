// Nested dyadic quantization of m-blocks into 2^l cells. Level l+1 cells
// refine level-l cells (the level-l index is the level-(l+1) index without
// its last bit), and as l grows the family generates the Borel sigma-algebra
// of the block space. Bits are assigned round-robin across the m coordinates.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "indclust/common.hpp"
#include "indclust/core.hpp"

namespace indclust {

// Per-series affine normalization onto [0,1]; out-of-range values clamp to
// the boundary at predict time.
struct QuantizerSpec {
  std::vector<double> lo;
  std::vector<double> hi;

  double normalize(std::size_t series, double v) const {
    const double t = (v - lo[series]) / (hi[series] - lo[series]);
    return std::clamp(t, 0.0, 1.0);
  }
};

// (lo, hi) = sample (min, max); a constant series gets hi = lo + 1 so the
// map stays well defined.
inline QuantizerSpec fit_normalizer(const SeriesSet& s) {
  QuantizerSpec spec;
  spec.lo.resize(s.count());
  spec.hi.resize(s.count());
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto vals = s.values(i);
    double lo = vals[0], hi = vals[0];
    for (double v : vals) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) hi = lo + 1.0;
    spec.lo[i] = lo;
    spec.hi[i] = hi;
  }
  return spec;
}

// First `count` binary-expansion bits of v in [0,1], packed MSB-first.
// v = 1 maps to all ones (top cell closed on the right).
inline std::uint64_t value_bits(double v, unsigned count) {
  v = std::clamp(v, 0.0, 1.0);
  std::uint64_t bits = 0;
  for (unsigned j = 0; j < count; ++j) {
    v *= 2.0;
    const bool b = v >= 1.0;
    if (b) v -= 1.0;
    bits = (bits << 1) | static_cast<std::uint64_t>(b);
  }
  return bits;
}

// Cell of the level-l partition containing a normalized m-block: bit j of
// the index (MSB first, j = 1..l) is expansion bit ceil(j/m) of coordinate
// ((j-1) mod m) + 1. Level 0 is the single whole-space cell.
inline std::uint64_t cell_index(std::span<const double> block, unsigned level) {
  if (block.empty()) throw UsageError("cell_index requires a nonempty block");
  if (level > 63) throw UsageError("quantization level too large");
  const std::size_t m = block.size();
  std::vector<double> rest(block.begin(), block.end());
  for (auto& v : rest) v = std::clamp(v, 0.0, 1.0);
  std::uint64_t index = 0;
  for (unsigned j = 0; j < level; ++j) {
    double& v = rest[j % m];
    v *= 2.0;
    const bool b = v >= 1.0;
    if (b) v -= 1.0;
    index = (index << 1) | static_cast<std::uint64_t>(b);
  }
  return index;
}

}  // namespace indclust
