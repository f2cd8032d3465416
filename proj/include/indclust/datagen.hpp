// Seeded synthetic process generators: the parity construction, rotation
// (translation) processes and block-equicorrelated Gaussians. Every
// generator is a pure function of (parameters, seed) with one SplitMix64
// stream per series, so outputs are byte-identical across runs.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "indclust/common.hpp"
#include "indclust/core.hpp"
#include "indclust/rng.hpp"

namespace indclust {

// (sqrt(5)-1)/2. The double is rational, but its rotation period is
// astronomically long; adequate for n up to ~1e7.
inline constexpr double kGoldenRotation = 0.61803398874989484820;
// sqrt(2)-1, rationally independent of the golden rotation; used when two
// translation clusters must be jointly ergodic.
inline constexpr double kSilverRotation = 0.41421356237309504880;

struct GeneratedData {
  SeriesSet series;
  Partition ground_truth;
};

// Independent groups of binary series, i.i.d. in time; per time step each
// group is g-1 fair bits plus their XOR. Ground truth = one cluster per group.
inline GeneratedData gen_parity_series(const std::vector<std::size_t>& group_sizes, std::size_t n,
                                       std::uint64_t seed) {
  if (group_sizes.empty()) throw UsageError("need at least one group");
  for (std::size_t g : group_sizes)
    if (g < 2) throw UsageError("parity groups must have size >= 2");

  std::vector<std::vector<double>> data;
  std::vector<std::string> names;
  std::vector<IndexSet> clusters;
  std::size_t series_index = 0;
  for (std::size_t gi = 0; gi < group_sizes.size(); ++gi) {
    const std::size_t g = group_sizes[gi];
    IndexSet cluster;
    std::vector<std::vector<double>> group(g, std::vector<double>(n, 0.0));
    for (std::size_t b = 0; b + 1 < g; ++b) {
      SplitMix64 rng = derive_stream(seed, series_index + b);
      for (std::size_t t = 0; t < n; ++t) {
        const double bit = rng.next_bit() ? 1.0 : 0.0;
        group[b][t] = bit;
        group[g - 1][t] = group[g - 1][t] == bit ? 0.0 : 1.0;  // running XOR
      }
    }
    for (std::size_t b = 0; b < g; ++b) {
      cluster.push_back(series_index);
      const std::string base = "p" + std::to_string(gi + 1) + "_";
      names.push_back(b + 1 < g ? base + std::to_string(b + 1) : base + "x");
      data.push_back(std::move(group[b]));
      ++series_index;
    }
    clusters.push_back(std::move(cluster));
  }
  return {SeriesSet(std::move(data), std::move(names)),
          Partition::from_clusters(clusters, series_index)};
}

namespace detail {

// Rotation orbit thresholded at 1/2, starting from an explicit phase.
// Optional per-step jitter spread implements the perturbed variant.
inline std::vector<double> rotation_series(double alpha_rot, std::size_t n, double r0,
                                           double epsilon, SplitMix64* rng) {
  std::vector<double> out(n);
  double r = r0;
  for (std::size_t t = 0; t < n; ++t) {
    double step = alpha_rot;
    if (epsilon > 0.0 && rng != nullptr) step += (2.0 * rng->next_double() - 1.0) * epsilon;
    r += step;
    r -= std::floor(r);
    out[t] = r > 0.5 ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace detail

// Binary translation process: r_0 ~ U[0,1], r_i = (r_{i-1} + alpha) mod 1,
// X_i = 1{r_i > 1/2}. Stationary ergodic with zero entropy rate.
inline std::vector<double> gen_translation(double alpha_rot, std::size_t n, std::uint64_t seed) {
  if (!(alpha_rot > 0.0 && alpha_rot < 1.0)) throw UsageError("alpha_rot must be in (0, 1)");
  if (n == 0) throw UsageError("n must be >= 1");
  SplitMix64 rng = derive_stream(seed, 0);
  return detail::rotation_series(alpha_rot, n, rng.next_double(), 0.0, nullptr);
}

// As gen_translation but the hidden state advances by alpha + u_i with
// u_i i.i.d. uniform on [-epsilon, epsilon]; epsilon = 0 reproduces
// gen_translation exactly for the same seed.
inline std::vector<double> gen_perturbed_translation(double alpha_rot, double epsilon,
                                                     std::size_t n, std::uint64_t seed) {
  if (!(alpha_rot > 0.0 && alpha_rot < 1.0)) throw UsageError("alpha_rot must be in (0, 1)");
  if (epsilon < 0.0) throw UsageError("epsilon must be >= 0");
  if (n == 0) throw UsageError("n must be >= 1");
  SplitMix64 rng = derive_stream(seed, 0);
  const double r0 = rng.next_double();
  return detail::rotation_series(alpha_rot, n, r0, epsilon, &rng);
}

enum class OffsetMode {
  kFixed,        // second phase = first phase + delta: a dependent pair
  kIndependent,  // independent second phase, same angle: the non-ergodic pair
};

// Two translation processes with a shared rotation angle. Fixed mode couples
// the hidden phases at a constant offset (one dependent cluster). Independent
// mode draws both phases independently: the processes are independent by
// construction, but the joint process is NOT ergodic — its ergodic components
// are dependent fixed-offset pairs, so empirical statistics behave like a
// dependent pair with a random offset. That is the impossibility construction,
// kept here deliberately; use two different angles (e.g. kGoldenRotation and
// kSilverRotation) when a statistically independent, jointly ergodic pair is
// needed.
inline GeneratedData gen_translation_pair(double alpha_rot, OffsetMode mode, double delta,
                                          std::size_t n, std::uint64_t seed) {
  if (!(alpha_rot > 0.0 && alpha_rot < 1.0)) throw UsageError("alpha_rot must be in (0, 1)");
  if (n == 0) throw UsageError("n must be >= 1");
  SplitMix64 rng0 = derive_stream(seed, 0);
  SplitMix64 rng1 = derive_stream(seed, 1);
  const double r0 = rng0.next_double();
  double r1;
  if (mode == OffsetMode::kFixed) {
    r1 = r0 + delta;
    r1 -= std::floor(r1);
  } else {
    r1 = rng1.next_double();
  }
  std::vector<std::vector<double>> data;
  data.push_back(detail::rotation_series(alpha_rot, n, r0, 0.0, nullptr));
  data.push_back(detail::rotation_series(alpha_rot, n, r1, 0.0, nullptr));
  std::vector<IndexSet> truth = mode == OffsetMode::kFixed
                                    ? std::vector<IndexSet>{{0, 1}}
                                    : std::vector<IndexSet>{{0}, {1}};
  return {SeriesSet(std::move(data), {"t1", "t2"}), Partition::from_clusters(truth, 2)};
}

// I.i.d.-in-time draws from a block-diagonal equicorrelation Gaussian;
// ground truth = the blocks (singletons when rho = 0).
inline GeneratedData gen_gaussian_clusters(const std::vector<std::size_t>& cluster_sizes,
                                           double rho_within, std::size_t n, std::uint64_t seed) {
  if (cluster_sizes.empty()) throw UsageError("need at least one cluster");
  if (n == 0) throw UsageError("n must be >= 1");
  for (std::size_t g : cluster_sizes) {
    if (g == 0) throw UsageError("cluster sizes must be >= 1");
    if (g > 1 && !(rho_within > -1.0 / static_cast<double>(g - 1) && rho_within < 1.0))
      throw UsageError("rho_within outside the positive-definite range for cluster size " +
                       std::to_string(g));
  }

  std::size_t total = 0;
  for (std::size_t g : cluster_sizes) total += g;
  std::vector<std::vector<double>> data(total, std::vector<double>(n));
  std::vector<std::string> names(total);
  std::vector<IndexSet> clusters;

  std::size_t offset = 0;
  for (std::size_t ci = 0; ci < cluster_sizes.size(); ++ci) {
    const std::size_t g = cluster_sizes[ci];
    // Cholesky factor of the g x g equicorrelation matrix
    std::vector<std::vector<double>> chol(g, std::vector<double>(g, 0.0));
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double target = i == j ? 1.0 : rho_within;
        double acc = target;
        for (std::size_t t = 0; t < j; ++t) acc -= chol[i][t] * chol[j][t];
        chol[i][j] = i == j ? std::sqrt(acc) : acc / chol[j][j];
      }
    }
    IndexSet cluster;
    std::vector<SplitMix64> streams;
    for (std::size_t i = 0; i < g; ++i) {
      streams.push_back(derive_stream(seed, offset + i));
      cluster.push_back(offset + i);
      names[offset + i] = "g" + std::to_string(ci + 1) + "_" + std::to_string(i + 1);
    }
    std::vector<double> z(g);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < g; ++i) z[i] = streams[i].next_gaussian();
      for (std::size_t i = 0; i < g; ++i) {
        double x = 0.0;
        for (std::size_t j = 0; j <= i; ++j) x += chol[i][j] * z[j];
        data[offset + i][t] = x;
      }
    }
    clusters.push_back(std::move(cluster));
    offset += g;
  }

  if (rho_within == 0.0) {
    clusters.clear();
    for (std::size_t i = 0; i < total; ++i) clusters.push_back({i});
  }
  return {SeriesSet(std::move(data), std::move(names)),
          Partition::from_clusters(clusters, total)};
}

enum class ProcessKind {
  kParity,
  kTranslation,
  kTranslationPair,
  kPerturbedTranslation,
  kGaussianClusters,
};

// Declarative generator description; the CLI's config format mirrors this.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::kParity;
  std::vector<std::size_t> group_sizes;  // parity groups / gaussian clusters
  double alpha_rot = kGoldenRotation;
  OffsetMode offset_mode = OffsetMode::kFixed;
  double delta = 0.1;       // fixed phase offset (translation pair)
  double epsilon = 0.0;     // jitter spread (perturbed translation)
  double rho_within = 0.0;  // within-cluster correlation (gaussian)
  std::size_t n = 0;
  std::uint64_t seed = 0;

  GeneratedData generate() const {
    switch (kind) {
      case ProcessKind::kParity:
        return gen_parity_series(group_sizes, n, seed);
      case ProcessKind::kTranslation: {
        std::vector<std::vector<double>> data{gen_translation(alpha_rot, n, seed)};
        return {SeriesSet(std::move(data), {"t1"}), Partition::single_cluster(1)};
      }
      case ProcessKind::kTranslationPair:
        return gen_translation_pair(alpha_rot, offset_mode, delta, n, seed);
      case ProcessKind::kPerturbedTranslation: {
        std::vector<std::vector<double>> data{
            gen_perturbed_translation(alpha_rot, epsilon, n, seed)};
        return {SeriesSet(std::move(data), {"t1"}), Partition::single_cluster(1)};
      }
      case ProcessKind::kGaussianClusters:
        return gen_gaussian_clusters(group_sizes, rho_within, n, seed);
    }
    throw UsageError("unknown process kind");
  }
};

}  // namespace indclust
