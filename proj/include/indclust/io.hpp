// File formats: the CSV sample layout (one column per series, header row of
// names), the finite-joint text format used by the oracle mode, and JSON
// builders for result artifacts.
#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "indclust/common.hpp"
#include "indclust/core.hpp"
#include "indclust/datagen.hpp"
#include "indclust/finite_dist.hpp"

namespace indclust {

inline void write_csv(std::ostream& out, const SeriesSet& s) {
  for (std::size_t i = 0; i < s.count(); ++i) {
    if (i) out << ',';
    out << s.name(i);
  }
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < s.length(); ++t) {
    for (std::size_t i = 0; i < s.count(); ++i) {
      if (i) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", s.values(i)[t]);
      out << buf;
    }
    out << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  for (auto& f : fields) {
    const auto begin = f.find_first_not_of(" \t");
    const auto end = f.find_last_not_of(" \t");
    f = begin == std::string::npos ? std::string() : f.substr(begin, end - begin + 1);
  }
  return fields;
}

}  // namespace detail

// Strict CSV reader: header row of names, then one row per time index with
// one numeric column per series. Errors carry the offending line number.
inline SeriesSet read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("CSV is empty");
  ++line_no;
  const std::vector<std::string> names = detail::split_csv_line(line);
  if (names.empty() || names.front().empty())
    throw DataError("CSV line 1: missing header row of series names");
  std::vector<std::vector<double>> columns(names.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != names.size())
      throw DataError("CSV line " + std::to_string(line_no) + ": expected " +
                      std::to_string(names.size()) + " columns, found " +
                      std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v = 0.0;
      const char* first = fields[i].data();
      const char* last = first + fields[i].size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last)
        throw DataError("CSV line " + std::to_string(line_no) + ": column " +
                        std::to_string(i + 1) + " is not numeric: '" + fields[i] + "'");
      columns[i].push_back(v);
    }
  }
  if (columns.front().empty()) throw DataError("CSV contains a header but no data rows");
  return SeriesSet(std::move(columns), names);
}

// Finite-joint text format: a line of alphabet sizes, then one line per
// outcome listing the outcome tuple (0-based) and its probability; unlisted
// outcomes have probability zero. '#' starts a comment.
inline FiniteJoint read_finite_joint(std::istream& in,
                                     std::size_t capacity = FiniteJoint::kDefaultCapacity) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> pmf;
  std::vector<bool> seen;
  std::vector<std::size_t> strides;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    if (sizes.empty()) {
      std::size_t v;
      while (tokens >> v) {
        if (v == 0) throw DataError("line " + std::to_string(line_no) + ": alphabet size 0");
        sizes.push_back(v);
      }
      if (!tokens.eof())
        throw DataError("line " + std::to_string(line_no) + ": malformed alphabet sizes");
      if (sizes.empty()) continue;  // blank or comment-only line before the header
      std::size_t total = 1;
      for (std::size_t s : sizes) {
        if (total > capacity / s) throw CapacityError("product alphabet exceeds capacity cap");
        total *= s;
      }
      pmf.assign(total, 0.0);
      seen.assign(total, false);
      strides.assign(sizes.size(), 1);
      for (std::size_t v2 = sizes.size() - 1; v2-- > 0;)
        strides[v2] = strides[v2 + 1] * sizes[v2 + 1];
      continue;
    }
    std::vector<double> numbers;
    double v;
    while (tokens >> v) numbers.push_back(v);
    if (numbers.empty()) continue;
    if (numbers.size() != sizes.size() + 1)
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(sizes.size()) + " outcome indices and a probability");
    std::size_t index = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const double raw = numbers[i];
      const std::size_t digit = static_cast<std::size_t>(raw);
      if (raw < 0 || static_cast<double>(digit) != raw || digit >= sizes[i])
        throw DataError("line " + std::to_string(line_no) + ": outcome index " +
                        std::to_string(i + 1) + " out of range");
      index += digit * strides[i];
    }
    if (seen[index]) throw DataError("line " + std::to_string(line_no) + ": duplicate outcome");
    seen[index] = true;
    pmf[index] = numbers.back();
  }
  if (sizes.empty()) throw DataError("finite joint file has no alphabet-size line");
  return FiniteJoint(std::move(sizes), std::move(pmf), capacity);
}

inline void write_finite_joint(std::ostream& out, const FiniteJoint& d) {
  for (std::size_t i = 0; i < d.variable_count(); ++i) {
    if (i) out << ' ';
    out << d.alphabet_size(i);
  }
  out << '\n';
  std::vector<std::size_t> digit(d.variable_count(), 0);
  char buf[64];
  for (std::size_t idx = 0; idx < d.table_size(); ++idx) {
    if (d.pmf()[idx] != 0.0) {
      for (std::size_t i = 0; i < d.variable_count(); ++i) out << digit[i] << ' ';
      std::snprintf(buf, sizeof(buf), "%.17g", d.pmf()[idx]);
      out << buf << '\n';
    }
    for (std::size_t i = d.variable_count(); i-- > 0;) {
      if (++digit[i] < d.alphabet_size(i)) break;
      digit[i] = 0;
    }
  }
}

inline nlohmann::json partition_json(const Partition& p, const std::vector<std::string>& names) {
  const Partition canon = canonicalize(p);
  nlohmann::json clusters = nlohmann::json::array();
  nlohmann::json member_names = nlohmann::json::array();
  for (const IndexSet& cluster : canon.clusters()) {
    nlohmann::json ids = nlohmann::json::array();
    nlohmann::json labels = nlohmann::json::array();
    for (std::size_t idx : cluster) {
      ids.push_back(idx + 1);  // 1-based in artifacts
      if (idx < names.size()) labels.push_back(names[idx]);
    }
    clusters.push_back(ids);
    member_names.push_back(labels);
  }
  nlohmann::json assignment = nlohmann::json::array();
  for (std::size_t i = 0; i < canon.size(); ++i) assignment.push_back(canon.label_of(i) + 1);
  return nlohmann::json{{"k", canon.cluster_count()},
                        {"assignment", assignment},
                        {"clusters", clusters},
                        {"cluster_names", member_names}};
}

inline std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::kParity: return "parity";
    case ProcessKind::kTranslation: return "translation";
    case ProcessKind::kTranslationPair: return "translation-pair";
    case ProcessKind::kPerturbedTranslation: return "perturbed-translation";
    case ProcessKind::kGaussianClusters: return "gaussian-clusters";
  }
  return "unknown";
}

inline ProcessKind parse_process_kind(const std::string& name) {
  if (name == "parity") return ProcessKind::kParity;
  if (name == "translation") return ProcessKind::kTranslation;
  if (name == "translation-pair") return ProcessKind::kTranslationPair;
  if (name == "perturbed-translation") return ProcessKind::kPerturbedTranslation;
  if (name == "gaussian-clusters") return ProcessKind::kGaussianClusters;
  throw UsageError("unknown process kind: " + name);
}

inline nlohmann::json process_spec_json(const ProcessSpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind)}, {"n", spec.n}, {"seed", spec.seed}};
  switch (spec.kind) {
    case ProcessKind::kParity:
      j["group_sizes"] = spec.group_sizes;
      break;
    case ProcessKind::kTranslation:
      j["alpha_rot"] = spec.alpha_rot;
      break;
    case ProcessKind::kTranslationPair:
      j["alpha_rot"] = spec.alpha_rot;
      j["offset_mode"] = spec.offset_mode == OffsetMode::kFixed ? "fixed" : "independent";
      if (spec.offset_mode == OffsetMode::kFixed) j["delta"] = spec.delta;
      break;
    case ProcessKind::kPerturbedTranslation:
      j["alpha_rot"] = spec.alpha_rot;
      j["epsilon"] = spec.epsilon;
      break;
    case ProcessKind::kGaussianClusters:
      j["cluster_sizes"] = spec.group_sizes;
      j["rho_within"] = spec.rho_within;
      break;
  }
  return j;
}

}  // namespace indclust
