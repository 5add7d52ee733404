#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "replicheck/errors.hpp"

namespace replicheck {

namespace detail {

inline std::string trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

// One measured experimental unit.
struct Observation {
  double outcome = 0.0;
  std::string treatment;
  std::string batch;
  bool excluded = false;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// An experiment table. Labels are trimmed on construction and compared
// case-sensitively afterwards. Excluded rows are kept so reports can say how
// many were dropped.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::string name, std::vector<Observation> observations)
      : name_(std::move(name)), observations_(std::move(observations)) {
    for (std::size_t i = 0; i < observations_.size(); ++i) {
      auto& obs = observations_[i];
      obs.treatment = detail::trim(obs.treatment);
      obs.batch = detail::trim(obs.batch);
      if (!std::isfinite(obs.outcome))
        throw DesignError("observation " + std::to_string(i + 1) +
                          ": outcome is not finite");
      if (obs.treatment.empty() || obs.batch.empty())
        throw DesignError("observation " + std::to_string(i + 1) +
                          ": treatment and batch labels must be non-empty");
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<Observation>& observations() const noexcept {
    return observations_;
  }
  std::size_t size() const noexcept { return observations_.size(); }

  std::size_t included_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(observations_.begin(), observations_.end(),
                      [](const Observation& o) { return !o.excluded; }));
  }
  std::size_t excluded_count() const noexcept {
    return size() - included_count();
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::string name_;
  std::vector<Observation> observations_;
};

// Counts of a treatment x batch layout over the non-excluded rows.
// Levels are sorted bytewise; index 0 of each factor is the reference level.
struct DesignSummary {
  int t = 0;
  int b = 0;
  int n = 0;
  int n_excluded = 0;
  std::vector<std::string> treatment_levels;
  std::vector<std::string> batch_levels;
  std::vector<std::vector<int>> cell_counts;  // [treatment][batch]
  bool balanced = false;
  bool fully_crossed = false;
  bool genuine_replication = false;

  int min_cell_count() const {
    int m = cell_counts.empty() ? 0 : cell_counts[0][0];
    for (const auto& row : cell_counts)
      for (int c : row) m = std::min(m, c);
    return m;
  }

  friend bool operator==(const DesignSummary&, const DesignSummary&) = default;
};

inline DesignSummary summarize_design(const Dataset& dataset) {
  std::map<std::string, int> treatments;
  std::map<std::string, int> batches;
  for (const auto& obs : dataset.observations()) {
    if (obs.excluded) continue;
    treatments.emplace(obs.treatment, 0);
    batches.emplace(obs.batch, 0);
  }
  if (treatments.empty())
    throw DesignError("dataset '" + dataset.name() +
                      "' has no non-excluded observations");
  if (treatments.size() < 2)
    throw DesignError("at least 2 treatment levels are required, found " +
                      std::to_string(treatments.size()));
  if (batches.size() < 2)
    throw DesignError("at least 2 batch levels are required, found " +
                      std::to_string(batches.size()));

  DesignSummary s;
  for (auto& [label, index] : treatments) {
    index = static_cast<int>(s.treatment_levels.size());
    s.treatment_levels.push_back(label);
  }
  for (auto& [label, index] : batches) {
    index = static_cast<int>(s.batch_levels.size());
    s.batch_levels.push_back(label);
  }
  s.t = static_cast<int>(s.treatment_levels.size());
  s.b = static_cast<int>(s.batch_levels.size());
  s.cell_counts.assign(s.t, std::vector<int>(s.b, 0));
  for (const auto& obs : dataset.observations()) {
    if (obs.excluded) {
      ++s.n_excluded;
      continue;
    }
    ++s.cell_counts[treatments.at(obs.treatment)][batches.at(obs.batch)];
    ++s.n;
  }
  const int first = s.cell_counts[0][0];
  s.balanced = true;
  s.fully_crossed = true;
  s.genuine_replication = true;
  for (const auto& row : s.cell_counts) {
    for (int c : row) {
      s.balanced = s.balanced && c == first;
      s.fully_crossed = s.fully_crossed && c >= 1;
      s.genuine_replication = s.genuine_replication && c >= 2;
    }
  }
  s.balanced = s.balanced && s.fully_crossed;
  return s;
}

// ---------------------------------------------------------------------------
// GRBD validation

enum class Severity { ok, warning, failure };

struct Check {
  std::string name;
  Severity severity = Severity::ok;
  std::string message;

  bool passed() const noexcept { return severity != Severity::failure; }
  friend bool operator==(const Check&, const Check&) = default;
};

struct ValidationReport {
  std::vector<Check> checks;
  bool overall = true;

  const Check* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  friend bool operator==(const ValidationReport&,
                         const ValidationReport&) = default;
};

namespace check_name {
inline constexpr std::string_view minimum_levels = "minimum_levels";
inline constexpr std::string_view crossed = "crossed";
inline constexpr std::string_view genuine_replication = "genuine_replication";
inline constexpr std::string_view balance = "balance";
}  // namespace check_name

namespace detail {

inline std::string list_cells(const DesignSummary& s, int below) {
  std::string out;
  for (int i = 0; i < s.t; ++i) {
    for (int j = 0; j < s.b; ++j) {
      if (s.cell_counts[i][j] >= below) continue;
      if (!out.empty()) out += ", ";
      out += s.treatment_levels[i] + "/" + s.batch_levels[j] + " (n=" +
             std::to_string(s.cell_counts[i][j]) + ")";
    }
  }
  return out;
}

}  // namespace detail

// Balance is reported as a warning only; crossing and genuine replication
// decide the overall result.
inline ValidationReport validate_grbd(const DesignSummary& s) {
  ValidationReport report;
  auto add = [&](std::string_view name, Severity sev, std::string msg) {
    report.checks.push_back({std::string(name), sev, std::move(msg)});
  };

  if (s.t >= 2 && s.b >= 2)
    add(check_name::minimum_levels, Severity::ok,
        std::to_string(s.t) + " treatment levels, " + std::to_string(s.b) +
            " batch levels");
  else
    add(check_name::minimum_levels, Severity::failure,
        "need at least 2 treatment and 2 batch levels");

  if (s.fully_crossed)
    add(check_name::crossed, Severity::ok,
        "every treatment is present in every batch");
  else
    add(check_name::crossed, Severity::failure,
        "treatment and batch are not crossed; empty cells: " +
            detail::list_cells(s, 1));

  if (s.genuine_replication)
    add(check_name::genuine_replication, Severity::ok,
        "every treatment x batch cell has at least 2 replicates");
  else
    add(check_name::genuine_replication, Severity::failure,
        "genuine replication missing, the treatment x batch interaction is "
        "untestable; cells with fewer than 2 replicates: " +
            detail::list_cells(s, 2));

  if (s.balanced) {
    add(check_name::balance, Severity::ok,
        "balanced, " + std::to_string(s.cell_counts[0][0]) + " per cell");
  } else {
    int lo = s.cell_counts.empty() ? 0 : s.cell_counts[0][0];
    int hi = lo;
    for (const auto& row : s.cell_counts)
      for (int c : row) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    add(check_name::balance, Severity::warning,
        "unbalanced design, cell sizes range " + std::to_string(lo) + " to " +
            std::to_string(hi) + "; sequential sums of squares depend on term order");
  }

  report.overall = std::all_of(report.checks.begin(), report.checks.end(),
                               [](const Check& c) { return c.passed(); });
  return report;
}

// ---------------------------------------------------------------------------
// Replication taxonomy

enum class Independence { full, partial };
enum class Timing { sequential, staggered, parallel };

struct ReplicationClass {
  Independence independence = Independence::full;
  Timing timing = Timing::sequential;
  std::string label;
  char figure_panel = 'A';

  friend bool operator==(const ReplicationClass&,
                         const ReplicationClass&) = default;
};

inline std::string_view to_string(Independence i) noexcept {
  return i == Independence::full ? "full" : "partial";
}

inline std::string_view to_string(Timing t) noexcept {
  switch (t) {
    case Timing::sequential: return "sequential";
    case Timing::staggered: return "staggered";
    case Timing::parallel: return "parallel";
  }
  return "sequential";
}

inline Independence parse_independence(std::string_view s) {
  if (s == "full" || s == "independent") return Independence::full;
  if (s == "partial" || s == "partially-independent")
    return Independence::partial;
  throw ConfigError("unknown independence '" + std::string(s) +
                    "' (expected full or partial)");
}

inline Timing parse_timing(std::string_view s) {
  if (s == "sequential") return Timing::sequential;
  if (s == "staggered") return Timing::staggered;
  if (s == "parallel") return Timing::parallel;
  throw ConfigError("unknown timing '" + std::string(s) +
                    "' (expected sequential, staggered or parallel)");
}

inline ReplicationClass classify_replication(Independence independence,
                                             Timing timing) {
  static constexpr std::array<char, 3> full_panels{'A', 'E', 'C'};
  static constexpr std::array<char, 3> partial_panels{'B', 'F', 'D'};
  const auto k = static_cast<std::size_t>(timing);
  ReplicationClass c;
  c.independence = independence;
  c.timing = timing;
  c.figure_panel = independence == Independence::full ? full_panels[k]
                                                       : partial_panels[k];
  c.label = std::string(independence == Independence::full
                            ? "independent "
                            : "partially independent ") +
            std::string(to_string(timing));
  return c;
}

}  // namespace replicheck
