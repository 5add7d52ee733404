#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "replicheck/anova.hpp"
#include "replicheck/domain.hpp"
#include "replicheck/errors.hpp"
#include "replicheck/linmodel.hpp"
#include "replicheck/rng.hpp"
#include "replicheck/special.hpp"

namespace replicheck {

inline constexpr std::uint64_t default_seed = 20240601;

// Generative parameters for a balanced treatment x batch experiment with
// grand mean 0: y = tau_i + beta_j + (tau beta)_ij + e, where the
// interaction is drawn once per cell from Normal(0, interaction_sd) and
// e ~ Normal(0, sigma).
struct SimParams {
  int t = 2;
  int b = 3;
  int r = 10;
  std::vector<double> treatment_effects{0.0, 0.0};
  std::vector<double> batch_effects{0.0, 0.0, 0.0};
  double interaction_sd = 0.0;
  double sigma = 1.0;
  std::uint64_t seed = default_seed;

  void validate() const {
    if (t < 2 || b < 2) throw ConfigError("simulation needs t >= 2 and b >= 2");
    if (r < 1) throw ConfigError("simulation needs r >= 1");
    if (static_cast<int>(treatment_effects.size()) != t)
      throw ConfigError("expected " + std::to_string(t) +
                        " treatment effects, got " +
                        std::to_string(treatment_effects.size()));
    if (static_cast<int>(batch_effects.size()) != b)
      throw ConfigError("expected " + std::to_string(b) + " batch effects, got " +
                        std::to_string(batch_effects.size()));
    double sum = 0.0, abs_sum = 0.0;
    for (double v : treatment_effects) {
      if (!std::isfinite(v)) throw ConfigError("treatment effects must be finite");
      sum += v;
      abs_sum += std::fabs(v);
    }
    for (double v : batch_effects)
      if (!std::isfinite(v)) throw ConfigError("batch effects must be finite");
    if (std::fabs(sum) > 1e-9 * std::max(1.0, abs_sum))
      throw ConfigError("treatment effects must sum to zero");
    if (!(interaction_sd >= 0.0) || !std::isfinite(interaction_sd))
      throw ConfigError("interaction_sd must be >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw ConfigError("sigma must be > 0");
  }
};

namespace detail {

inline std::string level_name(char prefix, int index, int count) {
  const auto width = std::to_string(count).size();
  auto digits = std::to_string(index + 1);
  digits.insert(0, width - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

}  // namespace detail

// Balanced data, rows ordered by batch, then treatment, then replicate.
// Interaction draws come first (cell order treatment-major), then the errors
// in row order. Labels are T1..Tt and B1..Bb (zero-padded for >= 10 levels).
inline Dataset generate_grbd(const SimParams& params) {
  params.validate();
  Rng rng(params.seed);
  std::vector<double> cell_effect(static_cast<std::size_t>(params.t * params.b));
  for (int i = 0; i < params.t; ++i)
    for (int j = 0; j < params.b; ++j)
      cell_effect[static_cast<std::size_t>(i * params.b + j)] =
          params.interaction_sd > 0.0 ? params.interaction_sd * rng.normal() : 0.0;

  std::vector<Observation> rows;
  rows.reserve(static_cast<std::size_t>(params.t * params.b * params.r));
  for (int j = 0; j < params.b; ++j) {
    const auto batch = detail::level_name('B', j, params.b);
    for (int i = 0; i < params.t; ++i) {
      const auto treatment = detail::level_name('T', i, params.t);
      const double mean = params.treatment_effects[i] + params.batch_effects[j] +
                          cell_effect[static_cast<std::size_t>(i * params.b + j)];
      for (int k = 0; k < params.r; ++k)
        rows.push_back({mean + params.sigma * rng.normal(), treatment, batch, false});
    }
  }
  return Dataset("simulated(seed=" + std::to_string(params.seed) + ")",
                 std::move(rows));
}

enum class PermutationStatistic { eq1_treatment, interaction };

namespace detail {

// F statistic of the chosen test, or NaN when MS(Error) is degenerate.
inline double grbd_statistic(const CodedData& data, PermutationStatistic stat) {
  const auto d = sequential_ss_coded(data, TermOrder::batch_first);
  if (d.df_error < 1 || d.error_is_degenerate())
    return std::numeric_limits<double>::quiet_NaN();
  const double ms_error = d.ss_error / d.df_error;
  const auto& term =
      d.effect(stat == PermutationStatistic::eq1_treatment ? Term::treatment
                                                           : Term::interaction);
  return (term.ss / term.df) / ms_error;
}

}  // namespace detail

// Permutes treatment labels within each batch, which keeps batch structure
// and cell counts fixed. p = (1 + #{F_perm >= F_obs}) / (n_perm + 1).
// Constant outcomes give p = 1.
inline Probability permutation_pvalue(const Dataset& dataset,
                                      PermutationStatistic statistic, int n_perm,
                                      std::uint64_t seed) {
  if (n_perm < 99) throw ConfigError("n_perm must be at least 99");
  const auto summary = summarize_design(dataset);
  if (!summary.fully_crossed)
    throw DesignError("treatment and batch are not fully crossed");
  CodedData data = code_dataset(dataset);
  const double observed = detail::grbd_statistic(data, statistic);
  if (std::isnan(observed)) return Probability(1.0);

  std::vector<std::vector<std::size_t>> rows_of_batch(static_cast<std::size_t>(data.b));
  for (std::size_t r = 0; r < data.size(); ++r)
    rows_of_batch[static_cast<std::size_t>(data.batch[r])].push_back(r);

  // Relative slack so ties produced by rounding count as >=.
  const double threshold = observed * (1.0 - 1e-12);
  const std::vector<int> original = data.treatment;
  Rng rng(seed);
  std::vector<int> labels;
  int at_least = 0;
  for (int p = 0; p < n_perm; ++p) {
    for (const auto& rows : rows_of_batch) {
      labels.clear();
      for (auto r : rows) labels.push_back(original[r]);
      rng.shuffle(labels.begin(), labels.end());
      for (std::size_t k = 0; k < rows.size(); ++k) data.treatment[rows[k]] = labels[k];
    }
    const double f = detail::grbd_statistic(data, statistic);
    if (std::isnan(f) || f >= threshold) ++at_least;
  }
  return Probability((1.0 + at_least) / (n_perm + 1.0));
}

struct RejectionRate {
  double rate = 0.0;
  double monte_carlo_se = 0.0;  // sqrt(rate (1 - rate) / n_sims)

  friend bool operator==(const RejectionRate&, const RejectionRate&) = default;
};

struct CalibrationResult {
  int n_sims = 0;
  double alpha = 0.05;
  RejectionRate eq1;          // treatment vs MS(Error)
  RejectionRate eq2;          // treatment vs MS(Treatment x Batch)
  RejectionRate interaction;  // interaction vs MS(Error)

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

// Replicate k is generated from substream_seed(params.seed, k), so the result
// does not depend on the number of threads.
inline CalibrationResult calibration_study(const SimParams& params, int n_sims,
                                           double alpha, unsigned threads = 1) {
  params.validate();
  if (n_sims < 100) throw ConfigError("n_sims must be at least 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (params.r < 2)
    throw ConfigError("calibration needs r >= 2 for the interaction test");

  struct Tally {
    int eq1 = 0, eq2 = 0, interaction = 0;
  };
  auto run_range = [&](int begin, int end, Tally& tally) {
    SimParams p = params;
    for (int k = begin; k < end; ++k) {
      p.seed = substream_seed(params.seed, static_cast<std::uint64_t>(k));
      const auto table = grbd_anova(generate_grbd(p));
      const auto& trt = table.row(AnovaTerm::treatment);
      const auto& inter = table.row(AnovaTerm::interaction);
      tally.eq1 += detail::rejects(trt.vs_error, alpha) ? 1 : 0;
      tally.eq2 += detail::rejects(trt.vs_interaction, alpha) ? 1 : 0;
      tally.interaction += detail::rejects(inter.vs_error, alpha) ? 1 : 0;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_sims)));
  std::vector<Tally> tallies(workers);
  std::vector<std::exception_ptr> failures(workers);
  if (workers == 1) {
    run_range(0, n_sims, tallies[0]);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (n_sims + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(w) * chunk;
      const int end = std::min(n_sims, begin + chunk);
      pool.emplace_back([&, begin, end, w] {
        try {
          run_range(begin, end, tallies[w]);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  Tally total;
  for (const auto& t : tallies) {
    total.eq1 += t.eq1;
    total.eq2 += t.eq2;
    total.interaction += t.interaction;
  }
  auto rate = [n_sims](int count) {
    RejectionRate r;
    r.rate = static_cast<double>(count) / n_sims;
    r.monte_carlo_se = std::sqrt(r.rate * (1.0 - r.rate) / n_sims);
    return r;
  };
  CalibrationResult result;
  result.n_sims = n_sims;
  result.alpha = alpha;
  result.eq1 = rate(total.eq1);
  result.eq2 = rate(total.eq2);
  result.interaction = rate(total.interaction);
  return result;
}

}  // namespace replicheck
