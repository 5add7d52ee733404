#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "replicheck/anova.hpp"
#include "replicheck/domain.hpp"
#include "replicheck/errors.hpp"
#include "replicheck/special.hpp"

namespace replicheck {

// Treated-minus-reference mean difference with a pooled-variance t interval.
struct BatchEffect {
  std::string batch;
  double diff = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_treated = 0;
  int n_control = 0;

  friend bool operator==(const BatchEffect&, const BatchEffect&) = default;
};

struct EffectSet {
  std::vector<BatchEffect> per_batch;
  BatchEffect overall;  // batch == "pooled"
  double confidence = 0.95;
  std::string reference;
  std::string treated;

  friend bool operator==(const EffectSet&, const EffectSet&) = default;
};

inline constexpr const char* pooled_label = "pooled";

namespace detail {

struct GroupStats {
  int n = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }
};

inline BatchEffect two_group_effect(std::string label, const GroupStats& treated,
                                    const GroupStats& control,
                                    double confidence) {
  if (treated.n < 2 || control.n < 2)
    throw DesignError("batch '" + label +
                      "' needs at least 2 observations per treatment group");
  const int df = treated.n + control.n - 2;
  const double pooled_var = (treated.m2 + control.m2) / df;
  if (!(pooled_var > 1e-24 * (treated.mean * treated.mean +
                              control.mean * control.mean)))
    throw DegenerateDataError("batch '" + label +
                              "' has zero within-group variance");
  BatchEffect e;
  e.batch = std::move(label);
  e.diff = treated.mean - control.mean;
  e.se = std::sqrt(pooled_var * (1.0 / treated.n + 1.0 / control.n));
  const double q = t_quantile(0.5 * (1.0 + confidence), df);
  e.ci_low = e.diff - q * e.se;
  e.ci_high = e.diff + q * e.se;
  e.n_treated = treated.n;
  e.n_control = control.n;
  return e;
}

}  // namespace detail

// Runs a separate two-group analysis inside each batch, plus one pooled
// analysis that ignores batch. The reference defaults to the bytewise-smallest
// treatment label.
inline EffectSet per_batch_effects(const Dataset& dataset,
                                   double confidence = 0.95,
                                   std::optional<std::string> reference = std::nullopt) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("confidence must lie in (0, 1)");
  const auto summary = summarize_design(dataset);
  if (summary.t != 2)
    throw UnsupportedError("per-batch effects need exactly 2 treatment levels, found " +
                           std::to_string(summary.t));
  EffectSet set;
  set.confidence = confidence;
  set.reference = reference ? detail::trim(*reference) : summary.treatment_levels[0];
  if (set.reference == summary.treatment_levels[0])
    set.treated = summary.treatment_levels[1];
  else if (set.reference == summary.treatment_levels[1])
    set.treated = summary.treatment_levels[0];
  else
    throw ConfigError("reference level '" + set.reference +
                      "' is not a treatment label");

  std::vector<detail::GroupStats> treated(summary.b), control(summary.b);
  detail::GroupStats all_treated, all_control;
  std::map<std::string, std::size_t> batch_index;
  for (std::size_t j = 0; j < summary.batch_levels.size(); ++j)
    batch_index.emplace(summary.batch_levels[j], j);
  for (const auto& obs : dataset.observations()) {
    if (obs.excluded) continue;
    const auto j = batch_index.at(obs.batch);
    if (obs.treatment == set.reference) {
      control[j].add(obs.outcome);
      all_control.add(obs.outcome);
    } else {
      treated[j].add(obs.outcome);
      all_treated.add(obs.outcome);
    }
  }
  for (std::size_t j = 0; j < summary.batch_levels.size(); ++j)
    set.per_batch.push_back(detail::two_group_effect(
        summary.batch_levels[j], treated[j], control[j], confidence));
  set.overall =
      detail::two_group_effect(pooled_label, all_treated, all_control, confidence);
  return set;
}

struct EffectHeterogeneity {
  double range = 0.0;
  double sd = 0.0;  // sample standard deviation of per-batch diffs
  // sum_j w_j (d_j - d_w)^2 with w_j = n_t n_c / (n_t + n_c). Equals the
  // treatment x batch sum of squares for two treatment levels.
  double weighted_ss = 0.0;
  bool mixed_signs = false;
  std::optional<Probability> interaction_p;
  std::string note;

  friend bool operator==(const EffectHeterogeneity&,
                         const EffectHeterogeneity&) = default;
};

inline EffectHeterogeneity effect_heterogeneity(const EffectSet& effects,
                                                const AnovaTable& table) {
  EffectHeterogeneity h;
  const auto& pb = effects.per_batch;
  if (pb.empty()) return h;
  double lo = pb.front().diff, hi = lo, sum = 0.0, wsum = 0.0, wdsum = 0.0;
  bool any_pos = false, any_neg = false;
  for (const auto& e : pb) {
    lo = std::min(lo, e.diff);
    hi = std::max(hi, e.diff);
    sum += e.diff;
    any_pos = any_pos || e.diff > 0.0;
    any_neg = any_neg || e.diff < 0.0;
    const double w = double(e.n_treated) * e.n_control / (e.n_treated + e.n_control);
    wsum += w;
    wdsum += w * e.diff;
  }
  const double mean = sum / pb.size();
  const double wmean = wdsum / wsum;
  double ss = 0.0;
  for (const auto& e : pb) {
    ss += (e.diff - mean) * (e.diff - mean);
    const double w = double(e.n_treated) * e.n_control / (e.n_treated + e.n_control);
    h.weighted_ss += w * (e.diff - wmean) * (e.diff - wmean);
  }
  h.range = hi - lo;
  h.sd = pb.size() > 1 ? std::sqrt(ss / (pb.size() - 1)) : 0.0;
  h.mixed_signs = any_pos && any_neg;

  const auto& inter = table.row(AnovaTerm::interaction);
  if (inter.vs_error && inter.vs_error->p) h.interaction_p = inter.vs_error->p;

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "Per-batch effects range from %.4g to %.4g (sd %.4g).", lo, hi,
                h.sd);
  h.note = buf;
  if (h.mixed_signs)
    h.note += " The effect changes sign between batches: some batches show "
              "the opposite direction.";
  if (h.interaction_p) {
    std::snprintf(buf, sizeof buf,
                  " Formal test of heterogeneity (interaction): p = %.3g.",
                  h.interaction_p->value());
    h.note += buf;
  }
  return h;
}

}  // namespace replicheck
