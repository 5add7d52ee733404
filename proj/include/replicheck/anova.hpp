#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "replicheck/domain.hpp"
#include "replicheck/errors.hpp"
#include "replicheck/linmodel.hpp"
#include "replicheck/special.hpp"

namespace replicheck {

enum class AnovaTerm { batch, treatment, interaction, error };

inline std::string_view to_string(AnovaTerm t) noexcept {
  switch (t) {
    case AnovaTerm::batch: return "batch";
    case AnovaTerm::treatment: return "treatment";
    case AnovaTerm::interaction: return "interaction";
    case AnovaTerm::error: return "error";
  }
  return "error";
}

// An F test that applies to a row. Either both f and p are set, or neither
// is and unavailable_reason says why.
struct FTest {
  std::optional<double> f;
  std::optional<Probability> p;
  std::string unavailable_reason;

  bool available() const noexcept { return f.has_value(); }
  friend bool operator==(const FTest&, const FTest&) = default;
};

struct AnovaRow {
  AnovaTerm term = AnovaTerm::error;
  std::string label;
  int df = 0;
  double ss = 0.0;
  double ms = 0.0;
  // Denominator MS(Error). Absent on the error row.
  std::optional<FTest> vs_error;
  // Denominator MS(Treatment x Batch). Present on the treatment row only.
  std::optional<FTest> vs_interaction;

  friend bool operator==(const AnovaRow&, const AnovaRow&) = default;
};

struct AnovaTable {
  std::array<AnovaRow, 4> rows;  // batch, treatment, interaction, error
  int n = 0;
  int t = 0;
  int b = 0;

  const AnovaRow& row(AnovaTerm term) const {
    return rows[static_cast<std::size_t>(term)];
  }
  friend bool operator==(const AnovaTable&, const AnovaTable&) = default;
};

struct TermSummary {
  AnovaTerm term = AnovaTerm::error;
  std::string label;
  int df = 0;
  double ss = 0.0;
};

inline std::string default_label(AnovaTerm term) {
  switch (term) {
    case AnovaTerm::batch: return "Batch";
    case AnovaTerm::treatment: return "Treatment";
    case AnovaTerm::interaction: return "BxT";
    case AnovaTerm::error: return "Error";
  }
  return "Error";
}

namespace detail {

inline FTest make_test(double numerator_ms, double denominator_ms, int df1,
                       int df2) {
  FTest test;
  if (!(denominator_ms > 0.0)) {
    test.unavailable_reason = "denominator mean square is zero";
    return test;
  }
  const double f = numerator_ms / denominator_ms;
  test.f = f;
  test.p = f_sf(f, df1, df2);
  return test;
}

inline FTest unavailable(std::string reason) {
  FTest test;
  test.unavailable_reason = std::move(reason);
  return test;
}

inline AnovaTable build_table(const std::vector<TermSummary>& terms, int n,
                              const std::optional<std::string>& interaction_unavailable) {
  std::array<std::optional<TermSummary>, 4> slot;
  for (const auto& ts : terms) {
    auto& s = slot[static_cast<std::size_t>(ts.term)];
    if (s)
      throw ConsistencyError("term '" + std::string(to_string(ts.term)) +
                             "' given more than once");
    if (!std::isfinite(ts.ss) || ts.ss < 0.0)
      throw ConsistencyError("term '" + std::string(to_string(ts.term)) +
                             "' has an invalid sum of squares");
    if (ts.df < 1)
      throw ConsistencyError("term '" + std::string(to_string(ts.term)) +
                             "' must have positive degrees of freedom");
    s = ts;
  }
  for (std::size_t k = 0; k < 4; ++k)
    if (!slot[k])
      throw ConsistencyError(
          "missing term '" +
          std::string(to_string(static_cast<AnovaTerm>(k))) + "'");

  const auto& batch = *slot[0];
  const auto& treatment = *slot[1];
  const auto& interaction = *slot[2];
  const auto& error = *slot[3];
  const int df_sum = batch.df + treatment.df + interaction.df + error.df;
  if (df_sum != n - 1)
    throw ConsistencyError("degrees of freedom sum to " +
                           std::to_string(df_sum) + " but N - 1 = " +
                           std::to_string(n - 1));
  if (interaction.df != batch.df * treatment.df)
    throw ConsistencyError("interaction df " + std::to_string(interaction.df) +
                           " differs from batch df x treatment df = " +
                           std::to_string(batch.df * treatment.df));
  if (!(error.ss > 0.0))
    throw DegenerateDataError(
        "error sum of squares is zero: all values within each treatment x "
        "batch cell are identical");

  AnovaTable table;
  table.n = n;
  table.b = batch.df + 1;
  table.t = treatment.df + 1;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& s = *slot[k];
    auto& row = table.rows[k];
    row.term = s.term;
    row.label = s.label.empty() ? default_label(s.term) : s.label;
    row.df = s.df;
    row.ss = s.ss;
    row.ms = s.ss / s.df;
  }
  const double ms_error = table.rows[3].ms;
  for (std::size_t k = 0; k < 3; ++k) {
    auto& row = table.rows[k];
    if (row.term == AnovaTerm::interaction && interaction_unavailable)
      row.vs_error = unavailable(*interaction_unavailable);
    else
      row.vs_error = make_test(row.ms, ms_error, row.df, error.df);
  }
  auto& trt = table.rows[1];
  const auto& inter = table.rows[2];
  if (interaction_unavailable) {
    trt.vs_interaction = unavailable(*interaction_unavailable);
  } else {
    trt.vs_interaction = make_test(trt.ms, inter.ms, trt.df, inter.df);
    if (!trt.vs_interaction->available())
      trt.vs_interaction->unavailable_reason =
          "interaction mean square is zero";
  }
  return table;
}

}  // namespace detail

// Fills MS, both F columns and both p columns from published df/SS
// summaries. Error df must be N - t*b implicitly through the df sum check.
inline AnovaTable complete_table(const std::vector<TermSummary>& terms, int n) {
  return detail::build_table(terms, n, std::nullopt);
}

inline std::vector<TermSummary> term_summaries(const SsDecomposition& d) {
  std::vector<TermSummary> out;
  for (Term term : {Term::batch, Term::treatment, Term::interaction}) {
    const auto& e = d.effect(term);
    const AnovaTerm at = term == Term::batch       ? AnovaTerm::batch
                         : term == Term::treatment ? AnovaTerm::treatment
                                                   : AnovaTerm::interaction;
    out.push_back({at, default_label(at), e.df, e.ss});
  }
  out.push_back({AnovaTerm::error, default_label(AnovaTerm::error), d.df_error,
                 d.ss_error});
  return out;
}

// Treatment x batch ANOVA with batch entered first. Each effect is tested
// against MS(Error); the treatment effect is additionally tested against
// MS(Treatment x Batch) on (t-1, (t-1)(b-1)) df.
inline AnovaTable grbd_anova(const Dataset& dataset) {
  const auto decomposition = sequential_ss(dataset);
  if (decomposition.df_error < 1)
    throw DesignError(
        "no residual degrees of freedom: every cell has a single replicate");
  if (decomposition.error_is_degenerate())
    throw DegenerateDataError(
        "error sum of squares is zero: all values within each treatment x "
        "batch cell are identical");
  return detail::build_table(term_summaries(decomposition), decomposition.n,
                             decomposition.interaction_unavailable);
}

// ---------------------------------------------------------------------------

struct Verdict {
  bool interaction_significant = false;
  bool treatment_significant_eq1 = false;
  bool treatment_significant_eq2 = false;
  double alpha = 0.05;
  std::string narrative;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

namespace detail {

inline bool rejects(const std::optional<FTest>& test, double alpha) {
  return test && test->p && test->p->value() < alpha;
}

inline std::string p_phrase(const std::optional<FTest>& test) {
  if (!test || !test->p) return "p unavailable";
  char buf[64];
  const double p = test->p->value();
  if (p < 0.0005)
    std::snprintf(buf, sizeof buf, "p < 0.001");
  else
    std::snprintf(buf, sizeof buf, "p = %.3f", p);
  return buf;
}

}  // namespace detail

// A test is significant when p < alpha.
inline Verdict reproducibility_verdict(const AnovaTable& table,
                                       double alpha = 0.05) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie in (0, 1)");
  const auto& trt = table.row(AnovaTerm::treatment);
  const auto& inter = table.row(AnovaTerm::interaction);

  Verdict v;
  v.alpha = alpha;
  v.treatment_significant_eq1 = detail::rejects(trt.vs_error, alpha);
  v.interaction_significant = detail::rejects(inter.vs_error, alpha);
  v.treatment_significant_eq2 = detail::rejects(trt.vs_interaction, alpha);

  char alpha_text[32];
  std::snprintf(alpha_text, sizeof alpha_text, "%g", alpha);
  std::string text;
  text += v.treatment_significant_eq1
              ? "A treatment effect is detected against the within-cell error ("
              : "No treatment effect is detected against the within-cell error (";
  text += detail::p_phrase(trt.vs_error) + ", alpha = " + alpha_text + "). ";

  if (!inter.vs_error || !inter.vs_error->p) {
    text += "Internal reproducibility cannot be assessed: " +
            (inter.vs_error ? inter.vs_error->unavailable_reason
                            : std::string("no interaction test")) +
            ". ";
  } else if (v.interaction_significant) {
    text += "The treatment x batch interaction is significant (" +
            detail::p_phrase(inter.vs_error) +
            "): the effect is not reproducible across batches, so the "
            "average treatment effect should be interpreted with care. ";
  } else {
    text += "The treatment x batch interaction is not significant (" +
            detail::p_phrase(inter.vs_error) +
            "): no evidence that the effect varies across batches beyond "
            "sampling variability. ";
  }

  if (!trt.vs_interaction || !trt.vs_interaction->p) {
    text += "The stringent test against the interaction mean square is "
            "unavailable" +
            (trt.vs_interaction && !trt.vs_interaction->unavailable_reason.empty()
                 ? ": " + trt.vs_interaction->unavailable_reason
                 : std::string()) +
            ".";
  } else if (v.treatment_significant_eq2) {
    text += "Against the batch-to-batch variation of the effect the "
            "treatment is also significant (" +
            detail::p_phrase(trt.vs_interaction) +
            "), which is strong evidence of a treatment effect.";
  } else {
    text += "Against the batch-to-batch variation of the effect the "
            "treatment is not significant (" +
            detail::p_phrase(trt.vs_interaction) +
            "). This test has few degrees of freedom because its sample "
            "size is the number of batches, so a non-significant result does "
            "not count against a treatment effect.";
  }
  v.narrative = std::move(text);
  return v;
}

}  // namespace replicheck
