#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "replicheck/domain.hpp"
#include "replicheck/errors.hpp"

namespace replicheck {

enum class Term { intercept, batch, treatment, interaction };

inline std::string_view to_string(Term t) noexcept {
  switch (t) {
    case Term::intercept: return "intercept";
    case Term::batch: return "batch";
    case Term::treatment: return "treatment";
    case Term::interaction: return "interaction";
  }
  return "intercept";
}

// Ordered list of model terms. The intercept always comes first; the
// interaction needs both main effects before it.
class ModelTerms {
 public:
  ModelTerms(std::initializer_list<Term> terms)
      : ModelTerms(std::vector<Term>(terms)) {}

  explicit ModelTerms(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw ConfigError("model term list is empty");
    if (terms_.front() != Term::intercept)
      throw ConfigError("the intercept must be the first model term");
    bool seen[4] = {false, false, false, false};
    for (Term t : terms_) {
      const auto k = static_cast<int>(t);
      if (k < 0 || k > 3) throw ConfigError("unknown model term");
      if (seen[k])
        throw ConfigError("duplicate model term '" +
                          std::string(to_string(t)) + "'");
      if (t == Term::interaction && !(seen[1] && seen[2]))
        throw ConfigError(
            "the interaction term requires batch and treatment before it");
      seen[k] = true;
    }
  }

  static ModelTerms full() {
    return {Term::intercept, Term::batch, Term::treatment, Term::interaction};
  }

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool contains(Term t) const noexcept {
    for (Term x : terms_)
      if (x == t) return true;
    return false;
  }

 private:
  std::vector<Term> terms_;
};

// Dense design matrix, column-major. Reference-level dummy coding.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // column-major, rows * cols
  std::vector<std::string> column_labels;
  std::vector<Term> column_terms;

  double operator()(std::size_t r, std::size_t c) const {
    return values[c * rows + r];
  }
  std::span<const double> column(std::size_t c) const {
    return {values.data() + c * rows, rows};
  }
};

struct FitResult {
  double residual_ss = 0.0;
  int df_residual = 0;
  int rank = 0;
  std::vector<double> coefficients;  // aliased columns report 0
  std::vector<bool> aliased;
};

// Integer-coded form of the non-excluded rows of a dataset. Level index 0 is
// the bytewise-smallest label.
struct CodedData {
  int t = 0;
  int b = 0;
  std::vector<int> treatment;
  std::vector<int> batch;
  std::vector<double> y;
  std::vector<std::string> treatment_levels;
  std::vector<std::string> batch_levels;

  std::size_t size() const noexcept { return y.size(); }
};

inline CodedData code_dataset(const Dataset& dataset) {
  CodedData c;
  std::map<std::string, int> trt;
  std::map<std::string, int> bat;
  for (const auto& obs : dataset.observations()) {
    if (obs.excluded) continue;
    trt.emplace(obs.treatment, 0);
    bat.emplace(obs.batch, 0);
  }
  for (auto& [label, idx] : trt) {
    idx = static_cast<int>(c.treatment_levels.size());
    c.treatment_levels.push_back(label);
  }
  for (auto& [label, idx] : bat) {
    idx = static_cast<int>(c.batch_levels.size());
    c.batch_levels.push_back(label);
  }
  c.t = static_cast<int>(c.treatment_levels.size());
  c.b = static_cast<int>(c.batch_levels.size());
  for (const auto& obs : dataset.observations()) {
    if (obs.excluded) continue;
    c.treatment.push_back(trt.at(obs.treatment));
    c.batch.push_back(bat.at(obs.batch));
    c.y.push_back(obs.outcome);
  }
  return c;
}

inline DesignMatrix encode(const CodedData& data, const ModelTerms& terms) {
  DesignMatrix x;
  x.rows = data.size();
  auto add_column = [&](Term term, std::string label, auto&& value_of) {
    for (std::size_t r = 0; r < x.rows; ++r) x.values.push_back(value_of(r));
    x.column_labels.push_back(std::move(label));
    x.column_terms.push_back(term);
    ++x.cols;
  };
  for (Term term : terms.terms()) {
    switch (term) {
      case Term::intercept:
        add_column(term, "(intercept)", [](std::size_t) { return 1.0; });
        break;
      case Term::batch:
        for (int j = 1; j < data.b; ++j)
          add_column(term, "batch[" + data.batch_levels[j] + "]",
                     [&](std::size_t r) { return data.batch[r] == j ? 1.0 : 0.0; });
        break;
      case Term::treatment:
        for (int i = 1; i < data.t; ++i)
          add_column(term, "treatment[" + data.treatment_levels[i] + "]",
                     [&](std::size_t r) {
                       return data.treatment[r] == i ? 1.0 : 0.0;
                     });
        break;
      case Term::interaction:
        for (int i = 1; i < data.t; ++i)
          for (int j = 1; j < data.b; ++j)
            add_column(term,
                       "treatment[" + data.treatment_levels[i] + "]:batch[" +
                           data.batch_levels[j] + "]",
                       [&](std::size_t r) {
                         return data.treatment[r] == i && data.batch[r] == j
                                    ? 1.0
                                    : 0.0;
                       });
        break;
    }
  }
  return x;
}

inline DesignMatrix encode(const Dataset& dataset, const ModelTerms& terms) {
  return encode(code_dataset(dataset), terms);
}

// A column is treated as linearly dependent on its predecessors when its
// norm after orthogonalization drops below this fraction of its original norm.
inline constexpr double rank_tolerance = 1e-10;

namespace detail {

// Householder QR applied column by column in the given order. Dependent
// columns are skipped, so the factorization of the first k columns is the
// factorization of every nested prefix. Q'y is accumulated alongside.
class SequentialQr {
 public:
  SequentialQr(const DesignMatrix& x, std::span<const double> y)
      : n_(x.rows), p_(x.cols), a_(x.values), qty_(y.begin(), y.end()),
        kept_(p_, false) {
    for (std::size_t c = 0; c < p_; ++c) factor_column(c);
  }

  int rank() const noexcept { return static_cast<int>(rank_); }
  bool kept(std::size_t c) const { return kept_[c]; }
  int rank_after(std::size_t ncols) const {
    int r = 0;
    for (std::size_t c = 0; c < ncols; ++c) r += kept_[c] ? 1 : 0;
    return r;
  }
  std::span<const double> qty() const noexcept { return qty_; }

  // Sum of squared Q'y entries in [from, to).
  double qty_ss(std::size_t from, std::size_t to) const {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += qty_[i] * qty_[i];
    return s;
  }

  std::vector<double> coefficients() const {
    std::vector<double> beta(p_, 0.0);
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < p_; ++c)
      if (kept_[c]) cols.push_back(c);
    for (std::size_t k = cols.size(); k-- > 0;) {
      double s = qty_[k];
      for (std::size_t m = k + 1; m < cols.size(); ++m)
        s -= at(k, cols[m]) * beta[cols[m]];
      beta[cols[k]] = s / at(k, cols[k]);
    }
    return beta;
  }

 private:
  double& at(std::size_t r, std::size_t c) { return a_[c * n_ + r]; }
  double at(std::size_t r, std::size_t c) const { return a_[c * n_ + r]; }

  void factor_column(std::size_t c) {
    double original = 0.0;
    for (std::size_t r = 0; r < n_; ++r) original += at(r, c) * at(r, c);
    original = std::sqrt(original);
    const std::size_t k = rank_;
    double tail = 0.0;
    for (std::size_t r = k; r < n_; ++r) tail += at(r, c) * at(r, c);
    tail = std::sqrt(tail);
    if (k >= n_ || original == 0.0 || tail < rank_tolerance * original) return;

    // Reflector v with v[k] chosen to avoid cancellation.
    const double alpha = at(k, c) > 0 ? -tail : tail;
    std::vector<double> v(n_ - k);
    for (std::size_t r = k; r < n_; ++r) v[r - k] = at(r, c);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double e : v) vnorm2 += e * e;

    auto reflect = [&](auto&& get) {
      double dot = 0.0;
      for (std::size_t r = k; r < n_; ++r) dot += v[r - k] * get(r);
      const double scale = 2.0 * dot / vnorm2;
      for (std::size_t r = k; r < n_; ++r) get(r) -= scale * v[r - k];
    };
    for (std::size_t cc = c + 1; cc < p_; ++cc)
      reflect([&](std::size_t r) -> double& { return at(r, cc); });
    reflect([&](std::size_t r) -> double& { return qty_[r]; });

    at(k, c) = alpha;
    for (std::size_t r = k + 1; r < n_; ++r) at(r, c) = 0.0;
    kept_[c] = true;
    ++rank_;
  }

  std::size_t n_;
  std::size_t p_;
  std::vector<double> a_;
  std::vector<double> qty_;
  std::vector<bool> kept_;
  std::size_t rank_ = 0;
};

inline void check_outcomes(std::span<const double> y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i]))
      throw NumericError("outcome " + std::to_string(i + 1) +
                         " is not finite");
}

}  // namespace detail

// Least-squares fit by Householder QR (no normal equations). Columns whose
// orthogonalized norm falls below rank_tolerance of their original norm are
// aliased and get a zero coefficient.
inline FitResult fit_ols(const DesignMatrix& x, std::span<const double> y) {
  if (x.rows == 0) throw NumericError("cannot fit a model to zero rows");
  if (y.size() != x.rows)
    throw NumericError("design matrix has " + std::to_string(x.rows) +
                       " rows but the outcome vector has " +
                       std::to_string(y.size()));
  detail::check_outcomes(y);
  detail::SequentialQr qr(x, y);
  FitResult fit;
  fit.rank = qr.rank();
  fit.df_residual = static_cast<int>(x.rows) - fit.rank;
  fit.residual_ss = qr.qty_ss(static_cast<std::size_t>(fit.rank), x.rows);
  fit.coefficients = qr.coefficients();
  for (std::size_t c = 0; c < x.cols; ++c) fit.aliased.push_back(!qr.kept(c));
  return fit;
}

// ---------------------------------------------------------------------------
// Sequential (Type I) sums of squares

struct SsTerm {
  Term term = Term::intercept;  // batch, treatment or interaction
  int df = 0;
  double ss = 0.0;
};

// Which main effect enters the nested sequence first. Table-style reports
// use batch first.
enum class TermOrder { batch_first, treatment_first };

struct SsDecomposition {
  std::vector<SsTerm> effects;  // two main effects in fitting order, then interaction
  int df_error = 0;
  double ss_error = 0.0;
  double total_ss = 0.0;
  double uncorrected_ss = 0.0;  // sum of y^2
  int n = 0;
  int t = 0;
  int b = 0;
  // Set when some cell has fewer than 2 replicates: the interaction sum of
  // squares is computed but has no valid test.
  std::optional<std::string> interaction_unavailable;

  // Residual variation indistinguishable from rounding noise in y.
  bool error_is_degenerate() const noexcept {
    return !(ss_error > 1e-24 * uncorrected_ss);
  }

  const SsTerm& effect(Term term) const {
    for (const auto& e : effects)
      if (e.term == term) return e;
    throw ConfigError("no such term in decomposition");
  }
};

namespace detail {

inline SsDecomposition sequential_ss_coded(const CodedData& data,
                                           TermOrder order) {
  if (data.size() == 0) throw NumericError("cannot fit a model to zero rows");
  if (data.t < 2 || data.b < 2)
    throw DesignError("at least 2 treatment and 2 batch levels are required");
  check_outcomes(data.y);

  const Term first = order == TermOrder::batch_first ? Term::batch : Term::treatment;
  const Term second = order == TermOrder::batch_first ? Term::treatment : Term::batch;
  const ModelTerms terms{Term::intercept, first, second, Term::interaction};
  const DesignMatrix x = encode(data, terms);
  SequentialQr qr(x, data.y);

  // Column boundaries of each term.
  std::size_t bounds[5] = {0, 1, 0, 0, x.cols};
  const std::size_t n_first = static_cast<std::size_t>(
      (first == Term::batch ? data.b : data.t) - 1);
  const std::size_t n_second = static_cast<std::size_t>(
      (second == Term::batch ? data.b : data.t) - 1);
  bounds[2] = 1 + n_first;
  bounds[3] = bounds[2] + n_second;

  int ranks[5];
  for (int k = 0; k < 5; ++k) ranks[k] = qr.rank_after(bounds[k]);

  const int expected_df[3] = {static_cast<int>(n_first),
                              static_cast<int>(n_second),
                              (data.t - 1) * (data.b - 1)};
  const Term term_of[3] = {first, second, Term::interaction};

  SsDecomposition d;
  d.n = static_cast<int>(data.size());
  d.t = data.t;
  d.b = data.b;
  for (int k = 0; k < 3; ++k) {
    const int df = ranks[k + 2] - ranks[k + 1];
    if (df != expected_df[k])
      throw DesignError(
          "the " + std::string(to_string(term_of[k])) + " term has " +
          std::to_string(df) + " estimable degrees of freedom instead of " +
          std::to_string(expected_df[k]) +
          "; treatment and batch must be fully crossed");
    d.effects.push_back(
        {term_of[k], df,
         qr.qty_ss(static_cast<std::size_t>(ranks[k + 1]),
                   static_cast<std::size_t>(ranks[k + 2]))});
  }
  d.df_error = d.n - ranks[4];
  d.ss_error = qr.qty_ss(static_cast<std::size_t>(ranks[4]), data.size());
  d.total_ss = qr.qty_ss(1, data.size());
  d.uncorrected_ss = qr.qty_ss(0, data.size());

  std::vector<int> counts(static_cast<std::size_t>(data.t * data.b), 0);
  for (std::size_t r = 0; r < data.size(); ++r)
    ++counts[static_cast<std::size_t>(data.treatment[r] * data.b + data.batch[r])];
  for (int c : counts) {
    if (c < 2) {
      d.interaction_unavailable =
          "genuine replication missing: at least one treatment x batch cell "
          "has fewer than 2 replicates";
      break;
    }
  }
  return d;
}

}  // namespace detail

// Fits intercept -> +batch -> +treatment -> +interaction (or with the main
// effects swapped) and reports each term's reduction in residual SS. Error SS
// is the full model's residual; total SS is about the grand mean.
inline SsDecomposition sequential_ss(const Dataset& dataset,
                                     TermOrder order = TermOrder::batch_first) {
  const auto summary = summarize_design(dataset);
  if (!summary.fully_crossed)
    throw DesignError("treatment and batch are not fully crossed");
  return detail::sequential_ss_coded(code_dataset(dataset), order);
}

}  // namespace replicheck
