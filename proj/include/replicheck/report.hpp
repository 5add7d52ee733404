#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "replicheck/anova.hpp"
#include "replicheck/csv.hpp"
#include "replicheck/domain.hpp"
#include "replicheck/effects.hpp"
#include "replicheck/errors.hpp"
#include "replicheck/sim.hpp"
#include "replicheck/version.hpp"

namespace replicheck {

using Json = nlohmann::ordered_json;

struct Provenance {
  std::string input;
  std::string mode = "raw";  // "raw" or "summaries"
  std::string tool_version = version;
  int rows_read = 0;
  int rows_excluded = 0;
  int rows_analysed = 0;
  std::uint64_t seed = default_seed;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct AnalysisOptions {
  double alpha = 0.05;
  double confidence = 0.95;
  std::optional<std::string> reference;
  std::uint64_t seed = default_seed;
  std::optional<ReplicationClass> replication;
};

struct AnalysisReport {
  Provenance provenance;
  double alpha = 0.05;
  double confidence = 0.95;
  std::optional<DesignSummary> design;
  std::optional<ValidationReport> validation;
  AnovaTable anova;
  std::optional<EffectSet> effects;
  std::string effects_unavailable_reason;
  std::optional<EffectHeterogeneity> heterogeneity;
  Verdict verdict;
  std::optional<ReplicationClass> replication;
  std::optional<Dataset> data;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

// ---------------------------------------------------------------------------
// Display rules shared by the text report and the consistency tests.

namespace display {

inline std::string group_thousands(long long v) {
  std::string digits = std::to_string(v < 0 ? -v : v);
  std::string out;
  const int n = static_cast<int>(digits.size());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out += ',';
    out += digits[static_cast<std::size_t>(i)];
  }
  return v < 0 ? "-" + out : out;
}

// Sums of squares and mean squares: whole numbers with thousands separators
// from 1000 up (ties to even, so 212912.5 shows as 212,912), four
// significant digits below.
inline std::string quantity(double x) {
  if (std::fabs(x) >= 1000.0)
    return group_thousands(static_cast<long long>(std::nearbyint(x)));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline std::string f_stat(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", f);
  return buf;
}

inline std::string p_value(double p) {
  if (p < 0.0005) return "<0.001";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  return buf;
}

inline std::string estimate(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace display

// ---------------------------------------------------------------------------
// Analysis

class ValidationFailure : public DesignError {
 public:
  ValidationFailure(const std::string& what, ValidationReport report)
      : DesignError(what), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

inline std::string failed_checks(const ValidationReport& v) {
  std::string out;
  for (const auto& c : v.checks) {
    if (c.passed()) continue;
    if (!out.empty()) out += "; ";
    out += c.name + ": " + c.message;
  }
  return out;
}

// summarize -> validate -> ANOVA -> effects -> verdict.
inline AnalysisReport analyze(const Dataset& dataset, const AnalysisOptions& options) {
  AnalysisReport report;
  report.alpha = options.alpha;
  report.confidence = options.confidence;
  report.provenance.input = dataset.name();
  report.provenance.rows_read = static_cast<int>(dataset.size());
  report.provenance.rows_excluded = static_cast<int>(dataset.excluded_count());
  report.provenance.rows_analysed = static_cast<int>(dataset.included_count());
  report.provenance.seed = options.seed;
  report.replication = options.replication;

  report.design = summarize_design(dataset);
  report.validation = validate_grbd(*report.design);
  if (!report.validation->overall)
    throw ValidationFailure("design validation failed: " + failed_checks(*report.validation),
                            *report.validation);
  report.anova = grbd_anova(dataset);
  report.verdict = reproducibility_verdict(report.anova, options.alpha);

  if (report.design->t != 2) {
    report.effects_unavailable_reason =
        "per-batch effects need exactly 2 treatment levels";
  } else {
    try {
      report.effects = per_batch_effects(dataset, options.confidence, options.reference);
      report.heterogeneity = effect_heterogeneity(*report.effects, report.anova);
    } catch (const DegenerateDataError& e) {
      report.effects_unavailable_reason = e.what();
    }
  }
  report.data = dataset;
  return report;
}

inline AnalysisReport analyze(const std::string& path, const ColumnMapping& mapping,
                              AnalysisOptions options) {
  if (!options.reference) options.reference = mapping.reference_level;
  return analyze(parse_csv(path, mapping), options);
}

// ---------------------------------------------------------------------------
// Published summary tables

namespace detail {

inline std::optional<AnovaTerm> term_from_role(std::string_view role) {
  const auto r = lower(trim(role));
  if (r == "batch" || r == "block" || r == "site" || r == "day" || r == "litter" ||
      r == "run" || r == "plate")
    return AnovaTerm::batch;
  if (r == "treatment" || r == "trt" || r == "group") return AnovaTerm::treatment;
  if (r == "interaction" || r == "sxt" || r == "txs" || r == "bxt" || r == "txb" ||
      r == "s×t" || r == "t×s" || r == "b×t" || r == "t×b" ||
      r.find(':') != std::string::npos || r.find('*') != std::string::npos ||
      r.find("×") != std::string::npos)
    return AnovaTerm::interaction;
  if (r == "error" || r == "residual" || r == "residuals" || r == "within")
    return AnovaTerm::error;
  return std::nullopt;
}

}  // namespace detail

// {"n": int, "terms": [{"name": str, "df": int, "ss": number}, ...]}.
// Each term's role comes from an optional "term" field, else from its name,
// else from its position (batch, treatment, interaction, error).
inline std::vector<TermSummary> parse_summaries(const Json& j, int& n) {
  try {
    if (!j.is_object() || !j.contains("n") || !j.contains("terms"))
      throw ParseError("summaries must be an object with 'n' and 'terms'");
    n = j.at("n").get<int>();
    const auto& terms = j.at("terms");
    if (!terms.is_array()) throw ParseError("'terms' must be an array");
    std::vector<TermSummary> out;
    std::size_t position = 0;
    for (const auto& t : terms) {
      TermSummary s;
      s.label = t.at("name").get<std::string>();
      s.df = t.at("df").get<int>();
      s.ss = t.at("ss").get<double>();
      std::optional<AnovaTerm> role;
      if (t.contains("term")) {
        role = detail::term_from_role(t.at("term").get<std::string>());
        if (!role)
          throw ParseError("unknown term role '" + t.at("term").get<std::string>() + "'");
      }
      if (!role) role = detail::term_from_role(s.label);
      if (!role) {
        if (terms.size() != 4 || position > 3)
          throw ParseError("cannot infer the role of term '" + s.label + "'");
        role = static_cast<AnovaTerm>(position);
      }
      s.term = *role;
      out.push_back(std::move(s));
      ++position;
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid summaries JSON: ") + e.what());
  }
}

inline AnalysisReport analyze_summaries(const Json& summaries, const AnalysisOptions& options,
                                        std::string input = "summaries") {
  int n = 0;
  const auto terms = parse_summaries(summaries, n);
  AnalysisReport report;
  report.alpha = options.alpha;
  report.confidence = options.confidence;
  report.provenance.input = std::move(input);
  report.provenance.mode = "summaries";
  report.provenance.rows_read = n;
  report.provenance.rows_analysed = n;
  report.provenance.seed = options.seed;
  report.replication = options.replication;
  report.anova = complete_table(terms, n);
  report.verdict = reproducibility_verdict(report.anova, options.alpha);
  report.effects_unavailable_reason = "per-batch effects need raw observations";
  return report;
}

inline AnalysisReport analyze_summaries_file(const std::string& path,
                                             const AnalysisOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return analyze_summaries(j, options, path);
}

// ---------------------------------------------------------------------------
// Text rendering

namespace detail {

class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : rows_{std::move(header)} {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  // First column left-aligned, the rest right-aligned. Columns widen to fit.
  std::string str(std::string_view indent = "  ") const {
    std::vector<std::size_t> width;
    for (const auto& row : rows_)
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (width.size() <= c) width.push_back(0);
        width[c] = std::max(width[c], display_width(row[c]));
      }
    std::string out;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      std::string line(indent);
      for (std::size_t c = 0; c < rows_[r].size(); ++c) {
        const auto& cell = rows_[r][c];
        const auto pad = std::string(width[c] - display_width(cell), ' ');
        if (c > 0) line += "  ";
        line += c == 0 ? cell + pad : pad + cell;
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += line + "\n";
      if (r == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w;
        out += std::string(indent) + std::string(total + 2 * (width.size() - 1), '-') + "\n";
      }
    }
    return out;
  }

 private:
  // UTF-8 code points, so multibyte labels line up.
  static std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
    return n;
  }
  std::vector<std::vector<std::string>> rows_;
};

inline std::string test_f(const std::optional<FTest>& t) {
  if (!t) return "";
  return t->f ? display::f_stat(*t->f) : "n/a";
}

inline std::string test_p(const std::optional<FTest>& t) {
  if (!t) return "";
  return t->p ? display::p_value(t->p->value()) : "n/a";
}

inline std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

}  // namespace detail

inline std::string render_anova_text(const AnovaTable& table) {
  const auto& inter = table.row(AnovaTerm::interaction);
  detail::TextTable tt({"", "df", "SS", "MS", "F(Error)", "P(Error)",
                        "F(" + inter.label + ")", "P(" + inter.label + ")"});
  for (const auto& row : table.rows)
    tt.add({row.label, std::to_string(row.df), display::quantity(row.ss), display::quantity(row.ms),
            detail::test_f(row.vs_error), detail::test_p(row.vs_error),
            detail::test_f(row.vs_interaction), detail::test_p(row.vs_interaction)});
  return tt.str();
}

inline std::string render_text(const AnalysisReport& report) {
  std::string out;
  const auto& pv = report.provenance;
  out += "replicheck " + pv.tool_version + " report\n";
  out += "input: " + pv.input;
  if (pv.mode == "summaries")
    out += " (published summaries, N = " + std::to_string(pv.rows_analysed) + ")\n";
  else
    out += " (" + std::to_string(pv.rows_read) + " rows read, " +
           std::to_string(pv.rows_excluded) + " excluded, " +
           std::to_string(pv.rows_analysed) + " analysed)\n";

  if (report.design) {
    const auto& d = *report.design;
    out += "\nDesign: " + std::to_string(d.t) + " treatments x " + std::to_string(d.b) +
           " batches, N = " + std::to_string(d.n) + "\n";
    detail::TextTable cells([&] {
      std::vector<std::string> h{"treatment \\ batch"};
      h.insert(h.end(), d.batch_levels.begin(), d.batch_levels.end());
      return h;
    }());
    for (int i = 0; i < d.t; ++i) {
      std::vector<std::string> row{d.treatment_levels[i]};
      for (int c : d.cell_counts[i]) row.push_back(std::to_string(c));
      cells.add(std::move(row));
    }
    out += cells.str();
  }

  if (report.validation) {
    out += "\nValidation: " + std::string(report.validation->overall ? "pass" : "FAIL") + "\n";
    for (const auto& c : report.validation->checks) {
      const char* tag = c.severity == Severity::ok        ? "[ok]  "
                        : c.severity == Severity::warning ? "[warn]"
                                                          : "[FAIL]";
      out += "  " + std::string(tag) + " " + c.name + ": " + c.message + "\n";
    }
  }

  out += "\nANOVA (sequential sums of squares, batch entered first)\n";
  out += render_anova_text(report.anova);

  if (report.effects) {
    const auto& e = *report.effects;
    char level[16];
    std::snprintf(level, sizeof level, "%g", 100.0 * e.confidence);
    out += "\nPer-batch effects: " + e.treated + " - " + e.reference + " (reference " +
           e.reference + "), " + level + "% CI\n";
    detail::TextTable tt({"batch", "n(" + e.treated + ")", "n(" + e.reference + ")",
                          "diff", "se", "lower", "upper"});
    auto add = [&](const BatchEffect& b) {
      tt.add({b.batch, std::to_string(b.n_treated), std::to_string(b.n_control),
              display::estimate(b.diff), display::estimate(b.se), display::estimate(b.ci_low),
              display::estimate(b.ci_high)});
    };
    for (const auto& b : e.per_batch) add(b);
    add(e.overall);
    out += tt.str();
    if (report.heterogeneity) out += "  " + report.heterogeneity->note + "\n";
  }

  out += "\nVerdict (alpha = " + [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", report.alpha);
    return std::string(buf);
  }() + ")\n";
  out += "  " + report.verdict.narrative + "\n";

  if (report.replication) {
    const auto& r = *report.replication;
    out += "\nReplication type: " + r.label + " (panel " + std::string(1, r.figure_panel) +
           ")\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline const char* severity_name(Severity s) {
  switch (s) {
    case Severity::ok: return "ok";
    case Severity::warning: return "warning";
    case Severity::failure: return "failure";
  }
  return "ok";
}

inline Severity severity_from(const std::string& s) {
  if (s == "ok") return Severity::ok;
  if (s == "warning") return Severity::warning;
  if (s == "failure") return Severity::failure;
  throw ParseError("unknown severity '" + s + "'");
}

inline AnovaTerm anova_term_from(const std::string& s) {
  for (int k = 0; k < 4; ++k)
    if (s == to_string(static_cast<AnovaTerm>(k))) return static_cast<AnovaTerm>(k);
  throw ParseError("unknown ANOVA term '" + s + "'");
}

inline Json to_json(const FTest& t) {
  Json j;
  j["f"] = t.f ? Json(*t.f) : Json(nullptr);
  j["p"] = t.p ? Json(t.p->value()) : Json(nullptr);
  if (!t.available()) j["unavailable_reason"] = t.unavailable_reason;
  return j;
}

inline FTest ftest_from(const Json& j) {
  FTest t;
  if (!j.at("f").is_null()) t.f = j.at("f").get<double>();
  if (!j.at("p").is_null()) t.p = Probability(j.at("p").get<double>());
  if (j.contains("unavailable_reason"))
    t.unavailable_reason = j.at("unavailable_reason").get<std::string>();
  return t;
}

inline Json to_json(const BatchEffect& e) {
  return Json{{"batch", e.batch},         {"diff", e.diff},
              {"se", e.se},               {"ci_low", e.ci_low},
              {"ci_high", e.ci_high},     {"n_treated", e.n_treated},
              {"n_control", e.n_control}};
}

inline BatchEffect batch_effect_from(const Json& j) {
  BatchEffect e;
  e.batch = j.at("batch").get<std::string>();
  e.diff = j.at("diff").get<double>();
  e.se = j.at("se").get<double>();
  e.ci_low = j.at("ci_low").get<double>();
  e.ci_high = j.at("ci_high").get<double>();
  e.n_treated = j.at("n_treated").get<int>();
  e.n_control = j.at("n_control").get<int>();
  return e;
}

}  // namespace detail

inline Json to_json(const AnovaTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json row{{"term", to_string(r.term)}, {"label", r.label}, {"df", r.df},
             {"ss", r.ss},                {"ms", r.ms}};
    if (r.vs_error) row["vs_error"] = detail::to_json(*r.vs_error);
    if (r.vs_interaction) row["vs_interaction"] = detail::to_json(*r.vs_interaction);
    rows.push_back(std::move(row));
  }
  return Json{{"n", table.n}, {"t", table.t}, {"b", table.b}, {"rows", std::move(rows)}};
}

inline Json to_json(const ReplicationClass& r) {
  return Json{{"independence", to_string(r.independence)},
              {"timing", to_string(r.timing)},
              {"label", r.label},
              {"figure_panel", std::string(1, r.figure_panel)}};
}

inline Json to_json(const CalibrationResult& c) {
  auto rate = [](const RejectionRate& r) {
    return Json{{"rate", r.rate}, {"monte_carlo_se", r.monte_carlo_se}};
  };
  return Json{{"schema", schema_version},
              {"n_sims", c.n_sims},
              {"alpha", c.alpha},
              {"eq1_treatment", rate(c.eq1)},
              {"eq2_treatment", rate(c.eq2)},
              {"interaction", rate(c.interaction)}};
}

inline Json to_json(const AnalysisReport& report) {
  Json j;
  j["schema"] = schema_version;
  const auto& pv = report.provenance;
  j["provenance"] = Json{{"input", pv.input},
                         {"mode", pv.mode},
                         {"tool_version", pv.tool_version},
                         {"rows_read", pv.rows_read},
                         {"rows_excluded", pv.rows_excluded},
                         {"rows_analysed", pv.rows_analysed},
                         {"seed", pv.seed}};
  j["settings"] = Json{{"alpha", report.alpha}, {"confidence", report.confidence}};

  if (report.design) {
    const auto& d = *report.design;
    j["design"] = Json{{"t", d.t},
                       {"b", d.b},
                       {"n", d.n},
                       {"n_excluded", d.n_excluded},
                       {"treatment_levels", d.treatment_levels},
                       {"batch_levels", d.batch_levels},
                       {"cell_counts", d.cell_counts},
                       {"balanced", d.balanced},
                       {"fully_crossed", d.fully_crossed},
                       {"genuine_replication", d.genuine_replication}};
  } else {
    j["design"] = nullptr;
  }

  if (report.validation) {
    Json checks = Json::array();
    for (const auto& c : report.validation->checks)
      checks.push_back(Json{{"name", c.name},
                            {"severity", detail::severity_name(c.severity)},
                            {"passed", c.passed()},
                            {"message", c.message}});
    j["validation"] = Json{{"overall", report.validation->overall}, {"checks", checks}};
  } else {
    j["validation"] = nullptr;
  }

  j["anova"] = to_json(report.anova);

  if (report.effects) {
    const auto& e = *report.effects;
    Json per_batch = Json::array();
    for (const auto& b : e.per_batch) per_batch.push_back(detail::to_json(b));
    j["effects"] = Json{{"confidence", e.confidence},
                        {"reference", e.reference},
                        {"treated", e.treated},
                        {"per_batch", per_batch},
                        {"overall", detail::to_json(e.overall)}};
  } else {
    j["effects"] = nullptr;
    j["effects_unavailable_reason"] = report.effects_unavailable_reason;
  }

  if (report.heterogeneity) {
    const auto& h = *report.heterogeneity;
    j["heterogeneity"] = Json{
        {"range", h.range},
        {"sd", h.sd},
        {"weighted_ss", h.weighted_ss},
        {"mixed_signs", h.mixed_signs},
        {"interaction_p", h.interaction_p ? Json(h.interaction_p->value()) : Json(nullptr)},
        {"note", h.note}};
  } else {
    j["heterogeneity"] = nullptr;
  }

  const auto& v = report.verdict;
  j["verdict"] = Json{{"alpha", v.alpha},
                      {"treatment_significant_eq1", v.treatment_significant_eq1},
                      {"interaction_significant", v.interaction_significant},
                      {"reproducible", !v.interaction_significant},
                      {"treatment_significant_eq2", v.treatment_significant_eq2},
                      {"narrative", v.narrative}};

  j["replication"] = report.replication ? to_json(*report.replication) : Json(nullptr);

  if (report.data) {
    Json outcome = Json::array(), treatment = Json::array(), batch = Json::array(),
         excluded = Json::array();
    for (const auto& o : report.data->observations()) {
      outcome.push_back(o.outcome);
      treatment.push_back(o.treatment);
      batch.push_back(o.batch);
      excluded.push_back(o.excluded);
    }
    j["data"] = Json{{"name", report.data->name()},
                     {"outcome", outcome},
                     {"treatment", treatment},
                     {"batch", batch},
                     {"excluded", excluded}};
  } else {
    j["data"] = nullptr;
  }
  return j;
}

// UTF-8 JSON, two-space indent, keys in a fixed order, doubles printed with
// round-trip precision.
inline std::string render_json(const AnalysisReport& report) {
  return to_json(report).dump(2) + "\n";
}

inline AnovaTable anova_from_json(const Json& j) {
  AnovaTable t;
  t.n = j.at("n").get<int>();
  t.t = j.at("t").get<int>();
  t.b = j.at("b").get<int>();
  const auto& rows = j.at("rows");
  if (rows.size() != 4) throw ParseError("ANOVA table must have 4 rows");
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& r = rows[k];
    auto& row = t.rows[k];
    row.term = detail::anova_term_from(r.at("term").get<std::string>());
    row.label = r.at("label").get<std::string>();
    row.df = r.at("df").get<int>();
    row.ss = r.at("ss").get<double>();
    row.ms = r.at("ms").get<double>();
    if (r.contains("vs_error")) row.vs_error = detail::ftest_from(r.at("vs_error"));
    if (r.contains("vs_interaction"))
      row.vs_interaction = detail::ftest_from(r.at("vs_interaction"));
  }
  return t;
}

inline AnalysisReport report_from_json(const Json& j) {
  try {
    if (j.at("schema").get<std::string>() != schema_version)
      throw ParseError("unsupported schema '" + j.at("schema").get<std::string>() + "'");
    AnalysisReport r;
    const auto& pv = j.at("provenance");
    r.provenance.input = pv.at("input").get<std::string>();
    r.provenance.mode = pv.at("mode").get<std::string>();
    r.provenance.tool_version = pv.at("tool_version").get<std::string>();
    r.provenance.rows_read = pv.at("rows_read").get<int>();
    r.provenance.rows_excluded = pv.at("rows_excluded").get<int>();
    r.provenance.rows_analysed = pv.at("rows_analysed").get<int>();
    r.provenance.seed = pv.at("seed").get<std::uint64_t>();
    r.alpha = j.at("settings").at("alpha").get<double>();
    r.confidence = j.at("settings").at("confidence").get<double>();

    if (!j.at("design").is_null()) {
      const auto& d = j.at("design");
      DesignSummary s;
      s.t = d.at("t").get<int>();
      s.b = d.at("b").get<int>();
      s.n = d.at("n").get<int>();
      s.n_excluded = d.at("n_excluded").get<int>();
      s.treatment_levels = d.at("treatment_levels").get<std::vector<std::string>>();
      s.batch_levels = d.at("batch_levels").get<std::vector<std::string>>();
      s.cell_counts = d.at("cell_counts").get<std::vector<std::vector<int>>>();
      s.balanced = d.at("balanced").get<bool>();
      s.fully_crossed = d.at("fully_crossed").get<bool>();
      s.genuine_replication = d.at("genuine_replication").get<bool>();
      r.design = std::move(s);
    }
    if (!j.at("validation").is_null()) {
      ValidationReport v;
      v.overall = j.at("validation").at("overall").get<bool>();
      for (const auto& c : j.at("validation").at("checks"))
        v.checks.push_back({c.at("name").get<std::string>(),
                            detail::severity_from(c.at("severity").get<std::string>()),
                            c.at("message").get<std::string>()});
      r.validation = std::move(v);
    }
    r.anova = anova_from_json(j.at("anova"));
    if (!j.at("effects").is_null()) {
      const auto& e = j.at("effects");
      EffectSet set;
      set.confidence = e.at("confidence").get<double>();
      set.reference = e.at("reference").get<std::string>();
      set.treated = e.at("treated").get<std::string>();
      for (const auto& b : e.at("per_batch"))
        set.per_batch.push_back(detail::batch_effect_from(b));
      set.overall = detail::batch_effect_from(e.at("overall"));
      r.effects = std::move(set);
    } else {
      r.effects_unavailable_reason = j.at("effects_unavailable_reason").get<std::string>();
    }
    if (!j.at("heterogeneity").is_null()) {
      const auto& h = j.at("heterogeneity");
      EffectHeterogeneity het;
      het.range = h.at("range").get<double>();
      het.sd = h.at("sd").get<double>();
      het.weighted_ss = h.at("weighted_ss").get<double>();
      het.mixed_signs = h.at("mixed_signs").get<bool>();
      if (!h.at("interaction_p").is_null())
        het.interaction_p = Probability(h.at("interaction_p").get<double>());
      het.note = h.at("note").get<std::string>();
      r.heterogeneity = std::move(het);
    }
    const auto& v = j.at("verdict");
    r.verdict.alpha = v.at("alpha").get<double>();
    r.verdict.treatment_significant_eq1 = v.at("treatment_significant_eq1").get<bool>();
    r.verdict.interaction_significant = v.at("interaction_significant").get<bool>();
    r.verdict.treatment_significant_eq2 = v.at("treatment_significant_eq2").get<bool>();
    r.verdict.narrative = v.at("narrative").get<std::string>();
    if (!j.at("replication").is_null()) {
      const auto& c = j.at("replication");
      r.replication = classify_replication(
          parse_independence(c.at("independence").get<std::string>()),
          parse_timing(c.at("timing").get<std::string>()));
    }
    if (!j.at("data").is_null()) {
      const auto& d = j.at("data");
      const auto outcome = d.at("outcome").get<std::vector<double>>();
      const auto treatment = d.at("treatment").get<std::vector<std::string>>();
      const auto batch = d.at("batch").get<std::vector<std::string>>();
      const auto excluded = d.at("excluded").get<std::vector<bool>>();
      if (treatment.size() != outcome.size() || batch.size() != outcome.size() ||
          excluded.size() != outcome.size())
        throw ParseError("data columns have different lengths");
      std::vector<Observation> obs;
      for (std::size_t i = 0; i < outcome.size(); ++i)
        obs.push_back({outcome[i], treatment[i], batch[i], excluded[i]});
      r.data = Dataset(d.at("name").get<std::string>(), std::move(obs));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid report JSON: ") + e.what());
  }
}

}  // namespace replicheck
