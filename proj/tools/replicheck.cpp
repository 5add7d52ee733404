// replicheck: internal-replication analysis of treatment x batch experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config_args.hpp"
#include "replicheck/replicheck.hpp"

namespace rc = replicheck;

namespace {

struct MappingFlags {
  std::string input;
  std::string outcome = "outcome";
  std::string treatment = "treatment";
  std::string batch = "batch";
  std::string exclude;
  std::string reference;

  void attach(CLI::App* app, bool input_required = true) {
    auto* opt = app->add_option("input,--input", input, "CSV file with one row per experimental unit");
    if (input_required) opt->required();
    app->add_option("--outcome", outcome, "Outcome column")->capture_default_str();
    app->add_option("--treatment", treatment, "Treatment column")->capture_default_str();
    app->add_option("--batch", batch, "Batch (block) column")->capture_default_str();
    app->add_option("--exclude", exclude, "Column marking excluded rows (1/true/yes)");
    app->add_option("--reference", reference, "Reference (control) treatment label");
  }

  rc::ColumnMapping mapping() const {
    rc::ColumnMapping m{outcome, treatment, batch, std::nullopt, std::nullopt};
    if (!exclude.empty()) m.exclude_col = exclude;
    if (!reference.empty()) m.reference_level = reference;
    return m;
  }
};

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw rc::IoError("cannot write '" + output + "'");
  out << text;
}

std::optional<rc::ReplicationClass> replication_from(const std::string& independence,
                                                     const std::string& timing) {
  if (independence.empty() && timing.empty()) return std::nullopt;
  if (independence.empty() || timing.empty())
    throw rc::ConfigError("--independence and --timing must be given together");
  return rc::classify_replication(rc::parse_independence(independence),
                                  rc::parse_timing(timing));
}

void check_format(const std::string& format) {
  if (format != "text" && format != "json")
    throw rc::ConfigError("unknown format '" + format + "' (expected text or json)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replicheck: quantify internal replication in batched experiments"};
  app.set_version_flag("--version", std::string(rc::version));
  app.require_subcommand(1);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = rc::cli::expand_config(std::move(args));
  } catch (const rc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rc::exit_code_for(e);
  }

  // analyze
  MappingFlags analyze_flags;
  std::string summaries, analyze_format = "text", analyze_output, independence, timing;
  double alpha = 0.05, confidence = 0.95;
  std::uint64_t seed = rc::default_seed;
  auto* analyze = app.add_subcommand("analyze", "Fit the ANOVA, test reproducibility, report effects");
  analyze_flags.attach(analyze, false);
  analyze->add_option("--from-summaries", summaries,
                      "JSON file of published df/SS summaries instead of raw data");
  analyze->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  analyze->add_option("--confidence", confidence, "Confidence level of effect intervals")
      ->capture_default_str();
  analyze->add_option("--format", analyze_format, "text or json")->capture_default_str();
  analyze->add_option("--output,-o", analyze_output, "Write the report here instead of stdout");
  analyze->add_option("--independence", independence, "full or partial");
  analyze->add_option("--timing", timing, "sequential, staggered or parallel");
  analyze->add_option("--seed", seed, "Seed recorded in the report")->capture_default_str();

  // validate
  MappingFlags validate_flags;
  std::string validate_format = "text";
  auto* validate = app.add_subcommand("validate", "Check that the design supports the analysis");
  validate_flags.attach(validate);
  validate->add_option("--format", validate_format, "text or json")->capture_default_str();

  // classify
  std::string classify_independence, classify_timing, classify_format = "text";
  auto* classify = app.add_subcommand("classify", "Name the type of internal replication");
  classify->add_option("--independence", classify_independence, "full or partial")->required();
  classify->add_option("--timing", classify_timing, "sequential, staggered or parallel")
      ->required();
  classify->add_option("--format", classify_format, "text or json")->capture_default_str();

  // simulate
  rc::SimParams sim;
  std::string sim_mode = "data", sim_output, sim_format = "text";
  int n_sims = 1000;
  double sim_alpha = 0.05;
  unsigned threads = 1;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic data or run a calibration study");
  simulate->add_option("--t", sim.t, "Treatment levels")->capture_default_str();
  simulate->add_option("--b", sim.b, "Batch levels")->capture_default_str();
  simulate->add_option("--r", sim.r, "Replicates per cell")->capture_default_str();
  auto* te = simulate->add_option("--treatment-effects", sim.treatment_effects,
                                  "t effects summing to zero (default all zero)");
  auto* be = simulate->add_option("--batch-effects", sim.batch_effects,
                                  "b batch effects (default all zero)");
  simulate->add_option("--interaction-sd", sim.interaction_sd, "SD of cell interaction draws")
      ->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "Residual SD")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--mode", sim_mode, "data or calibrate")->capture_default_str();
  simulate->add_option("--n-sims", n_sims, "Replicates for calibrate mode")->capture_default_str();
  simulate->add_option("--alpha", sim_alpha, "Significance level for calibrate mode")
      ->capture_default_str();
  simulate->add_option("--threads", threads, "Worker threads for calibrate mode")
      ->capture_default_str();
  simulate->add_option("--format", sim_format, "text or json (calibrate mode)")
      ->capture_default_str();
  simulate->add_option("--output,-o", sim_output, "Write here instead of stdout");

  // plot
  MappingFlags plot_flags;
  std::string plot_kind = "forest", plot_output;
  double plot_confidence = 0.95;
  std::uint64_t plot_seed = rc::default_seed;
  auto* plot = app.add_subcommand("plot", "Write an SVG strip plot or forest plot");
  plot_flags.attach(plot);
  plot->add_option("--kind", plot_kind, "strip or forest")->capture_default_str();
  plot->add_option("--output,-o", plot_output, "SVG file to write")->required();
  plot->add_option("--confidence", plot_confidence, "Confidence level of effect intervals")
      ->capture_default_str();
  plot->add_option("--seed", plot_seed, "Jitter seed")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return rc::exit_code::usage;
  }

  try {
    if (*analyze) {
      check_format(analyze_format);
      rc::AnalysisOptions options;
      options.alpha = alpha;
      options.confidence = confidence;
      options.seed = seed;
      options.replication = replication_from(independence, timing);
      rc::AnalysisReport report;
      if (!summaries.empty()) {
        report = rc::analyze_summaries_file(summaries, options);
      } else {
        if (analyze_flags.input.empty())
          throw rc::ConfigError("analyze needs an input CSV or --from-summaries");
        report = rc::analyze(analyze_flags.input, analyze_flags.mapping(), options);
      }
      emit(analyze_format == "json" ? rc::render_json(report) : rc::render_text(report),
           analyze_output);
      return rc::exit_code::success;
    }

    if (*validate) {
      check_format(validate_format);
      const auto dataset = rc::parse_csv(validate_flags.input, validate_flags.mapping());
      const auto summary = rc::summarize_design(dataset);
      const auto report = rc::validate_grbd(summary);
      if (validate_format == "json") {
        rc::Json checks = rc::Json::array();
        for (const auto& c : report.checks)
          checks.push_back({{"name", c.name},
                            {"severity", rc::detail::severity_name(c.severity)},
                            {"passed", c.passed()},
                            {"message", c.message}});
        rc::Json j{{"schema", rc::schema_version},
                   {"input", validate_flags.input},
                   {"n", summary.n},
                   {"n_excluded", summary.n_excluded},
                   {"overall", report.overall},
                   {"checks", checks}};
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "Validation of " << validate_flags.input << ": "
                  << (report.overall ? "pass" : "FAIL") << "\n";
        for (const auto& c : report.checks)
          std::cout << "  " << (c.severity == rc::Severity::ok        ? "[ok]  "
                                : c.severity == rc::Severity::warning ? "[warn]"
                                                                      : "[FAIL]")
                    << " " << c.name << ": " << c.message << "\n";
      }
      return report.overall ? rc::exit_code::success : rc::exit_code::design;
    }

    if (*classify) {
      check_format(classify_format);
      const auto c = rc::classify_replication(rc::parse_independence(classify_independence),
                                              rc::parse_timing(classify_timing));
      if (classify_format == "json")
        std::cout << rc::to_json(c).dump(2) << "\n";
      else
        std::cout << c.label << " (panel " << c.figure_panel << ")\n";
      return rc::exit_code::success;
    }

    if (*simulate) {
      if (te->count() == 0) sim.treatment_effects.assign(static_cast<std::size_t>(sim.t), 0.0);
      if (be->count() == 0) sim.batch_effects.assign(static_cast<std::size_t>(sim.b), 0.0);
      if (sim_mode == "data") {
        emit(rc::to_csv(rc::generate_grbd(sim)), sim_output);
      } else if (sim_mode == "calibrate") {
        check_format(sim_format);
        const auto result = rc::calibration_study(sim, n_sims, sim_alpha, threads);
        if (sim_format == "json") {
          emit(rc::to_json(result).dump(2) + "\n", sim_output);
        } else {
          char buf[256];
          std::snprintf(buf, sizeof buf,
                        "Calibration: %d simulations, alpha = %g\n"
                        "  treatment vs MS(Error):       %.4f (MC se %.4f)\n"
                        "  treatment vs MS(interaction): %.4f (MC se %.4f)\n"
                        "  interaction vs MS(Error):     %.4f (MC se %.4f)\n",
                        result.n_sims, result.alpha, result.eq1.rate, result.eq1.monte_carlo_se,
                        result.eq2.rate, result.eq2.monte_carlo_se, result.interaction.rate,
                        result.interaction.monte_carlo_se);
          emit(buf, sim_output);
        }
      } else {
        throw rc::ConfigError("unknown simulate mode '" + sim_mode + "' (expected data or calibrate)");
      }
      return rc::exit_code::success;
    }

    if (*plot) {
      const auto kind = rc::parse_plot_kind(plot_kind);
      rc::AnalysisOptions options;
      options.confidence = plot_confidence;
      options.seed = plot_seed;
      const auto report = rc::analyze(plot_flags.input, plot_flags.mapping(), options);
      rc::write_svg(report, kind, plot_output, plot_seed);
      return rc::exit_code::success;
    }
  } catch (const rc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rc::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return rc::exit_code::numeric;
  }
  return rc::exit_code::usage;
}
