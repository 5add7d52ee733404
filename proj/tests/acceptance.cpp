// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "replicheck/replicheck.hpp"

#ifndef REPLICHECK_CLI
#error "REPLICHECK_CLI must name the command-line binary"
#endif

namespace fs = std::filesystem;
using namespace replicheck;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::pair<int, std::string> run(const std::string& args) {
  const std::string cmd = std::string(REPLICHECK_CLI) + " " + args + " 2>&1";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, out};
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "replicheck_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Dataset transform(const Dataset& d, double a, double c) {
  auto rows = d.observations();
  for (auto& o : rows) o.outcome = a * o.outcome + c;
  return Dataset(d.name(), rows);
}

// ---------------------------------------------------------------------------

Outcome published_table() {
  Outcome o;
  const auto input = workdir() / "three_site.json";
  std::ofstream(input) << R"({"n": 438, "terms": [
  {"name": "Site", "df": 2, "ss": 2399368},
  {"name": "Treatment", "df": 1, "ss": 533121},
  {"name": "S×T", "df": 2, "ss": 425825},
  {"name": "Error", "df": 432, "ss": 24434637}]})";
  const auto start = std::chrono::steady_clock::now();
  const auto [code, out] = run("analyze --from-summaries " + input.string() + " --format json");
  const auto [tcode, text] = run("analyze --from-summaries " + input.string());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(code == 0 && tcode == 0, "CLI exit status");
  if (code != 0) return o;

  const auto table = anova_from_json(Json::parse(out)["anova"]);
  const char* ms_want[] = {"1,199,684", "533,121", "212,912", "56,562"};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto got = display::quantity(table.rows[k].ms);
    o.require(got == ms_want[k], "MS " + table.rows[k].label + " = " + got);
    o.require(text.find(ms_want[k]) != std::string::npos, std::string("text lacks ") + ms_want[k]);
  }
  const double f_want[] = {21.2, 9.4, 3.8};
  const char* p_want[] = {"<0.001", "0.002", "0.024"};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& t = *table.rows[k].vs_error;
    o.require(std::fabs(*t.f - f_want[k]) <= 0.05, "F_Error " + fmt("%.4f", *t.f));
    o.require(display::p_value(t.p->value()) == p_want[k],
              "P_Error " + display::p_value(t.p->value()));
  }
  const auto& eq2 = *table.row(AnovaTerm::treatment).vs_interaction;
  o.require(std::fabs(*eq2.f - 2.5) <= 0.05, "F_SxT " + fmt("%.4f", *eq2.f));
  o.require(std::fabs(eq2.p->value() - 0.254) <= 0.0005, "P_SxT " + fmt("%.5f", eq2.p->value()));
  o.require(secs < 1.0, "runtime " + fmt("%.3f s", secs));
  o.detail = (o.pass ? "MS 1,199,684/533,121/212,912/56,562; F_Error " +
                           fmt("%.2f", *table.rows[0].vs_error->f) + "/" +
                           fmt("%.2f", *table.rows[1].vs_error->f) + "/" +
                           fmt("%.2f", *table.rows[2].vs_error->f) + "; F_SxT " +
                           fmt("%.3f", *eq2.f) + ", P_SxT " + fmt("%.5f", eq2.p->value()) + "; " +
                           fmt("%.3f s", secs)
                     : o.detail);
  return o;
}

Outcome f_spot_check() {
  Outcome o;
  const double p = f_sf(2.5, 1, 2).value();
  // Upper tail of t with 2 df at x: (1 - x / sqrt(2 + x^2)) / 2; doubled for |T| > x.
  const double x = std::sqrt(2.5);
  const double closed = 1.0 - x / std::sqrt(2.0 + x * x);
  o.require(std::fabs(p - 0.25465) <= 1e-4, "f_sf = " + fmt("%.6f", p));
  o.require(std::fabs(p - closed) <= 1e-12, "closed form " + fmt("%.12f", closed));
  if (o.pass) o.detail = "f_sf(2.5, 1, 2) = " + fmt("%.8f", p) + ", closed form " + fmt("%.8f", closed);
  return o;
}

Outcome ss_properties() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20240601);
  double worst_add = 0, worst_bal = 0, worst_inv = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto d = oracle::random_dataset(gen, 2 + rep % 4, 2 + (rep / 4) % 5, 2, 12,
                                          std::pow(10.0, rep % 9 - 4));
    const auto s = sequential_ss(d);
    double sum = s.ss_error;
    for (const auto& e : s.effects) sum += e.ss;
    worst_add = std::max(worst_add, oracle::rel_diff(sum, s.total_ss));
  }
  for (int rep = 0; rep < 200; ++rep) {
    const int r = 2 + rep % 6;
    const auto d = oracle::random_dataset(gen, 2 + rep % 4, 2 + (rep / 4) % 5, r, r,
                                          std::pow(10.0, rep % 7 - 3));
    const auto want = oracle::balanced_two_way(d);
    const auto got = sequential_ss(d);
    for (auto [a, b] : {std::pair{got.effect(Term::batch).ss, want.batch},
                        std::pair{got.effect(Term::treatment).ss, want.treatment},
                        std::pair{got.effect(Term::interaction).ss, want.interaction},
                        std::pair{got.ss_error, want.error}, std::pair{got.total_ss, want.total}})
      worst_bal = std::max(worst_bal, oracle::rel_diff(a, b));
  }
  for (int rep = 0; rep < 200; ++rep) {
    const auto d = oracle::random_dataset(gen, 2 + rep % 3, 2 + rep % 4, 2, 9);
    const auto base = grbd_anova(d);
    const double a = rep % 2 ? -3.7 : 0.013 * (rep + 1), c = 250.0 * (rep % 5) - 400;
    const auto other = grbd_anova(transform(d, a, c));
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& x = *base.rows[k].vs_error;
      const auto& y = *other.rows[k].vs_error;
      worst_inv = std::max({worst_inv, oracle::rel_diff(*x.f, *y.f),
                            std::fabs(x.p->value() - y.p->value())});
    }
    const auto& x = *base.rows[1].vs_interaction;
    const auto& y = *other.rows[1].vs_interaction;
    worst_inv = std::max({worst_inv, oracle::rel_diff(*x.f, *y.f),
                          std::fabs(x.p->value() - y.p->value())});
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(worst_add <= 1e-8, "additivity " + fmt("%.2e", worst_add));
  o.require(worst_bal <= 1e-8, "balanced oracle " + fmt("%.2e", worst_bal));
  o.require(worst_inv <= 1e-9, "affine invariance " + fmt("%.2e", worst_inv));
  o.require(secs < 30, "runtime " + fmt("%.1f s", secs));
  if (o.pass)
    o.detail = "additivity " + fmt("%.1e", worst_add) + " over 1000, balanced oracle " +
               fmt("%.1e", worst_bal) + " over 200, F/p invariance " + fmt("%.1e", worst_inv) +
               "; " + fmt("%.1f s", secs);
  return o;
}

Outcome permutation_oracle() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  SimParams p;
  double worst = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    p.seed = substream_seed(7001, k);
    const auto d = generate_grbd(p);
    const auto table = grbd_anova(d);
    const double f_p = table.row(AnovaTerm::treatment).vs_error->p->value();
    const double perm_p =
        permutation_pvalue(d, PermutationStatistic::eq1_treatment, 10000, substream_seed(7002, k))
            .value();
    worst = std::max(worst, std::fabs(f_p - perm_p));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(worst <= 0.03, "max |p_perm - p_F| = " + fmt("%.4f", worst));
  o.require(secs < 120, "runtime " + fmt("%.1f s", secs));
  if (o.pass)
    o.detail = "max |p_perm - p_F| = " + fmt("%.4f", worst) + " over 50 datasets; " +
               fmt("%.1f s", secs);
  return o;
}

Outcome calibration() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  SimParams p;
  const auto c = calibration_study(p, 2000, 0.05, 4);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto [name, r] : {std::pair{"eq1", c.eq1}, std::pair{"interaction", c.interaction},
                         std::pair{"eq2", c.eq2}})
    o.require(r.rate >= 0.035 && r.rate <= 0.065, std::string(name) + " " + fmt("%.4f", r.rate));
  o.require(secs < 120, "runtime " + fmt("%.1f s", secs));
  if (o.pass)
    o.detail = "eq1 " + fmt("%.4f", c.eq1.rate) + ", interaction " +
               fmt("%.4f", c.interaction.rate) + ", eq2 " + fmt("%.4f", c.eq2.rate) + "; " +
               fmt("%.1f s", secs);
  return o;
}

Outcome power_asymmetry() {
  Outcome o;
  SimParams p;
  p.treatment_effects = {-0.25, 0.25};
  p.interaction_sd = 0.0;
  p.seed = 31337;
  const auto c = calibration_study(p, 2000, 0.05, 4);
  const double bound = c.eq1.rate + 2 * c.eq1.monte_carlo_se;
  o.require(c.eq2.rate <= bound, "eq2 " + fmt("%.4f", c.eq2.rate) + " > " + fmt("%.4f", bound));
  if (o.pass)
    o.detail = "eq2 " + fmt("%.4f", c.eq2.rate) + " <= eq1 " + fmt("%.4f", c.eq1.rate) +
               " + 2 se (" + fmt("%.4f", bound) + ")";
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto dir = workdir();
  const auto csv = (dir / "det.csv").string();
  o.require(run("simulate --seed 99 --treatment-effects -0.5 0.5 --interaction-sd 0.7 -o " + csv)
                    .first == 0,
            "simulate");
  for (const char* name : {"a.json", "b.json"})
    o.require(run("analyze " + csv + " --seed 99 --format json -o " + (dir / name).string()).first ==
                  0,
              "analyze");
  for (const char* kind : {"strip", "forest"})
    for (const char* name : {"a", "b"})
      o.require(run(std::string("plot ") + csv + " --kind " + kind + " --seed 99 -o " +
                    (dir / (std::string(name) + "_" + kind + ".svg")).string())
                        .first == 0,
                "plot");
  const auto ja = slurp(dir / "a.json"), jb = slurp(dir / "b.json");
  o.require(!ja.empty() && ja == jb, "JSON differs");
  // The library path gives the same bytes as the CLI.
  AnalysisOptions opts;
  opts.seed = 99;
  const auto lib = render_json(analyze(csv, ColumnMapping{"outcome", "treatment", "batch", {}, {}},
                                       opts));
  o.require(lib == ja, "library JSON differs from CLI JSON");
  for (const char* kind : {"strip", "forest"}) {
    const auto a = slurp(dir / ("a_" + std::string(kind) + ".svg"));
    const auto b = slurp(dir / ("b_" + std::string(kind) + ".svg"));
    o.require(!a.empty() && a == b, std::string(kind) + " SVG differs");
  }
  if (o.pass) o.detail = "JSON (" + std::to_string(ja.size()) + " bytes), strip and forest SVG identical";
  return o;
}

Outcome taxonomy() {
  Outcome o;
  const std::map<char, std::string> want = {{'A', "independent sequential"},
                                            {'B', "partially independent sequential"},
                                            {'C', "independent parallel"},
                                            {'D', "partially independent parallel"},
                                            {'E', "independent staggered"},
                                            {'F', "partially independent staggered"}};
  std::map<char, std::string> got;
  int calls = 0;
  for (auto i : {Independence::full, Independence::partial})
    for (auto t : {Timing::sequential, Timing::staggered, Timing::parallel}) {
      const auto c = classify_replication(i, t);
      got[c.figure_panel] = c.label;
      ++calls;
    }
  o.require(calls == 6 && got.size() == 6, "duplicate panels");
  o.require(got == want, "labels differ");
  if (o.pass) o.detail = "panels A-F, six distinct labels";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ANOVA table from published summaries", published_table},
      {"F survival function spot check", f_spot_check},
      {"sum-of-squares properties", ss_properties},
      {"permutation oracle agreement", permutation_oracle},
      {"null calibration", calibration},
      {"stringent-test power asymmetry", power_asymmetry},
      {"end-to-end determinism", determinism},
      {"replication taxonomy completeness", taxonomy},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu acceptance criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
