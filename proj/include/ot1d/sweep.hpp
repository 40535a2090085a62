#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ot1d/lattice.hpp"

namespace ot1d {

// Plain-text sweep configuration: "key = value" lines under the section
// headers [family], [distances], [run], [assertions]; '#' starts a comment.
struct SweepConfig {
  // [family]: kind in {poisson, binomial, rademacher_sum, bounded_iid,
  // custom}; lambda / n are comma-separated parameter grids.
  std::string kind;
  std::vector<double> lambda_grid;
  std::vector<long> n_grid;
  double p = 0.5;
  std::string file;
  bool normalize = false;

  // [distances]: metrics subset of {rho, levy, w1, w2, wpsi, smoothing,
  // bands}; psi in {exp, abs, pow} with pow_p for the power cost.
  std::vector<std::string> metrics = {"rho",  "levy",      "w1",   "w2",
                                      "wpsi", "smoothing", "bands"};
  std::string psi = "exp";
  double pow_p = 2.0;

  // [run]
  std::string csv_path, json_path, companion_path;
  int threads = 1;
  bool timings = false;

  // [assertions]: name = bound, evaluated over the finished rows.
  std::vector<std::pair<std::string, double>> assertions;
  double plateau_reference_param = 10.0;

  static SweepConfig parse_file(const std::string& path);
  static SweepConfig parse_text(const std::string& text);
  void validate() const;
};

struct SweepRow {
  std::string family;
  double param = 0.0;
  long atoms = 0;
  double sigma = 0.0;
  double tau = 0.0;       // reporting convention: a.s. bound over the
                          // normalization for bounded sums, Statulevicius
                          // estimate for Poisson and custom laws
  double tau_stat = 0.0;  // Statulevicius estimate, orders 3..8
  double tau_bern = 0.0;  // moment (Bernstein-class) estimate, orders 3..8
  double rho = 0.0, levy = 0.0, w1 = 0.0, w2 = 0.0, wpsi = 0.0;
  double w1_over_tau = 0.0, wpsi_over_tau = 0.0, rho_sigma_over_tau = 0.0;
  double smoothing = 0.0;        // smoothing bound at T = 1/tau
  double c7 = 0.0, c11 = 0.0;    // coupling-band constants (c11 at c10=0.5)
  double runtime_ms = 0.0;       // zero unless timings are enabled
  std::string error;             // empty on success; metrics not computed
                                 // are NaN
};

struct AssertionResult {
  std::string name;
  double bound = 0.0;
  double observed = 0.0;
  bool pass = false;
};

struct SweepSummary {
  // min/max per ratio column over rows that computed it.
  std::map<std::string, std::pair<double, double>> ratio_range;
  std::vector<AssertionResult> assertions;
  bool all_assertions_pass = true;
  bool all_rows_ok = true;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

// One row per family instance, computed concurrently up to config.threads
// but always emitted in grid order; per-row failures are recorded in the
// row and the sweep continues.
SweepOutcome run_sweep(const SweepConfig& config);

// Writes whichever of csv_path / json_path / companion_path are set: a CSV
// with fixed column order and 12 significant digits, a JSON mirror of the
// rows and summary, and a plot-ready parameter-vs-ratio companion CSV.
void emit_report(const SweepOutcome& outcome, const SweepConfig& config);

// Reads rows back from an emitted JSON report (round-trip checks).
std::vector<SweepRow> rows_from_json(const std::string& path);

}  // namespace ot1d
