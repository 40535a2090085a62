#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ot1d/lattice.hpp"
#include "ot1d/sweep.hpp"

using namespace ot1d;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

bool same_number(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b;
}

}  // namespace

TEST_CASE("config text parses every section") {
  const std::string text = R"(
# comment line
[family]
kind = rademacher_sum
n = 1, 4, 16
normalize = true

[distances]
metrics = rho, w1
psi = exp

[run]
threads = 2
timings = false

[assertions]
max_w1_over_tau = 3.0
plateau_reference_param = 8
)";
  const auto cfg = SweepConfig::parse_text(text);
  CHECK(cfg.kind == "rademacher_sum");
  REQUIRE(cfg.n_grid.size() == 3);
  CHECK(cfg.n_grid[2] == 16);
  CHECK(cfg.normalize);
  REQUIRE(cfg.metrics.size() == 2);
  CHECK(cfg.metrics[1] == "w1");
  CHECK(cfg.threads == 2);
  REQUIRE(cfg.assertions.size() == 1);
  CHECK(cfg.assertions[0].first == "max_w1_over_tau");
  CHECK(cfg.assertions[0].second == doctest::Approx(3.0));
  CHECK(cfg.plateau_reference_param == doctest::Approx(8.0));
  cfg.validate();
}

TEST_CASE("config parser rejects malformed input") {
  CHECK_THROWS(SweepConfig::parse_text("[family]\nbogus_key = 1\n"));
  CHECK_THROWS(SweepConfig::parse_text("[nosuchsection]\n"));
  CHECK_THROWS(SweepConfig::parse_text("kind = poisson\n"));  // no section
  CHECK_THROWS(SweepConfig::parse_text("[family]\nkind poisson\n"));
  CHECK_THROWS(SweepConfig::parse_text("[family]\nn = 2.5\n"));
  CHECK_THROWS(SweepConfig::parse_text("[assertions]\nnot_an_assertion = 1\n"));
  CHECK_THROWS(SweepConfig::parse_text("[run]\ntimings = maybe\n"));
}

TEST_CASE("config validation") {
  SweepConfig cfg;
  cfg.kind = "poisson";
  CHECK_THROWS(cfg.validate());  // empty lambda grid
  cfg.lambda_grid = {1.0, 4.0};
  cfg.validate();
  cfg.metrics = {"nope"};
  CHECK_THROWS(cfg.validate());
  cfg.metrics = {"w1"};
  cfg.psi = "banana";
  CHECK_THROWS(cfg.validate());
  cfg.psi = "pow";
  cfg.pow_p = 0.5;
  CHECK_THROWS(cfg.validate());
  cfg.pow_p = 2.0;
  cfg.threads = 0;
  CHECK_THROWS(cfg.validate());
  cfg.threads = 1;
  cfg.validate();

  SweepConfig bad;
  bad.kind = "martian";
  CHECK_THROWS(bad.validate());
  SweepConfig iid;
  iid.kind = "bounded_iid";
  iid.n_grid = {2};
  CHECK_THROWS(iid.validate());  // needs file =
}

TEST_CASE("a small sweep fills rows in grid order") {
  SweepConfig cfg;
  cfg.kind = "rademacher_sum";
  cfg.n_grid = {1, 4, 16};
  cfg.normalize = true;
  cfg.metrics = {"rho", "levy", "w1", "smoothing"};
  cfg.assertions = {{"max_w1_over_tau", 3.0},
                    {"levy_rate_constant", 1.0},
                    {"smoothing_bounds_rho", 0.0}};
  const auto out = run_sweep(cfg);
  REQUIRE(out.rows.size() == 3);
  CHECK(out.summary.all_rows_ok);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = out.rows[i];
    CHECK(r.family == "rademacher_sum");
    CHECK(r.error.empty());
    CHECK(r.sigma == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::isfinite(r.rho));
    CHECK(std::isfinite(r.w1));
    CHECK(std::isnan(r.w2));   // not requested
    CHECK(std::isnan(r.wpsi));
    CHECK(r.runtime_ms == 0.0);
  }
  CHECK(out.rows[0].param == 1.0);
  CHECK(out.rows[1].param == 4.0);
  CHECK(out.rows[2].param == 16.0);
  // normalized sums report tau as the almost-sure summand bound 1/sqrt(n)
  CHECK(out.rows[1].tau == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.rows[2].w1_over_tau ==
        doctest::Approx(out.rows[2].w1 * 4.0).epsilon(1e-12));
  // contraction along n: the distances shrink
  CHECK(out.rows[2].rho < out.rows[0].rho);
  CHECK(out.rows[2].w1 < out.rows[0].w1);

  REQUIRE(out.summary.assertions.size() == 3);
  for (const auto& a : out.summary.assertions) CHECK(a.pass);
  CHECK(out.summary.all_assertions_pass);
  const auto range = out.summary.ratio_range.at("w1_over_tau");
  CHECK(range.first <= range.second);
  CHECK(range.second <= 3.0);
}

TEST_CASE("poisson sweep reports the statulevicius tau") {
  SweepConfig cfg;
  cfg.kind = "poisson";
  cfg.lambda_grid = {2.0, 8.0};
  cfg.metrics = {"w1"};
  const auto out = run_sweep(cfg);
  REQUIRE(out.rows.size() == 2);
  for (const auto& r : out.rows) {
    CHECK(r.error.empty());
    CHECK(r.tau == doctest::Approx(r.tau_stat));
    CHECK(r.tau == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(r.sigma == doctest::Approx(std::sqrt(r.param)).epsilon(1e-6));
  }
}

TEST_CASE("per-row failures are contained, not fatal") {
  SweepConfig cfg;
  cfg.kind = "bounded_iid";
  cfg.file = "/tmp/ot1d_definitely_missing_law.txt";
  cfg.n_grid = {2, 3};
  cfg.metrics = {"w1"};
  cfg.assertions = {{"max_w1_over_tau", 3.0}};
  const auto out = run_sweep(cfg);
  REQUIRE(out.rows.size() == 2);
  for (const auto& r : out.rows) {
    CHECK_FALSE(r.error.empty());
    CHECK(std::isnan(r.w1));
  }
  CHECK_FALSE(out.summary.all_rows_ok);
  REQUIRE(out.summary.assertions.size() == 1);
  CHECK_FALSE(out.summary.assertions[0].pass);  // nothing observed
  CHECK_FALSE(out.summary.all_assertions_pass);
}

TEST_CASE("bounded_iid sweep consumes a law file") {
  const auto base = make_lattice({-1.0, 0.0, 2.0}, {0.5, 0.3, 0.2});
  const std::string law_path = "/tmp/ot1d_sweep_base_law.txt";
  save_law_file(base, law_path);

  SweepConfig cfg;
  cfg.kind = "bounded_iid";
  cfg.file = law_path;
  cfg.n_grid = {4};
  cfg.normalize = true;
  cfg.metrics = {"w1"};
  const auto out = run_sweep(cfg);
  REQUIRE(out.rows.size() == 1);
  CHECK(out.rows[0].error.empty());
  CHECK(out.rows[0].sigma == doctest::Approx(1.0).epsilon(1e-9));
  // tau = max |support - mean| / sqrt(n var)
  const double bound = std::max(std::fabs(base.min_support() - base.mean()),
                                std::fabs(base.max_support() - base.mean()));
  CHECK(out.rows[0].tau ==
        doctest::Approx(bound / std::sqrt(4.0 * base.variance()))
            .epsilon(1e-12));
  std::remove(law_path.c_str());
}

TEST_CASE("reports are deterministic and consistent across formats") {
  SweepConfig cfg;
  cfg.kind = "rademacher_sum";
  cfg.n_grid = {1, 4, 16};
  cfg.normalize = true;
  cfg.metrics = {"rho", "w1"};
  cfg.threads = 2;
  cfg.csv_path = "/tmp/ot1d_sweep_a.csv";
  cfg.json_path = "/tmp/ot1d_sweep_a.json";
  cfg.companion_path = "/tmp/ot1d_sweep_a_companion.csv";
  const auto out = run_sweep(cfg);
  emit_report(out, cfg);

  // run again into different files: byte-identical CSV
  SweepConfig cfg2 = cfg;
  cfg2.csv_path = "/tmp/ot1d_sweep_b.csv";
  cfg2.json_path = "/tmp/ot1d_sweep_b.json";
  cfg2.companion_path = "/tmp/ot1d_sweep_b_companion.csv";
  emit_report(run_sweep(cfg2), cfg2);
  CHECK(slurp(cfg.csv_path) == slurp(cfg2.csv_path));
  CHECK(slurp(cfg.json_path) == slurp(cfg2.json_path));

  // CSV shape
  const auto csv = lines_of(slurp(cfg.csv_path));
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] ==
        "family,param,atoms,sigma,tau,tau_stat,tau_bern,rho,levy,w1,w2,wpsi,"
        "w1_over_tau,wpsi_over_tau,rho_sigma_over_tau,smoothing,c7,c11,error");
  const auto row1 = csv_fields(csv[1]);
  REQUIRE(row1.size() >= 18);
  CHECK(row1[0] == "rademacher_sum");
  CHECK(row1[1] == "1");
  CHECK(row1[8] == "nan");  // levy not requested

  // companion columns are copied verbatim from the main table
  const auto comp = lines_of(slurp(cfg.companion_path));
  REQUIRE(comp.size() == 4);
  CHECK(comp[0] == "param,w1_over_tau,wpsi_over_tau,rho_sigma_over_tau");
  for (int i = 1; i <= 3; ++i) {
    const auto main_row = csv_fields(csv[static_cast<std::size_t>(i)]);
    const auto comp_row = csv_fields(comp[static_cast<std::size_t>(i)]);
    REQUIRE(comp_row.size() == 4);
    CHECK(comp_row[0] == main_row[1]);
    CHECK(comp_row[1] == main_row[12]);
    CHECK(comp_row[2] == main_row[13]);
    CHECK(comp_row[3] == main_row[14]);
  }

  // JSON round trip restores every numeric field exactly
  const auto back = rows_from_json(cfg.json_path);
  REQUIRE(back.size() == out.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto& a = out.rows[i];
    const auto& b = back[i];
    CHECK(a.family == b.family);
    CHECK(a.atoms == b.atoms);
    CHECK(a.error == b.error);
    CHECK(same_number(a.param, b.param));
    CHECK(same_number(a.sigma, b.sigma));
    CHECK(same_number(a.tau, b.tau));
    CHECK(same_number(a.rho, b.rho));
    CHECK(same_number(a.levy, b.levy));
    CHECK(same_number(a.w1, b.w1));
    CHECK(same_number(a.w2, b.w2));
    CHECK(same_number(a.wpsi, b.wpsi));
    CHECK(same_number(a.w1_over_tau, b.w1_over_tau));
    CHECK(same_number(a.smoothing, b.smoothing));
    CHECK(same_number(a.c7, b.c7));
    CHECK(same_number(a.c11, b.c11));
  }

  for (const auto& p :
       {cfg.csv_path, cfg.json_path, cfg.companion_path, cfg2.csv_path,
        cfg2.json_path, cfg2.companion_path})
    std::remove(p.c_str());
}

TEST_CASE("emit_report needs a destination and rows") {
  SweepConfig cfg;
  cfg.kind = "rademacher_sum";
  cfg.n_grid = {1};
  cfg.metrics = {"w1"};
  const auto out = run_sweep(cfg);
  CHECK_THROWS(emit_report(out, cfg));  // no paths set
  SweepOutcome empty;
  SweepConfig with_path = cfg;
  with_path.csv_path = "/tmp/ot1d_sweep_should_not_exist.csv";
  CHECK_THROWS(emit_report(empty, with_path));
}

TEST_CASE("config files parse like config text") {
  const std::string path = "/tmp/ot1d_sweep_config.cfg";
  {
    std::ofstream out(path);
    out << "[family]\nkind = poisson\nlambda = 1, 10\n\n[distances]\n"
           "metrics = w1\n";
  }
  const auto cfg = SweepConfig::parse_file(path);
  CHECK(cfg.kind == "poisson");
  REQUIRE(cfg.lambda_grid.size() == 2);
  CHECK(cfg.lambda_grid[1] == doctest::Approx(10.0));
  std::remove(path.c_str());
  CHECK_THROWS(SweepConfig::parse_file("/tmp/ot1d_no_such_config.cfg"));
}

TEST_CASE("wpsi assertions on a tiny normalized sweep") {
  SweepConfig cfg;
  cfg.kind = "rademacher_sum";
  cfg.n_grid = {1, 4, 16};
  cfg.normalize = true;
  cfg.metrics = {"wpsi"};
  cfg.psi = "exp";
  cfg.plateau_reference_param = 8.0;
  cfg.assertions = {{"max_wpsi", 5.0},
                    {"wpsi_plateau_cap", 1.25},
                    {"wpsi_scaled_spread", 2.0}};
  const auto out = run_sweep(cfg);
  REQUIRE(out.summary.assertions.size() == 3);
  for (const auto& a : out.summary.assertions) {
    INFO(a.name << " observed " << a.observed << " bound " << a.bound);
    CHECK(a.pass);
  }
  // the scaled column wpsi * sqrt(n) is the plateau the spread measures
  for (const auto& r : out.rows) CHECK(std::isfinite(r.wpsi));
}
