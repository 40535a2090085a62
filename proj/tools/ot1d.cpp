// Command-line front end: parameter sweeps, pairwise distances, class
// certificates and exponential tilting for lattice laws.
//
// Law specs are either a named family ("rademacher", "bernoulli:0.3",
// "binomial:64,0.5,normalized", "rademacher_sum:256,normalized",
// "poisson:10", "poisson_raw:10", "poisson_window:4,0,80",
// "gauss_lattice:1,0.01,8", "gaussian:0,1") or a path to a law file with
// one "x mass" pair per line.

#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ot1d/cumulants.hpp"
#include "ot1d/families.hpp"
#include "ot1d/lattice.hpp"
#include "ot1d/sweep.hpp"
#include "ot1d/tilt.hpp"
#include "ot1d/transport.hpp"

namespace {

std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double num_arg(const std::vector<std::string>& args, std::size_t i,
               const std::string& spec) {
  if (i >= args.size())
    throw std::runtime_error("law spec '" + spec + "': missing parameter");
  return std::stod(args[i]);
}

double num_arg_or(const std::vector<std::string>& args, std::size_t i,
                  double fallback) {
  return i < args.size() ? std::stod(args[i]) : fallback;
}

bool flag_arg(const std::vector<std::string>& args, std::size_t i,
              const std::string& name) {
  return i < args.size() && args[i] == name;
}

ot1d::Law parse_law(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::vector<std::string> args =
      colon == std::string::npos ? std::vector<std::string>{}
                                 : split_args(spec.substr(colon + 1));
  if (head == "rademacher") return ot1d::rademacher();
  if (head == "bernoulli") return ot1d::bernoulli_centered(num_arg(args, 0, spec));
  if (head == "binomial")
    return ot1d::binomial_centered(
        static_cast<long>(num_arg(args, 0, spec)), num_arg(args, 1, spec),
        flag_arg(args, 2, "normalized"));
  if (head == "rademacher_sum")
    return ot1d::rademacher_sum(static_cast<long>(num_arg(args, 0, spec)),
                                flag_arg(args, 1, "normalized"));
  if (head == "poisson")
    return ot1d::poisson_centered(num_arg(args, 0, spec),
                                  num_arg_or(args, 1, 1e-12));
  if (head == "poisson_raw")
    return ot1d::poisson_raw(num_arg(args, 0, spec),
                             num_arg_or(args, 1, 1e-12));
  if (head == "poisson_window")
    return ot1d::poisson_window(num_arg(args, 0, spec),
                                static_cast<long>(num_arg(args, 1, spec)),
                                static_cast<long>(num_arg(args, 2, spec)),
                                !flag_arg(args, 3, "raw"));
  if (head == "gauss_lattice")
    return ot1d::gaussian_lattice(
        num_arg(args, 0, spec), num_arg(args, 1, spec),
        args.size() > 2 ? num_arg(args, 2, spec) : 8.0);
  if (head == "gaussian")
    return ot1d::GaussianLaw(num_arg(args, 0, spec), num_arg(args, 1, spec));
  return ot1d::load_law_file(spec);
}

const ot1d::LatticeDistribution& require_lattice(const ot1d::Law& law,
                                                 const char* what) {
  const auto* d = std::get_if<ot1d::LatticeDistribution>(&law);
  if (!d)
    throw std::runtime_error(std::string(what) + " needs a lattice law");
  return *d;
}

int run_sweep_command(const std::string& config_path) {
  const auto cfg = ot1d::SweepConfig::parse_file(config_path);
  const auto outcome = ot1d::run_sweep(cfg);
  if (!cfg.csv_path.empty() || !cfg.json_path.empty() ||
      !cfg.companion_path.empty())
    ot1d::emit_report(outcome, cfg);

  nlohmann::json j;
  j["rows"] = outcome.rows.size();
  j["rows_ok"] = outcome.summary.all_rows_ok;
  for (const auto& r : outcome.rows)
    if (!r.error.empty())
      j["row_errors"].push_back({{"param", r.param}, {"error", r.error}});
  nlohmann::json ranges = nlohmann::json::object();
  for (const auto& [name, range] : outcome.summary.ratio_range)
    ranges[name] = {range.first, range.second};
  j["ratio_range"] = ranges;
  j["assertions"] = nlohmann::json::array();
  for (const auto& a : outcome.summary.assertions)
    j["assertions"].push_back({{"name", a.name},
                               {"bound", a.bound},
                               {"observed", a.observed},
                               {"pass", a.pass}});
  j["pass"] =
      outcome.summary.all_assertions_pass && outcome.summary.all_rows_ok;
  std::cout << j.dump(2) << std::endl;
  return j["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-dimensional transport distances, certificates and "
               "bounds for lattice laws"};
  app.require_subcommand(1);

  auto* sweep_cmd =
      app.add_subcommand("sweep", "run a family sweep from a config file; "
                                  "exit 0 iff every assertion passes");
  std::string config_path;
  sweep_cmd->add_option("config", config_path, "key = value config file")
      ->required();

  auto* dist_cmd =
      app.add_subcommand("dist", "distance between two laws (second spec "
                                 "may be 'companion')");
  std::string spec_f, spec_g;
  std::string metric = "w1", psi = "exp";
  double wp_p = 2.0, pow_p = 2.0;
  dist_cmd->add_option("f", spec_f, "first law spec")->required();
  dist_cmd->add_option("g", spec_g, "second law spec or 'companion'")
      ->required();
  dist_cmd->add_option("--metric", metric, "rho, levy, w1, wp or wpsi")
      ->check(CLI::IsMember({"rho", "levy", "w1", "wp", "wpsi"}));
  dist_cmd->add_option("--p", wp_p, "order for --metric wp");
  dist_cmd->add_option("--psi", psi, "Orlicz cost for --metric wpsi")
      ->check(CLI::IsMember({"exp", "abs", "pow"}));
  dist_cmd->add_option("--pow-p", pow_p, "exponent for --psi pow");

  auto* certify_cmd =
      app.add_subcommand("certify", "class-membership certificate");
  std::string spec_c, klass;
  double cert_tau = 0.0;
  int order = 8;
  certify_cmd->add_option("law", spec_c, "law spec")->required();
  certify_cmd->add_option("--class", klass, "stat, bern, sakh or a1")
      ->required()
      ->check(CLI::IsMember({"stat", "bern", "sakh", "a1"}));
  auto* tau_opt =
      certify_cmd->add_option("--tau", cert_tau, "tau to certify against");
  certify_cmd->add_option("--order", order, "highest cumulant/moment order");

  auto* tilt_cmd =
      app.add_subcommand("tilt", "solve for the exponential tilt reaching "
                                 "a target mean");
  std::string spec_t;
  double target_mean = 0.0, tilt_tau = 0.0;
  tilt_cmd->add_option("law", spec_t, "law spec (centered)")->required();
  tilt_cmd->add_option("--target-mean", target_mean, "mean to tilt to")
      ->required();
  tilt_cmd->add_option("--tau", tilt_tau,
                       "tau for domain and diagnostic checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep_cmd->parsed()) return run_sweep_command(config_path);

    if (dist_cmd->parsed()) {
      const ot1d::Law f = parse_law(spec_f);
      const ot1d::Law g =
          spec_g == "companion"
              ? ot1d::Law(ot1d::gaussian_companion(
                    require_lattice(f, "companion")))
              : parse_law(spec_g);
      ot1d::TransportResult r;
      if (metric == "rho")
        r = ot1d::kolmogorov_distance(f, g);
      else if (metric == "levy")
        r = ot1d::levy_distance(f, g);
      else if (metric == "w1")
        r = ot1d::w1_distance(f, g);
      else if (metric == "wp")
        r = ot1d::wp_distance(f, g, wp_p);
      else if (psi == "exp")
        r = ot1d::orlicz_wasserstein(f, g, ot1d::OrliczCost::exp_minus_one());
      else if (psi == "abs")
        r = ot1d::orlicz_wasserstein(f, g, ot1d::OrliczCost::absolute());
      else
        r = ot1d::orlicz_wasserstein(f, g, ot1d::OrliczCost::power(pow_p));
      std::cout << r.to_json() << std::endl;
      return 0;
    }

    if (certify_cmd->parsed()) {
      const ot1d::Law law = parse_law(spec_c);
      const auto& d = require_lattice(law, "certify");
      if (klass == "stat" || klass == "bern") {
        auto cert = klass == "stat" ? ot1d::statulevicius_tau(d, order)
                                    : ot1d::bernstein_tau_1d(d, order);
        if (tau_opt->count()) {
          cert.holds_at = cert_tau;
          cert.holds = cert_tau >= cert.tau_estimate * (1.0 - 1e-12);
        }
        std::cout << cert.to_json() << std::endl;
      } else if (klass == "sakh") {
        if (!tau_opt->count())
          throw std::runtime_error("--class sakh requires --tau");
        const auto res = ot1d::sakhanenko_holds(d, cert_tau);
        nlohmann::json j{{"class_name", "sakhanenko"},
                         {"tau", cert_tau},
                         {"holds", res.holds},
                         {"margin", res.margin},
                         {"lhs", res.lhs},
                         {"rhs", res.rhs}};
        std::cout << j.dump(2) << std::endl;
      } else {
        if (!tau_opt->count())
          throw std::runtime_error("--class a1 requires --tau");
        std::cout << ot1d::a1_grid_check(d, cert_tau).to_json() << std::endl;
      }
      return 0;
    }

    if (tilt_cmd->parsed()) {
      const ot1d::Law law = parse_law(spec_t);
      const auto& d = require_lattice(law, "tilt");
      const auto sol = ot1d::solve_tilt(d, target_mean, tilt_tau);
      nlohmann::json j{
          {"h", sol.h},
          {"iterations", sol.iterations},
          {"achieved_mean", sol.achieved_mean},
          {"within_recommended_domain", sol.within_recommended_domain}};
      if (tilt_tau > 0.0)
        j["diagnostics"] = nlohmann::json::parse(
            ot1d::tilt_diagnostics(d, tilt_tau, sol.h).to_json());
      std::cout << j.dump(2) << std::endl;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
