// Copyright 2026 The ehcap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ehcap/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <locale>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "ehcap/bounds.hpp"
#include "ehcap/error.hpp"
#include "ehcap/mdp.hpp"
#include "ehcap/rng.hpp"
#include "ehcap/sim.hpp"
#include "ehcap/smith.hpp"
#include "json.hpp"

namespace ehcap::cli {
namespace {

using nlohmann::json;

void round_numbers(json& j) {
  if (j.is_number_float()) {
    j = round12(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& v : j) round_numbers(v);
  }
}

std::string rounded(const std::string& text) {
  json j = json::parse(text);
  round_numbers(j);
  return j.dump() + "\n";
}

std::string num(double x) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(12);
  s << x;
  return s.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidParameter("cannot write " + path);
  f << text;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["command"] = c.command;
  j["dist_path"] = c.dist_path;
  j["battery_cap"] = c.battery_cap;
  j["policy"] = c.policy;
  j["n"] = c.n;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["format"] = c.format;
  j["b0"] = c.b0 ? json(*c.b0) : json(nullptr);
  j["S"] = c.S;
  j["tol"] = c.tol;
  j["levels"] = c.levels;
  j["region2_points"] = c.region2_points;
  j["sweep"] = {{"param", c.sweep_param}, {"from", c.sweep_from}, {"to", c.sweep_to}, {"steps", c.sweep_steps}};
  return j;
}

// Data goes to the output file or `out`; the run metadata (seed, config,
// wall-clock time) goes to a side file so data files stay byte-identical.
void emit(const ExperimentConfig& c, const std::string& text, std::ostream& out, const json& extra = {}) {
  if (c.output_path.empty()) {
    out << text;
    return;
  }
  write_file(c.output_path, text);
  json meta;
  meta["config"] = config_json(c);
  meta["seed"] = c.seed;
  meta["created_utc"] = utc_now();
  if (!extra.is_null()) meta["extra"] = extra;
  write_file(c.output_path + ".meta.json", meta.dump(2) + "\n");
}

ClippedDistribution load(const ExperimentConfig& c) {
  if (c.dist_path.empty()) throw InvalidParameter("--dist is required");
  if (!(c.battery_cap > 0.0)) throw InvalidParameter("--battery must be positive");
  return clip(load_distribution(c.dist_path), c.battery_cap);
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InvalidParameter("bad number in policy spec: " + item);
    out.push_back(v);
  }
  return out;
}

std::string check_format(const ExperimentConfig& c, bool csv_ok) {
  if (c.format == "json" || (csv_ok && c.format == "csv")) return c.format;
  throw InvalidParameter("format " + c.format + " is not available for " + c.command);
}

int cmd_simulate(const ExperimentConfig& c, std::ostream& out) {
  const auto dist = load(c);
  const Policy policy = parse_policy(c.policy.empty() ? "generalized_bernoulli" : c.policy, dist);
  const double b0 = c.b0.value_or(dist.battery_cap());
  const auto fmt = check_format(c, true);
  const auto est = estimate_throughput(policy, dist, c.n, c.trials, b0, c.seed);
  if (!c.trajectory_path.empty()) {
    // The first trial, replayed.
    write_file(c.trajectory_path, trajectory_to_csv(simulate(policy, dist, c.n, b0, stream_seed(c.seed, 0))));
  }
  std::string text;
  if (fmt == "json") {
    text = rounded(estimate_to_json(est));
  } else {
    text = "mean_rate,stderr,n,trials,epoch_mean_L,epoch_mean_L2,chernoff_bound,seed\n" + num(est.mean_rate) + "," +
           num(est.std_error) + "," + std::to_string(est.n_steps) + "," + std::to_string(est.n_trials) + "," +
           num(est.epoch_mean_L) + "," + num(est.epoch_mean_L2) + "," + num(est.chernoff_bound) + "," +
           std::to_string(est.seed) + "\n";
  }
  emit(c, text, out, {{"policy", json::parse(policy_to_json(policy))}});
  return kOk;
}

int cmd_bounds(const ExperimentConfig& c, std::ostream& out) {
  const auto dist = load(c);
  check_format(c, false);
  emit(c, rounded(bounds_report_to_json(capacity_intervals(dist))), out);
  return kOk;
}

int cmd_smith(const ExperimentConfig& c, std::ostream& out) {
  check_format(c, false);
  emit(c, rounded(smith_to_json(smith_capacity(c.S, c.tol))), out);
  return kOk;
}

EtaReport eta_run(const ExperimentConfig& c) {
  EtaOptions opt;
  opt.region2_points = c.region2_points;
  return verify_eta(opt);
}

int cmd_eta(const ExperimentConfig& c, std::ostream& out) {
  check_format(c, false);
  const auto r = eta_run(c);
  if (!c.curve_path.empty()) write_file(c.curve_path, eta_curve_csv(r));
  emit(c, rounded(eta_report_to_json(r)), out);
  return kOk;
}

int cmd_mdp(const ExperimentConfig& c, std::ostream& out) {
  const auto dist = load(c);
  check_format(c, false);
  const MdpModel model(dist, c.levels);
  const double tol = std::max(c.tol, 1e-8);
  const auto sol = value_iterate(model, tol);
  const auto bounds = capacity_intervals(dist);
  json j;
  j["levels"] = c.levels;
  j["battery_cap"] = dist.battery_cap();
  j["mu"] = dist.mu();
  j["gain"] = sol.gain;
  j["gain_low"] = sol.gain_low;
  j["gain_high"] = sol.gain_high;
  j["iterations"] = sol.iterations;
  j["monotone"] = policy_is_monotone(sol);
  j["upper"] = bounds.upper;
  j["best_lb"] = bounds.best_lb;
  if (!c.policy.empty()) {
    const Policy p = parse_policy(c.policy, dist);
    j["policy"] = json::parse(policy_to_json(p));
    j["policy_gain"] = evaluate_policy_growing_cap(model, p);
  }
  if (!c.policy_table_path.empty()) write_file(c.policy_table_path, policy_table_csv(model, sol));
  round_numbers(j);
  emit(c, j.dump() + "\n", out);
  return kOk;
}

int cmd_sweep(const ExperimentConfig& c, std::ostream& out) {
  if (c.sweep_param != "q") throw InvalidParameter("sweep supports --param q only");
  if (c.sweep_steps < 1) throw InvalidParameter("--steps must be >= 1");
  if (!(c.sweep_from > 0.0 && c.sweep_to <= 1.0 && c.sweep_from <= c.sweep_to)) {
    throw InvalidParameter("sweep range must satisfy 0 < from <= to <= 1");
  }
  if (c.format != "csv" && c.format != "json") throw InvalidParameter("unknown format " + c.format);
  const double cap = c.battery_cap > 0.0 ? c.battery_cap : 4.0;

  std::ostringstream csv;
  csv << "q,battery_cap,mu,upper,bernoulli_lb,binquant_lb,genbern_lb,best_lb,"
         "genbern_mean,genbern_stderr,bernoulli_mean,bernoulli_stderr,binquant_mean,binquant_stderr,greedy_mean,"
         "greedy_stderr\n";
  for (int i = 0; i < c.sweep_steps; ++i) {
    const double q = c.sweep_steps == 1 ? c.sweep_from
                                         : c.sweep_from + (c.sweep_to - c.sweep_from) * i / (c.sweep_steps - 1);
    const auto dist = clip(EnergyDistribution::bernoulli(q, cap), cap);
    const double upper = 0.5 * std::log2(1.0 + dist.mu());
    const double bern_lb = bernoulli_lower_bound(q, cap);
    const auto bq = binquant_lower_bound(dist);
    const double gb_lb = upper - genbern_gap(dist.q());
    // Common random numbers across the three policies at each q.
    const std::uint64_t seed = stream_seed(c.seed, static_cast<std::uint64_t>(i));
    const auto gb = estimate_throughput(Policy::generalized_bernoulli(dist.q()), dist, c.n, c.trials, cap, seed);
    const auto be = estimate_throughput(Policy::bernoulli_exp(q), dist, c.n, c.trials, cap, seed);
    const auto bqe = estimate_throughput(Policy::binary_quantization(bq.threshold, bq.q_prime), dist, c.n, c.trials,
                                         cap, seed);
    const auto gr = estimate_throughput(Policy::greedy(), dist, c.n, c.trials, cap, seed);
    csv << num(q) << ',' << num(cap) << ',' << num(dist.mu()) << ',' << num(upper) << ',' << num(bern_lb) << ','
        << num(bq.value) << ',' << num(gb_lb) << ',' << num(std::max({bern_lb, bq.value, gb_lb})) << ','
        << num(gb.mean_rate) << ',' << num(gb.std_error) << ',' << num(be.mean_rate) << ',' << num(be.std_error)
        << ',' << num(bqe.mean_rate) << ',' << num(bqe.std_error) << ',' << num(gr.mean_rate) << ','
        << num(gr.std_error) << '\n';
  }
  emit(c, csv.str(), out);
  return kOk;
}

struct Band {
  std::string name;
  double value;
  double low;
  double high;
  double reference;
};

int cmd_gap_certify(const ExperimentConfig& c, std::ostream& out) {
  check_format(c, false);
  const auto online = combined_online_gap();
  const auto no_csir = combined_no_csir_gap();
  const auto entropy = entropy_branch_constant();
  const auto eta = eta_run(c);
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Band> bands = {
      {"online_gap", online.value, 1.79, 1.8044, 1.8034},
      {"no_csir_gap", no_csir.value, 2.79, 2.8044, 2.8034},
      {"entropy_branch_constant", entropy.value, 1.5232, 1.5252, 1.5242},
      {"half_log_pi_e_2", half_log_pi_e_over_2(), 1.0470, 1.0472, 1.0471},
      {"eta_region1", eta.regions[0].value, 0.7496, 0.7506, 0.7501},
      {"eta_region2", eta.regions[1].value, 0.7453, 0.7493, 0.7473},
      {"eta_region3", eta.regions[2].value, 0.7509, 0.7529, 0.7519},
      {"eta_region4", eta.regions[3].value, 0.7472, 0.7492, 0.7482},
      {"eta_region5", eta.regions[4].value, 0.7509, 0.7513, 0.7511},
      {"trivial_bound", eta.trivial_bound, 0.2341, 0.2343, 0.2342},
      {"eta", eta.eta, 0.7453, inf, 0.7473},
      {"max_kkt_slack", eta.max_kkt_slack, 0.0, 1e-4, 0.0},
  };
  json checks = json::array();
  bool pass = true;
  for (const auto& b : bands) {
    const bool ok = b.value >= b.low && b.value <= b.high;
    pass = pass && ok;
    json e;
    e["name"] = b.name;
    e["value"] = b.value;
    e["low"] = b.low;
    e["high"] = std::isinf(b.high) ? json("inf") : json(b.high);
    e["reference"] = b.reference;
    e["pass"] = ok;
    checks.push_back(e);
  }
  json j;
  j["checks"] = checks;
  j["online_gap_argmax_q"] = online.argmax;
  j["no_csir_gap_argmax_q"] = no_csir.argmax;
  j["eta_argmin_region"] = eta.argmin_region;
  j["eta_argmin_s"] = eta.regions[static_cast<std::size_t>(eta.argmin_region - 1)].argmin_s;
  j["region1_monotone"] = eta.region1_monotone;
  j["pass"] = pass && eta.region1_monotone;
  round_numbers(j);
  emit(c, j.dump() + "\n", out);
  return j["pass"].get<bool>() ? kOk : kFailure;
}

}  // namespace

double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

Policy parse_policy(const std::string& spec, const ClippedDistribution& dist) {
  const double cap = dist.battery_cap();
  Policy p;
  if (!spec.empty() && spec.front() == '{') {
    p = policy_from_json(spec);
  } else if (std::filesystem::is_regular_file(spec)) {
    p = policy_from_json(read_file(spec));
  } else {
    const auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    const auto args = colon == std::string::npos ? std::vector<double>{} : split_numbers(spec.substr(colon + 1));
    if (kind == "bernoulli") kind = "bernoulli_exp";
    if (kind == "genbern") kind = "generalized_bernoulli";
    if (kind == "binquant") kind = "binary_quantization";
    auto arg = [&](std::size_t i, double fallback) { return i < args.size() ? args[i] : fallback; };
    std::size_t expected = 1;
    switch (policy_kind_from_string(kind)) {
      case PolicyKind::kGreedy:
        expected = 0;
        p = Policy::greedy();
        break;
      case PolicyKind::kConstant:
        if (args.empty()) throw InvalidParameter("constant needs a level, e.g. constant:1.5");
        p = Policy::constant(args[0]);
        break;
      case PolicyKind::kFixedFraction:
        p = Policy::fixed_fraction(arg(0, dist.q()));
        break;
      case PolicyKind::kGeneralizedBernoulli:
        p = Policy::generalized_bernoulli(arg(0, dist.q()));
        break;
      case PolicyKind::kBernoulliExp:
        p = Policy::bernoulli_exp(arg(0, dist.ccdf(cap)));
        break;
      case PolicyKind::kBinaryQuantization: {
        expected = 2;
        if (args.size() == 1) throw InvalidParameter("binary_quantization takes x,q' or nothing");
        if (args.empty()) {
          const auto bq = binquant_lower_bound(dist);
          p = Policy::binary_quantization(bq.threshold, bq.q_prime);
        } else {
          p = Policy::binary_quantization(args[0], args[1]);
        }
        break;
      }
    }
    if (args.size() > expected) throw InvalidParameter("too many parameters in policy spec: " + spec);
  }
  p.validate(cap);
  return p;
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (c.command == "simulate") return cmd_simulate(c, out);
    if (c.command == "bounds") return cmd_bounds(c, out);
    if (c.command == "smith") return cmd_smith(c, out);
    if (c.command == "eta-verify") return cmd_eta(c, out);
    if (c.command == "mdp") return cmd_mdp(c, out);
    if (c.command == "sweep") return cmd_sweep(c, out);
    if (c.command == "gap-certify") return cmd_gap_certify(c, out);
    err << "ehcap: unknown command " << c.command << "\n";
    return kUsage;
  } catch (const InvalidParameter& e) {
    err << "ehcap: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "ehcap: " << e.what() << "\n";
    return kFailure;
  }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig c;
  double b0 = 0.0;

  CLI::App app{"Energy-harvesting AWGN channel: simulation, bounds and certificates", "ehcap"};
  app.require_subcommand(1);

  auto dist_opts = [&](CLI::App* s) {
    s->add_option("--dist", c.dist_path, "energy distribution JSON file")->required()->check(CLI::ExistingFile);
    s->add_option("--battery", c.battery_cap, "battery capacity")->required()->check(CLI::PositiveNumber);
  };
  auto out_opts = [&](CLI::App* s, bool csv) {
    s->add_option("--output,-o", c.output_path, "write data here instead of stdout");
    s->add_option("--format", c.format, "output format")
        ->check(csv ? CLI::IsMember({"json", "csv"}) : CLI::IsMember({"json"}));
  };

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo throughput of a policy");
  dist_opts(sim);
  sim->add_option("--policy", c.policy, "JSON, JSON file, or kind[:params]");
  sim->add_option("--n", c.n, "channel uses per trial")->check(CLI::PositiveNumber);
  sim->add_option("--trials", c.trials, "independent trials")->check(CLI::PositiveNumber);
  sim->add_option("--seed", c.seed, "base seed");
  auto* b0_opt = sim->add_option("--b0", b0, "initial battery (default: battery capacity)");
  sim->add_option("--trajectory", c.trajectory_path, "CSV dump of the first trial");
  out_opts(sim, true);

  auto* bnd = app.add_subcommand("bounds", "analytic throughput and capacity bounds");
  dist_opts(bnd);
  out_opts(bnd, false);

  auto* smi = app.add_subcommand("smith", "amplitude-constrained AWGN capacity");
  smi->add_option("--S", c.S, "amplitude constraint squared")->required()->check(CLI::PositiveNumber);
  smi->add_option("--tol", c.tol, "KKT slack target in bits");
  out_opts(smi, false);

  auto* eta = app.add_subcommand("eta-verify", "five-region verification of the multiplicative constant");
  eta->add_option("--region2-points", c.region2_points, "log-spaced grid size on [0.5, 170]")
      ->check(CLI::Range(2, 1000000));
  eta->add_option("--curve", c.curve_path, "ratio curve CSV path");
  out_opts(eta, false);

  auto* mdp = app.add_subcommand("mdp", "average-reward dynamic program on a battery grid");
  dist_opts(mdp);
  mdp->add_option("--levels", c.levels, "battery grid levels")->check(CLI::Range(8, 1 << 20));
  mdp->add_option("--tol", c.tol, "span stopping tolerance (>= 1e-8)");
  mdp->add_option("--policy", c.policy, "also evaluate this policy on the grid");
  mdp->add_option("--policy-table", c.policy_table_path, "CSV of the optimal allocation per level");
  out_opts(mdp, false);

  auto* swp = app.add_subcommand("sweep", "bounds and simulated throughputs over q for Bernoulli {0, B}");
  swp->add_option("--param", c.sweep_param, "swept parameter")->check(CLI::IsMember({"q"}));
  swp->add_option("--from", c.sweep_from, "first value (default 0.01)");
  swp->add_option("--to", c.sweep_to, "last value (default 0.99)");
  swp->add_option("--steps", c.sweep_steps, "number of points (default 99)")->check(CLI::PositiveNumber);
  swp->add_option("--battery", c.battery_cap, "battery capacity (default 4)")->check(CLI::PositiveNumber);
  swp->add_option("--n", c.n, "channel uses per trial (default 20000)")->check(CLI::PositiveNumber);
  swp->add_option("--trials", c.trials, "trials per point (default 8)")->check(CLI::PositiveNumber);
  swp->add_option("--seed", c.seed, "base seed");
  swp->add_option("--output,-o", c.output_path, "write data here instead of stdout");
  swp->add_option("--format", c.format)->check(CLI::IsMember({"csv"}));

  auto* gap = app.add_subcommand("gap-certify", "check the gap constants and eta against their bands");
  gap->add_option("--region2-points", c.region2_points)->check(CLI::Range(2, 1000000));
  out_opts(gap, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  c.command = app.get_subcommands().front()->get_name();
  if (c.command == "simulate" && b0_opt->count() > 0) c.b0 = b0;
  if (c.command == "sweep") {
    c.format = "csv";
    if (swp->count("--n") == 0) c.n = 20000;
    if (swp->count("--trials") == 0) c.trials = 8;
  }
  if (c.command == "mdp" && mdp->count("--tol") == 0) c.tol = 1e-8;
  return run(c, out, err);
}

}  // namespace ehcap::cli
