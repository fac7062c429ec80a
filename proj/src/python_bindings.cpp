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


// Python module ehcap._core. Arguments and results are JSON text; the
// package wrapper converts them to and from dicts.

#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ehcap/bounds.hpp"
#include "ehcap/cli.hpp"
#include "ehcap/dist.hpp"
#include "ehcap/mdp.hpp"
#include "ehcap/policies.hpp"
#include "ehcap/sim.hpp"
#include "ehcap/smith.hpp"
#include "json.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

ehcap::ClippedDistribution load(const std::string& dist_json, double battery_cap) {
  return ehcap::clip(ehcap::distribution_from_json(dist_json), battery_cap);
}

std::string bounds(const std::string& dist_json, double battery_cap) {
  return ehcap::bounds_report_to_json(ehcap::capacity_intervals(load(dist_json, battery_cap)));
}

std::string parse_policy(const std::string& spec, const std::string& dist_json, double battery_cap) {
  return ehcap::policy_to_json(ehcap::cli::parse_policy(spec, load(dist_json, battery_cap)));
}

std::string estimate(const std::string& policy, const std::string& dist_json, double battery_cap, std::size_t n,
                     std::size_t trials, std::uint64_t seed, std::optional<double> b0) {
  const auto d = load(dist_json, battery_cap);
  const auto p = ehcap::cli::parse_policy(policy, d);
  py::gil_scoped_release release;
  return ehcap::estimate_to_json(ehcap::estimate_throughput(p, d, n, trials, b0.value_or(battery_cap), seed));
}

std::string epochs(const std::string& policy, const std::string& dist_json, double battery_cap, std::size_t n,
                   std::uint64_t seed) {
  const auto d = load(dist_json, battery_cap);
  const auto tr = ehcap::simulate(ehcap::cli::parse_policy(policy, d), d, n, battery_cap, seed);
  const auto s = ehcap::epoch_statistics(tr, d);
  json j;
  j["epochs"] = s.epochs;
  j["mean_L"] = s.mean_L;
  j["mean_L2"] = s.mean_L2;
  j["mean_SL"] = s.mean_SL;
  j["wald1_residual"] = s.wald1_residual;
  j["wald2_residual"] = s.wald2_residual;
  j["wald1_stderr"] = s.wald1_stderr;
  j["wald2_stderr"] = s.wald2_stderr;
  j["chernoff_bound"] = s.chernoff_bound;
  return j.dump();
}

std::string smith(double S, double tol) { return ehcap::smith_to_json(ehcap::smith_capacity(S, tol)); }

std::string eta(int region2_points) {
  ehcap::EtaOptions o;
  o.region2_points = region2_points;
  py::gil_scoped_release release;
  return ehcap::eta_report_to_json(ehcap::verify_eta(o));
}

std::string mdp(const std::string& dist_json, double battery_cap, int levels, double tol,
                std::optional<std::string> policy) {
  const auto d = load(dist_json, battery_cap);
  const ehcap::MdpModel model(d, levels);
  const auto sol = ehcap::value_iterate(model, tol);
  json j;
  j["levels"] = levels;
  j["gain"] = sol.gain;
  j["gain_low"] = sol.gain_low;
  j["gain_high"] = sol.gain_high;
  j["iterations"] = sol.iterations;
  j["monotone"] = ehcap::policy_is_monotone(sol);
  if (policy) j["policy_gain"] = ehcap::evaluate_policy_growing_cap(model, ehcap::cli::parse_policy(*policy, d));
  return j.dump();
}

std::string gaps() {
  const auto online = ehcap::combined_online_gap();
  const auto no_csir = ehcap::combined_no_csir_gap();
  const auto entropy = ehcap::entropy_branch_constant();
  json j;
  j["online_gap"] = online.value;
  j["online_argmax"] = online.argmax;
  j["no_csir_gap"] = no_csir.value;
  j["no_csir_argmax"] = no_csir.argmax;
  j["entropy_constant"] = entropy.value;
  j["entropy_argmax"] = entropy.argmax;
  j["half_log_pi_e_2"] = ehcap::half_log_pi_e_over_2();
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ehcap core: energy-harvesting AWGN capacity bounds, policies and solvers";

  m.def("bounds", &bounds, py::arg("dist"), py::arg("battery_cap"));
  m.def("parse_policy", &parse_policy, py::arg("spec"), py::arg("dist"), py::arg("battery_cap"));
  m.def("estimate_throughput", &estimate, py::arg("policy"), py::arg("dist"), py::arg("battery_cap"),
        py::arg("n") = 100000, py::arg("trials") = 32, py::arg("seed") = 1, py::arg("b0") = py::none());
  m.def("epoch_statistics", &epochs, py::arg("policy"), py::arg("dist"), py::arg("battery_cap"),
        py::arg("n") = 100000, py::arg("seed") = 1);
  m.def("smith_capacity", &smith, py::arg("S"), py::arg("tol") = 1e-6);
  m.def("verify_eta", &eta, py::arg("region2_points") = 1500);
  m.def("mdp", &mdp, py::arg("dist"), py::arg("battery_cap"), py::arg("levels") = 256, py::arg("tol") = 1e-8,
        py::arg("policy") = py::none());
  m.def("gaps", &gaps);
  m.def("bernoulli_renewal_throughput", &ehcap::bernoulli_renewal_throughput, py::arg("p"), py::arg("battery_cap"));
  m.def("genbern_gap", &ehcap::genbern_gap, py::arg("q"));
  m.def("binquant_gap", &ehcap::binquant_gap, py::arg("q"));
  m.def("c_star", &ehcap::c_star, py::arg("q"));
}
