# Copyright 2026 The ehcap Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

ehcap = pytest.importorskip("ehcap")

BERN = {"support": [0, 4], "probs": [0.5, 0.5]}
THREE = {"support": [0, 1, 3], "probs": [0.3, 0.5, 0.2]}


def test_bounds_shape():
    r = ehcap.bounds(BERN, 4.0)
    assert r["mu"] == pytest.approx(2.0)
    assert r["upper"] == pytest.approx(0.5 * math.log2(3.0))
    assert r["bernoulli_lb"] is not None
    assert r["best_lb"] <= r["upper"]
    assert len(r["capacity_interval_txrx"]) == 2


def test_gaps():
    g = ehcap.gaps()
    assert 1.79 <= g["online_gap"] <= 1.8044
    assert 2.79 <= g["no_csir_gap"] <= 2.8044
    assert g["half_log_pi_e_2"] == pytest.approx(0.5 * math.log2(math.pi * math.e / 2))


def test_renewal_matches_simulation():
    est = ehcap.estimate_throughput("bernoulli_exp:0.5", BERN, 4.0, n=20000, trials=8, seed=3)
    exact = ehcap.bernoulli_renewal_throughput(0.5, 4.0)
    assert abs(est["mean_rate"] - exact) <= 4 * est["stderr"]


def test_simulation_is_deterministic():
    a = ehcap.estimate_throughput("generalized_bernoulli", THREE, 2.0, n=5000, trials=4, seed=9)
    b = ehcap.estimate_throughput({"kind": "generalized_bernoulli", "params": {"q": 0.45}}, THREE, 2.0,
                                  n=5000, trials=4, seed=9)
    assert a == b


def test_policy_parsing():
    p = ehcap.parse_policy("binquant", THREE, 2.0)
    assert p["kind"] == "binary_quantization"
    with pytest.raises(ValueError):
        ehcap.parse_policy("constant", THREE, 2.0)


def test_smith_sandwich():
    s = ehcap.smith_capacity(10.0)
    assert s["kkt_slack"] <= 1e-6
    assert s["capacity"] <= 0.5 * math.log2(11.0)


def test_mdp_dominates_policy():
    m = ehcap.mdp(BERN, 4.0, levels=64, policy="generalized_bernoulli")
    assert m["policy_gain"] <= m["gain_high"] + 1e-9


def test_epoch_statistics():
    s = ehcap.epoch_statistics("generalized_bernoulli", THREE, 2.0, n=50000)
    assert s["epochs"] > 1000
    assert s["mean_L"] <= s["chernoff_bound"]


def test_invalid_distribution():
    with pytest.raises(ValueError):
        ehcap.bounds({"support": [0, 1], "probs": [0.5, 0.6]}, 1.0)
