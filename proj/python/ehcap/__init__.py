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

"""Capacity bounds and power control for energy-harvesting AWGN channels.

Distributions are dicts {"support": [...], "probs": [...]}; policies are
dicts or shorthand strings such as "generalized_bernoulli" or "constant:0.5".
"""

import json

from . import _core

__all__ = [
    "bounds",
    "parse_policy",
    "estimate_throughput",
    "epoch_statistics",
    "smith_capacity",
    "verify_eta",
    "mdp",
    "gaps",
    "bernoulli_renewal_throughput",
    "genbern_gap",
    "binquant_gap",
    "c_star",
]

bernoulli_renewal_throughput = _core.bernoulli_renewal_throughput
genbern_gap = _core.genbern_gap
binquant_gap = _core.binquant_gap
c_star = _core.c_star


def _dist(dist):
    return dist if isinstance(dist, str) else json.dumps(dist)


def _policy(policy):
    return policy if isinstance(policy, str) else json.dumps(policy)


def bounds(dist, battery_cap):
    return json.loads(_core.bounds(_dist(dist), battery_cap))


def parse_policy(spec, dist, battery_cap):
    return json.loads(_core.parse_policy(_policy(spec), _dist(dist), battery_cap))


def estimate_throughput(policy, dist, battery_cap, n=100000, trials=32, seed=1, b0=None):
    return json.loads(_core.estimate_throughput(_policy(policy), _dist(dist), battery_cap, n, trials, seed, b0))


def epoch_statistics(policy, dist, battery_cap, n=100000, seed=1):
    return json.loads(_core.epoch_statistics(_policy(policy), _dist(dist), battery_cap, n, seed))


def smith_capacity(S, tol=1e-6):
    return json.loads(_core.smith_capacity(S, tol))


def verify_eta(region2_points=1500):
    return json.loads(_core.verify_eta(region2_points))


def mdp(dist, battery_cap, levels=256, tol=1e-8, policy=None):
    return json.loads(_core.mdp(_dist(dist), battery_cap, levels, tol, None if policy is None else _policy(policy)))


def gaps():
    return json.loads(_core.gaps())
