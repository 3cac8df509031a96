#
# Copyright 2026 The BVFL Authors
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
#

"""Bayesian vertical federated survival analysis."""

from ._bvfl import (
    accountant,
    calibrate_sigma,
    clip_l2,
    concordance,
    config_digest,
    delta_for,
    evaluate_survival,
    hazards_to_survival,
    kl_gaussian,
    nll,
    td_concordance,
    train,
    verify_convergence_bound,
)

__all__ = [
    "accountant",
    "calibrate_sigma",
    "clip_l2",
    "concordance",
    "config_digest",
    "delta_for",
    "evaluate_survival",
    "hazards_to_survival",
    "kl_gaussian",
    "nll",
    "td_concordance",
    "train",
    "verify_convergence_bound",
]
