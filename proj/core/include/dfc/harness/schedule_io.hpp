/*
 * Copyright 2026 The dfc-nvm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <iosfwd>
#include <string>

#include "dfc/harness/runner.hpp"

namespace dfc::harness {

/// JSON form of a replayable case:
///
///   {"kind": "stack", "threads": 2, "policy": "randomized", "policy_seed": 7,
///    "seed": 3, "round_robin": false,
///    "scripts": [[["push", 1], ["pop", 0]], [["pop", 0]]],
///    "slices": [[1, 4], [2, 1]], "crash_points": [17, 40]}
///
/// `scripts` may be replaced by "ops": n (and optional "script_seed") to
/// draw random scripts. Every other field except "kind" is optional.
RunConfig parse_run_config(const std::string& json_text);
std::string to_json(const RunConfig& config);

/// Human-readable counterexample: the schedule, the history, the verdicts
/// and the classified access trace of a replay.
void write_counterexample(std::ostream& out, const CaseOutcome& outcome);

}  // namespace dfc::harness
