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
#include "dfc/harness/schedule_io.hpp"

#include <ostream>

#include <json.hpp>

#include "dfc/dfc.hpp"

namespace dfc::harness {

using nlohmann::json;

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Fault(std::string("schedule file: ") + e.what());
  }
  RunConfig config;
  try {
    const auto kind = parse_structure_kind(doc.at("kind").get<std::string>());
    if (!kind) throw Fault("schedule file: unknown kind");
    config.kind = *kind;
    config.threads = doc.value("threads", std::size_t{2});
    const auto policy =
        CrashPolicy::parse(doc.value("policy", std::string("persisted-only")), doc.value("policy_seed", 0ULL));
    if (!policy) throw Fault("schedule file: unknown policy");
    config.policy = *policy;
    config.schedule.seed = doc.value("seed", 0ULL);
    config.schedule.round_robin = doc.value("round_robin", false);
    config.line_bytes = doc.value("line_bytes", config.line_bytes);
    config.pool_capacity = doc.value("pool_capacity", config.pool_capacity);
    if (doc.contains("scripts")) {
      for (const json& script : doc.at("scripts")) {
        Script s;
        for (const json& op : script) {
          const auto name = parse_op_name(op.at(0).get<std::string>());
          if (!name) throw Fault("schedule file: unknown op " + op.at(0).dump());
          if (!belongs_to(*name, config.kind)) throw Fault("schedule file: op " + op.at(0).dump() + " does not fit the kind");
          s.push_back(OpSpec{*name, op.size() > 1 ? op.at(1).get<Word>() : 0});
        }
        config.scripts.push_back(std::move(s));
      }
      if (!doc.contains("threads")) config.threads = config.scripts.size();
    } else {
      config.scripts = generate_scripts(config.kind, config.threads, doc.value("ops", std::size_t{16}),
                                        doc.value("script_seed", config.schedule.seed));
    }
    for (const json& slice : doc.value("slices", json::array())) {
      config.schedule.slices.push_back(Slice{slice.at(0).get<ThreadId>(), slice.at(1).get<std::uint32_t>()});
    }
    for (const json& point : doc.value("crash_points", json::array())) {
      config.schedule.crash_points.push_back(point.get<std::uint64_t>());
    }
  } catch (const json::exception& e) {
    throw Fault(std::string("schedule file: ") + e.what());
  }
  if (config.scripts.size() != config.threads) throw Fault("schedule file: need one script per thread");
  return config;
}

std::string to_json(const RunConfig& config) {
  json doc;
  doc["kind"] = std::string(to_string(config.kind));
  doc["threads"] = config.threads;
  doc["policy"] = config.policy.name();
  doc["policy_seed"] = config.policy.seed;
  doc["seed"] = config.schedule.seed;
  doc["round_robin"] = config.schedule.round_robin;
  doc["line_bytes"] = config.line_bytes;
  doc["pool_capacity"] = config.pool_capacity;
  json scripts = json::array();
  for (const Script& script : config.scripts) {
    json s = json::array();
    for (const OpSpec& op : script) s.push_back(json::array({std::string(to_string(op.name)), op.param}));
    scripts.push_back(std::move(s));
  }
  doc["scripts"] = std::move(scripts);
  json slices = json::array();
  for (const Slice& slice : config.schedule.slices) slices.push_back(json::array({slice.thread, slice.steps}));
  doc["slices"] = std::move(slices);
  doc["crash_points"] = config.schedule.crash_points;
  return doc.dump();
}

void write_counterexample(std::ostream& out, const CaseOutcome& outcome) {
  out << "schedule " << to_json(outcome.config) << "\n";
  out << "failure " << (outcome.failure.empty() ? "none" : outcome.failure) << "\n";
  out << outcome.result.history.to_text();
  out << "witness order";
  for (std::uint32_t id : outcome.witness.order) out << " " << id;
  out << "\n";

  RunConfig replay = outcome.config;
  replay.record_trace = true;
  const RunResult traced = run_schedule(replay);
  out << "trace (" << traced.trace.size() << " accesses)\n";
  for (std::size_t i = 0; i < traced.trace.size(); ++i) {
    const TraceEntry& e = traced.trace[i];
    out << "  " << e.step << " t" << e.thread << (e.recovery ? " rec " : " ") << to_string(e.access) << " r"
        << e.addr.region.value << "+" << e.addr.offset << " = " << e.value << "  " << to_string(traced.trace_classes[i]);
    for (std::uint64_t c : outcome.config.schedule.crash_points) {
      if (c == e.step) out << "  <-- first access after a crash";
    }
    out << "\n";
  }
}

}  // namespace dfc::harness
