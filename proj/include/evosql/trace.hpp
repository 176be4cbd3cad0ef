#pragma once

#include <string>
#include <vector>

#include "evosql/backends.hpp"
#include "evosql/schema.hpp"
#include "evosql/search.hpp"

namespace evosql {

// One task's run record. Traces written without redaction carry every
// prompt/response pair and replay exactly through a scripted backend.
struct TraceRecord {
  Task task;
  SolutionReport report;
};

// JSON trace file. With redact=true the events are dropped (the buffer and
// tallies stay); redacted traces support the ablation harness but not replay.
void write_trace(const std::string& path, const TraceRecord& record, bool redact);

TraceRecord read_trace(const std::string& path);

// Scenario records rebuilt from trace events: exact-prompt, seed-pinned
// matches, so replay is insensitive to call scheduling. Throws
// TraceWithoutBuffer when a trace has no events to replay.
std::vector<ScriptedBackend::Record> scripted_records_from_traces(
    const std::vector<std::string>& paths);

// Writes the records as a scenario file loadable by ScriptedBackend.
void write_scenario(const std::string& path, const std::vector<ScriptedBackend::Record>& records);

}  // namespace evosql
