#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qedn/controller.hpp"
#include "qedn/flow_table.hpp"

namespace qedn {

struct ScriptLine {
  long ts = 0;
  Op op = Op::Establish;
  std::string a;
  std::string b;
  int line = 0;
};

/// One JSON object per line: {"ts":1,"op":"establish","a":"Alice","b":"Bob"}.
/// Blank lines are skipped. Throws Error(Parse) naming the line; ts must
/// strictly increase.
std::vector<ScriptLine> parse_script(std::string_view text);
std::vector<ScriptLine> load_script(const std::filesystem::path& file);

/// Script lines resolved to node ids; throws NotFound for unknown users.
std::vector<Request> resolve_script(const Graph& g, const std::vector<ScriptLine>& script);

struct SimEvent {
  EventReport report;
  std::string error;  // set when the controller rejected the request
};

struct RunResult {
  std::vector<SimEvent> events;
  Controller controller;
};

RunResult run_requests(const Graph& g, const std::vector<Request>& requests, const QkdParams& params, Policy policy);

/// Sum of key rates held after the last event.
double steady_state_rate(const RunResult& run);

std::string event_json(const Graph& g, const SimEvent& ev);
std::string keyrates_csv(const Graph& g, const std::vector<SimEvent>& events);
std::string final_state_json(const Controller& c);

/// Writes events.jsonl, keyrates.csv, final_state.json and
/// flowtables/d<id>.json into `dir`.
void write_run(const RunResult& run, const std::filesystem::path& dir);

/// "S F1 A, 14.9 dB".
std::string describe_path(const Graph& g, const PathRecord& rec);
/// Shortest decimal form with float noise trimmed.
std::string format_db(double db);

}  // namespace qedn
