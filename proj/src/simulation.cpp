#include "qedn/simulation.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qedn/error.hpp"
#include "qedn/topology_io.hpp"

namespace qedn {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<ScriptLine> parse_script(std::string_view text) {
  std::vector<ScriptLine> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, where + ":" + std::to_string(e.byte) + ": " + e.what());
    }
    auto bad = [&](const std::string& what) { throw Error(ErrorKind::Parse, where + ": " + what); };
    if (!j.is_object()) bad("expected an object");
    ScriptLine s;
    s.line = line_no;
    if (!j.contains("ts") || !j["ts"].is_number_integer()) bad("'ts' must be an integer");
    s.ts = j["ts"].get<long>();
    if (!j.contains("op") || !j["op"].is_string()) bad("'op' must be a string");
    const std::string op = j["op"].get<std::string>();
    if (op == "establish") {
      s.op = Op::Establish;
    } else if (op == "delete") {
      s.op = Op::Delete;
    } else {
      bad("unknown op '" + op + "'");
    }
    if (!j.contains("a") || !j["a"].is_string() || !j.contains("b") || !j["b"].is_string()) {
      bad("'a' and 'b' must be user names");
    }
    s.a = j["a"].get<std::string>();
    s.b = j["b"].get<std::string>();
    if (!out.empty() && s.ts <= out.back().ts) bad("ts must strictly increase");
    out.push_back(std::move(s));
    if (end == text.size()) break;
  }
  return out;
}

std::vector<ScriptLine> load_script(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_script(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), file.string() + ": " + e.what());
  }
}

std::vector<Request> resolve_script(const Graph& g, const std::vector<ScriptLine>& script) {
  std::vector<Request> out;
  for (const ScriptLine& s : script) {
    Request r;
    r.op = s.op;
    r.timetag = s.ts;
    for (auto [name, slot] : {std::pair{&s.a, &r.a}, std::pair{&s.b, &r.b}}) {
      auto id = g.find_node_or_label(*name);
      if (!id || g.node(*id).kind() != NodeKind::User) {
        throw Error(ErrorKind::NotFound, "line " + std::to_string(s.line) + ": unknown user '" + *name + "'");
      }
      *slot = *id;
    }
    out.push_back(r);
  }
  return out;
}

RunResult run_requests(const Graph& g, const std::vector<Request>& requests, const QkdParams& params, Policy policy) {
  RunResult run{{}, Controller(g, params, policy)};
  for (const Request& req : requests) {
    SimEvent ev;
    try {
      ev.report = run.controller.handle(req);
    } catch (const Error& e) {
      ev.error = std::string(to_string(e.kind())) + ": " + e.what();
      ev.report.ts = req.timetag;
      ev.report.op = req.op;
      ev.report.a = req.a;
      ev.report.b = req.b;
      ev.report.rates = run.controller.rates();
      ev.report.queue = queue_order(run.controller.db().q);
    }
    run.events.push_back(std::move(ev));
  }
  return run;
}

double steady_state_rate(const RunResult& run) {
  double sum = 0.0;
  for (const PairRate& r : run.controller.rates()) sum += r.rate_cps;
  return sum;
}

std::string format_db(double db) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", db);
  return buf;
}

std::string describe_path(const Graph& g, const PathRecord& rec) {
  std::string s;
  for (int id : rec.path.node_sequence()) {
    if (!s.empty()) s += ' ';
    s += g.node(id).label();
  }
  return s + ", " + (rec.loss.finite() ? format_db(rec.loss.value()) + " dB" : "inf");
}

namespace {

ordered_json pair_json(const Graph& g, int a, int b) { return ordered_json::array({g.node(a).label(), g.node(b).label()}); }

ordered_json grants_json(const Graph& g, const std::vector<ChannelGrant>& list) {
  ordered_json out = ordered_json::array();
  for (const ChannelGrant& c : list) out.push_back({{"user", g.node(c.user).label()}, {"channel", c.channel.index}});
  return out;
}

ordered_json channels_json(const ChannelSet& set) {
  ordered_json out = ordered_json::array();
  for (Channel c : set) out.push_back(c.index);
  return out;
}

ordered_json queue_json(const Graph& g, const std::vector<QueueEntry>& q) {
  ordered_json out = ordered_json::array();
  for (const QueueEntry& e : q) {
    out.push_back({{"pair", pair_json(g, e.user_q, e.user_r)}, {"lk", e.lk}, {"timetag", e.timetag}});
  }
  return out;
}

std::string rate_text(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", r);
  return buf;
}

}  // namespace

std::string event_json(const Graph& g, const SimEvent& ev) {
  const EventReport& r = ev.report;
  ordered_json j;
  j["ts"] = r.ts;
  j["op"] = r.op == Op::Establish ? "establish" : "delete";
  j["pair"] = pair_json(g, r.a, r.b);
  j["case"] = ev.error.empty() ? std::string(to_string(r.outcome)) : std::string("rejected");
  if (!ev.error.empty()) j["error"] = ev.error;
  j["granted"] = grants_json(g, r.granted);
  j["revoked"] = grants_json(g, r.revoked);
  ordered_json served = ordered_json::array();
  for (const ServedPair& s : r.reconfigured) {
    served.push_back({{"pair", pair_json(g, s.a, s.b)}, {"case", std::string(to_string(s.outcome))}});
  }
  j["reconfigured"] = served;
  ordered_json rates = ordered_json::array();
  for (const PairRate& p : r.rates) {
    rates.push_back({{"pair", pair_json(g, p.a, p.b)},
                     {"n_pairs", p.n_pairs},
                     {"omega", p.omega},
                     {"channels", channels_json(p.channels)},
                     {"rate_cps", p.rate_cps}});
  }
  j["key_rate_cps"] = rates;
  j["queue"] = queue_json(g, r.queue);
  return j.dump();
}

std::string keyrates_csv(const Graph& g, const std::vector<SimEvent>& events) {
  std::string out = "ts,user_a,user_b,n_pairs,channels,rate_cps\n";
  for (const SimEvent& ev : events) {
    for (const PairRate& p : ev.report.rates) {
      std::string chans;
      for (Channel c : p.channels) chans += (chans.empty() ? "CH" : " CH") + std::to_string(c.index);
      out += std::to_string(ev.report.ts) + "," + g.node(p.a).label() + "," + g.node(p.b).label() + "," +
             std::to_string(p.n_pairs) + "," + chans + "," + rate_text(p.rate_cps) + "\n";
    }
  }
  return out;
}

std::string final_state_json(const Controller& c) {
  const StatusDb& db = c.db();
  const Graph& g = db.g;
  ordered_json j;
  ordered_json sp = ordered_json::array();
  for (const auto& [user, rec] : db.sp) {
    sp.push_back({{"user", g.node(user).label()},
                  {"path", rec.path.flat()},
                  {"loss_db", rec.loss.finite() ? ordered_json(rec.loss.value()) : ordered_json("inf")},
                  {"available", channels_json(rec.available)},
                  {"occupied", channels_json(rec.occupied)}});
  }
  j["sp"] = sp;
  ordered_json sc = ordered_json::array();
  for (const AllocationRecord& r : db.sc) {
    sc.push_back({{"channel", r.channel.index},
                  {"user", g.node(r.user_q).label()},
                  {"partner", g.node(r.user_r).label()},
                  {"timetag", r.timetag}});
  }
  j["sc"] = sc;
  j["queue"] = queue_json(g, queue_order(db.q));
  return j.dump(2) + "\n";
}

void write_run(const RunResult& run, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const Graph& g = run.controller.db().g;
  fs::create_directories(dir / "flowtables");
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::NotFound, "cannot write " + p.string());
    out << text;
  };
  std::string events;
  for (const SimEvent& ev : run.events) events += event_json(g, ev) + "\n";
  write(dir / "events.jsonl", events);
  write(dir / "keyrates.csv", keyrates_csv(g, run.events));
  write(dir / "final_state.json", final_state_json(run.controller));
  for (const auto& entry : fs::directory_iterator(dir / "flowtables")) {
    if (entry.path().extension() == ".json") fs::remove(entry.path());
  }
  const StatusDb& db = run.controller.db();
  for (const FlowTable& t : calculate(g, db.sp, db.sc)) {
    write(dir / "flowtables" / ("d" + std::to_string(t.device) + ".json"), serialize(t));
  }
}

}  // namespace qedn
