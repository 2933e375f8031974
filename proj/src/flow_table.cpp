#include "qedn/flow_table.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>

#include <json.hpp>

#include "qedn/error.hpp"
#include "qedn/topology_io.hpp"

namespace qedn {

using nlohmann::ordered_json;

namespace {

bool carries_channels(const Node& n) { return n.kind() == NodeKind::Source || n.kind() == NodeKind::WdmDevice; }

int rule_key_in(const FlowRule& r) { return r.in.value_or(0); }

int lowest_channel(const FlowRule& r) {
  return r.channels && !r.channels->empty() ? r.channels->begin()->index : 0;
}

std::string channel_name(Channel c) { return "CH" + std::to_string(c.index); }

}  // namespace

std::vector<FlowTable> calculate(const Graph& g, const std::map<int, PathRecord>& sp,
                                 const std::vector<AllocationRecord>& sc) {
  // device -> (in, out) -> channels
  std::map<int, std::map<std::pair<int, int>, ChannelSet>> acc;
  for (const AllocationRecord& r : sc) {
    auto it = sp.find(r.user_q);
    if (it == sp.end()) {
      throw Error(ErrorKind::Inconsistent, channel_name(r.channel) + " is allocated to user " +
                                               std::to_string(r.user_q) + " which has no path");
    }
    const PathEncoding& p = it->second.path;
    if (p.empty()) continue;
    acc[p.front().node][{0, p.front().port}].insert(r.channel);
    for (const Traversal& t : p.traversals()) acc[t.node][{t.in_port, t.out_port}].insert(r.channel);
  }

  std::vector<FlowTable> out;
  for (const auto& [device, rules] : acc) {
    const Node& n = g.node(device);
    FlowTable table;
    table.device = device;
    for (const auto& [ports, chans] : rules) {
      FlowRule rule;
      if (n.kind() != NodeKind::Source) rule.in = ports.first;
      rule.out = ports.second;
      if (carries_channels(n)) rule.channels = chans;
      table.rules.push_back(std::move(rule));
    }
    std::sort(table.rules.begin(), table.rules.end(), [](const FlowRule& x, const FlowRule& y) {
      return std::make_tuple(x.out, rule_key_in(x), lowest_channel(x)) <
             std::make_tuple(y.out, rule_key_in(y), lowest_channel(y));
    });
    out.push_back(std::move(table));
  }
  return out;
}

RouteAudit verify_routes(const Graph& g, const std::vector<FlowTable>& tables, const std::vector<AllocationRecord>& sc) {
  RouteAudit audit;
  std::map<int, const FlowTable*> by_device;
  for (const FlowTable& t : tables) {
    if (t.device < 0 || t.device >= static_cast<int>(g.nodes().size())) {
      audit.problems.push_back("table for unknown device " + std::to_string(t.device));
      continue;
    }
    if (!by_device.emplace(t.device, &t).second) {
      audit.problems.push_back("device " + std::to_string(t.device) + " has two tables");
    }
  }

  // (device, rule index, channel); channel 0 marks a channel-blind rule.
  std::set<std::tuple<int, std::size_t, int>> used;

  for (const FlowTable& t : tables) {
    for (std::size_t i = 0; i < t.rules.size(); ++i) {
      for (std::size_t j = i + 1; j < t.rules.size(); ++j) {
        const FlowRule& x = t.rules[i];
        const FlowRule& y = t.rules[j];
        if (x.in != y.in || x.out == y.out) continue;
        bool clash = !x.channels || !y.channels;
        if (x.channels && y.channels) {
          for (Channel c : *x.channels) clash = clash || y.channels->count(c);
        }
        if (clash) {
          audit.problems.push_back("device " + std::to_string(t.device) + ": R" + std::to_string(i + 1) + " and R" +
                                   std::to_string(j + 1) + " send the same input to two outputs");
        }
      }
    }
  }

  const int source = g.source_id();
  for (const AllocationRecord& r : sc) {
    const std::string what = channel_name(r.channel) + " for " + g.node(r.user_q).name();
    auto src = by_device.find(source);
    if (src == by_device.end()) {
      audit.problems.push_back(what + ": the source has no table");
      continue;
    }
    // Depth-first over arrival states; the first chain reaching the user counts.
    std::set<PortRef> seen;
    std::vector<std::tuple<int, std::size_t, int>> chain;
    std::function<bool(PortRef)> arrive = [&](PortRef at) -> bool {
      if (at.node == r.user_q) return true;
      if (!seen.insert(at).second) return false;
      auto tab = by_device.find(at.node);
      if (tab == by_device.end()) return false;
      const auto& rules = tab->second->rules;
      for (std::size_t i = 0; i < rules.size(); ++i) {
        const FlowRule& rule = rules[i];
        if (rule.in != at.port) continue;
        if (rule.channels && !rule.channels->count(r.channel)) continue;
        if (!g.traversal_loss(Traversal{at.node, at.port, rule.out}, r.channel, LockView::Raw).finite()) continue;
        chain.emplace_back(at.node, i, rule.channels ? r.channel.index : 0);
        for (std::size_t e : g.edges_from(PortRef{at.node, rule.out})) {
          if (arrive(g.edges()[e].to)) return true;
        }
        chain.pop_back();
      }
      return false;
    };
    bool routed = false;
    const auto& src_rules = src->second->rules;
    for (std::size_t i = 0; i < src_rules.size() && !routed; ++i) {
      const FlowRule& rule = src_rules[i];
      if (!rule.channels || !rule.channels->count(r.channel)) continue;
      if (!g.emitter_channels(rule.out, LockView::Raw).count(r.channel)) continue;
      chain.assign(1, {source, i, r.channel.index});
      for (std::size_t e : g.edges_from(PortRef{source, rule.out})) {
        if (arrive(g.edges()[e].to)) {
          routed = true;
          break;
        }
      }
    }
    if (routed) {
      used.insert(chain.begin(), chain.end());
    } else {
      audit.problems.push_back(what + ": no rule chain reaches the user");
    }
  }

  for (const FlowTable& t : tables) {
    for (std::size_t i = 0; i < t.rules.size(); ++i) {
      const FlowRule& rule = t.rules[i];
      const std::string where = "device " + std::to_string(t.device) + " R" + std::to_string(i + 1);
      if (rule.channels) {
        for (Channel c : *rule.channels) {
          if (!used.count({t.device, i, c.index})) audit.problems.push_back(where + ": " + channel_name(c) + " is orphaned");
        }
      } else if (!used.count({t.device, i, 0})) {
        audit.problems.push_back(where + " is orphaned");
      }
    }
  }
  return audit;
}

namespace {

ordered_json rule_json(const FlowRule& r) {
  ordered_json j;
  j["in"] = r.in ? ordered_json(*r.in) : ordered_json(nullptr);
  j["out"] = r.out;
  if (r.channels) {
    ordered_json list = ordered_json::array();
    for (Channel c : *r.channels) list.push_back(c.index);
    j["channels"] = list;
  } else {
    j["channels"] = nullptr;
  }
  return j;
}

std::string table_text(const FlowTable& t, const std::string& indent) {
  std::string s = indent + "{\n" + indent + "  \"device\": " + std::to_string(t.device) + ",\n";
  if (t.rules.empty()) return s + indent + "  \"rules\": []\n" + indent + "}";
  s += indent + "  \"rules\": [\n";
  for (std::size_t i = 0; i < t.rules.size(); ++i) {
    s += indent + "    " + rule_json(t.rules[i]).dump() + (i + 1 < t.rules.size() ? ",\n" : "\n");
  }
  return s + indent + "  ]\n" + indent + "}";
}

FlowTable table_from(const ordered_json& j, const std::string& where) {
  auto bad = [&](const std::string& what) { throw Error(ErrorKind::Parse, where + ": " + what); };
  if (!j.is_object() || !j.contains("device") || !j.contains("rules")) bad("expected {device, rules}");
  if (!j["device"].is_number_integer()) bad("device must be an integer");
  if (!j["rules"].is_array()) bad("rules must be an array");
  FlowTable t;
  t.device = j["device"].get<int>();
  for (const auto& r : j["rules"]) {
    FlowRule rule;
    if (!r.is_object() || !r.contains("out") || !r["out"].is_number_integer()) bad("rule needs an integer out port");
    rule.out = r["out"].get<int>();
    if (r.contains("in") && !r["in"].is_null()) {
      if (!r["in"].is_number_integer()) bad("in port must be an integer or null");
      rule.in = r["in"].get<int>();
    }
    if (r.contains("channels") && !r["channels"].is_null()) {
      if (!r["channels"].is_array()) bad("channels must be a list or null");
      ChannelSet set;
      for (const auto& c : r["channels"]) {
        if (!c.is_number_integer()) bad("channel must be an integer");
        set.insert(Channel{c.get<int>()});
      }
      rule.channels = std::move(set);
    }
    t.rules.push_back(std::move(rule));
  }
  return t;
}

}  // namespace

std::string serialize(const FlowTable& table) { return table_text(table, "") + "\n"; }

std::string serialize(const std::vector<FlowTable>& tables) {
  if (tables.empty()) return "[]\n";
  std::string s = "[\n";
  for (std::size_t i = 0; i < tables.size(); ++i) {
    s += table_text(tables[i], "  ") + (i + 1 < tables.size() ? ",\n" : "\n");
  }
  return s + "]\n";
}

std::vector<FlowTable> parse_flow_tables(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorKind::Parse, text_position(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  std::vector<FlowTable> out;
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(table_from(doc[i], "/" + std::to_string(i)));
  } else {
    out.push_back(table_from(doc, "/"));
  }
  return out;
}

}  // namespace qedn
