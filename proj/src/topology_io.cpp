#include "qedn/topology_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qedn/error.hpp"

namespace qedn {

using nlohmann::json;
using nlohmann::ordered_json;

std::string text_position(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

std::string loss_text(LossDb loss) {
  if (!loss.finite()) return "inf";
  return json(loss.value()).dump();
}

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Parse, where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) schema_error(where, "expected an integer");
  return v.get<int>();
}

double as_number(const json& v, const std::string& where) {
  if (v.is_string() && v.get<std::string>() == "inf") return LossDb::unreachable().value();
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

std::vector<int> int_list(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_int(v[i], where + "/" + std::to_string(i)));
  return out;
}

std::vector<Channel> channel_list(const json& v, const std::string& where) {
  std::vector<Channel> out;
  for (int c : int_list(v, where)) out.push_back(Channel{c});
  return out;
}

PortRef port_ref(const json& v, const std::string& where) {
  auto pair = int_list(v, where);
  if (pair.size() != 2) schema_error(where, "expected [node, port]");
  return PortRef{pair[0], pair[1]};
}

DeviceSpec device_spec(const json& n, const std::string& where) {
  if (!n.is_object()) schema_error(where, "expected an object");
  DeviceSpec spec;
  const std::string kind = field(n, "kind", where).get<std::string>();
  auto model = parse_device_model(kind);
  if (!model) schema_error(where + "/kind", "unknown device kind '" + kind + "'");
  spec.model = *model;
  if (auto it = n.find("name"); it != n.end()) spec.name = it->get<std::string>();
  if (auto it = n.find("label"); it != n.end()) spec.label = it->get<std::string>();
  if (auto it = n.find("ports"); it != n.end()) spec.ports = as_int(*it, where + "/ports");
  if (auto it = n.find("insertion_loss_db"); it != n.end()) {
    spec.insertion_loss_db = as_number(*it, where + "/insertion_loss_db");
  }
  if (auto it = n.find("internal_loss_db"); it != n.end()) {
    spec.internal_loss_db = as_number(*it, where + "/internal_loss_db");
  }
  if (auto it = n.find("in_ports"); it != n.end()) spec.in_ports = int_list(*it, where + "/in_ports");
  if (auto it = n.find("out_ports"); it != n.end()) spec.out_ports = int_list(*it, where + "/out_ports");
  if (auto it = n.find("common_port"); it != n.end()) spec.common_port = as_int(*it, where + "/common_port");
  if (auto it = n.find("wss_channels_all_ports"); it != n.end()) {
    auto chans = channel_list(*it, where + "/wss_channels_all_ports");
    for (int p = 1; p <= spec.ports; ++p) {
      if (spec.model == DeviceModel::Source || p != spec.common_port) spec.port_channels[p] = chans;
    }
  }
  if (auto it = n.find("port_channels"); it != n.end()) {
    if (!it->is_object()) schema_error(where + "/port_channels", "expected an object keyed by port");
    for (const auto& [key, val] : it->items()) {
      int port = 0;
      try {
        std::size_t used = 0;
        port = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        schema_error(where + "/port_channels", "port key '" + key + "' is not an integer");
      }
      spec.port_channels[port] = channel_list(val, where + "/port_channels/" + key);
    }
  }
  return spec;
}

Graph build_graph(const json& doc) {
  if (!doc.is_object()) schema_error("/", "expected an object");
  ChannelGrid grid = ChannelGrid::c_band_30_38();
  if (auto it = doc.find("channels"); it != doc.end()) {
    grid.channels = channel_list(field(*it, "grid", "/channels"), "/channels/grid");
    if (auto c = it->find("center"); c != it->end()) grid.center = Channel{as_int(*c, "/channels/center")};
  }
  Graph g(grid);
  const json& nodes = field(doc, "nodes", "/");
  if (!nodes.is_array()) schema_error("/nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "/nodes/" + std::to_string(i);
    if (auto it = nodes[i].find("id"); it != nodes[i].end() && as_int(*it, where + "/id") != static_cast<int>(i)) {
      schema_error(where + "/id", "node ids must be dense and in file order");
    }
    g.add_node(device_spec(nodes[i], where));
  }
  if (auto it = doc.find("edges"); it != doc.end()) {
    if (!it->is_array()) schema_error("/edges", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      const std::string where = "/edges/" + std::to_string(i);
      PortRef from = port_ref(field(e, "from", where), where + "/from");
      PortRef to = port_ref(field(e, "to", where), where + "/to");
      double loss = as_number(field(e, "loss_db", where), where + "/loss_db");
      bool both = e.value("bidirectional", false);
      if (both) {
        g.add_fiber(from, to, loss);
      } else {
        g.add_edge(from, to, loss);
      }
    }
  }
  return g;
}

}  // namespace

Graph parse_topology(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, text_position(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  try {
    return build_graph(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("schema: ") + e.what());
  }
}

Graph load_topology(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_topology(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), file.string() + ":" + e.what());
  }
}

std::string dump_topology(const Graph& g) {
  ordered_json doc;
  ordered_json grid = ordered_json::array();
  for (Channel c : g.grid().channels) grid.push_back(c.index);
  doc["channels"] = {{"grid", grid}, {"center", g.grid().center.index}};
  ordered_json nodes = ordered_json::array();
  for (const Node& n : g.nodes()) {
    const DeviceSpec& s = n.spec;
    ordered_json j;
    j["id"] = n.id;
    j["name"] = s.name;
    if (!s.label.empty()) j["label"] = s.label;
    j["kind"] = std::string(to_string(s.model));
    j["ports"] = s.ports;
    j["insertion_loss_db"] = s.insertion_loss_db;
    if (s.model == DeviceModel::User) j["internal_loss_db"] = s.internal_loss_db;
    if (!s.in_ports.empty()) j["in_ports"] = s.in_ports;
    if (!s.out_ports.empty()) j["out_ports"] = s.out_ports;
    if (s.model == DeviceModel::Wss || s.model == DeviceModel::Dwdm) j["common_port"] = s.common_port;
    if (!s.port_channels.empty()) {
      ordered_json pc = ordered_json::object();
      for (const auto& [p, chans] : s.port_channels) {
        ordered_json list = ordered_json::array();
        for (Channel c : chans) list.push_back(c.index);
        pc[std::to_string(p)] = list;
      }
      j["port_channels"] = pc;
    }
    nodes.push_back(j);
  }
  doc["nodes"] = nodes;
  ordered_json edges = ordered_json::array();
  for (const Edge& e : g.edges()) {
    edges.push_back({{"from", {e.from.node, e.from.port}}, {"to", {e.to.node, e.to.port}}, {"loss_db", e.loss.value()}});
  }
  doc["edges"] = edges;
  return doc.dump(2) + "\n";
}

}  // namespace qedn
