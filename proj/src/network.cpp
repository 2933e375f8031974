#include "qedn/network.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "qedn/error.hpp"

namespace qedn {

namespace {

bool is_tdm(const Node& n) { return n.kind() == NodeKind::TdmSwitch; }
bool is_wdm(const Node& n) { return n.kind() == NodeKind::WdmDevice; }

std::string where(const Node& n) { return "node " + std::to_string(n.id) + " (" + n.name() + ")"; }

void fill_pair(PassThroughTensor& w, int a, int b, std::size_t slot, double loss) {
  w.at(a, b, slot) = LossDb(loss);
  w.at(b, a, slot) = LossDb(loss);
}

}  // namespace

std::string_view to_string(DeviceModel model) {
  switch (model) {
    case DeviceModel::Source: return "source";
    case DeviceModel::User: return "user";
    case DeviceModel::Bs: return "bs";
    case DeviceModel::Os: return "os";
    case DeviceModel::Aos: return "aos";
    case DeviceModel::Wss: return "wss";
    case DeviceModel::Dwdm: return "dwdm";
  }
  return "?";
}

std::optional<DeviceModel> parse_device_model(std::string_view text) {
  for (DeviceModel m : {DeviceModel::Source, DeviceModel::User, DeviceModel::Bs, DeviceModel::Os,
                        DeviceModel::Aos, DeviceModel::Wss, DeviceModel::Dwdm}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

NodeKind kind_of(DeviceModel model) {
  switch (model) {
    case DeviceModel::Source: return NodeKind::Source;
    case DeviceModel::User: return NodeKind::User;
    case DeviceModel::Bs: return NodeKind::BeamSplitter;
    case DeviceModel::Os:
    case DeviceModel::Aos: return NodeKind::TdmSwitch;
    case DeviceModel::Wss:
    case DeviceModel::Dwdm: return NodeKind::WdmDevice;
  }
  return NodeKind::User;
}

int SupportVector::sentinel() const {
  switch (kind) {
    case NodeKind::Source: return -3;
    case NodeKind::User: return -2;
    case NodeKind::BeamSplitter: return -1;
    case NodeKind::TdmSwitch: return 0;
    case NodeKind::WdmDevice: break;
  }
  throw Error(ErrorKind::Invalid, "WDM support vectors carry explicit channels");
}

std::optional<std::size_t> SupportVector::slot_of(Channel c) const {
  if (kind != NodeKind::WdmDevice) return 0;
  auto it = std::find(channels.begin(), channels.end(), c);
  if (it == channels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - channels.begin());
}

bool LockState::empty() const {
  return wdm.empty() &&
         std::all_of(tdm.begin(), tdm.end(), [](const TdmLock& l) { return l.peer == 0 && l.users == 0; });
}

Node build_node(int id, DeviceSpec spec, const ChannelGrid& grid) {
  Node n;
  n.id = id;
  const int m = spec.ports;
  const std::string label = "node " + std::to_string(id) + " (" + spec.name + ")";
  if (m < 1) throw Error(ErrorKind::Invalid, label + ": needs at least one port");
  auto check = [&](int p) {
    if (p < 1 || p > m) throw Error(ErrorKind::Invalid, label + ": port " + std::to_string(p) + " out of range");
  };
  for (int p : spec.in_ports) check(p);
  for (int p : spec.out_ports) check(p);
  for (const auto& [p, chans] : spec.port_channels) {
    check(p);
    for (Channel c : chans) {
      if (!grid.contains(c)) {
        throw Error(ErrorKind::Invalid, label + ": channel " + std::to_string(c.index) + " not on the grid");
      }
    }
  }
  if (spec.insertion_loss_db < 0.0 || spec.internal_loss_db < 0.0) {
    throw Error(ErrorKind::Invalid, label + ": losses must be non-negative");
  }

  n.support.kind = kind_of(spec.model);
  const double il = spec.insertion_loss_db;

  switch (spec.model) {
    case DeviceModel::Source: {
      n.tensor = PassThroughTensor(m, 1);
      n.emitter.assign(static_cast<std::size_t>(m) + 1, {});
      for (int p = 1; p <= m; ++p) {
        auto it = spec.port_channels.find(p);
        if (spec.port_channels.empty()) {
          n.emitter[p] = grid.all();
        } else if (it != spec.port_channels.end()) {
          n.emitter[p] = ChannelSet(it->second.begin(), it->second.end());
        }
      }
      break;
    }
    case DeviceModel::User:
      n.tensor = PassThroughTensor(m, 1);
      break;
    case DeviceModel::Os:
    case DeviceModel::Bs: {
      if (spec.in_ports.empty() || spec.out_ports.empty()) {
        throw Error(ErrorKind::Invalid, label + ": in_ports and out_ports are required");
      }
      n.tensor = PassThroughTensor(m, 1);
      for (int a : spec.in_ports) {
        for (int b : spec.out_ports) {
          if (a == b) throw Error(ErrorKind::Invalid, label + ": port listed as both input and output");
          fill_pair(n.tensor, a, b, 0, il);
        }
      }
      break;
    }
    case DeviceModel::Aos: {
      n.tensor = PassThroughTensor(m, 1);
      for (int a = 1; a <= m; ++a) {
        for (int b = 1; b <= m; ++b) {
          if (a != b) n.tensor.at(a, b, 0) = LossDb(il);
        }
      }
      break;
    }
    case DeviceModel::Wss:
    case DeviceModel::Dwdm: {
      check(spec.common_port);
      std::map<int, std::vector<Channel>> per_port;
      for (int p = 1; p <= m; ++p) {
        if (p == spec.common_port) continue;
        auto it = spec.port_channels.find(p);
        if (it != spec.port_channels.end()) {
          per_port[p] = it->second;
        } else if (spec.model == DeviceModel::Wss) {
          per_port[p] = grid.channels;
        }
      }
      if (spec.port_channels.count(spec.common_port)) {
        throw Error(ErrorKind::Invalid, label + ": the common port carries every channel");
      }
      std::set<Channel> all;
      for (const auto& [p, chans] : per_port) all.insert(chans.begin(), chans.end());
      if (all.empty()) throw Error(ErrorKind::Invalid, label + ": WDM device supports no channel");
      n.support.channels.assign(all.begin(), all.end());
      n.tensor = PassThroughTensor(m, n.support.channels.size());
      for (const auto& [p, chans] : per_port) {
        for (Channel c : chans) fill_pair(n.tensor, spec.common_port, p, *n.support.slot_of(c), il);
      }
      break;
    }
  }
  n.locks.tdm.assign(static_cast<std::size_t>(m) + 1, TdmLock{});
  n.spec = std::move(spec);
  return n;
}

Graph::Graph(ChannelGrid grid) : grid_(std::move(grid)) {
  if (grid_.channels.empty()) throw Error(ErrorKind::Invalid, "channel grid is empty");
  if (grid_.contains(grid_.center)) {
    throw Error(ErrorKind::Invalid, "the center channel cannot carry a photon of the pair");
  }
}

int Graph::add_node(DeviceSpec spec) {
  const int id = static_cast<int>(nodes_.size());
  if (spec.name.empty()) spec.name = "n" + std::to_string(id);
  if (find_node(spec.name)) throw Error(ErrorKind::Invalid, "duplicate node name '" + spec.name + "'");
  if (spec.model == DeviceModel::Source) {
    for (const Node& n : nodes_) {
      if (n.kind() == NodeKind::Source) throw Error(ErrorKind::Invalid, "graph already has a source");
    }
  }
  Node n = build_node(id, std::move(spec), grid_);
  out_.emplace_back(static_cast<std::size_t>(n.port_count()) + 1);
  nodes_.push_back(std::move(n));
  return id;
}

void Graph::check_port(PortRef p) const {
  if (p.node < 0 || p.node >= static_cast<int>(nodes_.size())) {
    throw Error(ErrorKind::NotFound, "unknown node " + std::to_string(p.node));
  }
  if (p.port < 1 || p.port > nodes_[p.node].port_count()) {
    throw Error(ErrorKind::NotFound, where(nodes_[p.node]) + " has no port " + std::to_string(p.port));
  }
}

void Graph::add_edge(PortRef from, PortRef to, double loss_db) {
  check_port(from);
  check_port(to);
  if (from.node == to.node) throw Error(ErrorKind::Invalid, "edges must join two distinct nodes");
  if (!(loss_db >= 0.0) || !LossDb(loss_db).finite()) {
    throw Error(ErrorKind::Invalid, "edge loss must be finite and non-negative");
  }
  out_[from.node][from.port].push_back(edges_.size());
  edges_.push_back(Edge{from, to, LossDb(loss_db)});
}

void Graph::add_fiber(PortRef a, PortRef b, double loss_db) {
  add_edge(a, b, loss_db);
  add_edge(b, a, loss_db);
}

const Node& Graph::node(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size())) {
    throw Error(ErrorKind::NotFound, "unknown node " + std::to_string(id));
  }
  return nodes_[id];
}

Node& Graph::node_mut(int id) {
  node(id);
  return nodes_[id];
}

std::optional<int> Graph::find_node(std::string_view name) const {
  for (const Node& n : nodes_) {
    if (n.name() == name) return n.id;
  }
  return std::nullopt;
}

std::optional<int> Graph::find_node_or_label(std::string_view text) const {
  if (auto id = find_node(text)) return id;
  for (const Node& n : nodes_) {
    if (n.label() == text) return n.id;
  }
  return std::nullopt;
}

int Graph::source_id() const {
  for (const Node& n : nodes_) {
    if (n.kind() == NodeKind::Source) return n.id;
  }
  throw Error(ErrorKind::Invalid, "graph has no entangled photon source");
}

const std::vector<std::size_t>& Graph::edges_from(PortRef port) const {
  check_port(port);
  return out_[port.node][port.port];
}

LossMatrix Graph::edge_loss_matrix(int i, int j) const {
  const Node& a = node(i);
  const Node& b = node(j);
  LossMatrix c(a.port_count(), b.port_count());
  for (int p = 1; p <= a.port_count(); ++p) {
    for (std::size_t e : out_[i][p]) {
      const Edge& edge = edges_[e];
      if (edge.to.node != j) continue;
      LossDb& cell = c(p - 1, edge.to.port - 1);
      cell = std::min(cell, edge.loss);
    }
  }
  return c;
}

LossDb Graph::traversal_loss(const Traversal& t, Channel ch, LockView view) const {
  const Node& n = node(t.node);
  check_port(PortRef{t.node, t.in_port});
  check_port(PortRef{t.node, t.out_port});
  auto slot = n.support.slot_of(ch);
  if (!slot) return LossDb::unreachable();
  const LossDb raw = n.tensor.at(t.in_port, t.out_port, *slot);
  if (!raw.finite() || view == LockView::Raw) return raw;

  if (is_tdm(n)) {
    const TdmLock& in = n.locks.tdm[t.in_port];
    const TdmLock& out = n.locks.tdm[t.out_port];
    if (in.peer != 0 && in.peer != t.out_port) return LossDb::unreachable();
    if (out.peer != 0 && out.peer != t.in_port) return LossDb::unreachable();
  } else if (is_wdm(n)) {
    auto in = n.locks.wdm.find({t.in_port, ch});
    if (in != n.locks.wdm.end() && in->second != t.out_port) return LossDb::unreachable();
    auto out = n.locks.wdm.find({t.out_port, ch});
    if (out != n.locks.wdm.end() && out->second != t.in_port) return LossDb::unreachable();
  }
  return raw;
}

LossMatrix Graph::effective_slice(int id, int in_port) const {
  const Node& n = node(id);
  check_port(PortRef{id, in_port});
  const std::size_t slots = n.support.slot_count();
  LossMatrix x(n.port_count(), slots);
  for (int k = 1; k <= n.port_count(); ++k) {
    for (std::size_t l = 0; l < slots; ++l) x(k - 1, l) = n.tensor.at(in_port, k, l);
  }
  if (is_tdm(n)) {
    const int pinned = n.locks.tdm[in_port].peer;
    for (int k = 1; k <= n.port_count(); ++k) {
      const int peer = n.locks.tdm[k].peer;
      const bool blocked = (pinned != 0 && k != pinned) || (peer != 0 && peer != in_port);
      if (blocked) x(k - 1, 0) = LossDb::unreachable();
    }
  } else if (is_wdm(n)) {
    for (std::size_t l = 0; l < slots; ++l) {
      const Channel ch = n.support.channels[l];
      auto in = n.locks.wdm.find({in_port, ch});
      for (int k = 1; k <= n.port_count(); ++k) {
        bool blocked = in != n.locks.wdm.end() && in->second != k;
        auto out = n.locks.wdm.find({k, ch});
        blocked = blocked || (out != n.locks.wdm.end() && out->second != in_port);
        if (blocked) x(k - 1, l) = LossDb::unreachable();
      }
    }
  }
  return x;
}

ChannelSet Graph::emitter_channels(int port, LockView view) const {
  const Node& s = node(source_id());
  check_port(PortRef{s.id, port});
  ChannelSet out = s.emitter[port];
  if (view == LockView::Raw) return out;
  for (const auto& [key, peer] : s.locks.wdm) {
    if (key.first != port) out.erase(key.second);
  }
  return out;
}

void Graph::validate_path(const PathEncoding& path) const {
  if (path.empty()) return;
  const auto& stops = path.stops();
  for (const PortRef& s : stops) check_port(s);
  if (node(stops.front().node).kind() != NodeKind::Source) {
    throw Error(ErrorKind::Invalid, "path must start at the source");
  }
  // Stop 0 is the emitting port; afterwards arrivals alternate with exits.
  bool arriving = true;
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    const PortRef& a = stops[i];
    const PortRef& b = stops[i + 1];
    if (arriving) {
      const auto& outs = out_[a.node][a.port];
      bool found = std::any_of(outs.begin(), outs.end(), [&](std::size_t e) { return edges_[e].to == b; });
      if (!found) {
        throw Error(ErrorKind::Invalid, "no edge " + std::to_string(a.node) + ":" + std::to_string(a.port) +
                                            " -> " + std::to_string(b.node) + ":" + std::to_string(b.port));
      }
    } else {
      if (a.node != b.node || a.port == b.port) {
        throw Error(ErrorKind::Invalid, "malformed traversal at stop " + std::to_string(i));
      }
      const Node& n = nodes_[a.node];
      bool passable = false;
      for (std::size_t l = 0; l < n.tensor.slots(); ++l) passable = passable || n.tensor.at(a.port, b.port, l).finite();
      if (!passable) {
        throw Error(ErrorKind::Invalid, where(n) + " cannot pass port " + std::to_string(a.port) + " to " +
                                            std::to_string(b.port));
      }
    }
    arriving = !arriving;
  }
}

void Graph::lock_ports(const PathEncoding& path) {
  validate_path(path);
  std::map<int, std::vector<TdmLock>> work;
  for (const Traversal& t : path.traversals()) {
    const Node& n = nodes_[t.node];
    if (!is_tdm(n)) continue;
    auto [it, fresh] = work.try_emplace(t.node, n.locks.tdm);
    auto& locks = it->second;
    TdmLock& a = locks[t.in_port];
    TdmLock& b = locks[t.out_port];
    if ((a.peer != 0 && a.peer != t.out_port) || (b.peer != 0 && b.peer != t.in_port)) {
      throw Error(ErrorKind::Conflict, where(n) + ": port " + std::to_string(t.in_port) + " or " +
                                           std::to_string(t.out_port) + " is pinned to another port");
    }
    a.peer = t.out_port;
    b.peer = t.in_port;
    ++a.users;
    ++b.users;
  }
  for (auto& [id, locks] : work) nodes_[id].locks.tdm = std::move(locks);
}

void Graph::unlock_ports(const PathEncoding& path) {
  validate_path(path);
  std::map<int, std::vector<TdmLock>> work;
  for (const Traversal& t : path.traversals()) {
    const Node& n = nodes_[t.node];
    if (!is_tdm(n)) continue;
    auto [it, fresh] = work.try_emplace(t.node, n.locks.tdm);
    auto& locks = it->second;
    TdmLock& a = locks[t.in_port];
    TdmLock& b = locks[t.out_port];
    if (a.peer != t.out_port || b.peer != t.in_port || a.users < 1 || b.users < 1) {
      throw Error(ErrorKind::StateError, where(n) + ": segment " + std::to_string(t.in_port) + "<->" +
                                             std::to_string(t.out_port) + " is not locked");
    }
    if (--a.users == 0) a.peer = 0;
    if (--b.users == 0) b.peer = 0;
  }
  for (auto& [id, locks] : work) nodes_[id].locks.tdm = std::move(locks);
}

void Graph::lock_channels(const PathEncoding& path, const ChannelSet& channels) {
  validate_path(path);
  if (path.empty() || channels.empty()) return;
  std::map<int, std::map<std::pair<int, Channel>, int>> work;
  auto locks_of = [&](int id) -> std::map<std::pair<int, Channel>, int>& {
    return work.try_emplace(id, nodes_[id].locks.wdm).first->second;
  };

  const PortRef src = path.front();
  auto& emit = locks_of(src.node);
  for (Channel ch : channels) {
    if (!nodes_[src.node].emitter[src.port].count(ch)) {
      throw Error(ErrorKind::Invalid, "source port " + std::to_string(src.port) + " cannot emit CH" +
                                          std::to_string(ch.index));
    }
    for (const auto& [key, peer] : emit) {
      if (key.second == ch) {
        throw Error(ErrorKind::Conflict, "CH" + std::to_string(ch.index) + " is already emitted on source port " +
                                             std::to_string(key.first));
      }
    }
    emit[{src.port, ch}] = kEmitterPeer;
  }

  for (const Traversal& t : path.traversals()) {
    const Node& n = nodes_[t.node];
    if (!is_wdm(n)) continue;
    auto& locks = locks_of(t.node);
    for (Channel ch : channels) {
      auto slot = n.support.slot_of(ch);
      if (!slot || !n.tensor.at(t.in_port, t.out_port, *slot).finite()) {
        throw Error(ErrorKind::Invalid, where(n) + " does not route CH" + std::to_string(ch.index) + " from port " +
                                            std::to_string(t.in_port) + " to " + std::to_string(t.out_port));
      }
      if (locks.count({t.in_port, ch}) || locks.count({t.out_port, ch})) {
        throw Error(ErrorKind::Conflict, where(n) + ": CH" + std::to_string(ch.index) + " already pinned on port " +
                                             std::to_string(t.in_port) + " or " + std::to_string(t.out_port));
      }
      locks[{t.in_port, ch}] = t.out_port;
      locks[{t.out_port, ch}] = t.in_port;
    }
  }
  for (auto& [id, locks] : work) nodes_[id].locks.wdm = std::move(locks);
}

void Graph::unlock_channels(const PathEncoding& path, const ChannelSet& channels) {
  validate_path(path);
  if (path.empty() || channels.empty()) return;
  std::map<int, std::map<std::pair<int, Channel>, int>> work;
  auto locks_of = [&](int id) -> std::map<std::pair<int, Channel>, int>& {
    return work.try_emplace(id, nodes_[id].locks.wdm).first->second;
  };
  auto release = [&](std::map<std::pair<int, Channel>, int>& locks, int port, Channel ch, int peer, const Node& n) {
    auto it = locks.find({port, ch});
    if (it == locks.end() || it->second != peer) {
      throw Error(ErrorKind::StateError, where(n) + ": CH" + std::to_string(ch.index) + " is not locked on port " +
                                             std::to_string(port));
    }
    locks.erase(it);
  };

  const PortRef src = path.front();
  for (Channel ch : channels) release(locks_of(src.node), src.port, ch, kEmitterPeer, nodes_[src.node]);
  for (const Traversal& t : path.traversals()) {
    const Node& n = nodes_[t.node];
    if (!is_wdm(n)) continue;
    auto& locks = locks_of(t.node);
    for (Channel ch : channels) {
      release(locks, t.in_port, ch, t.out_port, n);
      release(locks, t.out_port, ch, t.in_port, n);
    }
  }
  for (auto& [id, locks] : work) nodes_[id].locks.wdm = std::move(locks);
}

Graph Graph::pristine() const {
  Graph g = *this;
  for (Node& n : g.nodes_) {
    n.locks.wdm.clear();
    n.locks.tdm.assign(n.locks.tdm.size(), TdmLock{});
  }
  return g;
}

}  // namespace qedn
