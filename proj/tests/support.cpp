#include "support.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "qedn/error.hpp"
#include "qedn/topology_io.hpp"

namespace qedn::testkit {

std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(FIXTURE_DIR) / rel; }

Graph load_fixture(const std::string& name) { return load_topology(fixture(name + ".json")); }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int id_of(const Graph& g, const std::string& name_or_label) {
  auto id = g.find_node_or_label(name_or_label);
  if (!id) throw std::runtime_error("no node " + name_or_label);
  return *id;
}

std::vector<int> users_of(const Graph& g) {
  std::vector<int> out;
  for (const Node& n : g.nodes()) {
    if (n.kind() == NodeKind::User) out.push_back(n.id);
  }
  return out;
}

double OracleRates::rate(double la, double lb, int n, const QkdParams& p) {
  const double ei = std::pow(10.0, -(la + p.user_loss_db) / 10.0);
  const double ej = std::pow(10.0, -(lb + p.user_loss_db) / 10.0);
  const double b = n * p.brightness_per_pair;
  const double si = b * ei + p.dark_count_cps;
  const double sj = b * ej + p.dark_count_cps;
  const double acc = si * sj * p.coincidence_window_s;
  const double meas = p.eta_tcc * b * ei * ej + acc;
  const double err = p.eta_tcc * b * ei * ej * p.e_pol + acc * 0.5;
  const double e = err / meas;
  const double h = (e <= 0.0 || e >= 1.0) ? 0.0 : -e * std::log(e) / std::log(2.0) - (1 - e) * std::log(1 - e) / std::log(2.0);
  const double r = 0.5 * meas * (1.0 - p.f_ec * h - h);
  return r > 0.0 ? r : 0.0;
}

int OracleRates::omega(double la, double lb, const QkdParams& p, int n_max) {
  int best = 1;
  for (int n = 2; n <= n_max; ++n) {
    if (rate(la, lb, n, p) > rate(la, lb, best, p)) best = n;
  }
  return best;
}

namespace {

// Lock rules restated from the lock-state data, not from Graph queries.
bool oracle_open(const Node& n, int from, int to, std::size_t slot) {
  if (!n.tensor.at(from, to, slot).finite()) return false;
  if (n.kind() == NodeKind::TdmSwitch) {
    const int pf = n.locks.tdm[from].peer;
    const int pt = n.locks.tdm[to].peer;
    return (pf == 0 || pf == to) && (pt == 0 || pt == from);
  }
  if (n.kind() == NodeKind::WdmDevice) {
    const Channel ch = n.support.channels[slot];
    auto a = n.locks.wdm.find({from, ch});
    auto b = n.locks.wdm.find({to, ch});
    return (a == n.locks.wdm.end() || a->second == to) && (b == n.locks.wdm.end() || b->second == from);
  }
  return true;
}

double oracle_device_cost(const Node& n, int from, int to) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < n.tensor.slots(); ++l) {
    if (oracle_open(n, from, to, l)) best = std::min(best, n.tensor.at(from, to, l).value());
  }
  return best;
}

}  // namespace

double brute_force_loss(const Graph& g, int target) {
  const int s = g.source_id();
  const Node& src = g.node(s);
  double best = std::numeric_limits<double>::infinity();
  std::set<std::pair<int, int>> on_path;

  std::function<void(int, int, double)> walk = [&](int node, int port, double so_far) {
    if (node == target) {
      best = std::min(best, so_far);
      return;
    }
    const Node& n = g.node(node);
    for (int k = 1; k <= n.port_count(); ++k) {
      if (k == port) continue;
      const double dev = oracle_device_cost(n, port, k);
      if (!std::isfinite(dev)) continue;
      for (const Edge& e : g.edges()) {
        if (e.from.node != node || e.from.port != k || e.to.node == s) continue;
        const std::pair<int, int> st{e.to.node, e.to.port};
        if (on_path.count(st)) continue;
        on_path.insert(st);
        walk(e.to.node, e.to.port, so_far + dev + e.loss.value());
        on_path.erase(st);
      }
    }
  };

  for (int a = 1; a <= src.port_count(); ++a) {
    if (src.emitter[a].empty()) continue;
    for (const Edge& e : g.edges()) {
      if (e.from.node != s || e.from.port != a || e.to.node == s) continue;
      const std::pair<int, int> st{e.to.node, e.to.port};
      on_path.insert(st);
      walk(e.to.node, e.to.port, e.loss.value());
      on_path.erase(st);
    }
  }
  return best;
}

Graph random_graph(std::mt19937& rng, int max_nodes, int max_ports) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto quarter = [&](int lo, int hi) { return 0.25 * uni(lo * 4, hi * 4); };
  Graph g;
  const ChannelGrid& grid = g.grid();
  auto random_channels = [&](int min_count) {
    std::vector<Channel> out;
    for (Channel c : grid.channels) {
      if (uni(0, 2) > 0) out.push_back(c);
    }
    while (static_cast<int>(out.size()) < min_count) out.push_back(grid.channels[out.size()]);
    return out;
  };

  const int n_nodes = uni(2, max_nodes);
  DeviceSpec src;
  src.name = "S";
  src.model = DeviceModel::Source;
  src.ports = uni(1, max_ports);
  if (uni(0, 1)) {
    for (int p = 1; p <= src.ports; ++p) src.port_channels[p] = random_channels(1);
  }
  g.add_node(src);

  for (int i = 1; i < n_nodes; ++i) {
    DeviceSpec d;
    d.name = "N" + std::to_string(i);
    const int kind = uni(0, 5);
    switch (kind) {
      case 0:
        d.model = DeviceModel::User;
        d.ports = 1;
        break;
      case 1:
      case 5: {
        d.model = kind == 1 ? DeviceModel::Os : DeviceModel::Bs;
        d.ports = uni(2, max_ports);
        const int split = uni(1, d.ports - 1);
        for (int p = 1; p <= d.ports; ++p) (p <= split ? d.in_ports : d.out_ports).push_back(p);
        d.insertion_loss_db = quarter(0, 3);
        break;
      }
      case 2:
        d.model = DeviceModel::Aos;
        d.ports = uni(2, max_ports);
        d.insertion_loss_db = quarter(0, 3);
        break;
      case 3:
      case 4:
        d.model = kind == 3 ? DeviceModel::Wss : DeviceModel::Dwdm;
        d.ports = uni(2, max_ports);
        d.common_port = uni(1, d.ports);
        d.insertion_loss_db = quarter(0, 5);
        for (int p = 1; p <= d.ports; ++p) {
          if (p == d.common_port) continue;
          if (kind == 4 || uni(0, 1)) d.port_channels[p] = random_channels(1);
        }
        break;
    }
    g.add_node(d);
  }

  const int n_edges = uni(n_nodes, 3 * n_nodes);
  for (int e = 0; e < n_edges; ++e) {
    const int a = uni(0, n_nodes - 1);
    int b = uni(0, n_nodes - 2);
    if (b >= a) ++b;
    const PortRef from{a, uni(1, g.node(a).port_count())};
    const PortRef to{b, uni(1, g.node(b).port_count())};
    const double loss = quarter(0, 10);
    if (uni(0, 2) > 0) {
      g.add_fiber(from, to, loss);
    } else {
      g.add_edge(from, to, loss);
    }
  }
  return g;
}

void random_locks(Graph& g, std::mt19937& rng, int attempts) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int s = g.source_id();
  for (int i = 0; i < attempts; ++i) {
    const int target = uni(0, static_cast<int>(g.nodes().size()) - 1);
    if (target == s) continue;
    PathRecord rec;
    try {
      rec = path_search(g, s, target);
    } catch (const Error&) {
      continue;
    }
    try {
      g.lock_ports(rec.path);
    } catch (const Error&) {
    }
    ChannelSet pick;
    for (Channel c : rec.available) {
      if (uni(0, 2) == 0) pick.insert(c);
    }
    try {
      g.lock_channels(rec.path, pick);
    } catch (const Error&) {
    }
  }
}

std::vector<Request> random_script(const Graph& g, std::mt19937& rng, int length) {
  const std::vector<int> users = users_of(g);
  std::vector<Request> out;
  if (users.size() < 2) return out;
  std::set<PairKey> open;
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  long ts = 0;
  for (int i = 0; i < length; ++i) {
    Request r;
    r.timetag = ++ts;
    if (!open.empty() && uni(0, 2) == 0) {
      auto it = open.begin();
      std::advance(it, uni(0, static_cast<int>(open.size()) - 1));
      r.op = Op::Delete;
      r.a = it->first;
      r.b = it->second;
      open.erase(it);
    } else {
      int a = users[uni(0, static_cast<int>(users.size()) - 1)];
      int b = users[uni(0, static_cast<int>(users.size()) - 1)];
      if (a == b || open.count(pair_key(a, b))) {
        --ts;
        continue;
      }
      r.op = Op::Establish;
      r.a = a;
      r.b = b;
      open.insert(pair_key(a, b));
    }
    out.push_back(r);
  }
  return out;
}

std::vector<std::string> check_invariants(const Controller& c) {
  std::vector<std::string> out;
  const StatusDb& db = c.db();
  const ChannelGrid& grid = db.g.grid();
  std::map<Channel, const AllocationRecord*> by_channel;
  for (const AllocationRecord& r : db.sc) {
    if (by_channel.count(r.channel)) out.push_back("channel used twice");
    by_channel[r.channel] = &r;
  }
  for (const AllocationRecord& r : db.sc) {
    auto m = by_channel.find(Channel{2 * grid.center.index - r.channel.index});
    if (m == by_channel.end() || m->second->user_q != r.user_r || m->second->user_r != r.user_q) {
      out.push_back("mirror-sum partner missing");
    }
  }
  if (db.sc.size() > 2 * grid.pair_count()) out.push_back("more pairs than the grid holds");

  std::map<PairKey, int> pairs;
  for (const AllocationRecord& r : db.sc) {
    if (r.channel < grid.center) ++pairs[pair_key(r.user_q, r.user_r)];
  }
  for (const auto& [key, n] : pairs) {
    const double la = db.sp.at(key.first).loss.value();
    const double lb = db.sp.at(key.second).loss.value();
    const int cap = c.policy() == Policy::Frfs ? 1 : OracleRates::omega(la, lb, c.params(), static_cast<int>(grid.pair_count()));
    if (n > cap) out.push_back("QoS cap exceeded");
  }
  for (const std::string& p : c.audit()) out.push_back("audit: " + p);
  return out;
}

ExampleState four_path_state() {
  ExampleState st{load_fixture("case4"), {}, {}};
  const int a = id_of(st.g, "Alice"), b = id_of(st.g, "Bob"), c = id_of(st.g, "Charlie"), d = id_of(st.g, "Dave");
  auto put = [&](int user, std::vector<int> flat) {
    PathRecord r;
    r.target = user;
    r.path = PathEncoding::from_flat(flat);
    st.sp[user] = r;
  };
  put(a, {0, 1, 1, 1, 1, 2, 5, 1});
  put(b, {0, 3, 3, 1, 3, 2, 2, 4, 2, 3, 6, 1});
  put(c, {0, 4, 4, 1, 4, 2, 3, 4, 3, 3, 7, 1});
  put(d, {0, 1, 1, 1, 1, 3, 4, 3, 4, 4, 8, 1});
  st.sc = {{Channel{38}, a, d, 1}, {Channel{30}, d, a, 1}, {Channel{35}, a, c, 2}, {Channel{33}, c, a, 2},
           {Channel{36}, b, c, 3}, {Channel{32}, c, b, 3}, {Channel{37}, c, d, 4}, {Channel{31}, d, c, 4}};
  return st;
}

}  // namespace qedn::testkit
