#include "qedn/path_search.hpp"

#include <algorithm>

#include "qedn/error.hpp"

namespace qedn {

namespace {

template <typename T>
std::vector<std::vector<T>> per_port(const Graph& g, T init) {
  std::vector<std::vector<T>> out;
  out.reserve(g.nodes().size());
  for (const Node& n : g.nodes()) out.emplace_back(static_cast<std::size_t>(n.port_count()) + 1, init);
  return out;
}

}  // namespace

SearchState initial(const Graph& g, int source) {
  const Node& s = g.node(source);
  if (s.kind() != NodeKind::Source) throw Error(ErrorKind::Invalid, "search must start at the source");

  SearchState st;
  st.loss = per_port(g, LossDb::unreachable());
  st.path = per_port(g, PathEncoding{});
  st.visited = per_port(g, false);
  st.available = per_port(g, ChannelSet{});
  st.occupied = per_port(g, ChannelSet{});

  for (int a = 1; a <= s.port_count(); ++a) {
    st.visited[source][a] = true;
    st.loss[source][a] = LossDb(0.0);
    const ChannelSet raw = g.emitter_channels(a, LockView::Raw);
    if (raw.empty()) continue;
    const ChannelSet free = g.emitter_channels(a, LockView::Effective);
    ChannelSet blocked;
    for (Channel c : raw) {
      if (!free.count(c)) blocked.insert(c);
    }
    for (std::size_t e : g.edges_from(PortRef{source, a})) {
      const Edge& edge = g.edges()[e];
      const PortRef to = edge.to;
      if (to.node == source || !(edge.loss < st.loss[to.node][to.port])) continue;
      st.loss[to.node][to.port] = edge.loss;
      st.path[to.node][to.port] = PathEncoding({edge.from, to});
      st.available[to.node][to.port] = free;
      st.occupied[to.node][to.port] = blocked;
    }
  }
  return st;
}

std::optional<PortRef> gpl(const SearchState& state) {
  std::optional<PortRef> best;
  LossDb best_loss = LossDb::unreachable();
  for (std::size_t r = 0; r < state.loss.size(); ++r) {
    for (std::size_t b = 1; b < state.loss[r].size(); ++b) {
      if (state.visited[r][b]) continue;
      const LossDb l = state.loss[r][b];
      if (l.finite() && l < best_loss) {
        best_loss = l;
        best = PortRef{static_cast<int>(r), static_cast<int>(b)};
      }
    }
  }
  return best;
}

PathRecord path_search(const Graph& g, int source, int target, SearchStats* stats) {
  g.node(target);
  if (target == source) throw Error(ErrorKind::Invalid, "target must differ from the source");
  SearchState st = initial(g, source);
  const std::size_t n = g.nodes().size();

  // Neighbour lists with the C_qr matrices, built once per search.
  std::vector<std::vector<std::pair<int, LossMatrix>>> hops(n);
  for (const Edge& e : g.edges()) {
    auto& list = hops[e.from.node];
    bool seen = false;
    for (const auto& [r, c] : list) seen = seen || r == e.to.node;
    if (!seen) list.emplace_back(e.to.node, g.edge_loss_matrix(e.from.node, e.to.node));
  }

  for (;;) {
    if (stats) ++stats->gpl_calls;
    const std::optional<PortRef> next = gpl(st);
    if (!next) {
      throw Error(ErrorKind::NoPath, "no path from the source to " + g.node(target).name());
    }
    const int q = next->node;
    const int a = next->port;
    st.visited[q][a] = true;

    if (q == target) {
      PathRecord rec;
      rec.target = target;
      rec.path = st.path[q][a];
      rec.loss = st.loss[q][a];
      rec.available = st.available[q][a];
      rec.occupied = st.occupied[q][a];
      return rec;
    }

    const LossMatrix x = g.effective_slice(q, a);
    for (const auto& [r, c] : hops[q]) {
      if (r == source) continue;
      for (int b = 1; b <= g.node(r).port_count(); ++b) {
        if (st.visited[r][b]) continue;
        LossDb m = LossDb::unreachable();
        int row = 0;
        for (std::size_t k = 0; k < x.rows(); ++k) {
          const LossDb edge = c(k, b - 1);
          if (!edge.finite()) continue;
          for (std::size_t l = 0; l < x.cols(); ++l) {
            const LossDb z = x(k, l) + edge;
            if (z < m) {
              m = z;
              row = static_cast<int>(k) + 1;
            }
          }
        }
        if (!m.finite()) continue;
        const LossDb total = m + st.loss[q][a];
        if (!(total < st.loss[r][b])) continue;

        const Traversal t{q, a, row};
        ChannelSet avail;
        ChannelSet occ;
        for (Channel ch : st.available[q][a]) {
          if (g.traversal_loss(t, ch, LockView::Effective).finite()) {
            avail.insert(ch);
          } else if (g.traversal_loss(t, ch, LockView::Raw).finite()) {
            occ.insert(ch);
          }
        }
        for (Channel ch : st.occupied[q][a]) {
          if (g.traversal_loss(t, ch, LockView::Raw).finite()) occ.insert(ch);
        }

        PathEncoding p = st.path[q][a];
        p.append(PortRef{q, row});
        p.append(PortRef{r, b});
        st.loss[r][b] = total;
        st.path[r][b] = std::move(p);
        st.available[r][b] = std::move(avail);
        st.occupied[r][b] = std::move(occ);
      }
    }
  }
}

LossDb traversal_row_min(const Graph& g, const Traversal& t, LockView view) {
  const Node& n = g.node(t.node);
  LossDb best = LossDb::unreachable();
  if (n.kind() == NodeKind::WdmDevice) {
    for (Channel ch : n.support.channels) best = std::min(best, g.traversal_loss(t, ch, view));
  } else {
    best = g.traversal_loss(t, g.grid().channels.front(), view);
  }
  return best;
}

LossDb recompute_loss(const Graph& g, const PathEncoding& p, Channel ch, LockView view) {
  if (p.empty()) return LossDb(0.0);
  g.validate_path(p);
  if (!g.emitter_channels(p.front().port, view).count(ch)) return LossDb::unreachable();
  LossDb total(0.0);
  const auto& stops = p.stops();
  bool arriving = true;
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    const PortRef& from = stops[i];
    const PortRef& to = stops[i + 1];
    if (arriving) {
      total += g.edge_loss_matrix(from.node, to.node)(from.port - 1, to.port - 1);
    } else {
      total += g.traversal_loss(Traversal{from.node, from.port, to.port}, ch, view);
    }
    arriving = !arriving;
  }
  return total;
}

}  // namespace qedn
