#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qedn/network.hpp"

namespace qedn {

/// Dijkstra bookkeeping over (node, port) arrival states, indexed
/// [node][port] with port 0 unused.
struct SearchState {
  std::vector<std::vector<LossDb>> loss;
  std::vector<std::vector<PathEncoding>> path;
  std::vector<std::vector<bool>> visited;
  std::vector<std::vector<ChannelSet>> available;
  std::vector<std::vector<ChannelSet>> occupied;
};

/// Lowest-loss route from the source to one node.
struct PathRecord {
  int target = -1;
  PathEncoding path;
  LossDb loss = LossDb::unreachable();
  ChannelSet available;  // pass every hop under current locks
  ChannelSet occupied;   // pass the raw tensors but are blocked by a lock

  friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

struct SearchStats {
  std::size_t gpl_calls = 0;
};

SearchState initial(const Graph& g, int source);

/// Unvisited state with the smallest finite loss; ties go to the lower node
/// id, then the lower port. nullopt once nothing finite is left.
std::optional<PortRef> gpl(const SearchState& state);

/// Throws NotFound for unknown ids and NoPath when the target cannot be
/// reached under the current locks.
PathRecord path_search(const Graph& g, int source, int target, SearchStats* stats = nullptr);

/// Sum of edge and device losses along `p` on one channel.
LossDb recompute_loss(const Graph& g, const PathEncoding& p, Channel ch, LockView view = LockView::Effective);

/// Loss of one device traversal on the cheapest channel slot, the quantity
/// the search accumulates.
LossDb traversal_row_min(const Graph& g, const Traversal& t, LockView view = LockView::Effective);

}  // namespace qedn
