#pragma once

#include <span>
#include <vector>

#include "qedn/types.hpp"

namespace qedn {

/// Passage through one device: light enters `in_port` and leaves `out_port`.
struct Traversal {
  int node = -1;
  int in_port = 0;
  int out_port = 0;

  friend constexpr bool operator==(const Traversal&, const Traversal&) = default;
};

/// Source-first route as a list of (node, port) stops.
///
/// The first stop is the source's emitting port. Consecutive stops on
/// different nodes are fiber hops; consecutive stops on the same node are a
/// device traversal. The flat form alternates node and port numbers, e.g.
/// (0,1,1,1,1,2,5,1) is S:1 -> F1:1, through F1 to port 2, -> node 5 port 1.
class PathEncoding {
 public:
  PathEncoding() = default;
  explicit PathEncoding(std::vector<PortRef> stops) : stops_(std::move(stops)) {}

  /// Throws Error(Invalid) on odd length.
  static PathEncoding from_flat(std::span<const int> flat);
  std::vector<int> flat() const;

  const std::vector<PortRef>& stops() const { return stops_; }
  bool empty() const { return stops_.empty(); }
  std::size_t size() const { return stops_.size(); }
  const PortRef& front() const { return stops_.front(); }
  const PortRef& back() const { return stops_.back(); }
  void append(PortRef stop) { stops_.push_back(stop); }

  std::vector<Traversal> traversals() const;
  /// Ordered node ids visited (a node traversed twice appears twice).
  std::vector<int> node_sequence() const;

  friend bool operator==(const PathEncoding&, const PathEncoding&) = default;

 private:
  std::vector<PortRef> stops_;
};

}  // namespace qedn
