#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qedn/path.hpp"
#include "qedn/types.hpp"

namespace qedn {

/// Node taxonomy of the supported-channel vector.
enum class NodeKind { Source, User, BeamSplitter, TdmSwitch, WdmDevice };

/// Concrete device template a node is generated from.
enum class DeviceModel { Source, User, Bs, Os, Aos, Wss, Dwdm };

std::string_view to_string(DeviceModel model);
std::optional<DeviceModel> parse_device_model(std::string_view text);
NodeKind kind_of(DeviceModel model);

/// Supported-channel vector of a node. Only WDM devices list channels; every
/// other kind has a single logical channel slot that carries all wavelengths.
struct SupportVector {
  NodeKind kind = NodeKind::User;
  std::vector<Channel> channels;

  /// -3 source, -2 user, -1 beam splitter, 0 OS/AOS; undefined for WDM.
  int sentinel() const;
  std::size_t slot_count() const { return kind == NodeKind::WdmDevice ? channels.size() : 1; }
  /// Slot carrying `c`, or nullopt when a WDM device does not support it.
  std::optional<std::size_t> slot_of(Channel c) const;

  friend bool operator==(const SupportVector&, const SupportVector&) = default;
};

/// Dense row-major matrix of losses, zero-based. Port-indexed dimensions put
/// port p at index p-1.
class LossMatrix {
 public:
  LossMatrix() = default;
  LossMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cells_(rows * cols, LossDb::unreachable()) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  LossDb& operator()(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
  LossDb operator()(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }

  friend bool operator==(const LossMatrix&, const LossMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<LossDb> cells_;
};

/// m x m x |T| pass-through losses; w(j, k, l) is port j to port k on slot l.
class PassThroughTensor {
 public:
  PassThroughTensor() = default;
  PassThroughTensor(int ports, std::size_t slots)
      : ports_(ports),
        slots_(slots),
        cells_(static_cast<std::size_t>(ports) * ports * slots, LossDb::unreachable()) {}

  int ports() const { return ports_; }
  std::size_t slots() const { return slots_; }
  LossDb& at(int from, int to, std::size_t slot) { return cells_[index(from, to, slot)]; }
  LossDb at(int from, int to, std::size_t slot) const { return cells_[index(from, to, slot)]; }

  friend bool operator==(const PassThroughTensor&, const PassThroughTensor&) = default;

 private:
  std::size_t index(int from, int to, std::size_t slot) const {
    return (static_cast<std::size_t>(from - 1) * ports_ + (to - 1)) * slots_ + slot;
  }

  int ports_ = 0;
  std::size_t slots_ = 0;
  std::vector<LossDb> cells_;
};

/// Emitter is the pseudo-peer recorded when a source port carries a channel.
inline constexpr int kEmitterPeer = 0;

struct TdmLock {
  int peer = 0;  // 0 = unlocked
  int users = 0;

  friend bool operator==(const TdmLock&, const TdmLock&) = default;
};

/// Port pinning kept beside the tensor. TDM locks are counted so that paths
/// sharing a segment can release it independently; WDM locks are per
/// (port, channel) and mirrored on both traversal ports.
struct LockState {
  std::vector<TdmLock> tdm;  // indexed by port, [0] unused
  std::map<std::pair<int, Channel>, int> wdm;

  bool empty() const;
  friend bool operator==(const LockState&, const LockState&) = default;
};

/// Declarative device description; the tensor is generated from it.
struct DeviceSpec {
  std::string name;
  std::string label;  // short display name; empty means `name`
  DeviceModel model = DeviceModel::User;
  int ports = 1;
  double insertion_loss_db = 0.0;
  double internal_loss_db = 0.0;  // users only
  std::vector<int> in_ports;      // os, bs
  std::vector<int> out_ports;     // os, bs
  int common_port = 1;            // wss, dwdm
  /// wss/dwdm/source: channels per port. An absent port on a WSS or source
  /// carries the whole grid; on a DWDM it carries nothing.
  std::map<int, std::vector<Channel>> port_channels;

  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

struct Node {
  int id = -1;
  DeviceSpec spec;
  SupportVector support;
  PassThroughTensor tensor;
  LockState locks;
  std::vector<ChannelSet> emitter;  // source only, indexed by port

  const std::string& name() const { return spec.name; }
  const std::string& label() const { return spec.label.empty() ? spec.name : spec.label; }
  DeviceModel model() const { return spec.model; }
  NodeKind kind() const { return support.kind; }
  int port_count() const { return spec.ports; }

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  PortRef from;
  PortRef to;
  LossDb loss;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class LockView { Effective, Raw };

/// Port-level multigraph with device tensors and lock bookkeeping.
///
/// Mutation goes through add_node/add_edge and the four lock operations;
/// everything else is a read-only query.
class Graph {
 public:
  explicit Graph(ChannelGrid grid = ChannelGrid::c_band_30_38());

  int add_node(DeviceSpec spec);
  void add_edge(PortRef from, PortRef to, double loss_db);
  /// Two directed edges with the same loss.
  void add_fiber(PortRef a, PortRef b, double loss_db);

  const ChannelGrid& grid() const { return grid_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(int id) const;
  std::optional<int> find_node(std::string_view name) const;
  /// Matches the name first, then the label.
  std::optional<int> find_node_or_label(std::string_view text) const;
  int source_id() const;
  const std::vector<std::size_t>& edges_from(PortRef port) const;

  /// C_ij: (a, b) entry is the cheapest edge i:a -> j:b, or unreachable.
  LossMatrix edge_loss_matrix(int i, int j) const;

  /// Loss matrix out of `in_port`: rows are output ports, columns channel
  /// slots. Locks blank the cells the lock state forbids.
  LossMatrix effective_slice(int node, int in_port) const;

  /// Single-cell view of a device traversal on one channel.
  LossDb traversal_loss(const Traversal& t, Channel ch, LockView view) const;
  /// Channels a source port can emit.
  ChannelSet emitter_channels(int port, LockView view) const;

  void lock_ports(const PathEncoding& path);
  void unlock_ports(const PathEncoding& path);
  void lock_channels(const PathEncoding& path, const ChannelSet& channels);
  void unlock_channels(const PathEncoding& path, const ChannelSet& channels);

  /// Checks the stop sequence against ports, edges and device tensors;
  /// throws Error(Invalid).
  void validate_path(const PathEncoding& path) const;

  /// Copy with every lock released.
  Graph pristine() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.grid_.channels == b.grid_.channels && a.grid_.center == b.grid_.center &&
           a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  Node& node_mut(int id);
  void check_port(PortRef p) const;

  ChannelGrid grid_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::vector<std::size_t>>> out_;  // [node][port]
};

/// Generates support vector and tensor for a spec; throws Error(Invalid)
/// on inconsistent port maps.
Node build_node(int id, DeviceSpec spec, const ChannelGrid& grid);

}  // namespace qedn
