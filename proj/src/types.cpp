#include "qedn/error.hpp"
#include "qedn/path.hpp"
#include "qedn/types.hpp"

#include <algorithm>

namespace qedn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::Conflict: return "Conflict";
    case ErrorKind::StateError: return "StateError";
    case ErrorKind::Invalid: return "Invalid";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::AlreadyConnected: return "AlreadyConnected";
    case ErrorKind::Inconsistent: return "Inconsistent";
    case ErrorKind::Undefined: return "Undefined";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

bool ChannelGrid::contains(Channel c) const {
  return std::find(channels.begin(), channels.end(), c) != channels.end();
}

std::size_t ChannelGrid::pair_count() const {
  std::size_t n = 0;
  for (Channel c : channels) {
    if (c < center && contains(mirror(c))) ++n;
  }
  return n;
}

ChannelGrid ChannelGrid::c_band_30_38() {
  ChannelGrid g;
  for (int i = 30; i <= 38; ++i) {
    if (i != 34) g.channels.push_back(Channel{i});
  }
  g.center = Channel{34};
  return g;
}

std::string format_channels(const ChannelSet& set) {
  std::string out;
  for (Channel c : set) {
    if (!out.empty()) out += ',';
    out += "CH" + std::to_string(c.index);
  }
  return out;
}

PathEncoding PathEncoding::from_flat(std::span<const int> flat) {
  if (flat.size() % 2 != 0) {
    throw Error(ErrorKind::Invalid, "path encoding must alternate node and port");
  }
  std::vector<PortRef> stops;
  stops.reserve(flat.size() / 2);
  for (std::size_t i = 0; i < flat.size(); i += 2) stops.push_back(PortRef{flat[i], flat[i + 1]});
  return PathEncoding(std::move(stops));
}

std::vector<int> PathEncoding::flat() const {
  std::vector<int> out;
  out.reserve(stops_.size() * 2);
  for (const PortRef& s : stops_) {
    out.push_back(s.node);
    out.push_back(s.port);
  }
  return out;
}

std::vector<Traversal> PathEncoding::traversals() const {
  std::vector<Traversal> out;
  for (std::size_t i = 1; i + 1 < stops_.size(); ++i) {
    if (stops_[i].node == stops_[i + 1].node) {
      out.push_back(Traversal{stops_[i].node, stops_[i].port, stops_[i + 1].port});
      ++i;
    }
  }
  return out;
}

std::vector<int> PathEncoding::node_sequence() const {
  std::vector<int> out;
  for (const PortRef& s : stops_) {
    if (out.empty() || out.back() != s.node) out.push_back(s.node);
  }
  return out;
}

}  // namespace qedn
