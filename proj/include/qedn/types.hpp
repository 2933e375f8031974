#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace qedn {

/// Attenuation in dB. Unreachable is carried as +infinity so that sums and
/// minima behave without special cases; files spell it "inf".
class LossDb {
 public:
  constexpr LossDb() = default;
  constexpr explicit LossDb(double db) : db_(db) {}

  static constexpr LossDb unreachable() {
    return LossDb(std::numeric_limits<double>::infinity());
  }

  constexpr bool finite() const { return db_ < std::numeric_limits<double>::infinity(); }
  constexpr double value() const { return db_; }

  friend constexpr LossDb operator+(LossDb a, LossDb b) { return LossDb(a.db_ + b.db_); }
  LossDb& operator+=(LossDb o) {
    db_ += o.db_;
    return *this;
  }
  friend constexpr auto operator<=>(LossDb a, LossDb b) = default;
  friend constexpr bool operator==(LossDb a, LossDb b) = default;

 private:
  double db_ = 0.0;
};

/// ITU C-band 100 GHz grid channel number.
struct Channel {
  int index = 0;

  friend constexpr auto operator<=>(Channel, Channel) = default;
};

using ChannelSet = std::set<Channel>;

/// The channels a network can carry and the grid position of the pump's
/// half-frequency. Entangled partners sit symmetrically about `center`.
struct ChannelGrid {
  std::vector<Channel> channels;
  Channel center{34};

  bool contains(Channel c) const;
  Channel mirror(Channel c) const { return Channel{2 * center.index - c.index}; }
  ChannelSet all() const { return ChannelSet(channels.begin(), channels.end()); }
  /// Number of (c, mirror(c)) pairs with both members on the grid.
  std::size_t pair_count() const;

  static ChannelGrid c_band_30_38();
};

/// A (node, port) location; ports are 1-based.
struct PortRef {
  int node = -1;
  int port = 0;

  friend constexpr auto operator<=>(PortRef, PortRef) = default;
};

std::string format_channels(const ChannelSet& set);

}  // namespace qedn
