#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qedn/key_rate.hpp"
#include "qedn/network.hpp"
#include "qedn/path_search.hpp"

namespace qedn {

enum class Op { Establish, Delete };

struct Request {
  int a = -1;
  int b = -1;
  Op op = Op::Establish;
  long timetag = 0;
};

/// `channel` is delivered to user_q; its mirror goes to user_r.
struct AllocationRecord {
  Channel channel;
  int user_q = -1;
  int user_r = -1;
  long timetag = 0;

  friend bool operator==(const AllocationRecord&, const AllocationRecord&) = default;
};

struct QueueEntry {
  int user_q = -1;
  int user_r = -1;
  int lk = 0;
  long timetag = 0;

  friend bool operator==(const QueueEntry&, const QueueEntry&) = default;
};

struct ChannelPair {
  Channel low;
  Channel high;

  friend bool operator==(const ChannelPair&, const ChannelPair&) = default;
};

/// One entry of rho_ij: the pair plus which user gets which channel.
/// `swappable` marks pairs both paths can carry the other way round.
struct PairCandidate {
  ChannelPair pair;
  Channel to_i;
  Channel to_j;
  bool swappable = false;

  friend bool operator==(const PairCandidate&, const PairCandidate&) = default;
};

/// A requested connection, oriented as it was requested.
struct Connection {
  int a = -1;
  int b = -1;
  long timetag = 0;

  friend bool operator==(const Connection&, const Connection&) = default;
};

using PairKey = std::pair<int, int>;
inline PairKey pair_key(int a, int b) { return a < b ? PairKey{a, b} : PairKey{b, a}; }

struct StatusDb {
  Graph g;
  std::map<int, PathRecord> sp;
  std::vector<AllocationRecord> sc;
  std::vector<QueueEntry> q;
  std::map<PairKey, Connection> connections;  // active or queued
};

enum class Outcome { Satisfaction, Partial, Competition, Infeasible, NoPath, Deleted };
std::string_view to_string(Outcome o);

struct ChannelGrant {
  int user = -1;
  int partner = -1;
  Channel channel;

  friend bool operator==(const ChannelGrant&, const ChannelGrant&) = default;
};

struct PairRate {
  int a = -1;
  int b = -1;
  int n_pairs = 0;
  int omega = 0;
  ChannelSet channels;  // both users' channels
  double rate_cps = 0.0;
};

struct ServedPair {
  int a = -1;
  int b = -1;
  Outcome outcome = Outcome::Infeasible;
};

struct EventReport {
  long ts = 0;
  Op op = Op::Establish;
  int a = -1;
  int b = -1;
  Outcome outcome = Outcome::Infeasible;
  std::vector<ChannelGrant> granted;
  std::vector<ChannelGrant> revoked;
  std::vector<ServedPair> reconfigured;  // delete only
  std::vector<PairRate> rates;           // every known connection afterwards
  std::vector<QueueEntry> queue;         // priority order
};

/// Dser is the full scheme; Frfs grants one pair per connection and never
/// preempts.
enum class Policy { Dser, Frfs };

/// All channel pairs both paths can carry, innermost first. The first user
/// gets the lower channel when both orientations fit.
std::vector<PairCandidate> pair_channels(const PathRecord& sp_i, const PathRecord& sp_j, const ChannelGrid& grid);

/// Sorted by (lk, timetag); stable.
std::vector<QueueEntry> queue_order(std::vector<QueueEntry> q);

ChannelSet matched_channels(const StatusDb& db, int user);

class Controller {
 public:
  Controller(Graph g, QkdParams params = {}, Policy policy = Policy::Dser);

  EventReport handle(const Request& req);
  EventReport establish(const Request& req);
  EventReport delete_connection(const Request& req);

  const StatusDb& db() const { return db_; }
  const QkdParams& params() const { return params_; }
  Policy policy() const { return policy_; }

  ChannelSet matched_channels(int user) const { return qedn::matched_channels(db_, user); }
  /// Channel pairs currently held by a connection.
  std::vector<ChannelPair> held_pairs(int a, int b) const;
  int omega(int a, int b) const;
  std::vector<PairRate> rates() const;

  /// Full consistency check of the status database; empty when clean.
  std::vector<std::string> audit() const;

 private:
  void check_users(const Request& req) const;
  Outcome admit(const Connection& c, EventReport& rep);
  bool ensure_path(int user);
  void drop_idle_users(std::initializer_list<int> users);
  int grant_pairs(const Connection& c, int wanted, EventReport& rep);
  bool compete(const Connection& c, EventReport& rep);
  void reconfigure(EventReport& rep);
  void enqueue(const Connection& c, int lk);
  void finish(EventReport& rep) const;

  StatusDb db_;
  QkdParams params_;
  Policy policy_;
};

}  // namespace qedn
