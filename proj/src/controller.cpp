#include "qedn/controller.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "qedn/error.hpp"

namespace qedn {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Satisfaction: return "satisfaction";
    case Outcome::Partial: return "partial";
    case Outcome::Competition: return "competition";
    case Outcome::Infeasible: return "infeasible";
    case Outcome::NoPath: return "no_path";
    case Outcome::Deleted: return "deleted";
  }
  return "?";
}

std::vector<PairCandidate> pair_channels(const PathRecord& sp_i, const PathRecord& sp_j, const ChannelGrid& grid) {
  ChannelSet si = sp_i.available;
  si.insert(sp_i.occupied.begin(), sp_i.occupied.end());
  ChannelSet sj = sp_j.available;
  sj.insert(sp_j.occupied.begin(), sp_j.occupied.end());

  std::vector<Channel> lows;
  for (Channel c : grid.channels) {
    if (c < grid.center && grid.contains(grid.mirror(c))) lows.push_back(c);
  }
  std::sort(lows.begin(), lows.end(), [&](Channel x, Channel y) {
    return std::abs(x.index - grid.center.index) < std::abs(y.index - grid.center.index);
  });

  std::vector<PairCandidate> out;
  for (Channel lo : lows) {
    const Channel hi = grid.mirror(lo);
    const bool forward = si.count(lo) && sj.count(hi);
    const bool backward = si.count(hi) && sj.count(lo);
    if (forward) {
      out.push_back(PairCandidate{{lo, hi}, lo, hi, backward});
    } else if (backward) {
      out.push_back(PairCandidate{{lo, hi}, hi, lo, false});
    }
  }
  return out;
}

std::vector<QueueEntry> queue_order(std::vector<QueueEntry> q) {
  std::stable_sort(q.begin(), q.end(), [](const QueueEntry& x, const QueueEntry& y) {
    if (x.lk != y.lk) return x.lk < y.lk;
    return x.timetag < y.timetag;
  });
  return q;
}

ChannelSet matched_channels(const StatusDb& db, int user) {
  ChannelSet out;
  for (const AllocationRecord& r : db.sc) {
    if (r.user_q == user) out.insert(r.channel);
  }
  return out;
}

namespace {

bool channel_taken(const StatusDb& db, Channel c) {
  return std::any_of(db.sc.begin(), db.sc.end(), [&](const AllocationRecord& r) { return r.channel == c; });
}

std::vector<ChannelPair> held_by(const StatusDb& db, int a, int b) {
  std::vector<ChannelPair> out;
  for (const AllocationRecord& r : db.sc) {
    if (r.user_q == a && r.user_r == b) {
      const Channel m = db.g.grid().mirror(r.channel);
      out.push_back(ChannelPair{std::min(r.channel, m), std::max(r.channel, m)});
    }
  }
  std::sort(out.begin(), out.end(), [](const ChannelPair& x, const ChannelPair& y) { return x.low < y.low; });
  return out;
}

// Locks one orientation of the candidate on both paths, falling back to the
// swapped orientation. Nothing changes when neither fits.
bool try_grant(StatusDb& db, const Connection& c, const PairCandidate& pc, EventReport& rep) {
  std::vector<std::pair<Channel, Channel>> orientations{{pc.to_i, pc.to_j}};
  if (pc.swappable) orientations.emplace_back(pc.to_j, pc.to_i);
  const PathEncoding& pa = db.sp.at(c.a).path;
  const PathEncoding& pb = db.sp.at(c.b).path;
  for (auto [ca, cb] : orientations) {
    if (channel_taken(db, ca) || channel_taken(db, cb)) return false;
    try {
      db.g.lock_channels(pa, {ca});
    } catch (const Error&) {
      continue;
    }
    try {
      db.g.lock_channels(pb, {cb});
    } catch (const Error&) {
      db.g.unlock_channels(pa, {ca});
      continue;
    }
    db.sc.push_back(AllocationRecord{ca, c.a, c.b, c.timetag});
    db.sc.push_back(AllocationRecord{cb, c.b, c.a, c.timetag});
    rep.granted.push_back(ChannelGrant{c.a, c.b, ca});
    rep.granted.push_back(ChannelGrant{c.b, c.a, cb});
    return true;
  }
  return false;
}

void release_pair(StatusDb& db, const ChannelPair& p, EventReport& rep) {
  for (Channel ch : {p.low, p.high}) {
    auto it = std::find_if(db.sc.begin(), db.sc.end(), [&](const AllocationRecord& r) { return r.channel == ch; });
    if (it == db.sc.end()) throw Error(ErrorKind::StateError, "CH" + std::to_string(ch.index) + " is not allocated");
    db.g.unlock_channels(db.sp.at(it->user_q).path, {ch});
    rep.revoked.push_back(ChannelGrant{it->user_q, it->user_r, ch});
    db.sc.erase(it);
  }
}

std::vector<QueueEntry>::iterator find_entry(std::vector<QueueEntry>& q, PairKey key) {
  return std::find_if(q.begin(), q.end(),
                      [&](const QueueEntry& e) { return pair_key(e.user_q, e.user_r) == key; });
}

void dequeue(StatusDb& db, PairKey key) {
  auto it = find_entry(db.q, key);
  if (it != db.q.end()) db.q.erase(it);
}

}  // namespace

Controller::Controller(Graph g, QkdParams params, Policy policy)
    : db_{std::move(g), {}, {}, {}, {}}, params_(params), policy_(policy) {
  params_.validate();
  db_.g.source_id();
}

std::vector<ChannelPair> Controller::held_pairs(int a, int b) const {
  auto it = db_.connections.find(pair_key(a, b));
  if (it == db_.connections.end()) return {};
  return held_by(db_, it->second.a, it->second.b);
}

int Controller::omega(int a, int b) const {
  auto ia = db_.sp.find(a);
  auto ib = db_.sp.find(b);
  if (ia == db_.sp.end() || ib == db_.sp.end()) return 0;
  if (policy_ == Policy::Frfs) return 1;
  return optimal_channel_count(ia->second, ib->second, params_, static_cast<int>(db_.g.grid().pair_count()));
}

void Controller::check_users(const Request& req) const {
  for (int u : {req.a, req.b}) {
    if (db_.g.node(u).kind() != NodeKind::User) {
      throw Error(ErrorKind::Invalid, db_.g.node(u).name() + " is not a user");
    }
  }
  if (req.a == req.b) throw Error(ErrorKind::Invalid, "a connection needs two distinct users");
}

EventReport Controller::handle(const Request& req) {
  return req.op == Op::Establish ? establish(req) : delete_connection(req);
}

EventReport Controller::establish(const Request& req) {
  check_users(req);
  const PairKey key = pair_key(req.a, req.b);
  if (db_.connections.count(key)) {
    throw Error(ErrorKind::AlreadyConnected, db_.g.node(req.a).name() + "-" + db_.g.node(req.b).name() +
                                                 " is already active or queued");
  }
  EventReport rep;
  rep.ts = req.timetag;
  rep.op = Op::Establish;
  rep.a = req.a;
  rep.b = req.b;
  const Connection c{req.a, req.b, req.timetag};
  db_.connections[key] = c;
  rep.outcome = admit(c, rep);
  finish(rep);
  return rep;
}

EventReport Controller::delete_connection(const Request& req) {
  check_users(req);
  const PairKey key = pair_key(req.a, req.b);
  auto it = db_.connections.find(key);
  if (it == db_.connections.end()) {
    throw Error(ErrorKind::NotFound, "no connection " + db_.g.node(req.a).name() + "-" + db_.g.node(req.b).name());
  }
  const Connection c = it->second;
  EventReport rep;
  rep.ts = req.timetag;
  rep.op = Op::Delete;
  rep.a = c.a;
  rep.b = c.b;
  rep.outcome = Outcome::Deleted;

  const std::vector<ChannelPair> held = held_by(db_, c.a, c.b);
  for (const ChannelPair& p : held) release_pair(db_, p, rep);
  dequeue(db_, key);
  db_.connections.erase(key);
  drop_idle_users({c.a, c.b});
  if (!held.empty()) reconfigure(rep);
  finish(rep);
  return rep;
}

bool Controller::ensure_path(int user) {
  if (db_.sp.count(user)) return true;
  PathRecord rec;
  try {
    rec = path_search(db_.g, db_.g.source_id(), user);
    db_.g.lock_ports(rec.path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoPath || e.kind() == ErrorKind::Conflict) return false;
    throw;
  }
  db_.sp[user] = std::move(rec);
  return true;
}

void Controller::drop_idle_users(std::initializer_list<int> users) {
  for (int u : users) {
    auto it = db_.sp.find(u);
    if (it == db_.sp.end() || !qedn::matched_channels(db_, u).empty()) continue;
    db_.g.unlock_ports(it->second.path);
    db_.sp.erase(it);
  }
}

void Controller::enqueue(const Connection& c, int lk) {
  auto it = find_entry(db_.q, pair_key(c.a, c.b));
  if (it != db_.q.end()) {
    it->lk = lk;
  } else {
    db_.q.push_back(QueueEntry{c.a, c.b, lk, c.timetag});
  }
}

int Controller::grant_pairs(const Connection& c, int wanted, EventReport& rep) {
  int held = static_cast<int>(held_by(db_, c.a, c.b).size());
  for (const PairCandidate& pc : pair_channels(db_.sp.at(c.a), db_.sp.at(c.b), db_.g.grid())) {
    if (held >= wanted) break;
    if (try_grant(db_, c, pc, rep)) ++held;
  }
  return held;
}

bool Controller::compete(const Connection& c, EventReport& rep) {
  const std::vector<PairCandidate> rho = pair_channels(db_.sp.at(c.a), db_.sp.at(c.b), db_.g.grid());
  ChannelSet wanted;
  for (const PairCandidate& pc : rho) {
    wanted.insert(pc.pair.low);
    wanted.insert(pc.pair.high);
  }
  std::vector<Connection> victims;
  for (const auto& [key, v] : db_.connections) {
    if (key == pair_key(c.a, c.b)) continue;
    const auto held = held_by(db_, v.a, v.b);
    if (held.size() < 2) continue;
    bool overlaps = std::any_of(held.begin(), held.end(), [&](const ChannelPair& p) {
      return wanted.count(p.low) || wanted.count(p.high);
    });
    if (overlaps) victims.push_back(v);
  }
  std::sort(victims.begin(), victims.end(),
            [](const Connection& x, const Connection& y) { return x.timetag > y.timetag; });

  const int center = db_.g.grid().center.index;
  for (const Connection& v : victims) {
    auto held = held_by(db_, v.a, v.b);
    std::sort(held.begin(), held.end(), [&](const ChannelPair& x, const ChannelPair& y) {
      return std::abs(x.low.index - center) > std::abs(y.low.index - center);
    });
    for (const ChannelPair& hp : held) {
      auto cand = std::find_if(rho.begin(), rho.end(), [&](const PairCandidate& pc) { return pc.pair == hp; });
      if (cand == rho.end()) continue;
      StatusDb trial = db_;
      EventReport delta;
      release_pair(trial, hp, delta);
      if (!try_grant(trial, c, *cand, delta)) continue;
      db_ = std::move(trial);
      rep.revoked.insert(rep.revoked.end(), delta.revoked.begin(), delta.revoked.end());
      rep.granted.insert(rep.granted.end(), delta.granted.begin(), delta.granted.end());
      enqueue(v, 1);
      return true;
    }
  }
  return false;
}

Outcome Controller::admit(const Connection& c, EventReport& rep) {
  const PairKey key = pair_key(c.a, c.b);
  if (!ensure_path(c.a) || !ensure_path(c.b)) {
    enqueue(c, 0);
    drop_idle_users({c.a, c.b});
    return Outcome::NoPath;
  }
  const int w = omega(c.a, c.b);
  const int held = grant_pairs(c, w, rep);
  if (held >= w) {
    dequeue(db_, key);
    return Outcome::Satisfaction;
  }
  if (held > 0) {
    enqueue(c, 1);
    return Outcome::Partial;
  }
  if (policy_ == Policy::Dser && compete(c, rep)) {
    if (w > 1) {
      enqueue(c, 1);
    } else {
      dequeue(db_, key);
    }
    return Outcome::Competition;
  }
  enqueue(c, 0);
  drop_idle_users({c.a, c.b});
  return Outcome::Infeasible;
}

void Controller::reconfigure(EventReport& rep) {
  for (const QueueEntry& e : queue_order(db_.q)) {
    const PairKey key = pair_key(e.user_q, e.user_r);
    auto cur = find_entry(db_.q, key);
    if (cur == db_.q.end()) continue;
    const Connection c = db_.connections.at(key);
    if (cur->lk == 0) {
      db_.q.erase(cur);
      rep.reconfigured.push_back(ServedPair{c.a, c.b, admit(c, rep)});
      continue;
    }
    const int w = omega(c.a, c.b);
    const int held = grant_pairs(c, w, rep);
    if (held >= w) {
      dequeue(db_, key);
      rep.reconfigured.push_back(ServedPair{c.a, c.b, Outcome::Satisfaction});
    } else {
      rep.reconfigured.push_back(ServedPair{c.a, c.b, Outcome::Partial});
    }
  }
}

std::vector<PairRate> Controller::rates() const {
  std::vector<Connection> order;
  for (const auto& [key, c] : db_.connections) order.push_back(c);
  std::sort(order.begin(), order.end(), [](const Connection& x, const Connection& y) { return x.timetag < y.timetag; });
  std::vector<PairRate> out;
  for (const Connection& c : order) {
    PairRate r;
    r.a = c.a;
    r.b = c.b;
    const auto held = held_by(db_, c.a, c.b);
    r.n_pairs = static_cast<int>(held.size());
    r.omega = omega(c.a, c.b);
    for (const ChannelPair& p : held) {
      r.channels.insert(p.low);
      r.channels.insert(p.high);
    }
    if (r.n_pairs > 0) {
      r.rate_cps = secure_key_rate(
          LinkBudget{db_.sp.at(c.a).loss.value(), db_.sp.at(c.b).loss.value(), r.n_pairs}, params_);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void Controller::finish(EventReport& rep) const {
  rep.rates = rates();
  rep.queue = queue_order(db_.q);
}

std::vector<std::string> Controller::audit() const {
  std::vector<std::string> problems;
  auto fail = [&](std::string s) { problems.push_back(std::move(s)); };
  const ChannelGrid& grid = db_.g.grid();

  std::set<Channel> seen;
  for (const AllocationRecord& r : db_.sc) {
    const std::string tag = "CH" + std::to_string(r.channel.index);
    if (!seen.insert(r.channel).second) fail(tag + " allocated twice");
    if (!grid.contains(r.channel)) fail(tag + " is off the grid");
    if (!db_.sp.count(r.user_q)) fail(tag + ": user " + std::to_string(r.user_q) + " has no path");
    const Channel m = grid.mirror(r.channel);
    bool mirrored = std::any_of(db_.sc.begin(), db_.sc.end(), [&](const AllocationRecord& o) {
      return o.channel == m && o.user_q == r.user_r && o.user_r == r.user_q && o.timetag == r.timetag;
    });
    if (!mirrored) fail(tag + " has no mirror allocation");
    auto conn = db_.connections.find(pair_key(r.user_q, r.user_r));
    if (conn == db_.connections.end()) {
      fail(tag + " belongs to no connection");
    } else if (conn->second.timetag != r.timetag) {
      fail(tag + " carries a stale timetag");
    }
  }
  if (seen.size() / 2 > grid.pair_count()) fail("more pairs allocated than the grid holds");

  std::set<PairKey> queued;
  for (const QueueEntry& e : db_.q) {
    const PairKey key = pair_key(e.user_q, e.user_r);
    if (!queued.insert(key).second) fail("pair queued twice");
    auto conn = db_.connections.find(key);
    if (conn == db_.connections.end()) {
      fail("queue entry without a connection");
      continue;
    }
    const bool holds = !held_by(db_, conn->second.a, conn->second.b).empty();
    if ((e.lk == 1) != holds) fail("queue flag disagrees with holdings");
    if (e.timetag != conn->second.timetag) fail("queue entry carries a stale timetag");
  }
  for (const auto& [key, c] : db_.connections) {
    const auto held = held_by(db_, c.a, c.b);
    if (held.empty() && !queued.count(key)) fail("idle connection is not queued");
    if (!held.empty()) {
      const int w = omega(c.a, c.b);
      if (static_cast<int>(held.size()) > w) fail("connection exceeds its optimal pair count");
      if (static_cast<int>(held.size()) < w && !queued.count(key)) fail("under-served connection is not queued");
    }
  }
  for (const auto& [u, rec] : db_.sp) {
    if (qedn::matched_channels(db_, u).empty()) fail("user " + std::to_string(u) + " keeps a path without channels");
  }

  Graph expected = db_.g.pristine();
  try {
    for (const auto& [u, rec] : db_.sp) expected.lock_ports(rec.path);
    for (const AllocationRecord& r : db_.sc) {
      auto it = db_.sp.find(r.user_q);
      if (it != db_.sp.end()) expected.lock_channels(it->second.path, {r.channel});
    }
    if (!(expected == db_.g)) fail("graph locks differ from the locks implied by SP and SC");
  } catch (const Error& e) {
    fail(std::string("replaying SP/SC locks failed: ") + e.what());
  }
  return problems;
}

}  // namespace qedn
