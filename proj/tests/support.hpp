#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qedn/controller.hpp"
#include "qedn/network.hpp"
#include "qedn/path_search.hpp"
#include "qedn/simulation.hpp"

namespace qedn::testkit {

std::filesystem::path fixture(const std::string& rel);
Graph load_fixture(const std::string& name);
std::string read_file(const std::filesystem::path& p);
int id_of(const Graph& g, const std::string& name_or_label);

/// Independent restatement of the loss model, used as an oracle.
struct OracleRates {
  static double rate(double la, double lb, int n, const QkdParams& p);
  static int omega(double la, double lb, const QkdParams& p, int n_max);
};

/// Exhaustive minimum over every route that never revisits an arrival
/// state. Device cost is the cheapest channel slot that the oracle's own
/// reading of the lock rules leaves open. Unreachable gives +inf.
double brute_force_loss(const Graph& g, int target);

/// Random topology: node 0 is the source, the rest a mix of users and
/// devices. Losses are multiples of 0.25 dB so sums are exact.
Graph random_graph(std::mt19937& rng, int max_nodes = 8, int max_ports = 6);

/// Locks a few searched paths and channel subsets, ignoring refusals.
void random_locks(Graph& g, std::mt19937& rng, int attempts);

/// Random valid establish/delete sequence over the users of g.
std::vector<Request> random_script(const Graph& g, std::mt19937& rng, int length);

/// Invariant checks done from the outside of the controller; empty = clean.
std::vector<std::string> check_invariants(const Controller& c);

std::vector<int> users_of(const Graph& g);

/// Paths and channel pairing of the four-user example allocation on the
/// case4 fixture, channels A{35,38} B{36} C{32,33,37} D{30,31}.
struct ExampleState {
  Graph g;
  std::map<int, PathRecord> sp;
  std::vector<AllocationRecord> sc;
};
ExampleState four_path_state();

}  // namespace qedn::testkit
