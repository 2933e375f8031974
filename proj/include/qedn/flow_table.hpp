#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qedn/controller.hpp"
#include "qedn/network.hpp"
#include "qedn/path_search.hpp"

namespace qedn {

/// Source rules have no input port; OS/AOS/BS rules carry no channel set.
struct FlowRule {
  std::optional<int> in;
  int out = 0;
  std::optional<ChannelSet> channels;

  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};

/// Rule i is R(i+1); order is (out, in, lowest channel).
struct FlowTable {
  int device = -1;
  std::vector<FlowRule> rules;

  friend bool operator==(const FlowTable&, const FlowTable&) = default;
};

/// One table per device that forwards at least one allocated channel, by
/// device id. Throws Inconsistent when an allocation names a user with no
/// path.
std::vector<FlowTable> calculate(const Graph& g, const std::map<int, PathRecord>& sp,
                                 const std::vector<AllocationRecord>& sc);

struct RouteAudit {
  std::vector<std::string> problems;
  bool clean() const { return problems.empty(); }
};

/// Follows every allocation from the source through the rules and fibers,
/// and flags unused or contradictory rules.
RouteAudit verify_routes(const Graph& g, const std::vector<FlowTable>& tables, const std::vector<AllocationRecord>& sc);

std::string serialize(const FlowTable& table);
std::string serialize(const std::vector<FlowTable>& tables);
/// Accepts either a single table document or a list; throws Error(Parse).
std::vector<FlowTable> parse_flow_tables(std::string_view text);

}  // namespace qedn
