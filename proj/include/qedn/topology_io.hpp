#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qedn/network.hpp"

namespace qedn {

/// Parses a topology document. Syntax errors throw Error(Parse) with a
/// "line:col" prefix; schema violations throw Error(Parse) naming the JSON
/// pointer of the offending field. Device-level inconsistencies surface as
/// Error(Invalid).
Graph parse_topology(std::string_view text);
Graph load_topology(const std::filesystem::path& file);

/// Canonical emission; parse_topology(dump_topology(g)) == g.pristine().
/// Directed edges are written one per record.
std::string dump_topology(const Graph& g);

/// "inf" for unreachable, otherwise the number.
std::string loss_text(LossDb loss);

/// 1-based line and column of a byte offset, rendered "line:col".
std::string text_position(std::string_view text, std::size_t offset);

}  // namespace qedn
