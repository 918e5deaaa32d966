#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gabo/data/graph.hpp"

namespace gabo::data {

/// Reads the JSON-Lines graph format:
///   optional header  {"header": {"num_node_fields": 9, "vocab_sizes": [...]}}
///   one graph/line   {"n": 3, "x": [[...9 ints...], ...], "edges": [[0,1], ...], "y": 0, "scaffold": 4}
/// Edges are listed once and mirrored on load. Blank lines are skipped.
/// Errors carry the 1-based line number.
Dataset load_jsonl(const std::filesystem::path& path);
Dataset parse_jsonl(std::istream& in);

/// Writes the same format; the header is always emitted.
void save_jsonl(const std::filesystem::path& path, const Dataset& dataset);
void write_jsonl(std::ostream& out, const Dataset& dataset);

}  // namespace gabo::data
