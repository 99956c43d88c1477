#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "deeplift/graph.hpp"

namespace deeplift {

// Current model file version. Files carrying another version are rejected.
inline constexpr int kModelFormatVersion = 1;

// Serializes to the versioned JSON model format. Doubles are written in shortest
// round-trip form, so parse(serialize(g)) reproduces every weight bit for bit.
std::string serialize_model(const Graph& graph);

// Throws FormatError naming the location (line:column for syntax errors, a JSON path for
// semantic ones).
Graph parse_model(std::string_view text);

void save_model(const Graph& graph, const std::filesystem::path& path);
Graph load_model(const std::filesystem::path& path);

}  // namespace deeplift
