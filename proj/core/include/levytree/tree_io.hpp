#pragma once
// JSON serialization of weighted trees:
//   {"parent": [...], "edge_len": [...], "vertex_mass": [...],
//    "node_mass": [...], "root": k}
// Integers round-trip bit-exact; reals use shortest round-trip decimals.

#include <filesystem>
#include <string>

#include "levytree/tree.hpp"

namespace levytree {

std::string tree_to_json(const WTree& tree);
WTree tree_from_json(const std::string& text);

void write_tree_json(const WTree& tree, const std::filesystem::path& path);
WTree read_tree_json(const std::filesystem::path& path);

}  // namespace levytree
