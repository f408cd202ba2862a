#include "levytree/tree_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace levytree {

std::string tree_to_json(const WTree& tree) {
  nlohmann::json j;
  j["parent"] = tree.parent_array();
  j["edge_len"] = tree.edge_len_array();
  j["vertex_mass"] = tree.vertex_mass_array();
  j["node_mass"] = tree.node_mass_array();
  j["root"] = tree.root();
  return j.dump();
}

WTree tree_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("tree json: bad JSON: ") +
                                e.what());
  }
  for (const char* field : {"parent", "edge_len", "vertex_mass", "root"}) {
    if (!j.contains(field)) {
      throw std::invalid_argument(std::string("tree json: missing field ") +
                                  field);
    }
  }
  auto parent = j.at("parent").get<std::vector<VertexId>>();
  auto edge_len = j.at("edge_len").get<std::vector<double>>();
  auto vertex_mass = j.at("vertex_mass").get<std::vector<double>>();
  std::vector<double> node_mass;
  if (j.contains("node_mass")) {
    node_mass = j.at("node_mass").get<std::vector<double>>();
  }
  const auto declared_root = j.at("root").get<VertexId>();
  WTree tree = WTree::build(std::move(parent), std::move(edge_len),
                            std::move(vertex_mass), std::move(node_mass));
  if (tree.root() != declared_root) {
    throw std::invalid_argument(
        "tree json: root field disagrees with the parent sentinel");
  }
  return tree;
}

void write_tree_json(const WTree& tree, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("tree json: cannot open " + path.string() +
                             " for writing");
  }
  out << tree_to_json(tree) << '\n';
  if (!out) {
    throw std::runtime_error("tree json: write failed for " + path.string());
  }
}

WTree read_tree_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("tree json: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return tree_from_json(buf.str());
}

}  // namespace levytree
