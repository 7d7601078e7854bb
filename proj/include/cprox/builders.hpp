#pragma once

#include "cprox/linalg.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cprox {

// Groups are 0-based index sets over {0..d-1}; each group sorted ascending.
// Text serialization is 1-based, one group per line.
struct GroupSystem {
  int d = 0;
  std::vector<std::vector<int>> groups;
  int total_size() const;  // m = sum of group sizes
};

struct Graph {
  int d = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, unique
};

struct SelectionOperator {
  LinearOperator op;           // m x d stack of per-group selection rows
  std::vector<int> offsets;    // block boundaries for the group-l2 penalty
};

SelectionOperator group_selection_operator(const GroupSystem& gs);
LinearOperator fused_difference_operator(int d);
LinearOperator incidence_operator(const Graph& g);

// One node per coordinate, one group per node = its whole subtree. Balanced
// tree with the given top-to-bottom branching factors, root first (index 0).
GroupSystem tree_group_system(const std::vector<int>& branching);

void write_group_system(const std::string& path, const GroupSystem& gs);
GroupSystem read_group_system(const std::string& path);
void write_graph(const std::string& path, const Graph& g);
Graph read_graph(const std::string& path);

}  // namespace cprox
