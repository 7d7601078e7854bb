#include "cprox/builders.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cprox {

namespace {

void validate(const GroupSystem& gs) {
  if (gs.d <= 0) throw InputError("GroupSystem: d must be positive");
  std::vector<char> covered(static_cast<size_t>(gs.d), 0);
  for (const auto& g : gs.groups) {
    if (g.empty()) throw InputError("GroupSystem: empty group");
    for (size_t k = 0; k < g.size(); ++k) {
      if (g[k] < 0 || g[k] >= gs.d)
        throw InputError("GroupSystem: index out of range");
      if (k > 0 && g[k] <= g[k - 1])
        throw InputError("GroupSystem: group indices must be sorted, unique");
      covered[static_cast<size_t>(g[k])] = 1;
    }
  }
  for (int j = 0; j < gs.d; ++j)
    if (!covered[static_cast<size_t>(j)])
      throw InputError("GroupSystem: groups must cover every coordinate");
}

}  // namespace

int GroupSystem::total_size() const {
  int m = 0;
  for (const auto& g : groups) m += static_cast<int>(g.size());
  return m;
}

SelectionOperator group_selection_operator(const GroupSystem& gs) {
  validate(gs);
  const int m = gs.total_size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(m));
  SelectionOperator out;
  out.offsets.reserve(gs.groups.size() + 1);
  out.offsets.push_back(0);
  int row = 0;
  for (const auto& g : gs.groups) {
    for (int j : g) trips.emplace_back(row++, j, 1.0);
    out.offsets.push_back(row);
  }
  SpMat b(m, gs.d);
  b.setFromTriplets(trips.begin(), trips.end());
  out.op = LinearOperator::sparse(std::move(b));
  return out;
}

LinearOperator fused_difference_operator(int d) {
  if (d < 2) throw InputError("fused_difference_operator: d must be >= 2");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(2 * (d - 1)));
  for (int i = 0; i + 1 < d; ++i) {
    trips.emplace_back(i, i, 1.0);
    trips.emplace_back(i, i + 1, -1.0);
  }
  SpMat b(d - 1, d);
  b.setFromTriplets(trips.begin(), trips.end());
  return LinearOperator::sparse(std::move(b));
}

LinearOperator incidence_operator(const Graph& g) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    if (i < 0 || j < 0 || i >= g.d || j >= g.d || i >= j)
      throw InputError("incidence_operator: bad edge");
    trips.emplace_back(static_cast<int>(e), i, 1.0);
    trips.emplace_back(static_cast<int>(e), j, -1.0);
  }
  SpMat b(static_cast<int>(g.edges.size()), g.d);
  b.setFromTriplets(trips.begin(), trips.end());
  return LinearOperator::sparse(std::move(b));
}

GroupSystem tree_group_system(const std::vector<int>& branching) {
  if (branching.empty()) throw InputError("tree_group_system: empty branching");
  for (int b : branching)
    if (b < 1) throw InputError("tree_group_system: factors must be >= 1");
  // Build level by level; children get consecutive indices (BFS order).
  std::vector<std::vector<int>> children;
  std::vector<int> level = {0};
  children.push_back({});
  int next = 1;
  for (int factor : branching) {
    std::vector<int> new_level;
    for (int node : level) {
      for (int c = 0; c < factor; ++c) {
        children.emplace_back();
        children[static_cast<size_t>(node)].push_back(next);
        new_level.push_back(next);
        ++next;
      }
    }
    level = std::move(new_level);
  }
  GroupSystem gs;
  gs.d = next;
  gs.groups.resize(static_cast<size_t>(next));
  // Post-order accumulation: children have larger indices, so sweep backwards.
  for (int node = next - 1; node >= 0; --node) {
    auto& grp = gs.groups[static_cast<size_t>(node)];
    grp.push_back(node);
    for (int c : children[static_cast<size_t>(node)]) {
      const auto& sub = gs.groups[static_cast<size_t>(c)];
      grp.insert(grp.end(), sub.begin(), sub.end());
    }
    std::sort(grp.begin(), grp.end());
  }
  return gs;
}

void write_group_system(const std::string& path, const GroupSystem& gs) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  for (const auto& g : gs.groups) {
    for (size_t k = 0; k < g.size(); ++k)
      f << (k ? " " : "") << (g[k] + 1);
    f << "\n";
  }
  if (!f) throw IoError("write failed: " + path);
}

GroupSystem read_group_system(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  GroupSystem gs;
  std::string line;
  int dmax = 0;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    std::vector<int> g;
    long idx = 0;
    while (ls >> idx) {
      if (idx < 1) throw IoError("group indices are 1-based: " + path);
      g.push_back(static_cast<int>(idx - 1));
      dmax = std::max(dmax, static_cast<int>(idx));
    }
    if (!g.empty()) gs.groups.push_back(std::move(g));
  }
  gs.d = dmax;
  return gs;
}

void write_graph(const std::string& path, const Graph& g) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  for (auto [i, j] : g.edges) f << (i + 1) << " " << (j + 1) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

Graph read_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  Graph g;
  std::string line;
  int dmax = 0;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    long i = 0, j = 0;
    if (!(ls >> i >> j)) continue;
    if (i < 1 || j < 1 || i == j) throw IoError("bad edge: " + path);
    if (i > j) std::swap(i, j);
    g.edges.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
    dmax = std::max(dmax, static_cast<int>(j));
  }
  g.d = dmax;
  return g;
}

}  // namespace cprox
