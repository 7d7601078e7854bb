#pragma once

#include "cprox/builders.hpp"
#include "cprox/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cprox {

// Sparse regression with the overlapping-group template over the first 70
// coordinates plus disjoint 10-blocks after that.
struct OverlapExperimentSpec {
  int d = 100;  // >= 80
  std::uint64_t seed = 0;
  double noise_sd = 0.001;
  double reg_weight = 1e-5;
  bool column_normalize = true;
};

// Binary labels on two planted clusters, observed on s vertices; total
// variation over the graph edges as the penalty.
struct GraphExperimentSpec {
  int d = 100;  // even
  std::uint64_t seed = 0;
  int labeled = 10;  // s
  double reg_weight = 1e-4;
};

// Sparse coding against a Gaussian dictionary with one group per tree node
// (the node's whole subtree); the planted signal lives on a root-to-leaf
// path so it is exactly a union of complements of zeroed subtrees.
struct TreeExperimentSpec {
  std::vector<int> branching = {10, 2, 2};
  std::uint64_t seed = 0;
  int signal_dim = 256;  // dictionary rows
  double noise_sd = 0.001;
  double reg_weight = 1e-3;
};

struct OverlapInstance {
  CompositeProblem problem;
  GroupSystem groups;
  Vec x_star;
};

struct GraphInstance {
  CompositeProblem problem;
  Graph graph;
  std::vector<int> labels;       // +1 / -1 per vertex
  std::vector<int> labeled_idx;  // rows of A, ascending
};

struct TreeInstance {
  CompositeProblem problem;
  GroupSystem groups;
  Vec x_star;
};

// Group template: five chained 5-groups over 1..21, five 10/11-groups tying
// coordinates 4,8,12,16,20 to fresh blocks, then disjoint 10-blocks 71..d.
// truncated (when given) reports a final block shorter than 10.
GroupSystem gen_overlap_groups(int d, bool* truncated = nullptr);

OverlapInstance gen_overlap_data(const OverlapExperimentSpec& spec);
GraphInstance gen_cluster_graph(const GraphExperimentSpec& spec);
TreeInstance gen_tree_data(const TreeExperimentSpec& spec);

struct BenchmarkOptions {
  std::vector<int> sizes;  // empty: suite defaults
  int repeats = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool paper_scale = false;        // paper-sized dimension lists
  bool deterministic_timing = false;  // zero all time columns
  std::string out_dir = "bench_out";
  // Caps for the accelerated run and for the baseline chasing its objective.
  int accel_cap = 20000;
  int baseline_cap_overlap = 200000;
  int baseline_cap_other = 300000;
  int window = 100;
};

struct RunRecord {
  int d = 0;
  int repeat = 0;
  bool ok = false;
  std::string error;
  int accel_outer = 0;
  int baseline_outer = 0;
  double mean_inner = 0.0;  // accelerated run, mean per outer step
  double accel_time_ms = 0.0;
  bool baseline_reached_target = false;
  bool recovered = false;  // fused suite: signs match planted labels
};

struct BenchmarkResult {
  std::vector<RunRecord> runs;
  std::string summary_path;
  bool all_ok = false;
};

// suite in {overlap, tree, graph, fused}; writes
//   <out_dir>/<suite>/d<d>_seed<r>/trace.csv           (accelerated)
//   <out_dir>/<suite>/d<d>_seed<r>/trace_baseline.csv
//   <out_dir>/<suite>/summary.csv
// The baseline run chases the accelerated run's best objective. The fused
// suite appends a `recovered` column to the summary.
BenchmarkResult run_benchmark(const std::string& suite,
                              const BenchmarkOptions& options);

std::vector<int> suite_default_sizes(const std::string& suite,
                                     bool paper_scale);

}  // namespace cprox
