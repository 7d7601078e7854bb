#include "cprox/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

namespace cprox {

namespace {

void normalize_columns(Mat& a) {
  for (int j = 0; j < a.cols(); ++j) {
    double n = a.col(j).norm();
    if (n > 0) a.col(j) /= n;
  }
}

std::vector<std::vector<int>> tree_children(const std::vector<int>& branching,
                                            int* node_count) {
  std::vector<std::vector<int>> children = {{}};
  std::vector<int> level = {0};
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
  *node_count = next;
  return children;
}

}  // namespace

GroupSystem gen_overlap_groups(int d, bool* truncated) {
  if (d < 80) throw InputError("gen_overlap_groups: d must be >= 80");
  GroupSystem gs;
  gs.d = d;
  // Chained 5-groups over the support: 0-4, 4-8, 8-12, 12-16, 16-20.
  for (int k = 0; k < 5; ++k) {
    std::vector<int> g;
    for (int j = 4 * k; j <= 4 * k + 4; ++j) g.push_back(j);
    gs.groups.push_back(std::move(g));
  }
  // Groups tying one support coordinate each to a fresh off-support block:
  // {3, 21..29}, {7, 30..39}, {11, 40..49}, {15, 50..59}, {19, 60..69}.
  int start = 21;
  for (int k = 0; k < 5; ++k) {
    std::vector<int> g = {4 * k + 3};
    int stop = (k == 0) ? 29 : start + 9;
    for (int j = start; j <= stop; ++j) g.push_back(j);
    start = stop + 1;
    gs.groups.push_back(std::move(g));
  }
  // Disjoint 10-blocks covering 70..d-1.
  bool trunc = false;
  for (int j = 70; j < d; j += 10) {
    std::vector<int> g;
    for (int i = j; i < std::min(j + 10, d); ++i) g.push_back(i);
    if (static_cast<int>(g.size()) < 10) trunc = true;
    gs.groups.push_back(std::move(g));
  }
  if (truncated) *truncated = trunc;
  return gs;
}

OverlapInstance gen_overlap_data(const OverlapExperimentSpec& spec) {
  if (spec.noise_sd < 0) throw InputError("gen_overlap_data: noise_sd < 0");
  if (spec.reg_weight < 0) throw InputError("gen_overlap_data: reg_weight < 0");
  GroupSystem gs = gen_overlap_groups(spec.d);
  const int d = spec.d;
  const int s = static_cast<int>(0.7 * d);  // floor

  Rng rng(spec.seed);
  Mat a(s, d);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  if (spec.column_normalize) normalize_columns(a);

  std::vector<int> membership(static_cast<size_t>(d), 0);
  for (const auto& g : gs.groups)
    for (int j : g) ++membership[static_cast<size_t>(j)];
  Vec x_star = Vec::Zero(d);
  for (int j = 0; j < 21; ++j)
    x_star(j) = rng.normal() / membership[static_cast<size_t>(j)];

  Vec y = a * x_star;
  for (int i = 0; i < s; ++i) y(i) += spec.noise_sd * rng.normal();

  SelectionOperator sel = group_selection_operator(gs);
  OverlapInstance inst{
      CompositeProblem{SmoothLoss::square_auto(LinearOperator::dense(std::move(a)),
                                        std::move(y)),
                       ProxPenalty::group_l2(sel.offsets, 1.0),
                       std::move(sel.op), spec.reg_weight},
      std::move(gs), std::move(x_star)};
  inst.problem.validate();
  return inst;
}

GraphInstance gen_cluster_graph(const GraphExperimentSpec& spec) {
  const int d = spec.d;
  if (d < 4 || d % 2 != 0)
    throw InputError("gen_cluster_graph: d must be even and >= 4");
  if (spec.labeled < 1 || spec.labeled > d)
    throw InputError("gen_cluster_graph: labeled count out of range");
  if (spec.reg_weight < 0) throw InputError("gen_cluster_graph: reg_weight < 0");
  const int half = d / 2;
  const int s = spec.labeled;

  Rng rng(spec.seed);
  Graph g;
  g.d = d;
  for (int base : {0, half})
    for (int i = base; i < base + half; ++i)
      for (int j = i + 1; j < base + half; ++j)
        if (rng.uniform() < 0.5) g.edges.emplace_back(i, j);
  // Exactly floor(d/25) distinct cross pairs.
  int want = d / 25;
  std::vector<std::pair<int, int>> cross;
  while (static_cast<int>(cross.size()) < want) {
    int i = rng.uniform_int(half);
    int j = half + rng.uniform_int(half);
    if (std::find(cross.begin(), cross.end(), std::make_pair(i, j)) ==
        cross.end())
      cross.emplace_back(i, j);
  }
  g.edges.insert(g.edges.end(), cross.begin(), cross.end());

  std::vector<int> labels(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) labels[static_cast<size_t>(i)] = i < half ? 1 : -1;

  // Partial Fisher-Yates for the labeled vertices.
  std::vector<int> perm(static_cast<size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < s; ++k)
    std::swap(perm[static_cast<size_t>(k)],
              perm[static_cast<size_t>(k + rng.uniform_int(d - k))]);
  std::vector<int> labeled_idx(perm.begin(), perm.begin() + s);
  std::sort(labeled_idx.begin(), labeled_idx.end());

  std::vector<Eigen::Triplet<double>> trips;
  Vec y(s);
  for (int r = 0; r < s; ++r) {
    trips.emplace_back(r, labeled_idx[static_cast<size_t>(r)], 1.0);
    y(r) = labels[static_cast<size_t>(labeled_idx[static_cast<size_t>(r)])];
  }
  SpMat a(s, d);
  a.setFromTriplets(trips.begin(), trips.end());

  GraphInstance inst{
      CompositeProblem{SmoothLoss::square(LinearOperator::sparse(std::move(a)),
                                          std::move(y), 1.0),
                       ProxPenalty::l1(1.0), incidence_operator(g),
                       spec.reg_weight},
      std::move(g), std::move(labels), std::move(labeled_idx)};
  inst.problem.validate();
  return inst;
}

TreeInstance gen_tree_data(const TreeExperimentSpec& spec) {
  if (spec.signal_dim < 1) throw InputError("gen_tree_data: signal_dim < 1");
  if (spec.noise_sd < 0) throw InputError("gen_tree_data: noise_sd < 0");
  GroupSystem gs = tree_group_system(spec.branching);
  const int d = gs.d;
  const int n = spec.signal_dim;

  Rng rng(spec.seed);
  Mat a(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  normalize_columns(a);

  int count = 0;
  auto children = tree_children(spec.branching, &count);
  // Signal on one random root-to-leaf path; magnitudes bounded away from 0.
  std::vector<int> path = {0};
  while (!children[static_cast<size_t>(path.back())].empty()) {
    const auto& c = children[static_cast<size_t>(path.back())];
    path.push_back(c[static_cast<size_t>(
        rng.uniform_int(static_cast<int>(c.size())))]);
  }
  Vec x_star = Vec::Zero(d);
  for (int node : path) {
    double mag = rng.uniform(0.5, 1.5);
    x_star(node) = rng.uniform() < 0.5 ? -mag : mag;
  }

  Vec y = a * x_star;
  for (int i = 0; i < n; ++i) y(i) += spec.noise_sd * rng.normal();

  SelectionOperator sel = group_selection_operator(gs);
  TreeInstance inst{
      CompositeProblem{SmoothLoss::square_auto(LinearOperator::dense(std::move(a)),
                                        std::move(y)),
                       ProxPenalty::group_l2(sel.offsets, 1.0),
                       std::move(sel.op), spec.reg_weight},
      std::move(gs), std::move(x_star)};
  inst.problem.validate();
  return inst;
}

std::vector<int> suite_default_sizes(const std::string& suite,
                                     bool paper_scale) {
  if (suite == "overlap") {
    if (!paper_scale) return {100, 200, 400};
    std::vector<int> sizes;
    for (int d = 1000; d <= 4000; d += 100) sizes.push_back(d);
    return sizes;
  }
  if (suite == "graph") {
    if (!paper_scale) return {50, 100};
    std::vector<int> sizes;
    for (int d = 100; d <= 360; d += 20) sizes.push_back(d);
    return sizes;
  }
  if (suite == "fused") return {100};
  if (suite == "tree") return {71};  // fixed by the default branching
  throw InputError("unknown suite: " + suite);
}

namespace {

struct RunTask {
  int size_index = 0;
  int d = 0;
  int repeat = 0;
  std::uint64_t stream = 0;
};

void execute_run(const std::string& suite, const BenchmarkOptions& opt,
                 const RunTask& task, RunRecord& rec) {
  rec.d = task.d;
  rec.repeat = task.repeat;
  try {
    CompositeProblem problem;
    std::vector<int> labels;
    if (suite == "overlap") {
      OverlapExperimentSpec spec;
      spec.d = task.d;
      spec.seed = task.stream;
      problem = gen_overlap_data(spec).problem;
    } else if (suite == "graph" || suite == "fused") {
      GraphExperimentSpec spec;
      spec.d = task.d;
      spec.seed = task.stream;
      GraphInstance gi = gen_cluster_graph(spec);
      problem = std::move(gi.problem);
      labels = std::move(gi.labels);
    } else {
      TreeExperimentSpec spec;
      spec.seed = task.stream;
      problem = gen_tree_data(spec).problem;
    }

    SolverConfig acc;
    acc.accelerated = true;
    acc.window = opt.window;
    acc.outer_cap = opt.accel_cap;
    auto [x_acc, tr_acc] = solve_accelerated(problem, acc);

    SolverConfig base = acc;
    base.accelerated = false;
    base.target_objective =
        *std::min_element(tr_acc.objective.begin(), tr_acc.objective.end());
    base.outer_cap = suite == "overlap" ? opt.baseline_cap_overlap
                                        : opt.baseline_cap_other;
    auto [x_base, tr_base] = solve_proximal(problem, base);

    namespace fs = std::filesystem;
    fs::path dir = fs::path(opt.out_dir) / suite /
                   ("d" + std::to_string(task.d) + "_seed" +
                    std::to_string(task.repeat));
    fs::create_directories(dir);
    write_trace_csv((dir / "trace.csv").string(), tr_acc,
                    opt.deterministic_timing);
    write_trace_csv((dir / "trace_baseline.csv").string(), tr_base,
                    opt.deterministic_timing);

    rec.accel_outer = tr_acc.outer_iters();
    rec.baseline_outer = tr_base.outer_iters();
    rec.mean_inner =
        tr_acc.inner_iters.empty()
            ? 0.0
            : std::accumulate(tr_acc.inner_iters.begin(),
                              tr_acc.inner_iters.end(), 0.0) /
                  static_cast<double>(tr_acc.inner_iters.size());
    rec.accel_time_ms =
        opt.deterministic_timing ? 0.0 : tr_acc.total_time_ms();
    rec.baseline_reached_target = tr_base.target_reached;
    if (!labels.empty()) {
      rec.recovered = true;
      for (int i = 0; i < problem.dim(); ++i)
        if (x_acc(i) * labels[static_cast<size_t>(i)] <= 0) {
          rec.recovered = false;
          break;
        }
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
}

}  // namespace

BenchmarkResult run_benchmark(const std::string& suite,
                              const BenchmarkOptions& options) {
  if (suite != "overlap" && suite != "tree" && suite != "graph" &&
      suite != "fused")
    throw InputError("unknown suite: " + suite);
  std::vector<int> sizes = options.sizes;
  if (suite == "tree" && !sizes.empty())
    throw InputError("tree suite size is fixed by its branching");
  if (sizes.empty()) sizes = suite_default_sizes(suite, options.paper_scale);
  if (options.repeats < 1) throw InputError("repeats must be >= 1");

  std::vector<RunTask> tasks;
  for (size_t si = 0; si < sizes.size(); ++si)
    for (int r = 0; r < options.repeats; ++r)
      tasks.push_back({static_cast<int>(si), sizes[si], r,
                       derive_stream(options.seed,
                                     static_cast<std::uint64_t>(si) * 1000 +
                                         static_cast<std::uint64_t>(r))
                           .state});

  BenchmarkResult result;
  result.runs.resize(tasks.size());
  int jobs = std::max(1, options.jobs);
  jobs = std::min<int>(jobs, static_cast<int>(tasks.size()));
  if (jobs <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i)
      execute_run(suite, options, tasks[i], result.runs[i]);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < tasks.size();
             i = next.fetch_add(1))
          execute_run(suite, options, tasks[i], result.runs[i]);
      });
    for (auto& th : pool) th.join();
  }

  namespace fs = std::filesystem;
  fs::create_directories(fs::path(options.out_dir) / suite);
  fs::path summary = fs::path(options.out_dir) / suite / "summary.csv";
  std::ofstream f(summary.string(), std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + summary.string());
  bool with_recovery = suite == "fused";
  f << "d,mean_outer_iters,mean_inner_iters,mean_time_ms"
    << (with_recovery ? ",recovered" : "") << "\n";
  for (size_t si = 0; si < sizes.size(); ++si) {
    double outer = 0, inner = 0, time = 0;
    int n = 0;
    bool recovered = true;
    // Runs are laid out size-major: [si*repeats, (si+1)*repeats).
    for (int r = 0; r < options.repeats; ++r) {
      const auto& rec =
          result.runs[si * static_cast<size_t>(options.repeats) +
                      static_cast<size_t>(r)];
      if (!rec.ok) continue;
      outer += rec.accel_outer;
      inner += rec.mean_inner;
      time += rec.accel_time_ms;
      recovered = recovered && rec.recovered;
      ++n;
    }
    double denom = n > 0 ? n : 1;
    f << sizes[si] << ',' << format_double(outer / denom) << ','
      << format_double(inner / denom) << ',' << format_double(time / denom);
    if (with_recovery) f << ',' << (n > 0 && recovered ? 1 : 0);
    f << "\n";
  }
  f.close();
  if (!f) throw IoError("write failed: " + summary.string());

  result.summary_path = summary.string();
  result.all_ok =
      std::all_of(result.runs.begin(), result.runs.end(),
                  [](const RunRecord& r) { return r.ok; });
  return result;
}

}  // namespace cprox
