#include "cprox/manifest.hpp"

#include "cprox/builders.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace cprox {

namespace {

using nlohmann::json;

const json& root_of(const RunManifest& m) {
  return *static_cast<const json*>(m.raw.get());
}

std::string resolve(const std::string& dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

[[noreturn]] void missing(const std::string& field) {
  throw InputError("manifest: missing field " + field);
}

const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) missing(ctx + "." + key);
  return *it;
}

template <typename T>
T value_as(const json& j, const std::string& ctx) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InputError("manifest: bad value for " + ctx);
  }
}

template <typename T>
T opt(const json& j, const char* key, const std::string& ctx, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return value_as<T>(*it, ctx + "." + key);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& ctx) {
  if (!j.is_object()) throw InputError("manifest: " + ctx + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("manifest: unknown field " + ctx + "." + it.key());
}

LinearOperator operator_from_spec(const json& spec, const std::string& dir,
                                  const std::string& ctx,
                                  std::vector<int>* offsets_out) {
  if (spec.is_string())
    return LinearOperator::sparse(
        read_matrix_market(resolve(dir, spec.get<std::string>())));
  reject_unknown(spec, {"builder", "d", "path", "branching"}, ctx);
  std::string name =
      value_as<std::string>(require(spec, "builder", ctx), ctx + ".builder");
  if (name == "identity") {
    int d = value_as<int>(require(spec, "d", ctx), ctx + ".d");
    if (d < 1) throw InputError("manifest: " + ctx + ".d must be >= 1");
    return LinearOperator::identity(d);
  }
  if (name == "fused") {
    int d = value_as<int>(require(spec, "d", ctx), ctx + ".d");
    return fused_difference_operator(d);
  }
  if (name == "groups") {
    GroupSystem gs = read_group_system(
        resolve(dir, value_as<std::string>(require(spec, "path", ctx),
                                           ctx + ".path")));
    gs.d = opt<int>(spec, "d", ctx, gs.d);
    SelectionOperator sel = group_selection_operator(gs);
    if (offsets_out) *offsets_out = sel.offsets;
    return std::move(sel.op);
  }
  if (name == "tree") {
    auto branching = value_as<std::vector<int>>(
        require(spec, "branching", ctx), ctx + ".branching");
    SelectionOperator sel =
        group_selection_operator(tree_group_system(branching));
    if (offsets_out) *offsets_out = sel.offsets;
    return std::move(sel.op);
  }
  if (name == "graph") {
    Graph g = read_graph(resolve(
        dir,
        value_as<std::string>(require(spec, "path", ctx), ctx + ".path")));
    g.d = opt<int>(spec, "d", ctx, g.d);
    return incidence_operator(g);
  }
  throw InputError("manifest: unknown builder '" + name + "' in " + ctx);
}

ProxPenalty penalty_from_spec(const json& spec,
                              const std::vector<int>* builder_offsets) {
  const std::string ctx = "problem.penalty";
  reject_unknown(spec, {"kind", "weight", "p", "coeff", "offsets"}, ctx);
  std::string kind =
      value_as<std::string>(require(spec, "kind", ctx), ctx + ".kind");
  double w = opt<double>(spec, "weight", ctx, 1.0);
  if (kind == "l1") return ProxPenalty::l1(w);
  if (kind == "l2") return ProxPenalty::l2(w);
  if (kind == "linf") return ProxPenalty::linf(w);
  if (kind == "lp_power")
    return ProxPenalty::lp_power(
        value_as<double>(require(spec, "p", ctx), ctx + ".p"),
        opt<double>(spec, "coeff", ctx, 1.0), w);
  if (kind == "lp_norm")
    return ProxPenalty::lp_norm(
        value_as<double>(require(spec, "p", ctx), ctx + ".p"),
        opt<double>(spec, "coeff", ctx, 1.0), w);
  if (kind == "group_l2") {
    if (spec.contains("offsets"))
      return ProxPenalty::group_l2(value_as<std::vector<int>>(
                                       spec.at("offsets"), ctx + ".offsets"),
                                   w);
    if (builder_offsets && !builder_offsets->empty())
      return ProxPenalty::group_l2(*builder_offsets, w);
    throw InputError(
        "manifest: group_l2 needs problem.penalty.offsets (or a groups/tree "
        "builder for B)");
  }
  if (kind == "oi_norm")
    throw InputError(
        "manifest: oi_norm is a matrix penalty and has no vector pipeline");
  throw InputError("manifest: unknown penalty kind '" + kind + "'");
}

Mat densify(const SpMat& m) { return Mat(m); }

}  // namespace

RunManifest read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest: invalid JSON: ") + e.what());
  }
  reject_unknown(j, {"problem", "solver", "prox", "output", "seed"},
                 "manifest");
  RunManifest m;
  m.dir = std::filesystem::path(path).parent_path().string();
  if (m.dir.empty()) m.dir = ".";
  m.raw = std::shared_ptr<const void>(new json(std::move(j)),
                                      [](const void* p) {
                                        delete static_cast<const json*>(p);
                                      });
  const json& root = root_of(m);
  m.seed = opt<std::uint64_t>(root, "seed", "manifest", 0);
  if (root.contains("output")) {
    const json& out = root.at("output");
    reject_unknown(out, {"solution", "trace"}, "output");
    m.solution_path = opt<std::string>(out, "solution", "output", "solution.txt");
    m.trace_path = opt<std::string>(out, "trace", "output", "trace.csv");
  }
  return m;
}

CompositeProblem manifest_problem(const RunManifest& m) {
  const json& root = root_of(m);
  const json& prob = require(root, "problem", "manifest");
  reject_unknown(prob, {"a", "y", "b", "penalty", "reg_weight"}, "problem");

  std::string a_path = value_as<std::string>(require(prob, "a", "problem"),
                                             "problem.a");
  SpMat a_sp = read_matrix_market(resolve(m.dir, a_path));
  Vec y = read_vector(resolve(
      m.dir,
      value_as<std::string>(require(prob, "y", "problem"), "problem.y")));

  std::vector<int> offsets;
  LinearOperator b =
      operator_from_spec(require(prob, "b", "problem"), m.dir, "problem.b",
                         &offsets);
  ProxPenalty penalty =
      penalty_from_spec(require(prob, "penalty", "problem"), &offsets);
  double reg = opt<double>(prob, "reg_weight", "problem", 1.0);

  // Dense storage when small: the exact spectral constant path.
  LinearOperator a_op =
      static_cast<long long>(a_sp.rows()) * a_sp.cols() <= 1000000
          ? LinearOperator::dense(densify(a_sp))
          : LinearOperator::sparse(std::move(a_sp));
  CompositeProblem problem{SmoothLoss::square_auto(std::move(a_op),
                                                   std::move(y)),
                           std::move(penalty), std::move(b), reg};
  problem.validate();
  return problem;
}

ProxJob manifest_prox(const RunManifest& m) {
  const json& root = root_of(m);
  const json& prob = require(root, "problem", "manifest");
  const json& prox = require(root, "prox", "manifest");
  reject_unknown(prox, {"x", "lam"}, "prox");

  ProxJob job;
  job.x = read_vector(resolve(
      m.dir, value_as<std::string>(require(prox, "x", "prox"), "prox.x")));
  job.lam = opt<double>(prox, "lam", "prox", -1.0);
  std::vector<int> offsets;
  job.b = operator_from_spec(require(prob, "b", "problem"), m.dir,
                             "problem.b", &offsets);
  job.penalty = penalty_from_spec(require(prob, "penalty", "problem"),
                                  &offsets);
  if (job.b.cols() != job.x.size())
    throw DimError("manifest: prox.x length does not match B columns");
  return job;
}

SolverConfig manifest_config(const RunManifest& m) {
  SolverConfig c;
  c.seed = m.seed;
  const json& root = root_of(m);
  if (!root.contains("solver")) return c;
  const json& s = root.at("solver");
  reject_unknown(s,
                 {"accelerated", "kappa", "lam", "inner_tol", "inner_cap",
                  "epsilon", "outer_cap", "warm_start", "window",
                  "target_objective"},
                 "solver");
  c.accelerated = opt<bool>(s, "accelerated", "solver", c.accelerated);
  c.kappa = opt<double>(s, "kappa", "solver", c.kappa);
  c.lam = opt<double>(s, "lam", "solver", c.lam);
  c.inner_tol = opt<double>(s, "inner_tol", "solver", c.inner_tol);
  c.inner_cap = opt<int>(s, "inner_cap", "solver", c.inner_cap);
  c.epsilon = opt<double>(s, "epsilon", "solver", c.epsilon);
  c.outer_cap = opt<int>(s, "outer_cap", "solver", c.outer_cap);
  c.warm_start = opt<bool>(s, "warm_start", "solver", c.warm_start);
  c.window = opt<int>(s, "window", "solver", c.window);
  c.target_objective =
      opt<double>(s, "target_objective", "solver", c.target_objective);
  c.seed = m.seed;
  return c;
}

}  // namespace cprox
