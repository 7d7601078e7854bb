#pragma once

#include "cprox/solver.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace cprox {

// A run manifest is a JSON file; matrix/vector fields are paths relative to
// the manifest's own directory, B may instead be a builder object. See
// README for the schema.
struct RunManifest {
  std::string dir;  // parent directory of the manifest file
  std::shared_ptr<const void> raw;  // parsed JSON, opaque to headers
  std::uint64_t seed = 0;
  std::string solution_path = "solution.txt";
  std::string trace_path = "trace.csv";
};

RunManifest read_manifest(const std::string& path);

// Requires problem.{a,y,b,penalty}; reg_weight defaults to 1.
CompositeProblem manifest_problem(const RunManifest& m);

struct ProxJob {
  ProxPenalty penalty;
  LinearOperator b;
  Vec x;
  double lam = -1.0;  // <= 0: auto
};
// Requires problem.{b,penalty} and prox.{x}; prox.lam optional.
ProxJob manifest_prox(const RunManifest& m);

// solver section, all fields optional.
SolverConfig manifest_config(const RunManifest& m);

}  // namespace cprox
