#pragma once

// Batch front end. Exit codes: 0 ok, 1 internal error, 2 config error,
// 3 acausal data, 4 nonconvergence, 5 probe failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "maxgraph/boundary.hpp"
#include "maxgraph/grid.hpp"
#include "maxgraph/solver.hpp"

namespace maxgraph::cli {

enum ExitCode : int { ok = 0, internal_error = 1, config_error = 2, acausal = 3, nonconvergence = 4, probe_failure = 5 };

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct BoundaryPreset {
  std::string name;  // constant | affine | sinusoidal | catenoid_trace
  Eigen::MatrixXd A;
  Eigen::VectorXd offset, value, amplitude, frequency, phase;
  double K = 1.0;

  VectorFn function(int n, int m) const;
};

struct VerifyConfig {
  std::vector<std::string> probes;  // empty: nothing to run
  int trials = 100;                 // maximality perturbations
  int rayleigh_probes = 100;
  int first_variation_probes = 20;
  std::uint64_t seed = 1;
  double ricci_tol = 1e-6;
  double barrier_eps = 0.05;
  double barrier_Lambda = -1.0;
  int barrier_nodes = 32;           // boundary nodes sampled by the comparison probe
  std::filesystem::path solution_csv;  // verify this file instead of solving
};

struct OutputPaths {
  std::filesystem::path solution_csv, progress_jsonl, report_json, verify_json;
};

struct RunConfig {
  int n = 0, m = 0;
  DomainSpec domain;
  BoundaryPreset boundary;
  SolverConfig solver;
  VerifyConfig verify;
  OutputPaths output;
};

extern const std::vector<std::string> known_probes;

// Relative paths are resolved against base_dir.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

int cmd_solve(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_verify(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_barrier(int n, int m, double K, double Lambda, int samples, double r_max, std::ostream& out,
                std::ostream& err);

// Full argv dispatch.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace maxgraph::cli
