#pragma once

// Discrete Dirichlet problem for maximal graphs, solved in divergence form by
// a continuity method in the boundary data (t * phi, t: 0 -> 1) with damped
// Newton corrections. The Newton matrix is the Hessian of the discrete volume
// functional, which is symmetric and negative definite at spacelike states.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "maxgraph/boundary.hpp"
#include "maxgraph/functional.hpp"
#include "maxgraph/grid.hpp"

namespace maxgraph {

enum class JacobianMode { analytic, finite_difference_check };

struct SolverConfig {
  double newton_tol = 1e-10;  // residual sup-norm target
  int max_newton_iters = 50;
  int homotopy_steps_init = 10;
  int step_halving_limit = 8;
  double spacelike_slack_delta = 0.05;
  double linear_tol = 1e-12;
  JacobianMode jacobian_mode = JacobianMode::analytic;

  void validate() const;
};

struct SolveState {
  double t = 0.0;
  GraphField u;
  double residual_inf = 0.0;
  double min_margin = 0.0;
  int newton_iters_used = 0;
};

struct ProgressRecord {
  double t = 0.0;
  double residual_inf = 0.0;
  double min_margin = 0.0;
  int iters = 0;
};

using ProgressFn = std::function<void(const ProgressRecord&)>;

class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string& what, double last_good_t, std::optional<SolveState> state)
      : std::runtime_error(what), last_good_t_(last_good_t), state_(std::move(state)) {}
  double last_good_t() const noexcept { return last_good_t_; }
  const std::optional<SolveState>& state() const noexcept { return state_; }

private:
  double last_good_t_;
  std::optional<SolveState> state_;
};

// Strong-form residual sum_i d_i(g^{ij} sqrt(det g) d_j u^theta) per node
// (node_count x m); boundary rows are zero since those values are pinned.
Eigen::MatrixXd residual_div(const GraphField& u);

// Sup norm of residual_div over interior nodes.
double residual_inf(const GraphField& u);

// sum_{ij} g^{ij} d_i d_j u^theta by central differences (node_count x m,
// boundary rows zero). Cross-check only.
Eigen::MatrixXd residual_nondiv(const GraphField& u);

// sum_i d_i(g^{ij} sqrt(det g)) per interior node (node_count x n).
Eigen::MatrixXd conservation_identity_residual(const GraphField& u);

// Smallest spacelike margin of the nodal gradients; worst node reported.
double min_nodal_margin(const GraphField& u, std::size_t* worst_node = nullptr);

// Jacobi operator on interior degrees of freedom: the linearization of the
// weak residual (dual volume times residual_div), i.e. the Hessian of the
// discrete volume. In finite_difference_check mode it is additionally
// compared against a finite-difference Jacobian (small grids only) and an
// InternalError is thrown when they disagree beyond 1e-6 relative.
SparseMatrix assemble_jacobi(const GraphField& u, JacobianMode mode = JacobianMode::analytic);

// Dense finite-difference Jacobian of the interior weak residual.
Eigen::MatrixXd finite_difference_jacobi(const GraphField& u, double step = 1e-6);

struct NewtonResult {
  GraphField u;
  int iterations = 0;
  double residual_inf = 0.0;
  double min_margin = 0.0;
};

NewtonResult newton_solve(const GraphField& u0, const BoundaryData& boundary, const SolverConfig& cfg);

SolveState continuity_solve(const BoundaryData& boundary, GridPtr grid, const SolverConfig& cfg,
                            const ProgressFn& progress = {});

}  // namespace maxgraph
