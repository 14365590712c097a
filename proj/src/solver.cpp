#include "maxgraph/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/IterativeLinearSolvers>

#include "maxgraph/errors.hpp"

namespace maxgraph {

void SolverConfig::validate() const {
  if (!(newton_tol > 0.0) || !(linear_tol > 0.0)) throw InvalidArgument("solver: tolerances must be positive");
  if (max_newton_iters < 1 || homotopy_steps_init < 1 || step_halving_limit < 0)
    throw InvalidArgument("solver: iteration limits must be positive");
  if (!(spacelike_slack_delta > 0.0 && spacelike_slack_delta < 1.0))
    throw InvalidArgument("solver: spacelike slack must lie in (0, 1)");
}

Eigen::MatrixXd residual_div(const GraphField& u) {
  const auto& g = *u.grid;
  Eigen::MatrixXd r = volume_gradient(u);
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    const auto row = static_cast<Eigen::Index>(p);
    if (g.is_boundary(p))
      r.row(row).setZero();
    else
      r.row(row) /= g.dual_volume(p);
  }
  return r;
}

double residual_inf(const GraphField& u) {
  const Eigen::MatrixXd r = residual_div(u);
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

double min_nodal_margin(const GraphField& u, std::size_t* worst_node) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (std::size_t p = 0; p < u.grid->node_count(); ++p) {
    const double mg = spacelike_margin(gradient_at(u, p));
    if (mg < best) {
      best = mg;
      at = p;
    }
  }
  if (worst_node) *worst_node = at;
  return best;
}

namespace {

void require_nodal_spacelike(const GraphField& u) {
  std::size_t node = 0;
  const double mg = min_nodal_margin(u, &node);
  if (!(mg > 0.0))
    throw PreconditionViolation("nodal gradient is not spacelike (margin " + std::to_string(mg) + ")", node);
}

}  // namespace

Eigen::MatrixXd residual_nondiv(const GraphField& u) {
  require_nodal_spacelike(u);
  const auto& g = *u.grid;
  const int m = u.components();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.node_count()), m);
  for (std::size_t p : g.interior_nodes()) {
    const MetricTensor mt = induced_metric(gradient_at(u, p));
    const auto H = hessian_at(u, p);
    for (int t = 0; t < m; ++t) r(static_cast<Eigen::Index>(p), t) = (mt.g_inv.array() * H[t].array()).sum();
  }
  return r;
}

Eigen::MatrixXd conservation_identity_residual(const GraphField& u) {
  require_spacelike(u);
  const auto& g = *u.grid;
  const int n = g.dim();
  // Column j of sqrt(det g) g^{-1} is the flux of the coordinate function x_j,
  // so its divergence uses the same element quadrature as residual_div.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.node_count()), n);
  for (std::size_t e = 0; e < g.element_count(); ++e) {
    const auto B = g.grad_op(e);
    const MetricTensor mt = induced_metric(element_gradient(u, e));
    const Eigen::MatrixXd c = -g.element_weight(e) * std::sqrt(mt.det_g) * (B.transpose() * mt.g_inv);
    const int* nodes = g.element_nodes(e);
    for (int k = 0; k <= n; ++k) r.row(nodes[k]) += c.row(k);
  }
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    const auto row = static_cast<Eigen::Index>(p);
    if (g.is_boundary(p))
      r.row(row).setZero();
    else
      r.row(row) /= g.dual_volume(p);
  }
  return r;
}

SparseMatrix assemble_jacobi(const GraphField& u, JacobianMode mode) {
  SparseMatrix H = volume_hessian(u);
  if (mode == JacobianMode::finite_difference_check) {
    const Eigen::MatrixXd fd = finite_difference_jacobi(u);
    const Eigen::MatrixXd dense(H);
    const double scale = std::max(dense.cwiseAbs().maxCoeff(), 1e-300);
    const double diff = (dense - fd).cwiseAbs().maxCoeff();
    if (diff > 1e-6 * scale)
      throw InternalError("assemble_jacobi: analytic and finite-difference Jacobians differ by " +
                          std::to_string(diff / scale) + " (relative)");
  }
  return H;
}

Eigen::MatrixXd finite_difference_jacobi(const GraphField& u, double step) {
  const auto& g = *u.grid;
  const int m = u.components();
  const auto dofs = static_cast<Eigen::Index>(g.interior_nodes().size()) * m;
  Eigen::MatrixXd J(dofs, dofs);
  GraphField probe = u;
  for (Eigen::Index c = 0; c < dofs; ++c) {
    const auto node = static_cast<Eigen::Index>(g.interior_nodes()[static_cast<std::size_t>(c / m)]);
    const auto comp = static_cast<Eigen::Index>(c % m);
    const double orig = probe.values(node, comp);
    probe.values(node, comp) = orig + step;
    const Eigen::VectorXd plus = interior_vector(g, volume_gradient(probe));
    probe.values(node, comp) = orig - step;
    const Eigen::VectorXd minus = interior_vector(g, volume_gradient(probe));
    probe.values(node, comp) = orig;
    J.col(c) = (plus - minus) / (2.0 * step);
  }
  return J;
}

namespace {

double boundary_mismatch(const GraphField& u, const BoundaryData& b) {
  double worst = 0.0;
  for (std::size_t p : u.grid->boundary_nodes()) {
    const auto row = static_cast<Eigen::Index>(p);
    worst = std::max(worst, (u.values.row(row) - b.samples.row(row)).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

NewtonResult newton_solve(const GraphField& u0, const BoundaryData& boundary, const SolverConfig& cfg) {
  cfg.validate();
  const auto& g = *u0.grid;
  if (boundary.components() != u0.components() ||
      boundary.samples.rows() != static_cast<Eigen::Index>(g.node_count()))
    throw InvalidArgument("newton_solve: boundary data does not match the field");
  const double scale = std::max(1.0, boundary.samples.cwiseAbs().maxCoeff());
  if (boundary_mismatch(u0, boundary) > 1e-12 * scale)
    throw InvalidArgument("newton_solve: initial field does not match the boundary data");

  NewtonResult res{u0, 0, 0.0, 0.0};
  std::size_t worst = 0;
  const double margin0 = min_element_margin(res.u, &worst);
  if (!(margin0 > 0.0))
    throw PreconditionViolation("newton_solve: initial field is not spacelike", worst);
  const double margin_floor = cfg.spacelike_slack_delta * margin0;
  res.min_margin = margin0;

  auto fail = [&](const std::string& why) {
    SolveState st{1.0, res.u, res.residual_inf, res.min_margin, res.iterations};
    return NonConvergence("newton_solve: " + why, 0.0, std::move(st));
  };

  for (;;) {
    const Eigen::MatrixXd weak = volume_gradient(res.u);
    double rinf = 0.0;
    for (std::size_t p : g.interior_nodes())
      rinf = std::max(rinf, weak.row(static_cast<Eigen::Index>(p)).cwiseAbs().maxCoeff() / g.dual_volume(p));
    res.residual_inf = rinf;
    if (!std::isfinite(rinf)) throw fail("residual is not finite");
    if (rinf <= cfg.newton_tol) return res;
    if (res.iterations >= cfg.max_newton_iters) throw fail("iteration limit reached");

    // (-H) delta = grad V with -H symmetric positive definite.
    const SparseMatrix negH = -assemble_jacobi(res.u, cfg.jacobian_mode);
    const Eigen::VectorXd rhs = interior_vector(g, weak);
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(cfg.linear_tol);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * rhs.size()));
    cg.compute(negH);
    const Eigen::VectorXd delta = cg.solve(rhs);
    if (!delta.allFinite()) throw fail("linear solve produced non-finite values");

    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.step_halving_limit; ++h, step *= 0.5) {
      GraphField trial = res.u;
      add_interior_vector(trial, delta, step);
      const double mg = min_element_margin(trial);
      if (std::isfinite(mg) && mg >= margin_floor) {
        res.u = std::move(trial);
        res.min_margin = mg;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw fail("step-halving limit exceeded while keeping the spacelike margin");
    ++res.iterations;
  }
}

SolveState continuity_solve(const BoundaryData& boundary, GridPtr grid, const SolverConfig& cfg,
                            const ProgressFn& progress) {
  cfg.validate();
  const double mu0 = acausality_margin(boundary, *grid);
  if (!(mu0 > 0.0)) throw AcausalityViolation(mu0);

  const GraphField extension = extend_to_interior(boundary, grid);
  SolveState state{0.0, GraphField(grid, boundary.components()), 0.0, 1.0, 0};
  const double dt_init = 1.0 / cfg.homotopy_steps_init;
  double dt = dt_init;
  int halvings = 0;
  while (state.t < 1.0) {
    double t_new = std::min(1.0, state.t + dt);
    if (1.0 - t_new < 1e-12) t_new = 1.0;  // no sliver step from accumulated rounding
    const BoundaryData data = boundary.scaled(t_new);
    GraphField guess = state.t == 0.0 ? GraphField(grid, Eigen::MatrixXd(t_new * extension.values))
                                      : GraphField(grid, Eigen::MatrixXd((t_new / state.t) * state.u.values));
    apply_boundary(guess, data);
    try {
      NewtonResult nr = newton_solve(guess, data, cfg);
      state.t = t_new;
      state.u = std::move(nr.u);
      state.residual_inf = nr.residual_inf;
      state.min_margin = nr.min_margin;
      state.newton_iters_used += nr.iterations;
      if (progress) progress({state.t, state.residual_inf, state.min_margin, nr.iterations});
      dt = std::min(dt_init, 2.0 * dt);
      halvings = 0;
    } catch (const NonConvergence&) {
    } catch (const PreconditionViolation&) {
    }
    if (state.t != t_new) {
      if (++halvings > cfg.step_halving_limit)
        throw NonConvergence("continuity_solve: no convergence beyond t = " + std::to_string(state.t), state.t,
                             state);
      dt *= 0.5;
    }
  }
  return state;
}

}  // namespace maxgraph
