#include "maxgraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maxgraph/errors.hpp"
#include "maxgraph/functional.hpp"

namespace maxgraph {

PerturbationField::PerturbationField(GridPtr g, Eigen::MatrixXd values) : grid(std::move(g)), w(std::move(values)) {
  if (w.rows() != static_cast<Eigen::Index>(grid->node_count()) || w.cols() < 1)
    throw InvalidArgument("perturbation does not match grid");
  for (std::size_t p : grid->boundary_nodes())
    if (w.row(static_cast<Eigen::Index>(p)).cwiseAbs().maxCoeff() != 0.0)
      throw InvalidArgument("perturbation must vanish on boundary nodes");
}

PerturbationField PerturbationField::zero(GridPtr g, int m) {
  const auto N = static_cast<Eigen::Index>(g->node_count());
  return {std::move(g), Eigen::MatrixXd::Zero(N, m)};
}

PerturbationField random_smooth_perturbation(GridPtr grid, int m, std::mt19937_64& rng) {
  const auto& g = *grid;
  const int n = g.dim();
  const bool polar = g.kind() == GridKind::polar_annulus;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> freq(0, 2);
  constexpr int modes = 4;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.node_count()), m);
  for (int attempt = 0; attempt < 16; ++attempt) {
    for (int t = 0; t < m; ++t) {
      std::vector<double> coef(modes), ph(modes);
      std::vector<std::vector<int>> k(modes, std::vector<int>(n));
      for (int j = 0; j < modes; ++j) {
        coef[j] = gauss(rng);
        ph[j] = phase(rng);
        for (int a = 0; a < n; ++a) k[j][a] = freq(rng);
      }
      for (std::size_t p : g.interior_nodes()) {
        // Normalized coordinates and a boundary-vanishing bump.
        std::vector<double> s(n);
        double bump = 1.0;
        if (polar) {
          const double r0 = g.spec().bounds[0].lo, r1 = g.spec().bounds[0].hi;
          const double rho = (g.radius(p) - r0) / (r1 - r0);
          s = {rho, g.angle(p) / (2.0 * std::numbers::pi)};
          bump = g.is_disk() ? 1.0 - rho * rho : 4.0 * rho * (1.0 - rho);
        } else {
          for (int a = 0; a < n; ++a) {
            const auto& b = g.spec().bounds[a];
            s[a] = (g.coord(p, a) - b.lo) / (b.hi - b.lo);
            bump *= 4.0 * s[a] * (1.0 - s[a]);
          }
        }
        double v = 0.0;
        for (int j = 0; j < modes; ++j) {
          double arg = ph[j];
          // Angular frequencies stay integral so the field is periodic.
          for (int a = 0; a < n; ++a) arg += (polar && a == 1 ? 2.0 : 1.0) * std::numbers::pi * k[j][a] * s[a];
          v += coef[j] * std::cos(arg);
        }
        w(static_cast<Eigen::Index>(p), t) = bump * v;
      }
    }
    const double sup = w.cwiseAbs().maxCoeff();
    if (sup > 0.0) return {std::move(grid), w / sup};
  }
  throw InternalError("random_smooth_perturbation: degenerate draw");
}

double volume(const GraphField& u) { return discrete_volume(u); }

double first_variation(const GraphField& u, const PerturbationField& w) {
  if (w.grid != u.grid || w.components() != u.components())
    throw InvalidArgument("first_variation: perturbation does not match field");
  return (volume_gradient(u).array() * w.w.array()).sum();
}

double second_variation(const GraphField& u, const PerturbationField& w) {
  if (w.grid != u.grid || w.components() != u.components())
    throw InvalidArgument("second_variation: perturbation does not match field");
  const SparseMatrix L = assemble_jacobi(u);
  const Eigen::VectorXd x = interior_vector(*u.grid, w.w);
  return x.dot(L * x);
}

MaximalityReport volume_maximality_probe(const GraphField& u, int trials, std::uint64_t seed) {
  MaximalityReport rep;
  rep.trials = trials;
  const double base = volume(u);
  const double margin = min_element_margin(u);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < trials; ++k) {
    const PerturbationField w = random_smooth_perturbation(u.grid, u.components(), rng);
    auto ok = [&](double s) {
      GraphField v(u.grid, Eigen::MatrixXd(u.values + s * w.w));
      return min_element_margin(v) >= 0.5 * margin;
    };
    double lo = 0.0, hi = 1.0;
    if (ok(1.0)) {
      lo = 1.0;
    } else {
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
      }
    }
    if (!(lo > 1e-12)) {
      ++rep.skipped;
      continue;
    }
    const double v = volume(GraphField(u.grid, Eigen::MatrixXd(u.values + lo * w.w)));
    ++rep.evaluated;
    const double change = v - base;
    rep.max_violation = std::max(rep.max_violation, change);
    if (change > 1e-12) ++rep.violations;
    if (change < 0.0) ++rep.strict_decreases;
  }
  return rep;
}

UniquenessReport uniqueness_probe(const BoundaryData& boundary, GridPtr grid, const SolverConfig& cfg) {
  UniquenessReport rep;
  SolverConfig a = cfg;
  SolverConfig b = cfg;
  b.homotopy_steps_init = 2 * cfg.homotopy_steps_init + 3;
  rep.routes = {"continuation_" + std::to_string(a.homotopy_steps_init),
                "continuation_" + std::to_string(b.homotopy_steps_init), "newton_from_harmonic"};
  rep.solutions.push_back(continuity_solve(boundary, grid, a).u);
  rep.solutions.push_back(continuity_solve(boundary, grid, b).u);
  rep.solutions.push_back(newton_solve(extend_to_interior(boundary, grid), boundary, cfg).u);
  const auto k = static_cast<Eigen::Index>(rep.solutions.size());
  rep.pairwise = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double d = (rep.solutions[i].values - rep.solutions[j].values).cwiseAbs().maxCoeff();
      rep.pairwise(i, j) = rep.pairwise(j, i) = d;
      rep.max_pairwise = std::max(rep.max_pairwise, d);
    }
  return rep;
}

DiagnosticsReport gradient_ellipticity_report(const GraphField& u) {
  const auto& g = *u.grid;
  const int n = g.dim();
  DiagnosticsReport rep;
  double sigma_all = 0.0, sigma_bnd = 0.0;
  std::vector<double> trace_ginv(g.node_count());
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    const GradientMatrix J = gradient_at(u, p);
    const MetricTensor mt = induced_metric(J);
    if (!mt.spacelike()) throw PreconditionViolation("gradient_ellipticity_report: nodal gradient not spacelike", p);
    const double sigma = std::sqrt(std::max(0.0, 1.0 - spacelike_margin(J)));
    sigma_all = std::max(sigma_all, sigma);
    trace_ginv[p] = mt.g_inv.trace();
    const double energy = trace_ginv[p] - n;
    if (g.is_boundary(p)) {
      sigma_bnd = std::max(sigma_bnd, sigma);
      rep.boundary_energy_max = std::max(rep.boundary_energy_max, energy);
    } else {
      rep.interior_energy_max = std::max(rep.interior_energy_max, energy);
    }
    rep.sum_gii_max = std::max(rep.sum_gii_max, trace_ginv[p]);
  }
  rep.sigma_max_Du = sigma_all;
  rep.mu = 1.0 - sigma_bnd;
  rep.ellipticity_bound = n / (rep.mu * (2.0 - rep.mu));
  rep.gradient_ok = sigma_all < 1.0;
  rep.ellipticity_ok = rep.sum_gii_max <= rep.ellipticity_bound + 1e-8;
  rep.energy_ok = rep.interior_energy_max <= rep.boundary_energy_max + 1e-8;
  return rep;
}

namespace {

struct NormalVector {
  Eigen::VectorXd x;  // spatial part
  Eigen::VectorXd y;  // temporal part
};

double lorentz(const NormalVector& a, const NormalVector& b) { return a.x.dot(b.x) - a.y.dot(b.y); }

}  // namespace

double ricci_check(const GraphField& u, double newton_tol) {
  const auto& g = *u.grid;
  const int n = g.dim();
  const int m = u.components();
  const Eigen::MatrixXd res = residual_div(u);
  Eigen::Index worst_row = 0, worst_col = 0;
  const double rinf = res.size() ? res.cwiseAbs().maxCoeff(&worst_row, &worst_col) : 0.0;
  if (rinf > 100.0 * newton_tol)
    throw PreconditionViolation("ricci_check: field is not a solution (residual " + std::to_string(rinf) + ")",
                                static_cast<std::size_t>(worst_row));

  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t p : g.interior_nodes()) {
    const GradientMatrix J = gradient_at(u, p);
    const MetricTensor mt = induced_metric(J);
    if (!mt.spacelike()) throw PreconditionViolation("ricci_check: nodal gradient not spacelike", p);
    const auto H = hessian_at(u, p);
    // Second fundamental form on coordinate tangents T_i = (e_i, d_i u).
    std::vector<NormalVector> A(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd h(m);
        for (int t = 0; t < m; ++t) h(t) = H[t](i, j);
        const Eigen::VectorXd c = mt.g_inv * (J * h);
        A[i * n + j] = {c, h + J.transpose() * c};
      }
    // Orthonormal frame e_a = sum_i P(a, i) T_i with P g P^T = I.
    const Eigen::MatrixXd Lc = Eigen::LLT<Eigen::MatrixXd>(mt.g).matrixL();
    const Eigen::MatrixXd P = Lc.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    std::vector<NormalVector> Ae(static_cast<std::size_t>(n * n), {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(m)});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double c = P(a, i) * P(b, j);
            Ae[a * n + b].x += c * A[i * n + j].x;
            Ae[a * n + b].y += c * A[i * n + j].y;
          }
    NormalVector mean{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(m)};
    for (int c = 0; c < n; ++c) {
      mean.x += Ae[c * n + c].x;
      mean.y += Ae[c * n + c].y;
    }
    Eigen::MatrixXd Ric(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double v = lorentz(mean, Ae[a * n + b]);
        for (int c = 0; c < n; ++c) v -= lorentz(Ae[a * n + c], Ae[b * n + c]);
        Ric(a, b) = v;
      }
    min_eig = std::min(min_eig, symmetric_eigenvalues(0.5 * (Ric + Ric.transpose()))(0));
  }
  return min_eig;
}

double max_rayleigh_quotient(const GraphField& u, int probes, std::uint64_t seed) {
  const SparseMatrix L = assemble_jacobi(u);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    Eigen::VectorXd x;
    if (k % 2 == 0) {
      x = interior_vector(*u.grid, random_smooth_perturbation(u.grid, u.components(), rng).w);
    } else {
      x.resize(L.rows());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = gauss(rng);
    }
    const double nn = x.squaredNorm();
    if (nn == 0.0) continue;
    best = std::max(best, x.dot(L * x) / nn);
  }
  return best;
}

DiagnosticsReport diagnose(const GraphField& u, double newton_tol, int rayleigh_probes, std::uint64_t seed) {
  DiagnosticsReport rep = gradient_ellipticity_report(u);
  rep.volume = volume(u);
  rep.residual_inf = residual_inf(u);
  rep.ricci_min_eig = ricci_check(u, newton_tol);
  rep.second_variation_max_rayleigh = max_rayleigh_quotient(u, rayleigh_probes, seed);
  return rep;
}

}  // namespace maxgraph
