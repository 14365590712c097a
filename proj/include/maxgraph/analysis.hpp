#pragma once

// Numerical certificates at a solved state: volume, its first and second
// variations, maximality and uniqueness probes, gradient and ellipticity
// bounds, and the sign of the Ricci curvature.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxgraph/boundary.hpp"
#include "maxgraph/grid.hpp"
#include "maxgraph/solver.hpp"

namespace maxgraph {

// Variation field w, zero on boundary nodes.
struct PerturbationField {
  GridPtr grid;
  Eigen::MatrixXd w;  // node_count x m

  PerturbationField(GridPtr g, Eigen::MatrixXd values);
  static PerturbationField zero(GridPtr g, int m);
  int components() const { return static_cast<int>(w.cols()); }
};

// Smooth random perturbation: low-frequency trigonometric modes times a
// bump vanishing on the boundary, normalized to sup-norm 1.
PerturbationField random_smooth_perturbation(GridPtr grid, int m, std::mt19937_64& rng);

double volume(const GraphField& u);
double first_variation(const GraphField& u, const PerturbationField& w);
// <L w, w> with L = assemble_jacobi(u).
double second_variation(const GraphField& u, const PerturbationField& w);

struct MaximalityReport {
  int trials = 0;
  int evaluated = 0;
  int skipped = 0;
  int violations = 0;         // volume(u + w) > volume(u) + 1e-12
  int strict_decreases = 0;   // volume(u + w) < volume(u)
  double max_violation = -std::numeric_limits<double>::infinity();  // max of volume(u+w) - volume(u)
};

// Each trial scales a random smooth perturbation (by bisection) so that the
// perturbed graph keeps at least half of the spacelike margin of u.
MaximalityReport volume_maximality_probe(const GraphField& u, int trials, std::uint64_t seed);

struct UniquenessReport {
  std::vector<std::string> routes;
  std::vector<GraphField> solutions;
  Eigen::MatrixXd pairwise;  // sup-norm differences
  double max_pairwise = 0.0;
};

// Two continuation schedules and Newton from the harmonic extension.
UniquenessReport uniqueness_probe(const BoundaryData& boundary, GridPtr grid, const SolverConfig& cfg);

struct DiagnosticsReport {
  double volume = 0.0;
  double residual_inf = 0.0;
  double sigma_max_Du = 0.0;  // worst |Du| over all nodes
  double mu = 0.0;            // 1 - worst |Du| over boundary nodes
  double sum_gii_max = 0.0;
  double ellipticity_bound = 0.0;  // n / (mu (2 - mu))
  double interior_energy_max = 0.0;
  double boundary_energy_max = 0.0;
  double ricci_min_eig = 0.0;
  double second_variation_max_rayleigh = 0.0;

  bool gradient_ok = false;     // sigma_max_Du < 1
  bool ellipticity_ok = false;  // sum_i g^{ii} <= bound + 1e-8 at every node
  bool energy_ok = false;       // interior energy <= boundary energy + 1e-8
};

// Fills the gradient, ellipticity and energy fields (the others are left at 0).
DiagnosticsReport gradient_ellipticity_report(const GraphField& u);

// Minimum eigenvalue of the Ricci tensor over interior nodes, computed from
// the Gauss equation with the discrete second fundamental form. Requires a
// near-solution: residual_inf(u) <= 100 * newton_tol.
double ricci_check(const GraphField& u, double newton_tol = 1e-10);

// Max of <L w, w> / <w, w> over random probes (half smooth, half white noise).
double max_rayleigh_quotient(const GraphField& u, int probes, std::uint64_t seed);

// All of the above at a solved state.
DiagnosticsReport diagnose(const GraphField& u, double newton_tol, int rayleigh_probes, std::uint64_t seed);

}  // namespace maxgraph
