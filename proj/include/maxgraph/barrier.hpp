#pragma once

// Rotationally symmetric comparison hypersurfaces {w = f(r)} in R^{n,m}, with
// r = |x - xi| and w = |y - eta|. The profile solves
//   (n-1) f'/(r sqrt(1-f'^2)) + f''/(1-f'^2)^{3/2} = Lambda,
// integrated once to f'/sqrt(1-f'^2) = Lambda r / n + K r^{1-n}.

#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "maxgraph/boundary.hpp"
#include "maxgraph/grid.hpp"
#include "maxgraph/lorentz.hpp"

namespace maxgraph {

struct BarrierParams {
  double K = 1.0;        // > 0
  double Lambda = 0.0;   // <= 0
  Eigen::VectorXd xi;    // spatial apex, length n
  Eigen::VectorXd eta;   // temporal apex, length m

  // Apex at the origin.
  static BarrierParams make(int n, int m, double K, double Lambda);

  int n() const { return static_cast<int>(xi.size()); }
  int m() const { return static_cast<int>(eta.size()); }
  // (n K / |Lambda|)^{1/n}, or +inf when Lambda == 0.
  double r_max() const;
  void validate() const;
};

// Principal values of the second fundamental form -<grad_v n, v> at radius r:
// c1 on directions tangent to the spatial sphere (multiplicity n-1), c2 on the
// temporal sphere (multiplicity m-1), c3 on the profile direction.
struct ShapeSpectrum {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

// Adaptive Gauss-Kronrod (7/15) quadrature of the profile integrand to 1e-12.
double f_eval(const BarrierParams& p, double r);
double f_prime(const BarrierParams& p, double r);
double f_second(const BarrierParams& p, double r);
ShapeSpectrum shape_spectrum(const BarrierParams& p, double r);

// Residual of the defining ODE at r.
double profile_ode_residual(const BarrierParams& p, double r);

// A point of the hypersurface: x = xi + r a, y = eta + f(r) b with unit a, b.
struct BarrierPoint {
  double r = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;

  // a = e_1, b = e_1.
  static BarrierPoint canonical(const BarrierParams& p, double r);
};

// Unit timelike normal (f' a, b) / sqrt(1 - f'^2).
SpacetimeVector barrier_normal(const BarrierParams& p, const BarrierPoint& at);

// Lorentz-orthonormal basis of the slice {v2 = 0} of the tangent space
// (n vectors) followed by the temporal-sphere directions (m - 1 vectors).
struct TangentFrame {
  std::vector<SpacetimeVector> slice;
  std::vector<SpacetimeVector> temporal;
};
TangentFrame tangent_frame(const BarrierParams& p, const BarrierPoint& at);

// Mean curvature of the hypersurface traced over the spacelike n-plane
// spanned by basis (orthonormalized internally). Throws InvalidArgument if the
// basis is not tangent or does not span a spacelike n-plane.
double mean_curvature_over_plane(const BarrierParams& p, const BarrierPoint& at,
                                 const std::vector<SpacetimeVector>& basis);
double mean_curvature_over_plane(const BarrierParams& p, double r,
                                 const std::vector<SpacetimeVector>& basis);

// Random spacelike tangent n-plane: the {v2 = 0} slice tilted towards the
// temporal directions by a random map of operator norm < 1, then mixed by a
// random invertible matrix.
std::vector<SpacetimeVector> random_spacelike_plane(const BarrierParams& p, const BarrierPoint& at,
                                                    std::mt19937_64& rng);

// |q.y - eta| <= f(|q.x - xi|) + 1e-12.
bool contains(const BarrierParams& p, const SpacetimeVector& q);

struct ComparisonReport {
  bool boundary_contained = true;
  bool interior_contained = true;
  double worst_violation = 0.0;  // max(0, max over nodes of w - f(r))
  double worst_boundary_violation = 0.0;
  double worst_interior_violation = 0.0;
  std::size_t interior_violations = 0;
};

ComparisonReport comparison_check(const GraphField& u, const BarrierParams& p);

struct BarrierFit {
  BarrierParams params;
  double a = 0.0;  // |D'phi . theta| at x0
  double b = 0.0;
  double tangency_residual = 0.0;  // |D'(w^2) - D'(f^2)| at x0
};

// Barrier through (x0, phi(x0)) tangent to first order along the boundary, with
// K = 1/eps and apex xi at distance eps outside the domain. x0 is a boundary
// node with a well-defined inward normal (not a box edge or corner).
BarrierFit fit_boundary_barrier(const StructuredGrid& grid, std::size_t x0_node,
                                const Eigen::VectorXd& theta, double eps, double Lambda,
                                const BoundaryData& data);

// Inward unit normal at a boundary node; throws when undefined.
Eigen::VectorXd inward_normal(const StructuredGrid& grid, std::size_t node);

struct BarrierRow {
  double r, f, f_prime, c1, c2, c3;
};

// Table over r in [0, min(r_cap, r_max)); the r = 0 row reports the limits
// f = 0, f' = 1 and NaN for the singular principal values.
std::vector<BarrierRow> tabulate_barrier(const BarrierParams& p, int samples, double r_cap);

}  // namespace maxgraph
