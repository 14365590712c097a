#pragma once

// Dirichlet data phi: boundary -> R^m, its acausality margin, and its
// discrete-harmonic extension into the domain.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxgraph/grid.hpp"

namespace maxgraph {

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct BoundaryData {
  VectorFn analytic;        // optional closed form, may be empty
  Eigen::MatrixXd samples;  // node_count x m; only boundary rows are meaningful
  double c2_bound_kappa = 0.0;

  int components() const { return static_cast<int>(samples.cols()); }

  // Samples fn on the boundary nodes and estimates kappa.
  static BoundaryData from_function(const StructuredGrid& grid, int m, VectorFn fn);
  // Data t * phi; samples are scaled exactly, kappa by |t|.
  BoundaryData scaled(double t) const;
};

// Preset closed forms. For "sinusoidal", component theta oscillates along
// axis theta mod n: phi^theta(x) = amplitude[theta] * sin(frequency[theta] * x_k + phase[theta]).
VectorFn constant_preset(const Eigen::VectorXd& value);
VectorFn affine_preset(const Eigen::MatrixXd& A, const Eigen::VectorXd& offset);  // A is m x n
VectorFn sinusoidal_preset(int n, const Eigen::VectorXd& amplitude, const Eigen::VectorXd& frequency,
                           const Eigen::VectorXd& phase);
VectorFn catenoid_trace_preset(double K);  // m = 1, K asinh(|x| / K)

// mu0 = 1 - max over distinct boundary node pairs of |phi(x) - phi(x')| / |x - x'|.
double acausality_margin(const BoundaryData& data, const StructuredGrid& grid);

// Estimate of ||phi||_{C^2} on the boundary from divided differences along it.
double estimate_c2_bound(const StructuredGrid& grid, const Eigen::MatrixXd& samples);

// Componentwise discrete-harmonic extension with Dirichlet data.
GraphField extend_to_interior(const BoundaryData& data, GridPtr grid);

// Writes the boundary samples of data into the boundary rows of field.
void apply_boundary(GraphField& field, const BoundaryData& data);

}  // namespace maxgraph
