#pragma once

// The discrete volume functional of a graph,
//   V_h(u) = sum_e w_e sqrt(det(I - J_e J_e^T)),
// with J_e the gradient of u on corner element e, together with its exact
// first and second derivatives with respect to the nodal values. The solver's
// residual is the gradient of V_h and its Jacobi operator is the Hessian, so
// the linearization is symmetric to rounding error.

#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "maxgraph/grid.hpp"

namespace maxgraph {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Smallest spacelike margin over all elements; worst_node receives a node of
// the worst element when non-null.
double min_element_margin(const GraphField& u, std::size_t* worst_node = nullptr);

// Throws PreconditionViolation when some element is not spacelike.
void require_spacelike(const GraphField& u);

double discrete_volume(const GraphField& u);

// dV_h/du at every node (node_count x m). Interior rows are the weak form of
// sum_i d_i(g^{ij} sqrt(det g) d_j u).
Eigen::MatrixXd volume_gradient(const GraphField& u);

// d^2 V_h / du^2 restricted to interior degrees of freedom, ordered as
// interior_index(node) * m + component. Symmetric negative definite at
// spacelike states.
SparseMatrix volume_hessian(const GraphField& u);

// Dirichlet-energy stiffness (the negative of volume_hessian at u = 0 for a
// single component) on all nodes.
SparseMatrix stiffness_matrix(const StructuredGrid& grid);

// Flattening helpers between interior degrees of freedom and fields.
Eigen::VectorXd interior_vector(const GraphField& f);
Eigen::VectorXd interior_vector(const StructuredGrid& grid, const Eigen::MatrixXd& node_values);
void add_interior_vector(GraphField& f, const Eigen::VectorXd& x, double scale = 1.0);

}  // namespace maxgraph
