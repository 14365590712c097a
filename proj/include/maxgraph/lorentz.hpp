#pragma once

// Pointwise geometry of R^{n,m} = R^n_x (+) R^m_y with the split-signature
// form <v,w> = v.x . w.x - v.y . w.y, and of graphs x -> (x, u(x)) in it.

#include <Eigen/Dense>

namespace maxgraph {

struct Signature {
  int n = 1;  // spatial dimension
  int m = 1;  // codimension (number of temporal directions)

  Signature() = default;
  Signature(int n_, int m_);
  bool operator==(const Signature&) const = default;
};

struct SpacetimeVector {
  Eigen::VectorXd x;  // spatial part, length n
  Eigen::VectorXd y;  // temporal part, length m

  Signature signature() const { return {static_cast<int>(x.size()), static_cast<int>(y.size())}; }
};

// J(i, theta) = d_i u^theta. Rows index the n spatial directions.
using GradientMatrix = Eigen::MatrixXd;

struct MetricTensor {
  Eigen::MatrixXd g;      // I - J J^T
  Eigen::MatrixXd g_inv;  // only meaningful when spacelike()
  double det_g = 0.0;     // only meaningful when spacelike()
  double min_eig = 0.0;

  bool spacelike() const { return min_eig > 0.0; }
};

enum class CausalClass { spacelike, null, timelike };

double lorentz_inner(const SpacetimeVector& v, const SpacetimeVector& w);

CausalClass causal_class(const SpacetimeVector& v);

MetricTensor induced_metric(const GradientMatrix& J);

// 1 - sigma_max(J)^2, the smallest eigenvalue of I - J J^T.
double spacelike_margin(const GradientMatrix& J);

// Eigenvalues of a symmetric matrix in ascending order. Closed forms for
// size <= 3, an iterative solver beyond that.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& S);

}  // namespace maxgraph
