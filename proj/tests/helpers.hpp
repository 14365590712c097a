#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "maxgraph/grid.hpp"

namespace testing {

inline maxgraph::GridPtr unit_box(int nodes, int dim = 2) {
  maxgraph::DomainSpec s;
  s.kind = maxgraph::GridKind::cartesian_box;
  for (int a = 0; a < dim; ++a) {
    s.bounds.push_back({0.0, 1.0});
    s.counts.push_back(nodes);
  }
  return maxgraph::build_grid(s);
}

inline maxgraph::GridPtr annulus(double r0, double r1, int radial, int angular) {
  return maxgraph::build_grid({maxgraph::GridKind::polar_annulus, {{r0, r1}}, {radial, angular}});
}

// Haar-ish random orthogonal matrix.
inline Eigen::MatrixXd random_orthogonal(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd M(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) M(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
}

// Random matrix rescaled to the given largest singular value.
inline Eigen::MatrixXd with_sigma_max(int rows, int cols, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = g(rng);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
  return M * (sigma / s);
}

inline double sup_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
