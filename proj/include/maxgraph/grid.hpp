#pragma once

// Structured discretizations of the base domain and fields on them.
//
// Two kinds are supported: an axis-aligned box in any dimension, and a polar
// annulus (or disk when the inner radius is zero) in the plane. Both carry a
// list of simplex "corner elements" on which the field gradient is piecewise
// constant. On a box cell every corner contributes the simplex spanned by the
// corner and its axis neighbours with weight |cell| / 2^n; a polar cell is
// treated the same way in Cartesian coordinates with weight equal to half the
// corner triangle's area. This is the average of the two diagonal P1
// triangulations, so the element gradients are exact for affine fields.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "maxgraph/lorentz.hpp"

namespace maxgraph {

enum class GridKind { cartesian_box, polar_annulus };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct DomainSpec {
  GridKind kind = GridKind::cartesian_box;
  // Box: one interval per axis. Annulus: a single radial interval [r0, r1];
  // r0 == 0 produces a disk with one shared centre node.
  std::vector<Interval> bounds;
  // Box: nodes per axis. Annulus: {radial nodes (including centre), angular nodes}.
  std::vector<int> counts;
};

class StructuredGrid {
public:
  static std::shared_ptr<const StructuredGrid> build(const DomainSpec& spec);

  GridKind kind() const { return spec_.kind; }
  const DomainSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  std::size_t node_count() const { return is_boundary_.size(); }

  Eigen::VectorXd coord(std::size_t node) const;
  double coord(std::size_t node, int axis) const { return coords_[node * dim_ + axis]; }
  bool is_boundary(std::size_t node) const { return is_boundary_[node] != 0; }
  double dist_to_boundary(std::size_t node) const { return dist_[node]; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_nodes_; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_nodes_; }
  // Position of an interior node in interior_nodes(), or -1 for boundary nodes.
  long interior_index(std::size_t node) const { return interior_index_[node]; }

  // Lumped (median dual) cell volume of a node.
  double dual_volume(std::size_t node) const { return dual_volume_[node]; }
  double total_volume() const;

  // Polar helpers; meaningful only for polar_annulus grids.
  bool is_disk() const { return disk_; }
  double radius(std::size_t node) const { return polar_r_[node]; }
  double angle(std::size_t node) const { return polar_theta_[node]; }
  // (ring, angular) indices; ring 0 of a disk is the centre (angular = 0).
  std::pair<int, int> polar_index(std::size_t node) const;
  std::size_t polar_node(int ring, int angular) const;
  double radial_step() const { return dr_; }
  double angular_step() const { return dtheta_; }

  // Box helpers.
  std::vector<int> box_index(std::size_t node) const;
  std::size_t box_node(const std::vector<int>& idx) const;
  double spacing(int axis) const { return h_[axis]; }

  // Corner elements: simplices of dim()+1 nodes with a constant gradient
  // operator. grad_op(e) is dim() x (dim()+1): J = grad_op * U_local.
  std::size_t element_count() const { return elem_weight_.size(); }
  int element_size() const { return dim_ + 1; }
  const int* element_nodes(std::size_t e) const { return &elem_nodes_[e * (dim_ + 1)]; }
  double element_weight(std::size_t e) const { return elem_weight_[e]; }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  grad_op(std::size_t e) const {
    return {&elem_grad_[e * dim_ * (dim_ + 1)], dim_, dim_ + 1};
  }

private:
  StructuredGrid() = default;
  void build_box();
  void build_polar();
  void add_element(const std::vector<int>& nodes, double weight);
  void finalize();

  DomainSpec spec_;
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<char> is_boundary_;
  std::vector<double> dist_;
  std::vector<std::size_t> boundary_nodes_;
  std::vector<std::size_t> interior_nodes_;
  std::vector<long> interior_index_;
  std::vector<double> dual_volume_;

  std::vector<double> h_;
  std::vector<std::size_t> strides_;

  bool disk_ = false;
  double dr_ = 0.0;
  double dtheta_ = 0.0;
  std::vector<double> polar_r_;
  std::vector<double> polar_theta_;

  std::vector<int> elem_nodes_;
  std::vector<double> elem_grad_;
  std::vector<double> elem_weight_;
};

using GridPtr = std::shared_ptr<const StructuredGrid>;

GridPtr build_grid(const DomainSpec& spec);

struct GraphField {
  GridPtr grid;
  Eigen::MatrixXd values;  // node_count x m, row p is u(x_p)

  GraphField() = default;
  GraphField(GridPtr g, int m);
  GraphField(GridPtr g, Eigen::MatrixXd v);

  int components() const { return static_cast<int>(values.cols()); }
  // Builds a field by evaluating fn at every node coordinate.
  static GraphField from_function(GridPtr g, int m,
                                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn);
};

// Nodal gradient: second-order central differences in the interior and
// second-order one-sided differences across the boundary. Polar grids are
// converted to Cartesian components.
GradientMatrix gradient_at(const GraphField& field, std::size_t node);

// Nodal Hessians (one n x n matrix per component) by central differences;
// interior nodes only.
std::vector<Eigen::MatrixXd> hessian_at(const GraphField& field, std::size_t node);

// Gradient of the field on a corner element (exact for affine fields).
GradientMatrix element_gradient(const GraphField& field, std::size_t element);

// Coefficient tensor evaluated from the local gradient J; returns n x n.
using CoefficientFn = std::function<Eigen::MatrixXd(const GradientMatrix& J)>;

// Conservative divergence of the flux coeff(J) * J on the dual cells: for
// each interior node p and component theta,
//   div_p = -(1/|cell_p|) sum_e w_e sum_i grad_op_e(i, p) (coeff(J_e) J_e)(i, theta).
// Boundary rows are zero. Throws PreconditionViolation (worst node) when any
// element gradient is not spacelike.
Eigen::MatrixXd face_flux_divergence(const GraphField& field, const CoefficientFn& coeff);

// Flux leaving the interior through boundary nodes, per component: the
// interior sum of |cell_p| * div_p equals this value.
Eigen::VectorXd net_boundary_flux(const GraphField& field, const CoefficientFn& coeff);

// CSV with one row per node: x1..xn,u1..um (plus r,theta on polar grids),
// 17 significant digits.
void write_field_csv(std::ostream& os, const GraphField& field);
GraphField read_field_csv(std::istream& is, GridPtr grid, int m);

}  // namespace maxgraph
