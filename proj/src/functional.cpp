#include "maxgraph/functional.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "maxgraph/errors.hpp"
#include "maxgraph/parallel.hpp"

namespace maxgraph {

namespace {

struct ElementGeometry {
  GradientMatrix J;
  Eigen::MatrixXd G;   // g^{-1}
  double vol = 0.0;    // sqrt(det g)
  double margin = 0.0;
};

ElementGeometry element_geometry(const GraphField& u, std::size_t e) {
  ElementGeometry eg;
  eg.J = element_gradient(u, e);
  const MetricTensor mt = induced_metric(eg.J);
  eg.margin = mt.min_eig;
  if (mt.spacelike()) {
    eg.G = mt.g_inv;
    eg.vol = std::sqrt(mt.det_g);
  }
  return eg;
}

}  // namespace

double min_element_margin(const GraphField& u, std::size_t* worst_node) {
  const auto& g = *u.grid;
  std::vector<double> margin(g.element_count());
  parallel_for(margin.size(), [&](std::size_t e) { margin[e] = spacelike_margin(element_gradient(u, e)); });
  double best = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (std::size_t e = 0; e < margin.size(); ++e) {
    if (margin[e] < best) {
      best = margin[e];
      at = e;
    }
  }
  if (worst_node) *worst_node = margin.empty() ? 0 : static_cast<std::size_t>(g.element_nodes(at)[0]);
  return best;
}

void require_spacelike(const GraphField& u) {
  std::size_t node = 0;
  const double margin = min_element_margin(u, &node);
  if (!(margin > 0.0))
    throw PreconditionViolation("field is not spacelike (margin " + std::to_string(margin) + ")", node);
}

double discrete_volume(const GraphField& u) {
  require_spacelike(u);
  const auto& g = *u.grid;
  std::vector<double> contrib(g.element_count());
  parallel_for(contrib.size(), [&](std::size_t e) {
    contrib[e] = g.element_weight(e) * std::sqrt(induced_metric(element_gradient(u, e)).det_g);
  });
  double v = 0.0;
  for (double c : contrib) v += c;
  return v;
}

Eigen::MatrixXd volume_gradient(const GraphField& u) {
  require_spacelike(u);
  const auto& g = *u.grid;
  const int m = u.components();
  const int sz = g.element_size();
  std::vector<Eigen::MatrixXd> local(g.element_count());
  parallel_for(local.size(), [&](std::size_t e) {
    // d sqrt(det g) = -sqrt(det g) <g^{-1} J, dJ>
    const ElementGeometry eg = element_geometry(u, e);
    local[e] = -g.element_weight(e) * eg.vol * (g.grad_op(e).transpose() * (eg.G * eg.J));
  });
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.node_count()), m);
  for (std::size_t e = 0; e < local.size(); ++e) {
    const int* nodes = g.element_nodes(e);
    for (int q = 0; q < sz; ++q) grad.row(nodes[q]) += local[e].row(q);
  }
  return grad;
}

SparseMatrix volume_hessian(const GraphField& u) {
  require_spacelike(u);
  const auto& g = *u.grid;
  const int n = g.dim();
  const int m = u.components();
  const int sz = g.element_size();
  const int ld = sz * m;  // local dofs ordered (node q, component theta) -> q * m + theta
  std::vector<Eigen::MatrixXd> local(g.element_count());
  parallel_for(local.size(), [&](std::size_t e) {
    const ElementGeometry eg = element_geometry(u, e);
    const Eigen::MatrixXd GJ = eg.G * eg.J;                       // n x m
    const Eigen::MatrixXd S = eg.J.transpose() * GJ;               // m x m
    const auto B = g.grad_op(e);                                   // n x sz
    Eigen::MatrixXd Hl = Eigen::MatrixXd::Zero(ld, ld);
    Eigen::MatrixXd M(n, n);
    for (int th = 0; th < m; ++th) {
      for (int sg = 0; sg < m; ++sg) {
        // d^2 sqrt(det g) / dJ(i,th) dJ(k,sg)
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k)
            M(i, k) = -eg.vol * (-GJ(k, sg) * GJ(i, th) +
                                 eg.G(i, k) * (S(sg, th) + (sg == th ? 1.0 : 0.0)) +
                                 GJ(i, sg) * GJ(k, th));
        const Eigen::MatrixXd blk = B.transpose() * M * B;  // sz x sz
        for (int q = 0; q < sz; ++q)
          for (int r = 0; r < sz; ++r) Hl(q * m + th, r * m + sg) = blk(q, r);
      }
    }
    local[e] = g.element_weight(e) * Hl;
  });
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(local.size() * static_cast<std::size_t>(ld * ld));
  for (std::size_t e = 0; e < local.size(); ++e) {
    const int* nodes = g.element_nodes(e);
    for (int q = 0; q < sz; ++q) {
      const long iq = g.interior_index(nodes[q]);
      if (iq < 0) continue;
      for (int r = 0; r < sz; ++r) {
        const long ir = g.interior_index(nodes[r]);
        if (ir < 0) continue;
        for (int th = 0; th < m; ++th)
          for (int sg = 0; sg < m; ++sg)
            trips.emplace_back(static_cast<int>(iq * m + th), static_cast<int>(ir * m + sg),
                               local[e](q * m + th, r * m + sg));
      }
    }
  }
  const auto dofs = static_cast<Eigen::Index>(g.interior_nodes().size()) * m;
  SparseMatrix H(dofs, dofs);
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

SparseMatrix stiffness_matrix(const StructuredGrid& g) {
  const int sz = g.element_size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(g.element_count() * static_cast<std::size_t>(sz * sz));
  for (std::size_t e = 0; e < g.element_count(); ++e) {
    const auto B = g.grad_op(e);
    const Eigen::MatrixXd K = g.element_weight(e) * (B.transpose() * B);
    const int* nodes = g.element_nodes(e);
    for (int q = 0; q < sz; ++q)
      for (int r = 0; r < sz; ++r) trips.emplace_back(nodes[q], nodes[r], K(q, r));
  }
  const auto N = static_cast<Eigen::Index>(g.node_count());
  SparseMatrix K(N, N);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::VectorXd interior_vector(const StructuredGrid& g, const Eigen::MatrixXd& node_values) {
  const auto m = node_values.cols();
  Eigen::VectorXd x(static_cast<Eigen::Index>(g.interior_nodes().size()) * m);
  for (std::size_t k = 0; k < g.interior_nodes().size(); ++k)
    x.segment(static_cast<Eigen::Index>(k) * m, m) =
        node_values.row(static_cast<Eigen::Index>(g.interior_nodes()[k])).transpose();
  return x;
}

Eigen::VectorXd interior_vector(const GraphField& f) { return interior_vector(*f.grid, f.values); }

void add_interior_vector(GraphField& f, const Eigen::VectorXd& x, double scale) {
  const auto& g = *f.grid;
  const int m = f.components();
  for (std::size_t k = 0; k < g.interior_nodes().size(); ++k)
    f.values.row(static_cast<Eigen::Index>(g.interior_nodes()[k])) +=
        scale * x.segment(static_cast<Eigen::Index>(k) * m, m).transpose();
}

}  // namespace maxgraph
