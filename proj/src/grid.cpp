#include "maxgraph/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "maxgraph/errors.hpp"
#include "maxgraph/parallel.hpp"

namespace maxgraph {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

GridPtr build_grid(const DomainSpec& spec) { return StructuredGrid::build(spec); }

std::shared_ptr<const StructuredGrid> StructuredGrid::build(const DomainSpec& spec) {
  std::shared_ptr<StructuredGrid> g(new StructuredGrid());
  g->spec_ = spec;
  if (spec.kind == GridKind::cartesian_box)
    g->build_box();
  else
    g->build_polar();
  g->finalize();
  return g;
}

void StructuredGrid::build_box() {
  dim_ = static_cast<int>(spec_.bounds.size());
  if (dim_ < 1) throw InvalidArgument("box grid needs at least one axis");
  if (spec_.counts.size() != spec_.bounds.size())
    throw InvalidArgument("box grid: counts and bounds differ in length");
  for (int k = 0; k < dim_; ++k) {
    if (spec_.counts[k] < 3) throw InvalidArgument("box grid: need at least 3 nodes per axis");
    if (!(spec_.bounds[k].hi > spec_.bounds[k].lo) || !std::isfinite(spec_.bounds[k].lo) ||
        !std::isfinite(spec_.bounds[k].hi))
      throw InvalidArgument("box grid: degenerate bounds on axis " + std::to_string(k));
  }
  h_.resize(dim_);
  strides_.resize(dim_);
  std::size_t total = 1;
  for (int k = 0; k < dim_; ++k) {
    strides_[k] = total;
    total *= static_cast<std::size_t>(spec_.counts[k]);
    h_[k] = (spec_.bounds[k].hi - spec_.bounds[k].lo) / (spec_.counts[k] - 1);
  }
  coords_.resize(total * dim_);
  is_boundary_.assign(total, 0);
  dist_.resize(total);
  for (std::size_t p = 0; p < total; ++p) {
    const auto idx = box_index(p);
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim_; ++k) {
      const auto& b = spec_.bounds[k];
      // Exact endpoints so that boundary distances vanish exactly.
      const double x = idx[k] == spec_.counts[k] - 1 ? b.hi : b.lo + idx[k] * h_[k];
      coords_[p * dim_ + k] = x;
      if (idx[k] == 0 || idx[k] == spec_.counts[k] - 1) is_boundary_[p] = 1;
      d = std::min({d, x - b.lo, b.hi - x});
    }
    dist_[p] = is_boundary_[p] ? 0.0 : d;
  }

  double cell = 1.0;
  for (double h : h_) cell *= h;
  const int corners = 1 << dim_;
  const double weight = cell / corners;
  std::vector<int> cidx(dim_, 0);
  std::vector<int> nodes(dim_ + 1);
  std::size_t cells = 1;
  for (int k = 0; k < dim_; ++k) cells *= static_cast<std::size_t>(spec_.counts[k] - 1);
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rem = c;
    for (int k = 0; k < dim_; ++k) {
      cidx[k] = static_cast<int>(rem % (spec_.counts[k] - 1));
      rem /= (spec_.counts[k] - 1);
    }
    for (int s = 0; s < corners; ++s) {
      std::vector<int> corner(cidx);
      for (int k = 0; k < dim_; ++k) corner[k] += (s >> k) & 1;
      nodes[0] = static_cast<int>(box_node(corner));
      for (int k = 0; k < dim_; ++k) {
        std::vector<int> nb(corner);
        nb[k] = cidx[k] + (1 - ((s >> k) & 1));
        nodes[k + 1] = static_cast<int>(box_node(nb));
      }
      add_element(nodes, weight);
    }
  }
}

void StructuredGrid::build_polar() {
  dim_ = 2;
  if (spec_.bounds.size() != 1 || spec_.counts.size() != 2)
    throw InvalidArgument("polar grid needs one radial interval and {radial, angular} counts");
  const double r0 = spec_.bounds[0].lo;
  const double r1 = spec_.bounds[0].hi;
  if (!(r0 >= 0.0) || !(r1 > r0) || !std::isfinite(r1))
    throw InvalidArgument("polar grid: need r1 > r0 >= 0");
  const int nr = spec_.counts[0];
  const int nt = spec_.counts[1];
  if (nr < 3 || nt < 3) throw InvalidArgument("polar grid: need at least 3 nodes per axis");
  disk_ = r0 == 0.0;
  dr_ = (r1 - r0) / (nr - 1);
  dtheta_ = two_pi / nt;
  const std::size_t total =
      disk_ ? 1 + static_cast<std::size_t>(nr - 1) * nt : static_cast<std::size_t>(nr) * nt;
  coords_.resize(total * 2);
  polar_r_.resize(total);
  polar_theta_.resize(total);
  is_boundary_.assign(total, 0);
  dist_.resize(total);
  for (int i = disk_ ? 1 : 0; i < nr; ++i) {
    const double r = i == nr - 1 ? r1 : r0 + i * dr_;
    for (int j = 0; j < nt; ++j) {
      const std::size_t p = polar_node(i, j);
      const double th = j * dtheta_;
      polar_r_[p] = r;
      polar_theta_[p] = th;
      coords_[2 * p] = r * std::cos(th);
      coords_[2 * p + 1] = r * std::sin(th);
      const bool bnd = i == nr - 1 || (!disk_ && i == 0);
      is_boundary_[p] = bnd ? 1 : 0;
      dist_[p] = bnd ? 0.0 : (disk_ ? r1 - r : std::min(r - r0, r1 - r));
    }
  }
  if (disk_) {
    polar_r_[0] = 0.0;
    polar_theta_[0] = 0.0;
    coords_[0] = coords_[1] = 0.0;
    dist_[0] = r1;
  }

  auto tri_area = [this](int a, int b, int c) {
    const double ax = coords_[2 * a], ay = coords_[2 * a + 1];
    const double bx = coords_[2 * b] - ax, by = coords_[2 * b + 1] - ay;
    const double cx = coords_[2 * c] - ax, cy = coords_[2 * c + 1] - ay;
    return 0.5 * std::abs(bx * cy - by * cx);
  };
  for (int i = 0; i + 1 < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int jn = (j + 1) % nt;
      if (disk_ && i == 0) {
        const int c = 0;
        const int b = static_cast<int>(polar_node(1, j));
        const int d = static_cast<int>(polar_node(1, jn));
        add_element({c, b, d}, tri_area(c, b, d));
        continue;
      }
      const int a = static_cast<int>(polar_node(i, j));
      const int b = static_cast<int>(polar_node(i + 1, j));
      const int c = static_cast<int>(polar_node(i + 1, jn));
      const int d = static_cast<int>(polar_node(i, jn));
      add_element({a, b, d}, 0.5 * tri_area(a, b, d));
      add_element({b, c, a}, 0.5 * tri_area(b, c, a));
      add_element({c, d, b}, 0.5 * tri_area(c, d, b));
      add_element({d, a, c}, 0.5 * tri_area(d, a, c));
    }
  }
}

void StructuredGrid::add_element(const std::vector<int>& nodes, double weight) {
  Eigen::MatrixXd E(dim_, dim_);
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      E(k, i) = coords_[nodes[k + 1] * dim_ + i] - coords_[nodes[0] * dim_ + i];
  // J = E^{-1} D where D's rows are u(nodes[k+1]) - u(nodes[0]).
  const Eigen::MatrixXd Einv = E.inverse();
  if (!Einv.allFinite()) throw InvalidArgument("degenerate grid element");
  for (int v : nodes) elem_nodes_.push_back(v);
  for (int i = 0; i < dim_; ++i) {
    elem_grad_.push_back(-Einv.row(i).sum());
    for (int k = 0; k < dim_; ++k) elem_grad_.push_back(Einv(i, k));
  }
  elem_weight_.push_back(weight);
}

void StructuredGrid::finalize() {
  const std::size_t total = is_boundary_.size();
  dual_volume_.assign(total, 0.0);
  const int sz = dim_ + 1;
  for (std::size_t e = 0; e < element_count(); ++e)
    for (int k = 0; k < sz; ++k) dual_volume_[elem_nodes_[e * sz + k]] += elem_weight_[e] / sz;
  interior_index_.assign(total, -1);
  for (std::size_t p = 0; p < total; ++p) {
    if (is_boundary_[p]) {
      boundary_nodes_.push_back(p);
    } else {
      interior_index_[p] = static_cast<long>(interior_nodes_.size());
      interior_nodes_.push_back(p);
    }
  }
}

Eigen::VectorXd StructuredGrid::coord(std::size_t node) const {
  return Eigen::Map<const Eigen::VectorXd>(&coords_[node * dim_], dim_);
}

double StructuredGrid::total_volume() const {
  double v = 0.0;
  for (double w : elem_weight_) v += w;
  return v;
}

std::pair<int, int> StructuredGrid::polar_index(std::size_t node) const {
  const int nt = spec_.counts[1];
  if (disk_) {
    if (node == 0) return {0, 0};
    return {1 + static_cast<int>((node - 1) / nt), static_cast<int>((node - 1) % nt)};
  }
  return {static_cast<int>(node / nt), static_cast<int>(node % nt)};
}

std::size_t StructuredGrid::polar_node(int ring, int angular) const {
  const int nt = spec_.counts[1];
  angular = ((angular % nt) + nt) % nt;
  if (disk_) return ring == 0 ? 0 : 1 + static_cast<std::size_t>(ring - 1) * nt + angular;
  return static_cast<std::size_t>(ring) * nt + angular;
}

std::vector<int> StructuredGrid::box_index(std::size_t node) const {
  std::vector<int> idx(dim_);
  for (int k = 0; k < dim_; ++k) {
    idx[k] = static_cast<int>(node % spec_.counts[k]);
    node /= spec_.counts[k];
  }
  return idx;
}

std::size_t StructuredGrid::box_node(const std::vector<int>& idx) const {
  std::size_t p = 0;
  for (int k = 0; k < dim_; ++k) p += static_cast<std::size_t>(idx[k]) * strides_[k];
  return p;
}

GraphField::GraphField(GridPtr g, int m) : grid(std::move(g)) {
  if (m < 1) throw InvalidArgument("field needs at least one component");
  values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid->node_count()), m);
}

GraphField::GraphField(GridPtr g, Eigen::MatrixXd v) : grid(std::move(g)), values(std::move(v)) {
  if (values.rows() != static_cast<Eigen::Index>(grid->node_count()) || values.cols() < 1)
    throw InvalidArgument("field values do not match grid");
}

GraphField GraphField::from_function(
    GridPtr g, int m, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn) {
  GraphField f(g, m);
  for (std::size_t p = 0; p < g->node_count(); ++p) {
    const Eigen::VectorXd v = fn(g->coord(p));
    if (v.size() != m) throw InvalidArgument("field function returned wrong component count");
    f.values.row(static_cast<Eigen::Index>(p)) = v.transpose();
  }
  return f;
}

namespace {

using Row = Eigen::RowVectorXd;

Row val(const GraphField& f, std::size_t p) { return f.values.row(static_cast<Eigen::Index>(p)); }

// Derivative along one index direction given the three-point stencil
// availability. lo/hi flag whether the node sits on the first/last index.
template <typename At>
Row first_derivative(At at, bool first, bool last, double h) {
  if (!first && !last) return (at(1) - at(-1)) / (2.0 * h);
  if (first) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
}

GradientMatrix polar_to_cartesian(const Row& ur, const Row& ut, double r, double th) {
  const double c = std::cos(th), s = std::sin(th);
  GradientMatrix J(2, ur.size());
  J.row(0) = c * ur - (s / r) * ut;
  J.row(1) = s * ur + (c / r) * ut;
  return J;
}

}  // namespace

GradientMatrix gradient_at(const GraphField& field, std::size_t node) {
  const auto& g = *field.grid;
  const int n = g.dim();
  const int m = field.components();
  if (g.kind() == GridKind::cartesian_box) {
    const auto idx = g.box_index(node);
    GradientMatrix J(n, m);
    for (int k = 0; k < n; ++k) {
      auto at = [&](int off) {
        auto j = idx;
        j[k] += off;
        return val(field, g.box_node(j));
      };
      J.row(k) = first_derivative(at, idx[k] == 0, idx[k] == g.spec().counts[k] - 1, g.spacing(k));
    }
    return J;
  }

  const int nt = g.spec().counts[1];
  const int nr = g.spec().counts[0];
  const auto [i, j] = g.polar_index(node);
  if (g.is_disk() && i == 0) {
    // Centre: first Fourier mode of the first ring.
    const double r = g.radius(g.polar_node(1, 0));
    GradientMatrix J = GradientMatrix::Zero(2, m);
    const Row u0 = val(field, node);
    for (int k = 0; k < nt; ++k) {
      const std::size_t q = g.polar_node(1, k);
      const Row d = val(field, q) - u0;
      J.row(0) += std::cos(g.angle(q)) * d;
      J.row(1) += std::sin(g.angle(q)) * d;
    }
    return J * (2.0 / (nt * r));
  }
  auto at_r = [&](int off) { return val(field, g.polar_node(i + off, j)); };
  const bool first = !g.is_disk() && i == 0;
  const bool last = i == nr - 1;
  const Row ur = first_derivative(at_r, first, last, g.radial_step());
  // sin(dt) and 1 - cos(dt) in place of dt keep affine fields exact.
  const Row ut = (val(field, g.polar_node(i, j + 1)) - val(field, g.polar_node(i, j - 1))) /
                 (2.0 * std::sin(g.angular_step()));
  return polar_to_cartesian(ur, ut, g.radius(node), g.angle(node));
}

std::vector<Eigen::MatrixXd> hessian_at(const GraphField& field, std::size_t node) {
  const auto& g = *field.grid;
  const int n = g.dim();
  const int m = field.components();
  if (g.is_boundary(node)) throw InvalidArgument("hessian_at: boundary node");
  std::vector<Eigen::MatrixXd> H(m, Eigen::MatrixXd::Zero(n, n));
  const Row u0 = val(field, node);

  if (g.kind() == GridKind::cartesian_box) {
    const auto idx = g.box_index(node);
    auto at = [&](int k, int ok, int l, int ol) {
      auto j = idx;
      j[k] += ok;
      j[l] += ol;
      return val(field, g.box_node(j));
    };
    for (int k = 0; k < n; ++k) {
      const double hk = g.spacing(k);
      const Row dkk = (at(k, 1, k, 0) - 2.0 * u0 + at(k, -1, k, 0)) / (hk * hk);
      for (int t = 0; t < m; ++t) H[t](k, k) = dkk(t);
      for (int l = k + 1; l < n; ++l) {
        const Row dkl = (at(k, 1, l, 1) - at(k, 1, l, -1) - at(k, -1, l, 1) + at(k, -1, l, -1)) /
                        (4.0 * hk * g.spacing(l));
        for (int t = 0; t < m; ++t) H[t](k, l) = H[t](l, k) = dkl(t);
      }
    }
    return H;
  }

  const int nt = g.spec().counts[1];
  const auto [i, j] = g.polar_index(node);
  if (g.is_disk() && i == 0) {
    if (nt < 5) throw InvalidArgument("hessian_at: disk centre needs at least 5 angular nodes");
    const double r = g.radius(g.polar_node(1, 0));
    Row mean = Row::Zero(m), mc = Row::Zero(m), ms = Row::Zero(m);
    for (int k = 0; k < nt; ++k) {
      const std::size_t q = g.polar_node(1, k);
      const Row d = val(field, q) - u0;
      mean += d;
      mc += std::cos(2.0 * g.angle(q)) * d;
      ms += std::sin(2.0 * g.angle(q)) * d;
    }
    mean /= nt;
    mc /= nt;
    ms /= nt;
    for (int t = 0; t < m; ++t) {
      const double lap = 4.0 * mean(t) / (r * r);
      const double diff = 8.0 * mc(t) / (r * r);
      H[t](0, 0) = 0.5 * (lap + diff);
      H[t](1, 1) = 0.5 * (lap - diff);
      H[t](0, 1) = H[t](1, 0) = 4.0 * ms(t) / (r * r);
    }
    return H;
  }
  const double dr = g.radial_step(), dt = g.angular_step();
  auto at = [&](int oi, int oj) { return val(field, g.polar_node(i + oi, j + oj)); };
  // The disk's first ring reaches the centre node for its inward neighbour.
  auto at_r = [&](int oi, int oj) {
    if (g.is_disk() && i + oi == 0) return val(field, 0);
    return at(oi, oj);
  };
  const Row ur = (at_r(1, 0) - at_r(-1, 0)) / (2.0 * dr);
  const double sdt = std::sin(dt), cdt = 2.0 * (1.0 - std::cos(dt));
  const Row ut = (at(0, 1) - at(0, -1)) / (2.0 * sdt);
  const Row urr = (at_r(1, 0) - 2.0 * u0 + at_r(-1, 0)) / (dr * dr);
  const Row utt = (at(0, 1) - 2.0 * u0 + at(0, -1)) / cdt;
  Row urt;
  if (g.is_disk() && i == 1) {
    // Inner neighbours collapse to the centre; use a one-sided radial stencil.
    const Row ut_out = (at(1, 1) - at(1, -1)) / (2.0 * sdt);
    const Row ut_out2 = (at(2, 1) - at(2, -1)) / (2.0 * sdt);
    urt = (-3.0 * ut + 4.0 * ut_out - ut_out2) / (2.0 * dr);
  } else {
    urt = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * dr * sdt);
  }
  const double r = g.radius(node), th = g.angle(node);
  const double c = std::cos(th), s = std::sin(th);
  for (int t = 0; t < m; ++t) {
    H[t](0, 0) = c * c * urr(t) + s * s / r * ur(t) + s * s / (r * r) * utt(t) -
                 2.0 * s * c / r * urt(t) + 2.0 * s * c / (r * r) * ut(t);
    H[t](1, 1) = s * s * urr(t) + c * c / r * ur(t) + c * c / (r * r) * utt(t) +
                 2.0 * s * c / r * urt(t) - 2.0 * s * c / (r * r) * ut(t);
    H[t](0, 1) = H[t](1, 0) = s * c * urr(t) - s * c / r * ur(t) - s * c / (r * r) * utt(t) +
                              (c * c - s * s) / r * urt(t) - (c * c - s * s) / (r * r) * ut(t);
  }
  return H;
}

GradientMatrix element_gradient(const GraphField& field, std::size_t element) {
  const auto& g = *field.grid;
  const auto G = g.grad_op(element);
  const int* nodes = g.element_nodes(element);
  GradientMatrix J = GradientMatrix::Zero(g.dim(), field.components());
  for (int q = 0; q < g.element_size(); ++q)
    J += G.col(q) * field.values.row(nodes[q]);
  return J;
}

namespace {

// Weak-form contributions -w G^T (C J) scattered to nodes (N x m).
Eigen::MatrixXd weak_divergence(const GraphField& field, const CoefficientFn& coeff) {
  const auto& g = *field.grid;
  const std::size_t ne = g.element_count();
  const int sz = g.element_size();
  const int m = field.components();
  std::vector<Eigen::MatrixXd> local(ne);
  std::vector<double> margin(ne);
  parallel_for(ne, [&](std::size_t e) {
    const GradientMatrix J = element_gradient(field, e);
    margin[e] = spacelike_margin(J);
    if (margin[e] <= 0.0) return;
    const Eigen::MatrixXd F = coeff(J) * J;
    local[e] = -g.element_weight(e) * (g.grad_op(e).transpose() * F);
  });
  const auto worst = std::min_element(margin.begin(), margin.end());
  if (worst != margin.end() && *worst <= 0.0) {
    const auto e = static_cast<std::size_t>(worst - margin.begin());
    throw PreconditionViolation("field is not spacelike (margin " + std::to_string(*worst) + ")",
                                static_cast<std::size_t>(g.element_nodes(e)[0]));
  }
  Eigen::MatrixXd weak = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.node_count()), m);
  for (std::size_t e = 0; e < ne; ++e) {
    const int* nodes = g.element_nodes(e);
    for (int q = 0; q < sz; ++q) weak.row(nodes[q]) += local[e].row(q);
  }
  return weak;
}

}  // namespace

Eigen::MatrixXd face_flux_divergence(const GraphField& field, const CoefficientFn& coeff) {
  const auto& g = *field.grid;
  Eigen::MatrixXd div = weak_divergence(field, coeff);
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    if (g.is_boundary(p))
      div.row(static_cast<Eigen::Index>(p)).setZero();
    else
      div.row(static_cast<Eigen::Index>(p)) /= g.dual_volume(p);
  }
  return div;
}

Eigen::VectorXd net_boundary_flux(const GraphField& field, const CoefficientFn& coeff) {
  const auto& g = *field.grid;
  const Eigen::MatrixXd weak = weak_divergence(field, coeff);
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(field.components());
  for (std::size_t p : g.boundary_nodes()) flux -= weak.row(static_cast<Eigen::Index>(p)).transpose();
  return flux;
}

void write_field_csv(std::ostream& os, const GraphField& field) {
  const auto& g = *field.grid;
  const bool polar = g.kind() == GridKind::polar_annulus;
  for (int k = 0; k < g.dim(); ++k) os << (k ? "," : "") << 'x' << k + 1;
  for (int t = 0; t < field.components(); ++t) os << ",u" << t + 1;
  if (polar) os << ",r,theta";
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    for (int k = 0; k < g.dim(); ++k) os << (k ? "," : "") << g.coord(p, k);
    for (int t = 0; t < field.components(); ++t)
      os << ',' << field.values(static_cast<Eigen::Index>(p), t);
    if (polar) os << ',' << g.radius(p) << ',' << g.angle(p);
    os << '\n';
  }
}

GraphField read_field_csv(std::istream& is, GridPtr grid, int m) {
  const auto& g = *grid;
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("field csv: missing header");
  const int expected = g.dim() + m + (g.kind() == GridKind::polar_annulus ? 2 : 0);
  const auto header_cols = std::count(line.begin(), line.end(), ',') + 1;
  if (header_cols != expected) throw InvalidArgument("field csv: unexpected column count");
  GraphField f(grid, m);
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    if (!std::getline(is, line)) throw InvalidArgument("field csv: too few rows");
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != expected) throw InvalidArgument("field csv: ragged row");
    for (int k = 0; k < g.dim(); ++k) {
      const double x = g.coord(p, k);
      if (std::abs(row[k] - x) > 1e-12 * std::max(1.0, std::abs(x)))
        throw InvalidArgument("field csv: coordinates do not match grid at row " +
                              std::to_string(p));
    }
    for (int t = 0; t < m; ++t) f.values(static_cast<Eigen::Index>(p), t) = row[g.dim() + t];
  }
  return f;
}

}  // namespace maxgraph
