#include "maxgraph/boundary.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>

#include "maxgraph/errors.hpp"
#include "maxgraph/functional.hpp"

namespace maxgraph {

BoundaryData BoundaryData::from_function(const StructuredGrid& grid, int m, VectorFn fn) {
  if (!fn) throw InvalidArgument("boundary data needs a function");
  BoundaryData d;
  d.samples = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.node_count()), m);
  for (std::size_t p : grid.boundary_nodes()) {
    const Eigen::VectorXd v = fn(grid.coord(p));
    if (v.size() != m) throw InvalidArgument("boundary function returned wrong component count");
    if (!v.allFinite()) throw InvalidArgument("boundary function returned non-finite values");
    d.samples.row(static_cast<Eigen::Index>(p)) = v.transpose();
  }
  d.analytic = std::move(fn);
  d.c2_bound_kappa = estimate_c2_bound(grid, d.samples);
  return d;
}

BoundaryData BoundaryData::scaled(double t) const {
  BoundaryData d;
  d.samples = t * samples;
  d.c2_bound_kappa = std::abs(t) * c2_bound_kappa;
  if (analytic) {
    d.analytic = [f = analytic, t](const Eigen::VectorXd& x) -> Eigen::VectorXd { return t * f(x); };
  }
  return d;
}

VectorFn constant_preset(const Eigen::VectorXd& value) {
  return [value](const Eigen::VectorXd&) { return value; };
}

VectorFn affine_preset(const Eigen::MatrixXd& A, const Eigen::VectorXd& offset) {
  if (offset.size() != A.rows()) throw InvalidArgument("affine preset: offset length must equal rows of A");
  return [A, offset](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (x.size() != A.cols()) throw InvalidArgument("affine preset: A has wrong column count");
    return A * x + offset;
  };
}

VectorFn sinusoidal_preset(int n, const Eigen::VectorXd& amplitude, const Eigen::VectorXd& frequency,
                           const Eigen::VectorXd& phase) {
  if (amplitude.size() != frequency.size() || amplitude.size() != phase.size() || n < 1)
    throw InvalidArgument("sinusoidal preset: amplitude, frequency, phase must have equal length");
  return [=](const Eigen::VectorXd& x) {
    Eigen::VectorXd v(amplitude.size());
    for (Eigen::Index t = 0; t < v.size(); ++t)
      v(t) = amplitude(t) * std::sin(frequency(t) * x(t % n) + phase(t));
    return v;
  };
}

VectorFn catenoid_trace_preset(double K) {
  if (!(K > 0.0)) throw InvalidArgument("catenoid trace: K must be positive");
  return [K](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, K * std::asinh(x.norm() / K)); };
}

double acausality_margin(const BoundaryData& data, const StructuredGrid& grid) {
  const auto& b = grid.boundary_nodes();
  if (b.size() < 2) throw InvalidArgument("acausality margin needs at least two boundary nodes");
  double worst = 0.0;
  for (std::size_t a = 0; a < b.size(); ++a) {
    const Eigen::VectorXd xa = grid.coord(b[a]);
    const Eigen::RowVectorXd pa = data.samples.row(static_cast<Eigen::Index>(b[a]));
    for (std::size_t c = a + 1; c < b.size(); ++c) {
      const double dx = (grid.coord(b[c]) - xa).norm();
      const double dphi = (data.samples.row(static_cast<Eigen::Index>(b[c])) - pa).norm();
      worst = std::max(worst, dphi / dx);
    }
  }
  return 1.0 - worst;
}

double estimate_c2_bound(const StructuredGrid& g, const Eigen::MatrixXd& samples) {
  double sup0 = 0.0, sup1 = 0.0, sup2 = 0.0;
  auto row = [&](std::size_t p) -> Eigen::RowVectorXd { return samples.row(static_cast<Eigen::Index>(p)); };
  for (std::size_t p : g.boundary_nodes()) sup0 = std::max(sup0, row(p).norm());

  if (g.kind() == GridKind::polar_annulus) {
    for (std::size_t p : g.boundary_nodes()) {
      const auto [i, j] = g.polar_index(p);
      const double ds = g.radius(p) * g.angular_step();
      const auto prev = row(g.polar_node(i, j - 1)), next = row(g.polar_node(i, j + 1));
      sup1 = std::max(sup1, ((next - prev) / (2.0 * ds)).norm());
      sup2 = std::max(sup2, ((next - 2.0 * row(p) + prev) / (ds * ds)).norm());
    }
  } else {
    // Along each face, use axes tangent to it where both neighbours are on the same face.
    const int n = g.dim();
    for (std::size_t p : g.boundary_nodes()) {
      const auto idx = g.box_index(p);
      for (int k = 0; k < n; ++k) {
        if (idx[k] == 0 || idx[k] == g.spec().counts[k] - 1) continue;
        auto nb = idx;
        nb[k] = idx[k] - 1;
        const auto prev = row(g.box_node(nb));
        nb[k] = idx[k] + 1;
        const auto next = row(g.box_node(nb));
        const double h = g.spacing(k);
        sup1 = std::max(sup1, ((next - prev) / (2.0 * h)).norm());
        sup2 = std::max(sup2, ((next - 2.0 * row(p) + prev) / (h * h)).norm());
      }
    }
  }
  return std::max({sup0, sup1, sup2});
}

void apply_boundary(GraphField& field, const BoundaryData& data) {
  for (std::size_t p : field.grid->boundary_nodes())
    field.values.row(static_cast<Eigen::Index>(p)) = data.samples.row(static_cast<Eigen::Index>(p));
}

GraphField extend_to_interior(const BoundaryData& data, GridPtr grid) {
  const auto& g = *grid;
  const int m = data.components();
  GraphField u(grid, m);
  apply_boundary(u, data);
  const auto& interior = g.interior_nodes();
  if (interior.empty()) return u;

  // Split the stiffness matrix into interior-interior and interior-boundary parts.
  const SparseMatrix K = stiffness_matrix(g);
  const auto ni = static_cast<Eigen::Index>(interior.size());
  std::vector<Eigen::Triplet<double>> kii;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ni, m);
  for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const long r = g.interior_index(static_cast<std::size_t>(it.row()));
      if (r < 0) continue;
      const long c = g.interior_index(static_cast<std::size_t>(it.col()));
      if (c >= 0)
        kii.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
      else
        rhs.row(r) -= it.value() * data.samples.row(it.col());
    }
  }
  SparseMatrix Kii(ni, ni);
  Kii.setFromTriplets(kii.begin(), kii.end());
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * ni));
  cg.compute(Kii);
  for (int t = 0; t < m; ++t) {
    const Eigen::VectorXd b = rhs.col(t);
    if (b.norm() == 0.0) continue;
    const Eigen::VectorXd x = cg.solve(b);
    const double res = (Kii * x - b).norm() / b.norm();
    if (cg.info() != Eigen::Success && res > 1e-10)
      throw InternalError("harmonic extension: linear solve failed, relative residual " +
                          std::to_string(res));
    for (Eigen::Index k = 0; k < ni; ++k) u.values(static_cast<Eigen::Index>(interior[k]), t) = x(k);
  }
  return u;
}

}  // namespace maxgraph
