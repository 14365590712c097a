#include "maxgraph/barrier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "maxgraph/errors.hpp"
#include "maxgraph/functional.hpp"

namespace maxgraph {

namespace {

constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
std::pair<double, double> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = kronrod_weights[7] * fc;
  double gs = gauss_weights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double s = f(c - h * kronrod_nodes[i]) + f(c + h * kronrod_nodes[i]);
    k += kronrod_weights[i] * s;
    if (i % 2 == 1) gs += gauss_weights[i / 2] * s;
  }
  return {k * h, std::abs((k - gs) * h)};
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  struct Piece {
    double a, b, value, err;
  };
  std::vector<Piece> todo;
  auto [v, e] = gk15(f, a, b);
  todo.push_back({a, b, v, e});
  double total = 0.0;
  const double len = b - a;
  while (!todo.empty()) {
    const Piece p = todo.back();
    todo.pop_back();
    const double local_tol = tol * (p.b - p.a) / len;
    if (p.err <= local_tol || (p.b - p.a) < 1e-12 * len) {
      total += p.value;
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    auto [lv, le] = gk15(f, p.a, mid);
    auto [rv, re] = gk15(f, mid, p.b);
    todo.push_back({p.a, mid, lv, le});
    todo.push_back({mid, p.b, rv, re});
  }
  return total;
}

// K + Lambda r^n / n and r^{n-1}: f' = N / sqrt(P^2 + N^2).
struct ProfileTerms {
  double N, P;
};

ProfileTerms terms(const BarrierParams& p, double r) {
  const int n = p.n();
  return {p.K + p.Lambda * std::pow(r, n) / n, std::pow(r, n - 1)};
}

// f' together with s = sqrt(1 - f'^2) = P / D, which stays accurate where f' is
// close to 1.
struct Slopes {
  double fp, s;
};

Slopes slopes(const BarrierParams& p, double r) {
  const auto [N, P] = terms(p, r);
  const double D = std::hypot(P, N);
  return {N / D, P / D};
}

void check_radius(const BarrierParams& p, double r, bool allow_zero) {
  const bool low_ok = allow_zero ? r >= 0.0 : r > 0.0;
  if (!low_ok || !(r < p.r_max()))
    throw InvalidArgument("barrier radius " + std::to_string(r) + " outside admissible range (0, " +
                          std::to_string(p.r_max()) + ")");
}

Eigen::VectorXd unit(int size, int k) { return Eigen::VectorXd::Unit(size, k); }

}  // namespace

BarrierParams BarrierParams::make(int n, int m, double K, double Lambda) {
  BarrierParams p;
  p.K = K;
  p.Lambda = Lambda;
  p.xi = Eigen::VectorXd::Zero(n);
  p.eta = Eigen::VectorXd::Zero(m);
  p.validate();
  return p;
}

double BarrierParams::r_max() const {
  if (Lambda == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(n() * K / std::abs(Lambda), 1.0 / n());
}

void BarrierParams::validate() const {
  if (!(K > 0.0) || !std::isfinite(K)) throw InvalidArgument("barrier: K must be positive");
  if (!(Lambda <= 0.0)) throw InvalidArgument("barrier: Lambda must be <= 0");
  if (xi.size() < 1 || eta.size() < 1) throw InvalidArgument("barrier: empty apex");
}

double f_eval(const BarrierParams& p, double r) {
  check_radius(p, r, true);
  const int n = p.n();
  auto integrand = [&](double t) {
    const double N = p.K + p.Lambda * std::pow(t, n) / n;
    const double P = std::pow(t, n - 1);
    return N / std::sqrt(P * P + N * N);
  };
  return integrate(integrand, 0.0, r, 1e-12);
}

double f_prime(const BarrierParams& p, double r) {
  check_radius(p, r, false);
  return slopes(p, r).fp;
}

double f_second(const BarrierParams& p, double r) {
  check_radius(p, r, false);
  const int n = p.n();
  const auto [N, P] = terms(p, r);
  const double D2 = P * P + N * N;
  const double dN = p.Lambda * std::pow(r, n - 1);
  // d/dr (P^2) / 2 = (n-1) r^{2n-3}
  const double dP2half = n == 1 ? 0.0 : (n - 1) * std::pow(r, 2 * n - 3);
  return (dN * P * P - N * dP2half) / (D2 * std::sqrt(D2));
}

ShapeSpectrum shape_spectrum(const BarrierParams& p, double r) {
  const double f = f_eval(p, r);
  const auto [fp, s] = slopes(p, r);
  const double fpp = f_second(p, r);
  return {-fp / (r * s), 1.0 / (f * s), -fpp / (s * s * s)};
}

double profile_ode_residual(const BarrierParams& p, double r) {
  const auto [fp, s] = slopes(p, r);
  const double fpp = f_second(p, r);
  return (p.n() - 1) * fp / (r * s) + fpp / (s * s * s) - p.Lambda;
}

BarrierPoint BarrierPoint::canonical(const BarrierParams& p, double r) {
  return {r, unit(p.n(), 0), unit(p.m(), 0)};
}

SpacetimeVector barrier_normal(const BarrierParams& p, const BarrierPoint& at) {
  check_radius(p, at.r, false);
  const auto [fp, s] = slopes(p, at.r);
  return {fp * at.a / s, at.b / s};
}

namespace {

// Completes unit vector v to an orthonormal basis; returns the complement.
std::vector<Eigen::VectorXd> complement(const Eigen::VectorXd& v) {
  const auto k = v.size();
  Eigen::MatrixXd M(k, k);
  M.col(0) = v;
  for (Eigen::Index i = 1; i < k; ++i) M.col(i) = Eigen::VectorXd::Unit(k, i);
  // Pick the coordinate axis most aligned with v as the one to drop.
  Eigen::Index drop = 0;
  v.cwiseAbs().maxCoeff(&drop);
  int col = 1;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i == drop) continue;
    M.col(col++) = Eigen::VectorXd::Unit(k, i);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Q = qr.householderQ();
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 1; i < k; ++i) out.push_back(Q.col(i));
  return out;
}

}  // namespace

TangentFrame tangent_frame(const BarrierParams& p, const BarrierPoint& at) {
  const int n = p.n(), m = p.m();
  check_radius(p, at.r, false);
  const auto [fp, s] = slopes(p, at.r);
  TangentFrame tf;
  for (const auto& v : complement(at.a)) tf.slice.push_back({v, Eigen::VectorXd::Zero(m)});
  tf.slice.push_back({at.a / s, fp * at.b / s});
  for (const auto& v : complement(at.b)) tf.temporal.push_back({Eigen::VectorXd::Zero(n), v});
  return tf;
}

double mean_curvature_over_plane(const BarrierParams& p, const BarrierPoint& at,
                                 const std::vector<SpacetimeVector>& basis) {
  const int n = p.n(), m = p.m();
  if (static_cast<int>(basis.size()) != n)
    throw InvalidArgument("mean_curvature_over_plane: basis must have n vectors");
  const SpacetimeVector nrm = barrier_normal(p, at);
  const double nrm_size = std::sqrt(nrm.x.squaredNorm() + nrm.y.squaredNorm());
  for (const auto& v : basis) {
    if (v.x.size() != n || v.y.size() != m) throw InvalidArgument("mean_curvature_over_plane: signature mismatch");
    const double scale = std::sqrt(v.x.squaredNorm() + v.y.squaredNorm()) * nrm_size;
    if (std::abs(lorentz_inner(v, nrm)) > 1e-10 * std::max(scale, 1e-300))
      throw InvalidArgument("mean_curvature_over_plane: basis vector not tangent to the barrier");
  }
  // Coordinates in the frame of the tangent space: X holds the spatial-sphere
  // and profile components (n x n), Z the temporal-sphere components.
  const auto [fp, s] = slopes(p, at.r);
  const std::vector<Eigen::VectorXd> ca = complement(at.a), cb = complement(at.b);
  Eigen::MatrixXd X(n, n), Z(m - 1, n);
  double scale = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto& v = basis[j];
    for (int i = 0; i < n - 1; ++i) X(i, j) = ca[i].dot(v.x);
    X(n - 1, j) = s * v.x.dot(at.a);
    for (int i = 0; i < m - 1; ++i) Z(i, j) = cb[i].dot(v.y);
    scale = std::max(scale, X.col(j).squaredNorm());
  }
  const Eigen::MatrixXd G = X.transpose() * X - Z.transpose() * Z;
  if (!(symmetric_eigenvalues(0.5 * (G + G.transpose()))(0) > 1e-14 * scale))
    throw InvalidArgument("mean_curvature_over_plane: basis is not spacelike");
  // Pi is the graph of the tilt Y = Z X^{-1} over the slice, and
  //   H = tr D + tr((I - Y^T Y)^{-1} Y^T Y (D + c2 I)),
  // with D = diag(c1, ..., c1, c3) the slice part of the second fundamental form.
  const ShapeSpectrum sp = shape_spectrum(p, at.r);
  const double f = f_eval(p, at.r);
  Eigen::VectorXd shifted(n);
  shifted.setConstant((at.r - f * fp) / (at.r * f * s));  // c1 + c2 without cancellation
  shifted(n - 1) = sp.c3 + sp.c2;
  double H = (n - 1) * sp.c1 + sp.c3;
  if (m > 1) {
    const Eigen::MatrixXd Y = X.transpose().partialPivLu().solve(Z.transpose()).transpose();
    const Eigen::MatrixXd YtY = Y.transpose() * Y;
    const Eigen::MatrixXd MY = (Eigen::MatrixXd::Identity(n, n) - YtY).partialPivLu().solve(YtY);
    H += (MY * shifted.asDiagonal()).trace();
  }
  return H;
}

double mean_curvature_over_plane(const BarrierParams& p, double r,
                                 const std::vector<SpacetimeVector>& basis) {
  return mean_curvature_over_plane(p, BarrierPoint::canonical(p, r), basis);
}

std::vector<SpacetimeVector> random_spacelike_plane(const BarrierParams& p, const BarrierPoint& at,
                                                    std::mt19937_64& rng) {
  const int n = p.n();
  const TangentFrame tf = tangent_frame(p, at);
  const auto k = static_cast<Eigen::Index>(tf.temporal.size());
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<SpacetimeVector> tilted = tf.slice;
  if (k > 0) {
    Eigen::MatrixXd C(n, k);
    for (Eigen::Index i = 0; i < C.size(); ++i) C.data()[i] = gauss(rng);
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(C).singularValues()(0);
    // Bias towards both the tight neighbourhood of the slice and near-null tilts.
    const double u = unif(rng);
    const double target = 0.999 * (u < 0.5 ? u * u : u);
    if (smax > 0.0) C *= target / smax;
    for (int i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < k; ++j) {
        tilted[i].x += C(i, j) * tf.temporal[j].x;
        tilted[i].y += C(i, j) * tf.temporal[j].y;
      }
  }
  Eigen::MatrixXd mix(n, n);
  for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = gauss(rng);
  mix += 2.0 * Eigen::MatrixXd::Identity(n, n);
  if (std::abs(mix.determinant()) < 1e-3) mix = Eigen::MatrixXd::Identity(n, n);
  std::vector<SpacetimeVector> basis(n, {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(p.m())});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      basis[i].x += mix(i, j) * tilted[j].x;
      basis[i].y += mix(i, j) * tilted[j].y;
    }
  return basis;
}

bool contains(const BarrierParams& p, const SpacetimeVector& q) {
  if (q.x.size() != p.n() || q.y.size() != p.m()) throw InvalidArgument("contains: signature mismatch");
  const double r = (q.x - p.xi).norm();
  if (!(r < p.r_max())) throw InvalidArgument("contains: point outside the admissible radius");
  const double w = (q.y - p.eta).norm();
  return w <= f_eval(p, r) + 1e-12;
}

ComparisonReport comparison_check(const GraphField& u, const BarrierParams& p) {
  const auto& g = *u.grid;
  if (g.dim() != p.n() || u.components() != p.m()) throw InvalidArgument("comparison_check: signature mismatch");
  const double rmax = p.r_max();
  for (std::size_t q = 0; q < g.node_count(); ++q) {
    if (!((g.coord(q) - p.xi).norm() < rmax))
      throw InvalidArgument("comparison_check: node " + std::to_string(q) +
                            " lies outside the barrier's admissible radius");
  }
  require_spacelike(u);
  ComparisonReport rep;
  for (std::size_t q = 0; q < g.node_count(); ++q) {
    const double r = (g.coord(q) - p.xi).norm();
    const double w = (u.values.row(static_cast<Eigen::Index>(q)).transpose() - p.eta).norm();
    const double excess = w - f_eval(p, r);
    const bool inside = excess <= 1e-12;
    if (g.is_boundary(q)) {
      rep.boundary_contained = rep.boundary_contained && inside;
      rep.worst_boundary_violation = std::max(rep.worst_boundary_violation, excess);
    } else {
      rep.interior_contained = rep.interior_contained && inside;
      rep.worst_interior_violation = std::max(rep.worst_interior_violation, excess);
      if (!inside) ++rep.interior_violations;
    }
  }
  rep.worst_boundary_violation = std::max(0.0, rep.worst_boundary_violation);
  rep.worst_interior_violation = std::max(0.0, rep.worst_interior_violation);
  rep.worst_violation = std::max(rep.worst_boundary_violation, rep.worst_interior_violation);
  return rep;
}

Eigen::VectorXd inward_normal(const StructuredGrid& g, std::size_t node) {
  if (!g.is_boundary(node)) throw InvalidArgument("inward_normal: not a boundary node");
  if (g.kind() == GridKind::polar_annulus) {
    const Eigen::VectorXd radial = g.coord(node) / g.radius(node);
    return g.polar_index(node).first == 0 ? radial : Eigen::VectorXd(-radial);
  }
  const auto idx = g.box_index(node);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(g.dim());
  int faces = 0;
  for (int k = 0; k < g.dim(); ++k) {
    if (idx[k] == 0) {
      nu(k) = 1.0;
      ++faces;
    } else if (idx[k] == g.spec().counts[k] - 1) {
      nu(k) = -1.0;
      ++faces;
    }
  }
  if (faces != 1) throw InvalidArgument("inward_normal: undefined at box edges and corners");
  return nu;
}

namespace {

// Symmetric boundary samples around x0 along one tangent direction.
struct TangentProbe {
  Eigen::VectorXd x_minus, x_plus;
  Eigen::VectorXd phi_minus, phi_plus;
  double half_width = 0.0;
};

TangentProbe probe_tangent(const StructuredGrid& g, std::size_t node, const Eigen::VectorXd& t,
                           const BoundaryData& data) {
  TangentProbe pr;
  if (data.analytic) {
    // Walk along the exact boundary curve, parametrized by arc length.
    const double s = 1e-6;
    auto curve = [&](double arc) -> Eigen::VectorXd {
      if (g.kind() == GridKind::cartesian_box) return g.coord(node) + arc * t;
      const double R = g.radius(node);
      const double th = g.angle(node) + arc / R;
      Eigen::VectorXd x(2);
      x << R * std::cos(th), R * std::sin(th);
      return x;
    };
    pr.x_minus = curve(-s);
    pr.x_plus = curve(s);
    pr.phi_minus = data.analytic(pr.x_minus);
    pr.phi_plus = data.analytic(pr.x_plus);
    pr.half_width = s;
    return pr;
  }
  std::size_t plus = 0, minus = 0;
  if (g.kind() == GridKind::polar_annulus) {
    const auto [i, j] = g.polar_index(node);
    plus = g.polar_node(i, j + 1);
    minus = g.polar_node(i, j - 1);
    pr.half_width = g.radius(node) * g.angular_step();
  } else {
    Eigen::Index ax = 0;
    t.cwiseAbs().maxCoeff(&ax);
    auto idx = g.box_index(node);
    idx[ax] += 1;
    plus = g.box_node(idx);
    idx[ax] -= 2;
    minus = g.box_node(idx);
    pr.half_width = g.spacing(static_cast<int>(ax));
  }
  pr.x_minus = g.coord(minus);
  pr.x_plus = g.coord(plus);
  pr.phi_minus = data.samples.row(static_cast<Eigen::Index>(minus)).transpose();
  pr.phi_plus = data.samples.row(static_cast<Eigen::Index>(plus)).transpose();
  return pr;
}

}  // namespace

BarrierFit fit_boundary_barrier(const StructuredGrid& g, std::size_t node, const Eigen::VectorXd& theta,
                                double eps, double Lambda, const BoundaryData& data) {
  const int n = g.dim();
  const int m = data.components();
  if (theta.size() != m || std::abs(theta.norm() - 1.0) > 1e-12)
    throw InvalidArgument("fit_boundary_barrier: theta must be a unit vector in R^m");
  if (!(eps > 0.0)) throw InvalidArgument("fit_boundary_barrier: eps must be positive");
  if (!(Lambda < 0.0)) throw InvalidArgument("fit_boundary_barrier: Lambda must be negative");
  const double mu0 = acausality_margin(data, g);
  if (!(mu0 > 0.0)) throw AcausalityViolation(mu0);
  const Eigen::VectorXd nu = inward_normal(g, node);

  std::vector<Eigen::VectorXd> tangents;
  if (g.kind() == GridKind::polar_annulus) {
    Eigen::VectorXd t(2);
    t << -std::sin(g.angle(node)), std::cos(g.angle(node));
    tangents.push_back(t);
  } else {
    for (int k = 0; k < n; ++k)
      if (nu(k) == 0.0) tangents.push_back(Eigen::VectorXd::Unit(n, k));
  }
  std::vector<TangentProbe> probes;
  for (const auto& t : tangents) probes.push_back(probe_tangent(g, node, t, data));

  // D'phi . theta as a vector in the tangent space.
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < probes.size(); ++k)
    grad += ((probes[k].phi_plus - probes[k].phi_minus).dot(theta) / (2.0 * probes[k].half_width)) *
            tangents[k];

  BarrierFit fit;
  fit.a = grad.norm();
  const Eigen::VectorXd e1 = fit.a > 0.0 ? Eigen::VectorXd(grad / fit.a) : tangents.front();

  BarrierParams& p = fit.params;
  p.K = 1.0 / eps;
  p.Lambda = Lambda;
  p.xi = Eigen::VectorXd::Zero(n);
  p.eta = Eigen::VectorXd::Zero(m);
  if (!(eps < p.r_max())) throw InfeasibleFit("fit_boundary_barrier: eps exceeds the admissible radius");
  const double slope = f_prime(p, eps);
  // slope * b / sqrt(1 + b^2) = a
  const double s = fit.a / slope;
  if (!(s < 1.0))
    throw InfeasibleFit("fit_boundary_barrier: tangential slope " + std::to_string(fit.a) +
                        " is not below f'(eps) = " + std::to_string(slope) + "; use a smaller eps");
  fit.b = s / std::sqrt(1.0 - s * s);

  const Eigen::VectorXd x0 = g.coord(node);
  const Eigen::VectorXd phi0 = data.samples.row(static_cast<Eigen::Index>(node)).transpose();
  p.xi = x0 - eps * (fit.b * e1 + nu) / std::sqrt(1.0 + fit.b * fit.b);
  p.eta = phi0 - f_eval(p, eps) * theta;

  // First-order tangency of w^2 and f^2 along the boundary.
  double res2 = 0.0;
  for (const auto& pr : probes) {
    auto w2 = [&](const Eigen::VectorXd& phi) { return (phi - p.eta).squaredNorm(); };
    auto f2 = [&](const Eigen::VectorXd& x) {
      const double f = f_eval(p, (x - p.xi).norm());
      return f * f;
    };
    const double dw = (w2(pr.phi_plus) - w2(pr.phi_minus)) / (2.0 * pr.half_width);
    const double df = (f2(pr.x_plus) - f2(pr.x_minus)) / (2.0 * pr.half_width);
    res2 += (dw - df) * (dw - df);
  }
  fit.tangency_residual = std::sqrt(res2);
  return fit;
}

std::vector<BarrierRow> tabulate_barrier(const BarrierParams& p, int samples, double r_cap) {
  p.validate();
  if (samples < 2) throw InvalidArgument("tabulate_barrier: need at least 2 samples");
  if (!(r_cap > 0.0)) throw InvalidArgument("tabulate_barrier: r cap must be positive");
  const double r_end = std::min(r_cap, p.r_max() * (1.0 - 1e-9));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<BarrierRow> rows;
  rows.push_back({0.0, 0.0, p.n() == 1 ? f_prime(p, 1e-300) : 1.0, nan, nan, nan});
  for (int i = 1; i < samples; ++i) {
    const double r = r_end * i / (samples - 1);
    const ShapeSpectrum sp = shape_spectrum(p, r);
    rows.push_back({r, f_eval(p, r), f_prime(p, r), sp.c1, sp.c2, sp.c3});
  }
  return rows;
}

}  // namespace maxgraph
