#include "maxgraph/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "maxgraph/errors.hpp"

namespace maxgraph {

Signature::Signature(int n_, int m_) : n(n_), m(m_) {
  if (n < 1 || m < 1) throw InvalidArgument("signature requires n >= 1 and m >= 1");
}

double lorentz_inner(const SpacetimeVector& v, const SpacetimeVector& w) {
  if (v.x.size() != w.x.size() || v.y.size() != w.y.size())
    throw InvalidArgument("lorentz_inner: signature mismatch");
  return v.x.dot(w.x) - v.y.dot(w.y);
}

CausalClass causal_class(const SpacetimeVector& v) {
  const double q = v.x.squaredNorm() - v.y.squaredNorm();
  const double scale = v.x.squaredNorm() + v.y.squaredNorm();
  if (std::abs(q) <= 1e-14 * scale) return CausalClass::null;
  return q > 0.0 ? CausalClass::spacelike : CausalClass::timelike;
}

namespace {

Eigen::VectorXd eig2(double a, double b, double d) {
  // [[a, b], [b, d]]
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  Eigen::VectorXd ev(2);
  ev << mean - rad, mean + rad;
  return ev;
}

Eigen::VectorXd eig3(const Eigen::MatrixXd& S) {
  // Trigonometric solution of the characteristic cubic on the shifted,
  // scaled matrix B = (S - q I) / p.
  const double p1 = S(0, 1) * S(0, 1) + S(0, 2) * S(0, 2) + S(1, 2) * S(1, 2);
  Eigen::VectorXd ev(3);
  if (p1 == 0.0) {
    ev << S(0, 0), S(1, 1), S(2, 2);
    std::sort(ev.data(), ev.data() + 3);
    return ev;
  }
  const double q = S.trace() / 3.0;
  const double p2 = (S(0, 0) - q) * (S(0, 0) - q) + (S(1, 1) - q) * (S(1, 1) - q) +
                    (S(2, 2) - q) * (S(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Eigen::Matrix3d B = (S - q * Eigen::Matrix3d::Identity()) / p;
  const double r = std::clamp(B.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  ev << lo, 3.0 * q - hi - lo, hi;
  std::sort(ev.data(), ev.data() + 3);
  return ev;
}

}  // namespace

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& S) {
  const auto k = S.rows();
  if (k == 1) return Eigen::VectorXd::Constant(1, S(0, 0));
  if (k == 2) return eig2(S(0, 0), 0.5 * (S(0, 1) + S(1, 0)), S(1, 1));
  if (k == 3) return eig3(0.5 * (S + S.transpose()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

MetricTensor induced_metric(const GradientMatrix& J) {
  const auto n = J.rows();
  MetricTensor mt;
  mt.g = Eigen::MatrixXd::Identity(n, n) - J * J.transpose();
  mt.g = (0.5 * (mt.g + mt.g.transpose())).eval();
  mt.min_eig = symmetric_eigenvalues(mt.g)(0);
  if (mt.min_eig > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(mt.g);
    mt.g_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    const auto& L = llt.matrixL();
    double det = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) det *= L(i, i) * L(i, i);
    mt.det_g = det;
  }
  return mt;
}

double spacelike_margin(const GradientMatrix& J) {
  if (J.size() == 0) return 1.0;
  // The nonzero spectra of J J^T and J^T J coincide; use the smaller one.
  const Eigen::MatrixXd S = J.rows() <= J.cols() ? Eigen::MatrixXd(J * J.transpose())
                                                  : Eigen::MatrixXd(J.transpose() * J);
  const Eigen::VectorXd ev = symmetric_eigenvalues(S);
  return 1.0 - ev(ev.size() - 1);
}

}  // namespace maxgraph
