#include <doctest.h>

#include "helpers.hpp"
#include "maxgraph/boundary.hpp"
#include "maxgraph/errors.hpp"

using namespace maxgraph;

namespace {

VectorFn scalar(std::function<double(const Eigen::VectorXd&)> f) {
  return [f](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, f(x)); };
}

}  // namespace

TEST_CASE("acausality_margin examples") {
  const GridPtr g = testing::unit_box(9);
  CHECK(acausality_margin(BoundaryData::from_function(*g, 2, constant_preset(Eigen::Vector2d(3.0, -1.0))), *g) == 1.0);
  CHECK(acausality_margin(BoundaryData::from_function(*g, 1, scalar([](auto& x) { return 0.5 * x(0); })), *g) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(acausality_margin(BoundaryData::from_function(*g, 1, scalar([](auto& x) { return x(0); })), *g)) <= 1e-14);
}

TEST_CASE("acausality_margin matches a direct pair scan") {
  const GridPtr g = testing::annulus(1.0, 2.0, 5, 12);
  const BoundaryData d = BoundaryData::from_function(*g, 1, catenoid_trace_preset(1.0));
  double worst = 0.0;
  for (std::size_t a : g->boundary_nodes())
    for (std::size_t b : g->boundary_nodes())
      if (a != b)
        worst = std::max(worst, std::abs(std::asinh(g->coord(a).norm()) - std::asinh(g->coord(b).norm())) /
                                    (g->coord(a) - g->coord(b)).norm());
  CHECK(acausality_margin(d, *g) == doctest::Approx(1.0 - worst).epsilon(1e-13));
}

TEST_CASE("acausality_margin invariances and scaling") {
  const GridPtr g = testing::unit_box(9);
  const Eigen::Vector2d amp(0.3, 0.24), freq(2.0, 2.5), phase(0.3, 1.1);
  const VectorFn phi = sinusoidal_preset(2, amp, freq, phase);
  const BoundaryData d = BoundaryData::from_function(*g, 2, phi);
  const double mu0 = acausality_margin(d, *g);
  CHECK(mu0 > 0.3);
  CHECK(mu0 < 0.5);

  std::mt19937_64 rng(2);
  const Eigen::MatrixXd R = testing::random_orthogonal(2, rng);
  const BoundaryData moved = BoundaryData::from_function(*g, 2, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return R * phi(x) + Eigen::Vector2d(5.0, -2.0);
  });
  CHECK(acausality_margin(moved, *g) == doctest::Approx(mu0).epsilon(1e-12));

  for (double t : {0.0, 0.25, 0.5, 0.9, 1.0})
    CHECK(acausality_margin(d.scaled(t), *g) >= 1.0 - t * (1.0 - mu0) - 1e-14);
}

TEST_CASE("scaled boundary data is an exact multiple") {
  const GridPtr g = testing::unit_box(7);
  const BoundaryData d = BoundaryData::from_function(*g, 2, sinusoidal_preset(2, Eigen::Vector2d(0.3, 0.2),
                                                                               Eigen::Vector2d(1.0, 3.0), Eigen::Vector2d(0.0, 0.5)));
  for (double t : {0.1, 0.3, 0.7}) {
    const BoundaryData s = d.scaled(t);
    for (std::size_t p : g->boundary_nodes())
      for (int c = 0; c < 2; ++c)
        CHECK(s.samples(static_cast<Eigen::Index>(p), c) == t * d.samples(static_cast<Eigen::Index>(p), c));
  }
}

TEST_CASE("kappa estimate") {
  const GridPtr g = testing::unit_box(17);
  CHECK(BoundaryData::from_function(*g, 1, scalar([](auto&) { return 0.0; })).c2_bound_kappa == 0.0);
  const double k = BoundaryData::from_function(*g, 1, scalar([](auto& x) { return std::sin(3.0 * x(0)); })).c2_bound_kappa;
  CHECK(std::isfinite(k));
  CHECK(k >= 3.0 * 0.99);  // first derivative alone reaches 3
  CHECK(k <= 9.0 * 1.05);
}

TEST_CASE("extend_to_interior reproduces constant and affine data") {
  for (const GridPtr& g : {testing::unit_box(9), testing::annulus(1.0, 2.0, 9, 24), testing::annulus(0.0, 1.0, 9, 24)}) {
    const GraphField c = extend_to_interior(BoundaryData::from_function(*g, 2, constant_preset(Eigen::Vector2d(0.25, -4.0))), g);
    for (std::size_t p = 0; p < g->node_count(); ++p) {
      CHECK(std::abs(c.values(static_cast<Eigen::Index>(p), 0) - 0.25) <= 1e-12);
      CHECK(std::abs(c.values(static_cast<Eigen::Index>(p), 1) + 4.0) <= 1e-12);
    }
    const Eigen::Matrix2d A{{0.4, -0.3}, {0.2, 0.1}};
    const VectorFn aff = affine_preset(A, Eigen::Vector2d(1.0, 2.0));
    const GraphField u = extend_to_interior(BoundaryData::from_function(*g, 2, aff), g);
    for (std::size_t p = 0; p < g->node_count(); ++p)
      CHECK(testing::sup_diff(u.values.row(static_cast<Eigen::Index>(p)).transpose(), aff(g->coord(p))) <= 1e-10);
  }
}

TEST_CASE("extend_to_interior obeys the discrete maximum principle") {
  for (const GridPtr& g : {testing::unit_box(11), testing::annulus(1.0, 2.0, 11, 32)}) {
    const BoundaryData d = BoundaryData::from_function(*g, 2, [](const Eigen::VectorXd& x) {
      return Eigen::Vector2d(x(0) * x(0), std::sin(3.0 * x(1)) * x(0));
    });
    const GraphField u = extend_to_interior(d, g);
    for (int c = 0; c < 2; ++c) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t p : g->boundary_nodes()) {
        lo = std::min(lo, d.samples(static_cast<Eigen::Index>(p), c));
        hi = std::max(hi, d.samples(static_cast<Eigen::Index>(p), c));
      }
      for (std::size_t p : g->interior_nodes()) {
        CHECK(u.values(static_cast<Eigen::Index>(p), c) >= lo - 1e-12);
        CHECK(u.values(static_cast<Eigen::Index>(p), c) <= hi + 1e-12);
      }
    }
    for (std::size_t p : g->boundary_nodes())
      CHECK(u.values.row(static_cast<Eigen::Index>(p)) == d.samples.row(static_cast<Eigen::Index>(p)));
  }
}

TEST_CASE("preset validation") {
  CHECK_THROWS_AS(catenoid_trace_preset(0.0), InvalidArgument);
  CHECK_THROWS_AS(affine_preset(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(sinusoidal_preset(2, Eigen::Vector2d(1, 1), Eigen::Vector3d(1, 1, 1), Eigen::Vector2d(0, 0)),
                  InvalidArgument);
  const VectorFn s = sinusoidal_preset(2, Eigen::Vector3d(0.1, 0.2, 0.3), Eigen::Vector3d(1, 2, 3), Eigen::Vector3d::Zero());
  const Eigen::VectorXd v = s(Eigen::Vector2d(0.5, 0.25));
  CHECK(v(0) == doctest::Approx(0.1 * std::sin(0.5)));
  CHECK(v(1) == doctest::Approx(0.2 * std::sin(0.5)));
  CHECK(v(2) == doctest::Approx(0.3 * std::sin(1.5)));
}
