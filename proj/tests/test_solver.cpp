#include <doctest.h>

#include "helpers.hpp"
#include "maxgraph/errors.hpp"
#include "maxgraph/functional.hpp"
#include "maxgraph/solver.hpp"

using namespace maxgraph;

namespace {

const Eigen::Matrix<double, 2, 2> kA{{0.42, -0.3}, {0.25, 0.36}};  // sigma_max < 1

VectorFn affine2() { return affine_preset(kA, Eigen::Vector2d(0.1, -0.2)); }

VectorFn sinusoid() {
  return sinusoidal_preset(2, Eigen::Vector2d(0.3, 0.24), Eigen::Vector2d(2.0, 2.5), Eigen::Vector2d(0.3, 1.1));
}

GraphField catenoid_field(const GridPtr& g) {
  return GraphField::from_function(g, 1, [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, std::asinh(x.norm()));
  });
}

GridPtr catenoid_grid(int nr) { return testing::annulus(1.0, 2.0, nr, 2 * (nr - 1)); }

double sup(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.newton_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.spacelike_slack_delta = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.homotopy_steps_init = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("residuals vanish on affine and constant fields") {
  for (const GridPtr& g : {testing::unit_box(9), testing::annulus(1.0, 2.0, 9, 24), testing::annulus(0.0, 1.0, 9, 24)}) {
    const GraphField a = GraphField::from_function(g, 2, affine2());
    CHECK(sup(residual_div(a)) <= 1e-12);
    CHECK(sup(residual_nondiv(a)) <= 1e-12);
    CHECK(sup(conservation_identity_residual(a)) <= 1e-12);
    const GraphField zero(g, 2);
    CHECK(sup(residual_div(zero)) == 0.0);
    CHECK(sup(residual_nondiv(zero)) == 0.0);
    CHECK(sup(conservation_identity_residual(zero)) <= 1e-13);
    const GraphField c = GraphField::from_function(g, 2, constant_preset(Eigen::Vector2d(3.0, 1.0)));
    CHECK(sup(residual_nondiv(c)) == 0.0);
  }
}

TEST_CASE("residuals reject non-spacelike fields") {
  const GridPtr g = testing::unit_box(5);
  const GraphField steep = GraphField::from_function(g, 1, [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, 1.5 * x(1));
  });
  CHECK_THROWS_AS(residual_div(steep), PreconditionViolation);
  CHECK_THROWS_AS(residual_nondiv(steep), PreconditionViolation);
  CHECK_THROWS_AS(conservation_identity_residual(steep), PreconditionViolation);
  CHECK_THROWS_AS(assemble_jacobi(steep), PreconditionViolation);
}

TEST_CASE("residual_div of the exact catenoid is second order") {
  std::vector<double> r;
  for (int nr : {17, 33, 65}) r.push_back(sup(residual_div(catenoid_field(catenoid_grid(nr)))));
  CHECK(r[0] / r[1] >= 3.6);
  CHECK(r[1] / r[2] >= 3.6);
}

TEST_CASE("discrete catenoid solutions converge at second order") {
  std::vector<double> err, nondiv, cons;
  for (int nr : {17, 33, 65}) {
    const GridPtr g = catenoid_grid(nr);
    const SolveState st = continuity_solve(BoundaryData::from_function(*g, 1, catenoid_trace_preset(1.0)), g, SolverConfig{});
    CHECK(st.residual_inf <= 1e-10);
    err.push_back(sup(st.u.values - catenoid_field(g).values));
    nondiv.push_back(sup(residual_nondiv(st.u)));
    cons.push_back(sup(conservation_identity_residual(st.u)));
  }
  for (int k = 0; k < 2; ++k) {
    CHECK(err[k] / err[k + 1] >= 3.6);
    CHECK(nondiv[k] / nondiv[k + 1] >= 3.3);
    CHECK(cons[k] / cons[k + 1] >= 3.6);
  }
}

TEST_CASE("Jacobi operator at u = 0 is the negative Laplacian per component") {
  for (const GridPtr& g : {testing::unit_box(7), testing::annulus(1.0, 2.0, 7, 16), testing::annulus(0.0, 1.0, 7, 16)}) {
    const int m = 2;
    const Eigen::MatrixXd L(assemble_jacobi(GraphField(g, m)));
    const Eigen::MatrixXd K(stiffness_matrix(*g));
    const auto& in = g->interior_nodes();
    for (std::size_t a = 0; a < in.size(); ++a)
      for (std::size_t b = 0; b < in.size(); ++b)
        for (int s = 0; s < m; ++s)
          for (int t = 0; t < m; ++t) {
            const double want = s == t ? -K(static_cast<Eigen::Index>(in[a]), static_cast<Eigen::Index>(in[b])) : 0.0;
            CHECK(std::abs(L(static_cast<Eigen::Index>(a * m + s), static_cast<Eigen::Index>(b * m + t)) - want) <= 1e-13);
          }
  }
}

TEST_CASE("Jacobi operator is symmetric and matches finite differences") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss;
  for (const GridPtr& g : {testing::unit_box(6), testing::annulus(1.0, 2.0, 6, 12), testing::annulus(0.0, 1.0, 6, 12)}) {
    const GraphField u = GraphField::from_function(g, 2, [](const Eigen::VectorXd& x) {
      return Eigen::Vector2d(0.3 * std::sin(2.0 * x(0) + x(1)), 0.25 * x(0) * x(1));
    });
    const SparseMatrix L = assemble_jacobi(u);
    const Eigen::MatrixXd dense(L);
    CHECK(sup(dense - dense.transpose()) <= 1e-13);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd w(L.rows()), v(L.rows());
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gauss(rng), v(i) = gauss(rng);
      const double a = v.dot(L * w), b = w.dot(L * v);
      CHECK(std::abs(a - b) <= 1e-11 * std::max(1.0, std::abs(a)));
    }
    const Eigen::MatrixXd fd = finite_difference_jacobi(u);
    CHECK(sup(fd - dense) <= 1e-6 * sup(dense));
    CHECK_NOTHROW(assemble_jacobi(u, JacobianMode::finite_difference_check));
  }
}

TEST_CASE("newton_solve") {
  const GridPtr g = testing::unit_box(9);
  SUBCASE("exact affine start converges immediately") {
    const BoundaryData d = BoundaryData::from_function(*g, 2, affine2());
    const NewtonResult r = newton_solve(GraphField::from_function(g, 2, affine2()), d, SolverConfig{});
    CHECK(r.iterations <= 1);
    CHECK(r.residual_inf <= 1e-12);
  }
  SUBCASE("harmonic extension of the catenoid trace") {
    const GridPtr a = catenoid_grid(17);
    const BoundaryData d = BoundaryData::from_function(*a, 1, catenoid_trace_preset(1.0));
    const NewtonResult r = newton_solve(extend_to_interior(d, a), d, SolverConfig{});
    CHECK(r.residual_inf <= 1e-10);
    CHECK(sup(r.u.values - catenoid_field(a).values) <= 5e-4);
  }
  SUBCASE("initial field must match the boundary data") {
    const BoundaryData d = BoundaryData::from_function(*g, 2, affine2());
    CHECK_THROWS_AS(newton_solve(GraphField(g, 2), d, SolverConfig{}), InvalidArgument);
  }
  SUBCASE("iteration limit") {
    const BoundaryData d = BoundaryData::from_function(*g, 2, sinusoid());
    SolverConfig c;
    c.max_newton_iters = 1;
    CHECK_THROWS_AS(newton_solve(extend_to_interior(d, g), d, c), NonConvergence);
  }
}

TEST_CASE("continuity_solve on affine data stays affine") {
  const GridPtr g = testing::unit_box(17);
  const BoundaryData d = BoundaryData::from_function(*g, 2, affine2());
  for (double t : {0.3, 0.7, 1.0}) {
    const SolveState st = continuity_solve(d.scaled(t), g, SolverConfig{});
    for (std::size_t p = 0; p < g->node_count(); ++p)
      CHECK(testing::sup_diff(st.u.values.row(static_cast<Eigen::Index>(p)).transpose(), t * affine2()(g->coord(p))) <= 1e-10);
  }
}

TEST_CASE("continuity_solve on constant data takes one homotopy step") {
  const GridPtr g = testing::unit_box(9);
  SolverConfig c;
  c.homotopy_steps_init = 1;
  int records = 0;
  const SolveState st = continuity_solve(BoundaryData::from_function(*g, 2, constant_preset(Eigen::Vector2d(0.5, -0.25))),
                                         g, c, [&](const ProgressRecord&) { ++records; });
  CHECK(records == 1);
  CHECK(st.t == 1.0);
  for (std::size_t p = 0; p < g->node_count(); ++p) {
    CHECK(std::abs(st.u.values(static_cast<Eigen::Index>(p), 0) - 0.5) <= 1e-12);
    CHECK(std::abs(st.u.values(static_cast<Eigen::Index>(p), 1) + 0.25) <= 1e-12);
  }
}

TEST_CASE("continuity_solve on sinusoidal data") {
  const GridPtr g = testing::unit_box(17);
  const BoundaryData d = BoundaryData::from_function(*g, 2, sinusoid());
  std::vector<ProgressRecord> recs;
  const SolveState st = continuity_solve(d, g, SolverConfig{}, [&](const ProgressRecord& r) { recs.push_back(r); });
  CHECK(st.t == 1.0);
  CHECK(st.residual_inf <= 1e-10);
  CHECK(st.min_margin > 0.0);
  REQUIRE(!recs.empty());
  double prev_t = 0.0;
  for (const ProgressRecord& r : recs) {
    CHECK(r.t > prev_t);
    CHECK(r.min_margin > 0.0);
    CHECK(r.residual_inf <= 1e-10);
    prev_t = r.t;
  }
  CHECK(recs.back().t == 1.0);
  CHECK(min_nodal_margin(st.u) > 0.0);  // sigma_max(Du) < 1 at every node
  for (std::size_t p : g->boundary_nodes())
    CHECK(st.u.values.row(static_cast<Eigen::Index>(p)) == d.samples.row(static_cast<Eigen::Index>(p)));
  const Eigen::MatrixXd L(assemble_jacobi(st.u));
  CHECK(sup(L - L.transpose()) <= 1e-11);
}

TEST_CASE("continuity_solve refuses causal data") {
  const GridPtr g = testing::unit_box(9);
  const BoundaryData d = BoundaryData::from_function(*g, 1, [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x(0));
  });
  CHECK_THROWS_AS(continuity_solve(d, g, SolverConfig{}), AcausalityViolation);
}

TEST_CASE("continuity_solve reports the last good t") {
  const GridPtr g = testing::unit_box(17);
  const BoundaryData d = BoundaryData::from_function(*g, 2, sinusoid());
  SolverConfig c;
  c.max_newton_iters = 2;
  c.homotopy_steps_init = 2;
  c.step_halving_limit = 1;
  try {
    continuity_solve(d, g, c);
    FAIL("expected nonconvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.last_good_t() < 1.0);
    CHECK(e.last_good_t() >= 0.0);
    REQUIRE(e.state().has_value());
    CHECK(e.state()->t == e.last_good_t());
  }
}
