// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "maxgraph/analysis.hpp"
#include "maxgraph/barrier.hpp"
#include "maxgraph/functional.hpp"
#include "maxgraph/solver.hpp"

using namespace maxgraph;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances.
constexpr double kAffineTol = 1e-10;
constexpr double kAffineSeconds = 10.0;
constexpr double kCatenoidOrder = 1.9;
constexpr double kCatenoidSeconds = 30.0;
constexpr double kUniquenessTol = 1e-8;
constexpr double kTargetMu0 = 0.4;
constexpr double kVolumeSlack = 1e-12;
constexpr double kSecondVariationRel = 1e-5;
constexpr double kPlaneTol = 1e-8;
constexpr double kSliceTol = 1e-10;
constexpr double kPlaneSeconds = 60.0;
constexpr double kEllipticityTol = 1e-8;
constexpr double kEnergyTol = 1e-8;
constexpr double kConservationOrder = 1.9;
constexpr double kRicciFloor = -1e-6;
constexpr double kQuadratureTol = 1e-10;
constexpr double kQuadratureSeconds = 1.0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Solved {
  GridPtr grid;
  BoundaryData data;
  SolveState state;
  double seconds = 0.0;
};

Solved solve(GridPtr g, const VectorFn& phi, int m) {
  Solved s;
  s.grid = std::move(g);
  const auto t0 = Clock::now();
  s.data = BoundaryData::from_function(*s.grid, m, phi);
  s.state = continuity_solve(s.data, s.grid, SolverConfig{});
  s.seconds = seconds_since(t0);
  return s;
}

GridPtr catenoid_grid(int radial) { return build_grid({GridKind::polar_annulus, {{1.0, 2.0}}, {radial, 2 * (radial - 1)}}); }

std::map<int, Solved> catenoids;
const Solved& catenoid(int radial) {
  auto it = catenoids.find(radial);
  if (it == catenoids.end()) it = catenoids.emplace(radial, solve(catenoid_grid(radial), catenoid_trace_preset(1.0), 1)).first;
  return it->second;
}

// Sinusoidal data on the unit square with mu0 close to 0.4.
const Solved& sinusoidal() {
  static const Solved s = solve(build_grid({GridKind::cartesian_box, {{0, 1}, {0, 1}}, {33, 33}}),
                                sinusoidal_preset(2, Eigen::Vector2d(0.3, 0.24), Eigen::Vector2d(2.0, 2.5), Eigen::Vector2d(0.3, 1.1)), 2);
  return s;
}

double observed_order(double coarse, double fine, double h_ratio) { return std::log(coarse / fine) / std::log(h_ratio); }

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome affine_exactness() {
  const double sigma = 0.7;
  const Eigen::Matrix2d R = Eigen::Rotation2Dd(0.4).toRotationMatrix(), S = Eigen::Rotation2Dd(-1.1).toRotationMatrix();
  const Eigen::Matrix2d A = R * Eigen::Vector2d(sigma, 0.35).asDiagonal() * S;
  const Solved s = solve(build_grid({GridKind::cartesian_box, {{0, 1}, {0, 1}}, {33, 33}}), affine_preset(A, Eigen::Vector2d::Zero()), 2);
  double err = 0.0;
  for (std::size_t p = 0; p < s.grid->node_count(); ++p)
    err = std::max(err, (s.state.u.values.row(static_cast<Eigen::Index>(p)).transpose() - A * s.grid->coord(p)).cwiseAbs().maxCoeff());
  const double smax = Eigen::JacobiSVD<Eigen::Matrix2d>(A).singularValues()(0);
  return {err <= kAffineTol && s.seconds < kAffineSeconds && std::abs(smax - sigma) < 1e-14,
          fmt("sigma_max(A)=%.3f sup|u-Ax|=%.2e (tol %.0e) time=%.2fs (limit %.0fs)", smax, err, kAffineTol, s.seconds, kAffineSeconds)};
}

Outcome catenoid_convergence() {
  const std::vector<int> res = {17, 33, 65};
  std::vector<double> err;
  bool ok = true;
  std::string d;
  for (int nr : res) {
    const Solved& s = catenoid(nr);
    double e = 0.0;
    for (std::size_t p = 0; p < s.grid->node_count(); ++p)
      e = std::max(e, std::abs(s.state.u.values(static_cast<Eigen::Index>(p), 0) - std::asinh(s.grid->radius(p))));
    err.push_back(e);
    ok = ok && s.seconds < kCatenoidSeconds;
    d += fmt("N=%d err=%.3e t=%.2fs; ", nr, e, s.seconds);
  }
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double order = observed_order(err[k], err[k + 1], 2.0);
    ok = ok && order >= kCatenoidOrder;
    d += fmt("order=%.3f ", order);
  }
  return {ok, d + fmt("(min %.1f)", kCatenoidOrder)};
}

Outcome uniqueness() {
  const Solved& s = sinusoidal();
  const double mu0 = acausality_margin(s.data, *s.grid);
  const UniquenessReport r = uniqueness_probe(s.data, s.grid, SolverConfig{});
  return {r.max_pairwise <= kUniquenessTol && std::abs(mu0 - kTargetMu0) < 0.05,
          fmt("mu0=%.4f routes=%zu max pairwise sup diff=%.2e (tol %.0e)", mu0, r.routes.size(), r.max_pairwise, kUniquenessTol)};
}

Outcome maximality() {
  const MaximalityReport r = volume_maximality_probe(sinusoidal().state.u, 100, 2024);
  return {r.evaluated == 100 && r.strict_decreases == 100 && r.violations == 0,
          fmt("evaluated=%d strict decreases=%d violations=%d (slack %.0e) max dV=%.3e", r.evaluated, r.strict_decreases,
              r.violations, kVolumeSlack, r.max_violation)};
}

Outcome second_variation_negativity() {
  const GraphField& u = sinusoidal().state.u;
  const double rayleigh = max_rayleigh_quotient(u, 100, 77);
  std::mt19937_64 rng(78);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const PerturbationField w = random_smooth_perturbation(u.grid, u.components(), rng);
    const double eps = 1e-4;
    auto vol = [&](double t) { return volume(GraphField(u.grid, Eigen::MatrixXd(u.values + t * w.w))); };
    const double fd = (vol(eps) - 2.0 * vol(0.0) + vol(-eps)) / (eps * eps);
    const double sv = second_variation(u, w);
    worst = std::max(worst, std::abs(sv - fd) / std::abs(sv));
  }
  return {rayleigh < 0.0 && worst <= kSecondVariationRel,
          fmt("max Rayleigh=%.4e over 100 probes; worst d2/dt2 mismatch=%.2e (tol %.0e)", rayleigh, worst, kSecondVariationRel)};
}

Outcome barrier_plane_bound() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3141);
  std::uniform_int_distribution<int> nd(1, 4), md(1, 3);
  std::uniform_real_distribution<double> kd(0.2, 5.0), ld(-2.0, 0.0), frac(1e-3, 1.0 - 1e-3);
  std::normal_distribution<double> gauss;
  double worst = 1e300, slice_worst = 0.0;
  const int samples = 10000;
  for (int k = 0; k < samples; ++k) {
    const int n = nd(rng), m = md(rng);
    const BarrierParams p = BarrierParams::make(n, m, kd(rng), k % 20 == 0 ? 0.0 : ld(rng));
    const double r = frac(rng) * (std::isinf(p.r_max()) ? 10.0 * p.K : p.r_max());
    BarrierPoint at{r, Eigen::VectorXd(n), Eigen::VectorXd(m)};
    for (int i = 0; i < n; ++i) at.a(i) = gauss(rng);
    for (int i = 0; i < m; ++i) at.b(i) = gauss(rng);
    at.a.normalize();
    at.b.normalize();
    // Measured in units of the largest principal value; near the apex they reach
    // 1e12 and any sum cancelling to -Lambda carries rounding of that order.
    const double unit = std::max(1.0, std::abs(shape_spectrum(p, r).c3));
    worst = std::min(worst, (mean_curvature_over_plane(p, at, random_spacelike_plane(p, at, rng)) + p.Lambda) / unit);
    slice_worst = std::max(slice_worst, std::abs(mean_curvature_over_plane(p, at, tangent_frame(p, at).slice) + p.Lambda) / unit);
  }
  const double secs = seconds_since(t0);
  return {worst >= -kPlaneTol && slice_worst <= kSliceTol && secs < kPlaneSeconds,
          fmt("samples=%d min(H+Lambda)/max(1,|c3|)=%.3e (tol %.0e) slice |H+Lambda|/max(1,|c3|)=%.2e (tol %.0e) time=%.2fs", samples, worst, kPlaneTol,
              slice_worst, kSliceTol, secs)};
}

Outcome comparison_principle() {
  const Solved& s = catenoid(33);
  int fits = 0, contained = 0, failures = 0;
  std::size_t interior_violations = 0;
  for (std::size_t b : s.grid->boundary_nodes())
    for (double sign : {1.0, -1.0}) {
      const BarrierFit fit = fit_boundary_barrier(*s.grid, b, Eigen::VectorXd::Constant(1, sign), 0.05, -1.0, s.data);
      const ComparisonReport r = comparison_check(s.state.u, fit.params);
      ++fits;
      if (r.boundary_contained) {
        ++contained;
        interior_violations += r.interior_violations;
        if (!r.interior_contained) ++failures;
      }
    }
  return {contained > 0 && failures == 0 && interior_violations == 0,
          fmt("fits=%d boundary-contained=%d of which not interior-contained=%d interior violations=%zu", fits, contained,
              failures, interior_violations)};
}

Outcome gradient_ellipticity() {
  std::vector<std::pair<std::string, const GraphField*>> states = {{"sinusoidal", &sinusoidal().state.u}};
  for (int nr : {17, 33, 65, 129}) states.push_back({"catenoid" + std::to_string(nr), &catenoid(nr).state.u});
  const Eigen::Matrix2d A = Eigen::Rotation2Dd(0.4).toRotationMatrix() * Eigen::Vector2d(0.7, 0.35).asDiagonal();
  static const Solved affine =
      solve(build_grid({GridKind::cartesian_box, {{0, 1}, {0, 1}}, {33, 33}}), affine_preset(A, Eigen::Vector2d::Zero()), 2);
  states.push_back({"affine", &affine.state.u});
  bool ok = true;
  std::string d;
  for (const auto& [name, u] : states) {
    const DiagnosticsReport r = gradient_ellipticity_report(*u);
    const bool pass = r.sigma_max_Du < 1.0 && r.sum_gii_max <= r.ellipticity_bound + kEllipticityTol &&
                      r.interior_energy_max <= r.boundary_energy_max + kEnergyTol;
    ok = ok && pass;
    d += fmt("%s: sigma=%.3f sum_gii=%.4f<=%.4f E_int=%.4f<=E_bnd=%.4f; ", name.c_str(), r.sigma_max_Du, r.sum_gii_max,
             r.ellipticity_bound, r.interior_energy_max, r.boundary_energy_max);
  }
  return {ok, d};
}

Outcome conservation() {
  std::vector<double> sup;
  std::string d;
  for (int nr : {33, 65, 129}) {
    sup.push_back(conservation_identity_residual(catenoid(nr).state.u).cwiseAbs().maxCoeff());
    d += fmt("N=%d sup=%.3e; ", nr, sup.back());
  }
  bool ok = true;
  for (std::size_t k = 0; k + 1 < sup.size(); ++k) {
    const double order = observed_order(sup[k], sup[k + 1], 2.0);
    ok = ok && order >= kConservationOrder;
    d += fmt("order=%.3f ", order);
  }
  return {ok, d + fmt("(min %.1f)", kConservationOrder)};
}

Outcome ricci() {
  const double ric = ricci_check(catenoid(129).state.u);
  return {ric >= kRicciFloor, fmt("finest annulus N=129: min Ricci eigenvalue=%.4e (floor %.0e)", ric, kRicciFloor)};
}

Outcome quadrature() {
  const auto t0 = Clock::now();
  const double K = 1.0;
  const BarrierParams p = BarrierParams::make(2, 1, K, 0.0);
  double worst = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double r = 10.0 * K * i / 1000.0;
    worst = std::max(worst, std::abs(f_eval(p, r) - K * std::asinh(r / K)));
  }
  const double secs = seconds_since(t0);
  return {worst <= kQuadratureTol && secs < kQuadratureSeconds,
          fmt("1000 radii in (0,10K]: max |f - K asinh(r/K)|=%.2e (tol %.0e) time=%.3fs", worst, kQuadratureTol, secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"affine exactness", affine_exactness},
      {"exact-solution convergence", catenoid_convergence},
      {"uniqueness certificate", uniqueness},
      {"volume maximality", maximality},
      {"second variation negativity", second_variation_negativity},
      {"barrier mean curvature bound", barrier_plane_bound},
      {"comparison principle", comparison_principle},
      {"gradient bound and ellipticity", gradient_ellipticity},
      {"conservation identity", conservation},
      {"ricci non-negativity", ricci},
      {"quadrature anchor", quadrature},
  };
  int failed = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
