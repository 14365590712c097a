#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>

#include <CLI11.hpp>

#include "maxgraph/analysis.hpp"
#include "maxgraph/barrier.hpp"
#include "maxgraph/errors.hpp"
#include "maxgraph/functional.hpp"

namespace maxgraph::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> known_probes = {"residual", "gradient_ellipticity", "first_variation", "second_variation",
                                               "maximality", "uniqueness", "ricci", "comparison"};

namespace {

void check_keys(const json& j, const std::string& block, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(block + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(block + ": unknown key '" + key + "'");
}

const json& require(const json& j, const std::string& block, const char* key) {
  if (!j.contains(key)) throw ConfigError(block + ": missing '" + key + "'");
  return j.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + ": expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + ": expected an integer");
  return v.get<int>();
}

Eigen::VectorXd vector_of(const json& v, const std::string& what, Eigen::Index len) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != len)
    throw ConfigError(what + ": expected an array of length " + std::to_string(len));
  Eigen::VectorXd out(len);
  for (Eigen::Index i = 0; i < len; ++i) out(i) = number(v[static_cast<std::size_t>(i)], what);
  return out;
}

Eigen::MatrixXd matrix_of(const json& v, const std::string& what, Eigen::Index rows, Eigen::Index cols) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows)
    throw ConfigError(what + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) out.row(r) = vector_of(v[static_cast<std::size_t>(r)], what, cols);
  return out;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

DomainSpec parse_domain(const json& j, int n) {
  check_keys(j, "domain", {"kind", "bounds", "counts"});
  DomainSpec d;
  const std::string kind = require(j, "domain", "kind").get<std::string>();
  if (kind == "box" || kind == "cartesian_box") {
    d.kind = GridKind::cartesian_box;
  } else if (kind == "annulus" || kind == "polar_annulus" || kind == "disk") {
    d.kind = GridKind::polar_annulus;
    if (n != 2) throw ConfigError("domain: polar grids require n = 2");
  } else {
    throw ConfigError("domain: unknown kind '" + kind + "'");
  }
  const auto axes = static_cast<Eigen::Index>(d.kind == GridKind::cartesian_box ? n : 1);
  const Eigen::MatrixXd b = matrix_of(require(j, "domain", "bounds"), "domain.bounds", axes, 2);
  for (Eigen::Index a = 0; a < axes; ++a) d.bounds.push_back({b(a, 0), b(a, 1)});
  const json& c = require(j, "domain", "counts");
  const std::size_t ncounts = d.kind == GridKind::cartesian_box ? static_cast<std::size_t>(n) : 2;
  if (!c.is_array() || c.size() != ncounts)
    throw ConfigError("domain.counts: expected " + std::to_string(ncounts) + " entries");
  for (const auto& v : c) d.counts.push_back(integer(v, "domain.counts"));
  return d;
}

BoundaryPreset parse_boundary(const json& j, int n, int m) {
  BoundaryPreset b;
  b.name = require(j, "boundary", "preset").get<std::string>();
  if (b.name == "constant") {
    check_keys(j, "boundary", {"preset", "value"});
    b.value = vector_of(require(j, "boundary", "value"), "boundary.value", m);
  } else if (b.name == "affine") {
    check_keys(j, "boundary", {"preset", "A", "offset"});
    b.A = matrix_of(require(j, "boundary", "A"), "boundary.A", m, n);
    b.offset = j.contains("offset") ? vector_of(j["offset"], "boundary.offset", m) : Eigen::VectorXd::Zero(m);
  } else if (b.name == "sinusoidal") {
    check_keys(j, "boundary", {"preset", "amplitude", "frequency", "phase"});
    b.amplitude = vector_of(require(j, "boundary", "amplitude"), "boundary.amplitude", m);
    b.frequency = vector_of(require(j, "boundary", "frequency"), "boundary.frequency", m);
    b.phase = j.contains("phase") ? vector_of(j["phase"], "boundary.phase", m) : Eigen::VectorXd::Zero(m);
  } else if (b.name == "catenoid_trace") {
    check_keys(j, "boundary", {"preset", "K"});
    if (m != 1) throw ConfigError("boundary: catenoid_trace requires m = 1");
    b.K = number(require(j, "boundary", "K"), "boundary.K");
    if (!(b.K > 0.0)) throw ConfigError("boundary.K must be positive");
  } else {
    throw ConfigError("boundary: unknown preset '" + b.name + "'");
  }
  return b;
}

SolverConfig parse_solver(const json& j) {
  SolverConfig s;
  if (j.is_null()) return s;
  check_keys(j, "solver", {"newton_tol", "max_newton_iters", "homotopy_steps_init", "step_halving_limit",
                           "spacelike_slack_delta", "linear_tol", "jacobian_mode"});
  if (j.contains("newton_tol")) s.newton_tol = number(j["newton_tol"], "solver.newton_tol");
  if (j.contains("max_newton_iters")) s.max_newton_iters = integer(j["max_newton_iters"], "solver.max_newton_iters");
  if (j.contains("homotopy_steps_init"))
    s.homotopy_steps_init = integer(j["homotopy_steps_init"], "solver.homotopy_steps_init");
  if (j.contains("step_halving_limit"))
    s.step_halving_limit = integer(j["step_halving_limit"], "solver.step_halving_limit");
  if (j.contains("spacelike_slack_delta"))
    s.spacelike_slack_delta = number(j["spacelike_slack_delta"], "solver.spacelike_slack_delta");
  if (j.contains("linear_tol")) s.linear_tol = number(j["linear_tol"], "solver.linear_tol");
  if (j.contains("jacobian_mode")) {
    const std::string mode = j["jacobian_mode"].get<std::string>();
    if (mode == "analytic")
      s.jacobian_mode = JacobianMode::analytic;
    else if (mode == "finite_difference_check")
      s.jacobian_mode = JacobianMode::finite_difference_check;
    else
      throw ConfigError("solver.jacobian_mode: unknown mode '" + mode + "'");
  }
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  return s;
}

VerifyConfig parse_verify(const json& j, const fs::path& base) {
  VerifyConfig v;
  if (j.is_null()) return v;
  check_keys(j, "verify", {"probes", "trials", "rayleigh_probes", "first_variation_probes", "seed", "ricci_tol",
                           "barrier", "solution_csv"});
  if (j.contains("probes")) {
    if (!j["probes"].is_array()) throw ConfigError("verify.probes: expected an array of names");
    for (const auto& p : j["probes"]) {
      const std::string name = p.get<std::string>();
      if (name == "all") {
        v.probes = known_probes;
        break;
      }
      if (std::find(known_probes.begin(), known_probes.end(), name) == known_probes.end())
        throw ConfigError("verify.probes: unknown probe '" + name + "'");
      if (std::find(v.probes.begin(), v.probes.end(), name) == v.probes.end()) v.probes.push_back(name);
    }
  }
  if (j.contains("trials")) v.trials = integer(j["trials"], "verify.trials");
  if (j.contains("rayleigh_probes")) v.rayleigh_probes = integer(j["rayleigh_probes"], "verify.rayleigh_probes");
  if (j.contains("first_variation_probes"))
    v.first_variation_probes = integer(j["first_variation_probes"], "verify.first_variation_probes");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("verify.seed: expected a non-negative integer");
    v.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("ricci_tol")) v.ricci_tol = number(j["ricci_tol"], "verify.ricci_tol");
  if (j.contains("barrier")) {
    const json& b = j["barrier"];
    check_keys(b, "verify.barrier", {"eps", "Lambda", "nodes"});
    if (b.contains("eps")) v.barrier_eps = number(b["eps"], "verify.barrier.eps");
    if (b.contains("Lambda")) v.barrier_Lambda = number(b["Lambda"], "verify.barrier.Lambda");
    if (b.contains("nodes")) v.barrier_nodes = integer(b["nodes"], "verify.barrier.nodes");
  }
  if (j.contains("solution_csv")) v.solution_csv = resolve(base, j["solution_csv"].get<std::string>());
  if (v.trials < 1 || v.rayleigh_probes < 1 || v.first_variation_probes < 1 || v.barrier_nodes < 1)
    throw ConfigError("verify: trial and probe counts must be positive");
  if (!(v.barrier_eps > 0.0) || !(v.barrier_Lambda < 0.0))
    throw ConfigError("verify.barrier: need eps > 0 and Lambda < 0");
  return v;
}

OutputPaths parse_output(const json& j, const fs::path& base) {
  OutputPaths o{"solution.csv", "progress.jsonl", "report.json", "verify.json"};
  if (!j.is_null()) {
    check_keys(j, "output", {"solution_csv", "progress_jsonl", "report_json", "verify_json"});
    if (j.contains("solution_csv")) o.solution_csv = j["solution_csv"].get<std::string>();
    if (j.contains("progress_jsonl")) o.progress_jsonl = j["progress_jsonl"].get<std::string>();
    if (j.contains("report_json")) o.report_json = j["report_json"].get<std::string>();
    if (j.contains("verify_json")) o.verify_json = j["verify_json"].get<std::string>();
  }
  o.solution_csv = resolve(base, o.solution_csv);
  o.progress_jsonl = resolve(base, o.progress_jsonl);
  o.report_json = resolve(base, o.report_json);
  o.verify_json = resolve(base, o.verify_json);
  return o;
}

json report_json(const DiagnosticsReport& d) {
  return {{"volume", d.volume},
          {"residual_inf", d.residual_inf},
          {"sigma_max_Du", d.sigma_max_Du},
          {"mu", d.mu},
          {"sum_gii_max", d.sum_gii_max},
          {"ellipticity_bound", d.ellipticity_bound},
          {"interior_energy_max", d.interior_energy_max},
          {"boundary_energy_max", d.boundary_energy_max},
          {"ricci_min_eig", d.ricci_min_eig},
          {"second_variation_max_rayleigh", d.second_variation_max_rayleigh}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

// Everything a command needs after the config is read.
struct Problem {
  RunConfig cfg;
  GridPtr grid;
  BoundaryData data;
};

Problem load_problem(const fs::path& path) {
  Problem p;
  p.cfg = load_run_config(path);
  try {
    p.grid = build_grid(p.cfg.domain);
    p.data = BoundaryData::from_function(*p.grid, p.cfg.m, p.cfg.boundary.function(p.cfg.n, p.cfg.m));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

// Solves and writes the solution and progress files. Returns an exit code.
int solve_problem(const Problem& p, std::ostream& out, std::ostream& err, std::optional<GraphField>& solution) {
  const double mu0 = acausality_margin(p.data, *p.grid);
  if (!(mu0 > 0.0)) {
    err << "error: boundary data is not acausal (mu0 = " << mu0 << ")\n";
    out << json{{"status", "acausal"}, {"mu0", mu0}}.dump() << '\n';
    return acausal;
  }
  std::ofstream progress(p.cfg.output.progress_jsonl);
  if (!progress) throw std::runtime_error("cannot write " + p.cfg.output.progress_jsonl.string());
  try {
    const SolveState st = continuity_solve(p.data, p.grid, p.cfg.solver, [&](const ProgressRecord& r) {
      progress << json{{"t", r.t}, {"residual_inf", r.residual_inf}, {"min_margin", r.min_margin}, {"iters", r.iters}}
                      .dump()
               << '\n';
    });
    solution = st.u;
    std::ofstream csv(p.cfg.output.solution_csv);
    if (!csv) throw std::runtime_error("cannot write " + p.cfg.output.solution_csv.string());
    write_field_csv(csv, st.u);
    out << json{{"status", "converged"}, {"mu0", mu0}, {"residual_inf", st.residual_inf}, {"min_margin", st.min_margin}}
               .dump()
        << '\n';
    return ok;
  } catch (const AcausalityViolation& e) {
    err << "error: " << e.what() << '\n';
    return acausal;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << " (last good t = " << e.last_good_t() << ")\n";
    out << json{{"status", "nonconvergence"}, {"last_good_t", e.last_good_t()}}.dump() << '\n';
    return nonconvergence;
  }
}

struct ProbeResult {
  bool pass = false;
  json detail = json::object();
};

double boundary_mismatch(const GraphField& u, const BoundaryData& data) {
  double worst = 0.0;
  for (std::size_t b : u.grid->boundary_nodes()) {
    const auto r = static_cast<Eigen::Index>(b);
    worst = std::max(worst, (u.values.row(r) - data.samples.row(r)).cwiseAbs().maxCoeff());
  }
  return worst;
}

ProbeResult run_probe(const std::string& name, const Problem& p, const GraphField& u) {
  const VerifyConfig& v = p.cfg.verify;
  const SolverConfig& s = p.cfg.solver;
  ProbeResult r;
  std::mt19937_64 rng(v.seed);
  if (name == "residual") {
    const double res = residual_inf(u);
    const double bnd = boundary_mismatch(u, p.data);
    r.detail = {{"residual_inf", res}, {"boundary_mismatch", bnd}, {"newton_tol", s.newton_tol}};
    r.pass = res <= s.newton_tol && bnd <= 1e-12;
  } else if (name == "gradient_ellipticity") {
    const DiagnosticsReport d = gradient_ellipticity_report(u);
    r.detail = {{"sigma_max_Du", d.sigma_max_Du},
                {"mu", d.mu},
                {"sum_gii_max", d.sum_gii_max},
                {"ellipticity_bound", d.ellipticity_bound},
                {"interior_energy_max", d.interior_energy_max},
                {"boundary_energy_max", d.boundary_energy_max}};
    r.pass = d.gradient_ok && d.ellipticity_ok && d.energy_ok;
  } else if (name == "first_variation") {
    double worst = 0.0, worst_fd = 0.0;
    const double eps = 1e-5;
    for (int k = 0; k < v.first_variation_probes; ++k) {
      const PerturbationField w = random_smooth_perturbation(u.grid, u.components(), rng);
      const double fv = first_variation(u, w);
      const double fd = (volume(GraphField(u.grid, Eigen::MatrixXd(u.values + eps * w.w))) -
                         volume(GraphField(u.grid, Eigen::MatrixXd(u.values - eps * w.w)))) /
                        (2.0 * eps);
      worst = std::max(worst, std::abs(fv) / w.w.norm());
      worst_fd = std::max(worst_fd, std::abs(fv - fd) / std::max(1.0, std::abs(fd)));
    }
    r.detail = {{"max_relative_first_variation", worst}, {"max_fd_mismatch", worst_fd}};
    r.pass = worst <= 1e-8 && worst_fd <= 1e-7;
  } else if (name == "second_variation") {
    const double rayleigh = max_rayleigh_quotient(u, v.rayleigh_probes, v.seed);
    const SparseMatrix L = assemble_jacobi(u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double asym = 0.0, fd_mismatch = 0.0;
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd a(L.rows()), b(L.rows());
      for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = gauss(rng), b(i) = gauss(rng);
      const double ab = b.dot(L * a), ba = a.dot(L * b);
      asym = std::max(asym, std::abs(ab - ba) / std::max(1.0, std::abs(ab)));
      const PerturbationField w = random_smooth_perturbation(u.grid, u.components(), rng);
      const double eps = 1e-4;
      auto vol = [&](double t) { return volume(GraphField(u.grid, Eigen::MatrixXd(u.values + t * w.w))); };
      const double fd = (vol(eps) - 2.0 * vol(0.0) + vol(-eps)) / (eps * eps);
      const double sv = second_variation(u, w);
      fd_mismatch = std::max(fd_mismatch, std::abs(sv - fd) / std::abs(sv));
    }
    r.detail = {{"max_rayleigh", rayleigh}, {"symmetry_defect", asym}, {"fd_relative_mismatch", fd_mismatch}};
    r.pass = rayleigh < 0.0 && asym <= 1e-11 && fd_mismatch <= 1e-5;
  } else if (name == "maximality") {
    const MaximalityReport m = volume_maximality_probe(u, v.trials, v.seed);
    r.detail = {{"trials", m.trials},         {"evaluated", m.evaluated},
                {"skipped", m.skipped},       {"violations", m.violations},
                {"strict_decreases", m.strict_decreases}, {"max_volume_change", m.max_violation}};
    r.pass = m.evaluated > 0 && m.violations == 0 && m.strict_decreases == m.evaluated;
  } else if (name == "uniqueness") {
    const UniquenessReport q = uniqueness_probe(p.data, p.grid, s);
    const double to_given = (q.solutions.front().values - u.values).cwiseAbs().maxCoeff();
    r.detail = {{"routes", q.routes}, {"max_pairwise", q.max_pairwise}, {"distance_to_solution", to_given}};
    r.pass = q.max_pairwise <= 1e-8 && to_given <= 1e-8;
  } else if (name == "ricci") {
    const double ric = ricci_check(u, s.newton_tol);
    r.detail = {{"ricci_min_eig", ric}, {"tolerance", v.ricci_tol}};
    r.pass = ric >= -v.ricci_tol;
  } else if (name == "comparison") {
    const auto& bnodes = p.grid->boundary_nodes();
    const std::size_t stride = std::max<std::size_t>(1, bnodes.size() / static_cast<std::size_t>(v.barrier_nodes));
    int fits = 0, skipped = 0, boundary_contained = 0, failures = 0;
    double worst_interior = 0.0;
    for (std::size_t k = 0; k < bnodes.size(); k += stride)
      for (int t = 0; t < u.components(); ++t)
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd theta = Eigen::VectorXd::Zero(u.components());
          theta(t) = sign;
          try {
            const BarrierFit fit = fit_boundary_barrier(*p.grid, bnodes[k], theta, v.barrier_eps, v.barrier_Lambda, p.data);
            const ComparisonReport c = comparison_check(u, fit.params);
            ++fits;
            if (c.boundary_contained) {
              ++boundary_contained;
              if (!c.interior_contained) ++failures;
              worst_interior = std::max(worst_interior, c.worst_interior_violation);
            }
          } catch (const InfeasibleFit&) {
            ++skipped;
          } catch (const InvalidArgument&) {
            ++skipped;  // corner nodes or domain outside the admissible radius
          }
        }
    r.detail = {{"fits", fits},         {"skipped", skipped},      {"boundary_contained", boundary_contained},
                {"failures", failures}, {"worst_interior_violation", worst_interior}};
    r.pass = boundary_contained > 0 && failures == 0;
  }
  return r;
}

DiagnosticsReport best_effort_diagnostics(const Problem& p, const GraphField& u) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DiagnosticsReport d;
  try {
    d = gradient_ellipticity_report(u);
  } catch (const std::exception&) {
    d.sigma_max_Du = d.mu = d.sum_gii_max = d.ellipticity_bound = nan;
    d.interior_energy_max = d.boundary_energy_max = nan;
  }
  auto attempt = [&](double& field, auto fn) {
    try {
      field = fn();
    } catch (const std::exception&) {
      field = nan;
    }
  };
  attempt(d.volume, [&] { return volume(u); });
  attempt(d.residual_inf, [&] { return residual_inf(u); });
  attempt(d.ricci_min_eig, [&] { return ricci_check(u, p.cfg.solver.newton_tol); });
  attempt(d.second_variation_max_rayleigh,
          [&] { return max_rayleigh_quotient(u, p.cfg.verify.rayleigh_probes, p.cfg.verify.seed); });
  return d;
}

template <class Fn>
int guarded(std::ostream& err, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const AcausalityViolation& e) {
    err << "error: " << e.what() << '\n';
    return acausal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return internal_error;
  }
}

}  // namespace

VectorFn BoundaryPreset::function(int n, int m) const {
  if (name == "constant") return constant_preset(value);
  if (name == "affine") return affine_preset(A, offset);
  if (name == "sinusoidal") return sinusoidal_preset(n, amplitude, frequency, phase);
  if (name == "catenoid_trace") {
    if (m != 1) throw ConfigError("catenoid_trace requires m = 1");
    return catenoid_trace_preset(K);
  }
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  check_keys(j, "config", {"signature", "domain", "boundary", "solver", "verify", "output"});
  RunConfig c;
  const json& sig = require(j, "config", "signature");
  check_keys(sig, "signature", {"n", "m"});
  c.n = integer(require(sig, "signature", "n"), "signature.n");
  c.m = integer(require(sig, "signature", "m"), "signature.m");
  if (c.n < 1 || c.m < 1) throw ConfigError("signature: n and m must be positive");
  c.domain = parse_domain(require(j, "config", "domain"), c.n);
  c.boundary = parse_boundary(require(j, "config", "boundary"), c.n, c.m);
  c.solver = parse_solver(j.contains("solver") ? j["solver"] : json());
  c.verify = parse_verify(j.contains("verify") ? j["verify"] : json(), base_dir);
  c.output = parse_output(j.contains("output") ? j["output"] : json(), base_dir);
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

int cmd_solve(const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Problem p = load_problem(config);
    std::optional<GraphField> u;
    const int code = solve_problem(p, out, err, u);
    if (code != ok) return code;
    const DiagnosticsReport d =
        diagnose(*u, p.cfg.solver.newton_tol, p.cfg.verify.rayleigh_probes, p.cfg.verify.seed);
    write_json(p.cfg.output.report_json, report_json(d));
    return static_cast<int>(ok);
  });
}

int cmd_verify(const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Problem p = load_problem(config);
    std::optional<GraphField> u;
    if (!p.cfg.verify.solution_csv.empty()) {
      std::ifstream is(p.cfg.verify.solution_csv);
      if (!is) throw ConfigError("cannot read solution " + p.cfg.verify.solution_csv.string());
      try {
        u = read_field_csv(is, p.grid, p.cfg.m);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("solution file: ") + e.what());
      }
    } else {
      const int code = solve_problem(p, out, err, u);
      if (code != ok) return code;
    }
    if (p.cfg.verify.probes.empty()) err << "warning: verify block selects no probes; nothing checked\n";

    json probes = json::array();
    bool all_pass = true;
    for (const std::string& name : p.cfg.verify.probes) {
      ProbeResult r;
      try {
        r = run_probe(name, p, *u);
      } catch (const std::exception& e) {
        r.pass = false;
        r.detail = {{"error", e.what()}};
      }
      all_pass = all_pass && r.pass;
      const json line = {{"probe", name}, {"pass", r.pass}, {"detail", r.detail}};
      out << line.dump() << '\n';
      probes.push_back(line);
    }
    write_json(p.cfg.output.report_json, report_json(best_effort_diagnostics(p, *u)));
    write_json(p.cfg.output.verify_json, {{"all_pass", all_pass}, {"probes", probes}});
    return static_cast<int>(all_pass ? ok : probe_failure);
  });
}

int cmd_barrier(int n, int m, double K, double Lambda, int samples, double r_max, std::ostream& out,
                std::ostream& err) {
  if (n < 1 || m < 1 || !(K > 0.0) || !(Lambda <= 0.0) || samples < 2 || std::isnan(r_max) || r_max < 0.0) {
    err << "error: need n, m >= 1, K > 0, Lambda <= 0, samples >= 2, r-max > 0\n";
    return config_error;
  }
  return guarded(err, [&] {
    const BarrierParams p = BarrierParams::make(n, m, K, Lambda);
    // Without an explicit cap an unbounded range (Lambda = 0) stops at 10 K.
    double cap = r_max > 0.0 ? r_max : (std::isinf(p.r_max()) ? 10.0 * K : p.r_max());
    const auto rows = tabulate_barrier(p, samples, cap);
    out << "r,f,f_prime,c1,c2,c3\n" << std::setprecision(17);
    for (const BarrierRow& r : rows)
      out << r.r << ',' << r.f << ',' << r.f_prime << ',' << r.c1 << ',' << r.c2 << ',' << r.c3 << '\n';
    return static_cast<int>(ok);
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"maximal graph Dirichlet solver"};
  app.require_subcommand(1);
  std::string config;
  auto* solve = app.add_subcommand("solve", "solve the Dirichlet problem from a JSON config");
  solve->add_option("--config", config, "config path")->required();
  auto* verify = app.add_subcommand("verify", "solve (or load) and run the probe suite");
  verify->add_option("--config", config, "config path")->required();
  int n = 0, m = 0, samples = 0;
  double K = 0.0, Lambda = 0.0, r_max = 0.0;
  auto* barrier = app.add_subcommand("barrier", "tabulate the barrier profile as CSV");
  barrier->add_option("--n", n)->required();
  barrier->add_option("--m", m)->required();
  barrier->add_option("--K", K)->required();
  barrier->add_option("--Lambda", Lambda)->required();
  barrier->add_option("--samples", samples)->required();
  barrier->add_option("--r-max", r_max, "cap on the tabulated radius");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }
  if (*solve) return cmd_solve(config, out, err);
  if (*verify) return cmd_verify(config, out, err);
  return cmd_barrier(n, m, K, Lambda, samples, r_max, out, err);
}

}  // namespace maxgraph::cli
