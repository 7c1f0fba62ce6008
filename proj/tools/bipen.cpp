#include <CLI11.hpp>
#include <json.hpp>

#include <bipen/experiment.hpp>
#include <bipen/generators.hpp>
#include <bipen/instance_io.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace bipen;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitResidual = 2;
constexpr double kSubsolverTol = 1e-6;

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json report_json(const SolveReport& r) {
  return {{"outer_iterations", r.outer_iterations},
          {"inner_iterations", r.inner_iterations},
          {"grad_evals", r.counters.grad_evals},
          {"prox_evals", r.counters.prox_evals},
          {"termination", r.termination},
          {"parameters", r.parameters}};
}

void write_point(const std::string& path, const Vec& x, const Vec& y, const Vec& z) {
  if (!path.empty()) save_point(path, PointFile{x, y, z});
}

// Names of the bounds a certificate violates; empty when all hold.
std::vector<std::string> unc_failures(const UncKktCertificate& c, const BoundsReport& b, double eps) {
  std::vector<std::string> bad;
  if (c.res_xy > eps) bad.push_back("res_xy");
  if (c.res_z > eps) bad.push_back("res_z");
  if (c.lower_gap > b.at("unc_gap2") + c.lower_gap_tol) bad.push_back("lower_gap");
  return bad;
}

std::vector<std::string> con_failures(const ConKktCertificate& c, const BoundsReport& b) {
  std::vector<std::string> bad;
  const double tol = c.tf_star_tol;
  if (c.res_xy > b.at("gap1")) bad.push_back("res_xy");
  if (c.res_z > b.at("gap2")) bad.push_back("res_z");
  auto check = [&](const char* key, double v) {
    if (b.values.count(key) && v > b.at(key) + tol) bad.push_back(key);
  };
  check("gap3", c.feas_z);
  check("gap4", c.compl_z);
  check("gap5", c.value_gap);
  check("gap6", c.feas_y);
  check("gap7", c.compl_y);
  if (!b.values.count("gap3")) bad.push_back("no Slater margin: gap3..gap7 unavailable");
  return bad;
}

int finish(json out, const std::vector<std::string>& failures) {
  out["failures"] = failures;
  std::cout << out.dump(2) << '\n';
  return failures.empty() ? kExitOk : kExitResidual;
}

int cmd_solve(const std::string& path, double eps, bool strict, const std::string& out_path) {
  const Instance inst = load_instance(path);
  if (const auto* u = std::get_if<UncLinQuadInstance>(&inst)) {
    const UncBilevelProblem p = to_problem(*u);
    PenaltyResult r;
    if (strict) {
      r = solve_unc(p, eps);
    } else {
      const InitialPoint ip = initial_point(p, p.f2.prox(Vec::Zero(p.nx), 1.0), eps);
      r = solve_penalty(p, eps, 1.0 / eps, std::min(std::pow(eps, 1.5), eps / 2.0), ip.x, ip.y,
                        continuation_run_options());
    }
    const double rho = r.report.parameters.at("rho");
    const UncKktCertificate c = unc_kkt_certificate(p, r.x, r.y, r.z, rho, kSubsolverTol, eps);
    const BoundsReport b = unc_bounds(bound_inputs(p, eval_f(p, r.x0, r.y0)), eps);
    write_point(out_path, r.x, r.y, r.z);
    json out = {{"kind", "unc"},
                {"eps", eps},
                {"strict", strict},
                {"objective", eval_f(p, r.x, r.y)},
                {"certificate", json::parse(c.to_json())},
                {"bounds", json::parse(b.to_json())},
                {"report", report_json(r.report)}};
    return finish(out, unc_failures(c, b, eps));
  }
  const auto& k = std::get<ConLinearInstance>(inst);
  const ConBilevelProblem p = to_problem(k);
  PenaltyResult r;
  if (strict) {
    r = solve_con(p, eps);
  } else {
    const double mu = (1.0 / eps) * (1.0 / eps);
    const InitialPoint ip = initial_point(p, p.base.f2.prox(Vec::Zero(p.base.nx), 1.0), eps, mu);
    r = solve_penalty(p, eps, 1.0 / eps, mu, std::min(std::pow(eps, 2.5), eps / 2.0), ip.x, ip.y,
                      continuation_run_options());
  }
  const double rho = r.report.parameters.at("rho"), mu = r.report.parameters.at("mu");
  const ConKktCertificate c = con_kkt_certificate(p, r.x, r.y, r.z, rho, mu, kSubsolverTol);
  const BoundsReport b = con_bounds(bound_inputs(p, eval_f(p.base, r.x0, r.y0)), eps);
  write_point(out_path, r.x, r.y, r.z);
  json out = {{"kind", "con"},
              {"eps", eps},
              {"strict", strict},
              {"objective", eval_f(p.base, r.x, r.y)},
              {"certificate", json::parse(c.to_json())},
              {"bounds", json::parse(b.to_json())},
              {"report", report_json(r.report)}};
  return finish(out, con_failures(c, b));
}

json rounds_json(const ContinuationResult& res) {
  json rounds = json::array();
  for (const RoundRecord& r : res.rounds) {
    rounds.push_back({{"k", r.k},
                      {"eps", r.eps},
                      {"rho", r.rho},
                      {"mu", r.mu},
                      {"objective", r.objective},
                      {"lower_gap", r.lower_gap},
                      {"feas", r.feas},
                      {"grad_evals", r.counters.grad_evals},
                      {"prox_evals", r.counters.prox_evals},
                      {"outer_iterations", r.outer_iterations},
                      {"ok", r.ok},
                      {"status", r.status},
                      {"seconds", r.seconds}});
  }
  return rounds;
}

int cmd_continue(const std::string& path, double base, double tol, int max_rounds, const std::string& out_path) {
  const Instance inst = load_instance(path);
  ContinuationSchedule s;
  s.base = base;
  s.stop_tol = tol;
  s.max_rounds = max_rounds;
  ContinuationResult res;
  if (const auto* u = std::get_if<UncLinQuadInstance>(&inst)) {
    res = continuation_solve(to_problem(*u), s);
  } else {
    const auto& k = std::get<ConLinearInstance>(inst);
    ContinuationOptions opt;
    opt.y_reference = k.y_hat;
    res = continuation_solve(to_problem(k), s, opt);
  }
  write_point(out_path, res.x, res.y, res.y);
  json out = {{"initial_objective", res.initial_objective},
              {"final_objective", res.final_objective},
              {"lower_gap", res.lower_gap},
              {"feas", res.feas},
              {"converged", res.converged},
              {"grad_evals", res.counters.grad_evals},
              {"prox_evals", res.counters.prox_evals},
              {"x", vec_json(res.x)},
              {"y", vec_json(res.y)},
              {"rounds", rounds_json(res)}};
  std::vector<std::string> failures;
  if (!res.converged) failures.push_back("continuation did not reach the stopping residuals");
  return finish(out, failures);
}

int cmd_verify(const std::string& path, const std::string& point_path, double rho, double mu, double eps) {
  const Instance inst = load_instance(path);
  const PointFile pt = load_point(point_path);
  if (!(rho > 0)) throw std::invalid_argument("verify: --rho must be positive");
  if (!(eps > 0)) eps = 1.0 / rho;
  std::vector<std::string> failures;
  json out = {{"eps", eps}};
  if (const auto* u = std::get_if<UncLinQuadInstance>(&inst)) {
    const UncBilevelProblem p = to_problem(*u);
    const UncKktCertificate c = unc_kkt_certificate(p, pt.x, pt.y, pt.z, rho, kSubsolverTol, eps);
    out["certificate"] = json::parse(c.to_json());
    if (c.res_xy > eps) failures.push_back("res_xy");
    if (c.res_z > eps) failures.push_back("res_z");
  } else {
    if (!(mu > 0)) throw std::invalid_argument("verify: constrained instances need --mu");
    const ConBilevelProblem p = to_problem(std::get<ConLinearInstance>(inst));
    const ConKktCertificate c = con_kkt_certificate(p, pt.x, pt.y, pt.z, rho, mu, kSubsolverTol);
    out["certificate"] = json::parse(c.to_json());
    if (c.res_xy > eps) failures.push_back("res_xy");
    if (c.res_z > eps) failures.push_back("res_z");
  }
  return finish(out, failures);
}

int cmd_bounds(const std::string& path, double eps) {
  const Instance inst = load_instance(path);
  BoundsReport b;
  if (const auto* u = std::get_if<UncLinQuadInstance>(&inst)) {
    const UncBilevelProblem p = to_problem(*u);
    const InitialPoint ip = initial_point(p, p.f2.prox(Vec::Zero(p.nx), 1.0), eps);
    b = unc_bounds(bound_inputs(p, eval_f(p, ip.x, ip.y)), eps);
  } else {
    const ConBilevelProblem p = to_problem(std::get<ConLinearInstance>(inst));
    const InitialPoint ip = initial_point(p, p.base.f2.prox(Vec::Zero(p.base.nx), 1.0), eps, (1.0 / eps) * (1.0 / eps));
    b = con_bounds(bound_inputs(p, eval_f(p.base, ip.x, ip.y)), eps);
  }
  std::cout << b.to_json() << '\n';
  return kExitOk;
}

int cmd_bench(const std::string& suite_name, const std::string& sizes, int instances, std::uint64_t seed,
              const std::string& out_path, double budget) {
  ExperimentOptions opt;
  opt.time_budget = budget;
  const ExperimentResult res = run_experiment(parse_suite(suite_name), parse_sizes(sizes), instances, seed, opt);
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    write_csv(f, res.rows);
  } else {
    write_csv(std::cout, res.rows);
  }
  write_summary(std::cout, res.summaries);
  bool all = true;
  for (const ResultRow& r : res.rows) {
    if (!r.converged) {
      all = false;
      std::cerr << "seed " << r.seed << ": " << r.error << '\n';
    }
  }
  return all ? kExitOk : kExitResidual;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bipen: first-order penalty methods for bilevel problems"};
  app.require_subcommand(1);

  int n = 10, m = 10, l = 2, instances = 10, max_rounds = 20;
  std::uint64_t seed = 1;
  double eps = 0.1, base = 5.0, tol = 1e-4, rho = 0.0, mu = 0.0, budget = 0.0;
  bool strict = false;
  std::string out, instance, point, suite = "table1", sizes = "100x100";

  auto* gu = app.add_subcommand("gen-unc", "generate a linear-quadratic instance (table1 suite)");
  gu->add_option("--n", n)->required();
  gu->add_option("--m", m)->required();
  gu->add_option("--seed", seed)->required();
  gu->add_option("--out", out)->required();

  auto* gc = app.add_subcommand("gen-con", "generate a linearly constrained instance (table2 suite)");
  gc->add_option("--n", n)->required();
  gc->add_option("--m", m)->required();
  gc->add_option("--l", l)->required();
  gc->add_option("--seed", seed)->required();
  gc->add_option("--out", out)->required();

  auto* so = app.add_subcommand("solve", "single penalty solve with rho = 1/eps");
  so->add_option("--instance", instance)->required();
  so->add_option("--eps", eps)->required();
  so->add_flag("--strict-paper-mode", strict, "eps in (0, 1/4], eps0 = eps^{3/2} or eps^{5/2}, verbatim stopping test");
  so->add_option("--out", out, "write the point (x, y, z) as JSON");

  auto* co = app.add_subcommand("continue", "continuation rho_k = base^{k-1}");
  co->add_option("--instance", instance)->required();
  co->add_option("--base", base);
  co->add_option("--tol", tol);
  co->add_option("--max-rounds", max_rounds);
  co->add_option("--out", out, "write the final point as JSON");

  auto* ve = app.add_subcommand("verify", "KKT certificate of a stored point");
  ve->add_option("--instance", instance)->required();
  ve->add_option("--point", point)->required();
  ve->add_option("--rho", rho)->required();
  ve->add_option("--mu", mu);
  ve->add_option("--eps", eps, "threshold for the residual check (default 1/rho)");

  auto* bo = app.add_subcommand("bounds", "complexity constants and gap bounds");
  bo->add_option("--instance", instance)->required();
  bo->add_option("--eps", eps)->required();

  auto* be = app.add_subcommand("bench", "experiment driver for the table1/table2 suites");
  be->add_option("--suite", suite)->check(CLI::IsMember({"table1", "table2"}));
  be->add_option("--sizes", sizes);
  be->add_option("--instances", instances);
  be->add_option("--seed", seed);
  be->add_option("--out", out);
  be->add_option("--time-budget", budget, "seconds for the whole run, 0 = unlimited");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gu) {
      save_instance(out, gen_unc_instance(n, m, seed));
      return kExitOk;
    }
    if (*gc) {
      save_instance(out, gen_con_instance(n, m, l, seed));
      return kExitOk;
    }
    if (*so) return cmd_solve(instance, eps, strict, out);
    if (*co) return cmd_continue(instance, base, tol, max_rounds, out);
    if (*ve) return cmd_verify(instance, point, rho, mu, ve->count("--eps") ? eps : 0.0);
    if (*bo) return cmd_bounds(instance, eps);
    if (*be) return cmd_bench(suite, sizes, instances, seed, out, budget);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
