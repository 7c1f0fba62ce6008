#include <doctest.h>

#include <bipen/errors.hpp>
#include <bipen/experiment.hpp>
#include <bipen/instance_io.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"

using namespace bipen;
using fixtures::vec;

namespace {

// max_z min_i (b - A x - B z)_i at a fixed x, via its dual over the simplex on a grid.
double margin_at(const Mat& A, const Mat& B, const Vec& b, const Vec& x, int grid) {
  const Vec r = b - A * x;
  if (b.size() == 1) return r(0) + B.row(0).lpNorm<1>();
  double best = INFINITY;
  for (int j = 0; j <= grid; ++j) {
    const double t = static_cast<double>(j) / grid;
    const Vec lam = vec({t, 1.0 - t});
    best = std::min(best, lam.dot(r) + (B.transpose() * lam).lpNorm<1>());
  }
  return best;
}

// Concave in x, so its minimum over the box sits at a vertex.
double slater_by_enumeration(const Mat& A, const Mat& B, const Vec& b, int grid) {
  const Eigen::Index n = A.cols();
  double g = INFINITY;
  for (long mask = 0; mask < (1L << n); ++mask) {
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    g = std::min(g, margin_at(A, B, b, x, grid));
  }
  return g;
}

std::string csv_without_wall_time(const std::vector<ResultRow>& rows) {
  std::vector<ResultRow> copy = rows;
  for (ResultRow& r : copy) r.wall_time = 0.0;
  std::ostringstream out;
  write_csv(out, copy);
  return out.str();
}

}  // namespace

TEST_CASE("unconstrained generator construction") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const UncLinQuadInstance ui = gen_unc_instance(6, 5, seed);
    CHECK(construction_residual(ui) <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> eb(ui.B_tilde);
    CHECK(eb.eigenvalues().minCoeff() >= -1e-10);
    CHECK((ui.B_tilde - ui.B_tilde.transpose()).norm() == 0.0);

    // Hessian of x'Az + z'Bz
    Mat H = Mat::Zero(11, 11);
    H.block(0, 6, 6, 5) = ui.A_tilde;
    H.block(6, 0, 5, 6) = ui.A_tilde.transpose();
    H.block(6, 6, 5, 5) = 2 * ui.B_tilde;
    Eigen::SelfAdjointEigenSolver<Mat> eh(H);
    CHECK(ui.L_grad_tf1 >= eh.eigenvalues().cwiseAbs().maxCoeff() * (1 - 1e-12));
    CHECK(ui.y_hat.cwiseAbs().maxCoeff() <= 1.0);
  }
  CHECK(instance_to_json(gen_unc_instance(4, 3, 7)) == instance_to_json(gen_unc_instance(4, 3, 7)));
  CHECK(instance_to_json(gen_unc_instance(4, 3, 7)) != instance_to_json(gen_unc_instance(4, 3, 8)));
  CHECK_THROWS(gen_unc_instance(0, 3, 1));
}

TEST_CASE("constrained generator construction") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const ConLinearInstance ci = gen_con_instance(5, 6, 3, seed);
    const LinearKktResidual k = construction_residual(ci);
    CHECK(k.max_violation <= 1e-12);
    CHECK(k.active_mismatch <= 1e-10);
    CHECK(k.complementarity <= 1e-10);
    CHECK(k.stationarity <= 1e-10);
    CHECK(ci.lambda_star.minCoeff() >= 0.0);

    // independent recomputation of the residuals at x = 0
    const Vec s = ci.B_tilde * ci.y_hat - ci.b_tilde;
    CHECK(s.maxCoeff() <= 1e-12);
    CHECK(std::abs(ci.lambda_star.dot(s)) <= 1e-10);
  }
  CHECK(instance_to_json(gen_con_instance(3, 3, 2, 5)) == instance_to_json(gen_con_instance(3, 3, 2, 5)));
}

TEST_CASE("slater margin agrees with vertex enumeration") {
  int certified = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    for (Eigen::Index l : {1, 2}) {
      const ConLinearInstance ci = gen_con_instance(4, 4, l, seed);
      const double ref = slater_by_enumeration(ci.A_tilde, ci.B_tilde, ci.b_tilde, 200000);
      const std::optional<double> g = slater_margin(ci.A_tilde, ci.B_tilde, ci.b_tilde);
      const double slope = ci.b_tilde.lpNorm<1>() + ci.A_tilde.cwiseAbs().sum() + ci.B_tilde.cwiseAbs().sum();
      if (g) {
        ++certified;
        CHECK(*g <= ref + 1e-9);
        CHECK(*g >= ref - slope / 200000 - 1e-9);
      } else {
        CHECK(ref <= slope / 200000 + 1e-9);
      }
    }
  }
  CHECK(certified > 0);

  // a hand example: tg = z - 0.5 with z in [-1,1] gives G = 1.5
  const std::optional<double> h = slater_margin(Mat::Zero(1, 1), Mat::Ones(1, 1), vec({0.5}));
  REQUIRE(h);
  CHECK(*h == doctest::Approx(1.5));
  CHECK_FALSE(slater_margin(Mat::Zero(3, 1), Mat::Ones(3, 1), Vec::Ones(3)));
}

TEST_CASE("tiny problem oracle") {
  const auto t = tiny_oracle_problem();
  const GridOptimum g = grid_bilevel_oracle(t.prob, 201);
  CHECK(g.x == -1.0);
  CHECK(g.y == -1.0);
  CHECK(g.f == -2.0);
  CHECK(t.f_star == -2.0);
  // Phi(x) = f(x, y*(x)) = 2x
  for (double x : {-0.8, 0.0, 0.6}) {
    const LowerLevelSolution s = lower_level_minimize(t.prob, vec({x}), 1e-12);
    CHECK(eval_f(t.prob, vec({x}), s.z) == doctest::Approx(2 * x).epsilon(1e-5));
  }
}

TEST_CASE("instance files round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bipen_test_harness";
  fs::create_directories(dir);
  const Instance u = gen_unc_instance(3, 4, 11);
  const Instance c = gen_con_instance(3, 4, 2, 12);
  save_instance((dir / "u.json").string(), u);
  save_instance((dir / "c.json").string(), c);
  CHECK(instance_to_json(load_instance((dir / "u.json").string())) == instance_to_json(u));
  CHECK(instance_to_json(load_instance((dir / "c.json").string())) == instance_to_json(c));

  const auto back = std::get<ConLinearInstance>(load_instance((dir / "c.json").string()));
  const auto& orig = std::get<ConLinearInstance>(c);
  CHECK((back.B_tilde - orig.B_tilde).norm() == 0.0);
  CHECK(back.con_constants.slater_G == orig.con_constants.slater_G);

  nlohmann::json j = nlohmann::json::parse(instance_to_json(u));
  j["version"] = kInstanceVersion + 1;
  CHECK_THROWS_AS(instance_from_json(j.dump()), SchemaError);
  j = nlohmann::json::parse(instance_to_json(u));
  j["kind"] = "other";
  CHECK_THROWS_AS(instance_from_json(j.dump()), SchemaError);
  CHECK_THROWS_AS(instance_from_json("{not json"), SchemaError);

  const PointFile pt{vec({0.1}), vec({0.2, 0.3}), vec({-0.4, 0.5})};
  save_point((dir / "p.json").string(), pt);
  const PointFile pb = load_point((dir / "p.json").string());
  CHECK((pb.x - pt.x).norm() == 0.0);
  CHECK((pb.y - pt.y).norm() == 0.0);
  CHECK((pb.z - pt.z).norm() == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("size and suite parsing") {
  const auto s = parse_sizes("100x100,200x150");
  REQUIRE(s.size() == 2);
  CHECK(s[1].n == 200);
  CHECK(s[1].m == 150);
  CHECK(s[1].l == 0);
  const auto c = parse_sizes("100x100x5");
  REQUIRE(c.size() == 1);
  CHECK(c[0].l == 5);
  CHECK_THROWS(parse_sizes("100"));
  CHECK_THROWS(parse_sizes("100xq"));
  CHECK_THROWS(parse_sizes("0x3"));
  CHECK(parse_suite("table1") == Suite::table1);
  CHECK(parse_suite("table2") == Suite::table2);
  CHECK_THROWS(parse_suite("table3"));
}

TEST_CASE("experiment runs are deterministic") {
  ExperimentOptions opt;
  opt.schedule.max_rounds = 2;
  const ExperimentResult a = run_experiment(Suite::table1, parse_sizes("3x3"), 2, 5, opt);
  const ExperimentResult b = run_experiment(Suite::table1, parse_sizes("3x3"), 2, 5, opt);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].seed == 5);
  CHECK(a.rows[1].seed == 6);
  CHECK(a.rows[0].error == "not converged");
  CHECK(a.rows[0].rounds == 2);
  CHECK(csv_without_wall_time(a.rows) == csv_without_wall_time(b.rows));
  REQUIRE(a.summaries.size() == 1);
  CHECK(a.summaries[0].instances == 2);
  CHECK(a.summaries[0].mean_initial == doctest::Approx((a.rows[0].initial_obj + a.rows[1].initial_obj) / 2));

  opt.threads = 1;
  const ExperimentResult c = run_experiment(Suite::table2, parse_sizes("3x3x1"), 1, 2, opt);
  REQUIRE(c.rows.size() == 1);
  CHECK(c.rows[0].l == 1);

  CHECK_THROWS(run_experiment(Suite::table1, {}, 2, 1, opt));
  CHECK_THROWS(run_experiment(Suite::table1, parse_sizes("3x3"), 0, 1, opt));
}
