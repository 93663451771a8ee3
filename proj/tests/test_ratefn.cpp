#include <doctest.h>

#include <cmath>

#include "modev/errors.hpp"
#include "modev/model_io.hpp"
#include "modev/ratefn.hpp"
#include "oracles.hpp"

using namespace modev;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
const double kOuGramian = (1.0 - std::exp(-2.0)) / 2.0;

KernelPtr numeric_rademacher() {
  CustomKernelDef def;
  def.name = "numeric-rademacher";
  def.sampler = [](const Vec&, RngStream& rng) { return Vec::Constant(1, (rng() & 1) ? 1.0 : -1.0); };
  def.log_mgf = [](const Vec&, const Vec& a) { return std::log(std::cosh(a(0))); };
  def.support = [](const Vec&, const Vec& v) { return std::abs(v(0)); };
  def.state_independent = true;
  return std::make_shared<CustomKernel>(def);
}
}  // namespace

TEST_SUITE("ratefn") {
  TEST_CASE("legendre examples") {
    GaussianKernel g(Mat::Identity(1, 1));
    CHECK(legendre(g, v1(0), v1(1)) == doctest::Approx(0.5));
    RademacherKernel r(1);
    CHECK(legendre(r, v1(0), v1(0.5)) == doctest::Approx(oracle::rademacher_legendre(0.5)).epsilon(1e-12));
    CHECK(legendre(r, v1(0), v1(0.5)) == doctest::Approx(0.130812).epsilon(1e-5));
    CHECK(legendre(r, v1(0), v1(1.5)) == kInf);
    for (const auto& id : catalog_model_ids()) {
      auto m = catalog_model(id);
      CHECK(legendre(*m.kernel, m.x0, Vec::Zero(m.dim)) == doctest::Approx(0.0));
    }
  }

  TEST_CASE("numeric legendre agrees with closed forms") {
    auto k = numeric_rademacher();
    for (double b : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
      auto res = legendre_detailed(*k, v1(0), v1(b));
      CHECK(res.closed_form == (b == 0.0));
      CHECK(res.value == doctest::Approx(oracle::rademacher_legendre(b)).epsilon(1e-7));
    }
    CHECK(legendre(*k, v1(0), v1(1.2)) == kInf);
    auto e = make_centered_exponential_kernel(1, false);
    auto ec = make_centered_exponential_kernel(1, true);
    for (double b : {-0.5, 0.0, 0.7, 2.0}) {
      CHECK(legendre(*e, v1(0), v1(b)) == doctest::Approx(legendre(*ec, v1(0), v1(b))).epsilon(1e-6));
    }
    CHECK(legendre(*e, v1(0), v1(-1.5)) == kInf);
  }

  TEST_CASE("degenerate legendre uses the infinite convention") {
    auto m = catalog_model("degen2");
    CHECK(legendre(*m.kernel, m.x0, v2(0.5, 0.0)) == doctest::Approx(oracle::rademacher_legendre(0.5)));
    CHECK(legendre(*m.kernel, m.x0, v2(0.5, 0.1)) == kInf);
  }

  TEST_CASE("controllability Gramian examples") {
    CHECK(controllability_gramian(catalog_model("gauss1"), 100).isApprox(Mat::Identity(1, 1), 1e-12));
    auto ou = model_from_json({{"dimension", 1}, {"x0", 0.0}, {"drift", {{"name", "ou"}}},
                               {"kernel", {{"name", "gaussian"}}}});
    CHECK(std::abs(controllability_gramian(ou)(0, 0) - kOuGramian) < 1e-6);
    Mat g = controllability_gramian(catalog_model("degen2"), 100);
    CHECK(std::abs(g(0, 0) - 1.0) < 1e-12);
    CHECK(g(1, 1) == 0.0);
    auto hist = gramian_history(linearize(ou, 1000));
    CHECK((hist.back() - controllability_gramian(ou)).norm() < 1e-12);
    CHECK(hist.front().norm() == 0.0);
  }

  TEST_CASE("terminal_rate examples against the QP oracle") {
    auto gauss = catalog_model("gauss1");
    auto r = terminal_rate(gauss, v1(1));
    auto q = oracle::qp_terminal_rate(gauss, v1(1));
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(r.value == doctest::Approx(q.value).epsilon(1e-4));
    REQUIRE(r.control.has_value());
    for (int j = 0; j <= r.control->steps(); j += 50) CHECK(r.control->node(j)(0) == doctest::Approx(1.0));
    CHECK(r.trajectory->terminal()(0) == doctest::Approx(1.0));

    auto ou = catalog_model("ou1");
    CHECK(terminal_rate(ou, v1(1)).value == doctest::Approx(1.0 / (2 * kOuGramian)).epsilon(1e-6));
    CHECK(terminal_rate(ou, v1(1)).value == doctest::Approx(1.156518).epsilon(1e-4));

    auto degen = catalog_model("degen2");
    auto inf = terminal_rate(degen, v2(0, 1));
    CHECK(inf.value == kInf);
    CHECK(inf.diagnostics.infinite);
    CHECK(inf.to_json()["value"].is_null());
    CHECK(terminal_rate(degen, v2(1, 0)).value == doctest::Approx(0.5));
    CHECK_THROWS_AS(terminal_rate(gauss, v1(1), 5), ArgumentError);
  }

  TEST_CASE("minimal-energy control reaches the target at the computed cost") {
    auto m = catalog_model("osc2");
    auto r = terminal_rate(m, v2(0.3, 0.2));
    REQUIRE(std::isfinite(r.value));
    auto flow = linearize(m, kDefaultRateGrid);
    auto phi = controlled_path(flow, *r.control);
    CHECK((Vec(phi.terminal()) - v2(0.3, 0.2)).norm() < 1e-9);
    CHECK(r.control->cost() == doctest::Approx(r.value).epsilon(1e-9));
  }

  TEST_CASE("half-space and exit rates") {
    auto gauss = catalog_model("gauss1");
    CHECK(halfspace_rate(gauss, v1(1), 1.0).value == doctest::Approx(0.5));
    CHECK(halfspace_rate(gauss, v1(1), -1.0).value == 0.0);
    CHECK(halfspace_rate(catalog_model("degen2"), v2(0, 1), 1.0).value == kInf);
    auto ex = exit_rate(gauss, 1.0);
    CHECK(ex.value == doctest::Approx(0.5).epsilon(1e-9));
    // OU: variance of the linearized flow peaks at t = 1.
    CHECK(exit_rate(catalog_model("ou1"), 1.0).value ==
          doctest::Approx(1.0 / (2 * kOuGramian)).epsilon(1e-6));
  }

  TEST_CASE("laplace examples") {
    auto gauss = catalog_model("gauss1");
    auto c = laplace_value(gauss, *constant_functional(0.7), 200);
    CHECK(c.value == doctest::Approx(0.7));
    CHECK(c.control->sup_norm() < 1e-12);

    auto lin = laplace_value(gauss, *terminal_linear(v1(1)), 200);
    CHECK(lin.value == doctest::Approx(-0.5).epsilon(1e-8));
    for (int j = 0; j <= 200; j += 20) CHECK(lin.control->node(j)(0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(lin.diagnostics.converged);

    auto pen = laplace_value(gauss, *terminal_quadratic(50.0, v1(1)), 200);
    CHECK(std::abs(pen.value - 0.5) <= 0.02 * 0.5);
    CHECK(pen.value == doctest::Approx(50.0 / 101.0).epsilon(1e-6));
  }

  TEST_CASE("laplace agrees with terminal rate on the OU model") {
    auto ou = catalog_model("ou1");
    // min 1/2 int u^2 + <v, phi(1)> = -|v|^2 G / 2.
    auto r = laplace_value(ou, *terminal_linear(v1(2)), 500);
    CHECK(r.value == doctest::Approx(-2.0 * controllability_gramian(ou, 500)(0, 0)).epsilon(1e-7));
    auto th = laplace_value(ou, *terminal_threshold(v1(1), 1.0, 1e4), 500);
    CHECK(th.value == doctest::Approx(halfspace_rate(ou, v1(1), 1.0, 500).value).epsilon(1e-3));
  }

  TEST_CASE("non-convergence keeps the best iterate") {
    LaplaceOptions opt;
    opt.max_iters = 1;
    try {
      laplace_value(catalog_model("tanh1"), *terminal_quadratic(5.0, v1(2)), 200, opt);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.gradient_norm() > 0);
      CHECK(e.best().control.has_value());
      CHECK_FALSE(e.best().diagnostics.converged);
    }
  }

  TEST_CASE("truncated dynamics") {
    auto flow = linearize(catalog_model("ou1"), 400);
    auto u = ControlPath::from_function(1, 400, [](double) { return v1(2.0); });
    auto t1 = truncation_limit(flow, u, 1.0);
    CHECK(t1.cost_k == doctest::Approx(0.5));
    CHECK(t1.cost_limit == doctest::Approx(2.0));
    auto t4 = truncation_limit(flow, u, 4.0);
    CHECK(t4.cost_k == doctest::Approx(2.0));
    CHECK(t4.path_gap < 1e-12);
    CHECK(clip_radial(v2(3, 4), 1.0).norm() == doctest::Approx(1.0));
    CHECK(clip_radial(v2(0.3, 0.4), 1.0) == v2(0.3, 0.4));
  }
}
