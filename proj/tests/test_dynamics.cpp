#include <doctest.h>

#include <cmath>
#include <sstream>

#include "modev/dynamics.hpp"
#include "modev/errors.hpp"
#include "modev/grid_path.hpp"
#include "modev/model_io.hpp"

using namespace modev;

namespace {
ModelSpec linear1(double m, double x0) {
  return model_from_json({{"dimension", 1}, {"x0", x0},
                          {"drift", {{"name", "linear"}, {"matrix", m}}},
                          {"kernel", {{"name", "gaussian"}}}});
}
}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("noiseless_path examples") {
    auto zero = model_from_json({{"dimension", 1}, {"x0", 2.0}, {"drift", {{"name", "zero"}}},
                                 {"kernel", {{"name", "gaussian"}}}});
    auto p = noiseless_path(zero, 10);
    CHECK(p.steps() == 10);
    for (int j = 0; j <= 10; ++j) CHECK(p.node(j)(0) == 2.0);

    auto decay = linear1(-1.0, 1.0);
    CHECK(noiseless_path(decay, 1).terminal()(0) == 0.0);
    CHECK(std::abs(noiseless_path(decay, 10000).terminal()(0) - std::exp(-1.0)) < 1e-3);
    CHECK_THROWS_AS(noiseless_path(decay, 0), ArgumentError);
  }

  TEST_CASE("non-finite drift names the step") {
    try {
      noiseless_path(model_from_json({{"dimension", 1}, {"x0", 1e200},
                                      {"drift", {{"name", "square"}}},
                                      {"kernel", {{"name", "gaussian"}}}}),
                     3);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
  }

  TEST_CASE("lln_limit examples") {
    auto constant = model_from_json({{"dimension", 1}, {"drift", {{"name", "constant"}, {"value", 1.0}}},
                                     {"kernel", {{"name", "gaussian"}}}});
    auto p = lln_limit(constant, 8);
    for (int j = 0; j <= 8; ++j) CHECK(p.node(j)(0) == doctest::Approx(j / 8.0).epsilon(1e-15));
    CHECK(std::abs(lln_limit(linear1(-1.0, 1.0), 100).terminal()(0) - std::exp(-1.0)) < 1e-8);
    CHECK(default_lln_grid(16384) == 163840);
    CHECK(default_lln_grid(10) == 1000);
  }

  TEST_CASE("Euler error is O(1/n)") {
    auto m = catalog_model("tanh1");
    auto limit = lln_limit(m, 100000);
    double worst = 0;
    for (int n : {100, 1000, 10000}) {
      const double err = sup_distance(noiseless_path(m, n), limit);
      worst = std::max(worst, err * n);
      CHECK(err > 0);
    }
    CHECK(worst < 1.0);
  }

  TEST_CASE("interpolation") {
    Mat nodes(1, 3);
    nodes << 0, 1, 0;
    GridPath p(nodes);
    CHECK(interpolate(p, 0.5)(0) == 1.0);
    CHECK(interpolate(p, 0.25)(0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(interpolate(p, 1.5), ArgumentError);
    CHECK_THROWS_AS(interpolate(p, -0.1), ArgumentError);
    Mat q(1, 3);
    q << 2, -1, 4;
    GridPath mix(0.3 * nodes + 0.7 * q);
    for (double t : {0.1, 0.37, 0.8}) {
      CHECK(interpolate(mix, t)(0) ==
            doctest::Approx(0.3 * interpolate(p, t)(0) + 0.7 * interpolate(GridPath(q), t)(0)));
    }
    std::ostringstream os;
    write_csv(p, os);
    CHECK(os.str() == "t,x0\n0,0\n0.5,1\n1,0\n");
  }

  TEST_CASE("transition_matrix examples") {
    auto zero = catalog_model("gauss1");
    auto x0 = lln_limit(zero, 100);
    CHECK(transition_matrix(zero, x0, 0.0, 1.0).isApprox(Mat::Identity(1, 1)));
    auto ou = catalog_model("ou1");
    auto xo = lln_limit(ou, 100);
    CHECK(std::abs(transition_matrix(ou, xo, 0.0, 1.0)(0, 0) - std::exp(-1.0)) < 1e-8);
    CHECK(transition_matrix(ou, xo, 0.3, 0.3) == Mat::Identity(1, 1));
    CHECK_THROWS_AS(transition_matrix(ou, xo, 0.6, 0.2), ArgumentError);
  }

  TEST_CASE("semigroup and grid refinement") {
    for (const char* id : {"tanh1", "osc2"}) {
      auto m = catalog_model(id);
      auto x0 = lln_limit(m, 200);
      Mat full = transition_matrix(m, x0, 0.0, 1.0);
      Mat split = transition_matrix(m, x0, 0.5, 1.0) * transition_matrix(m, x0, 0.0, 0.5);
      CHECK((full - split).norm() <= 1e-8);
      Mat fine = transition_matrix(m, lln_limit(m, 800), 0.0, 1.0);
      CHECK((full - fine).norm() <= 1e-8);
    }
  }

  TEST_CASE("linearize matches transition_matrix") {
    auto m = catalog_model("osc2");
    auto flow = linearize(m, 100);
    CHECK(flow.steps() == 100);
    Mat prod = Mat::Identity(2, 2);
    for (int j = 0; j < 100; ++j) prod = flow.step[j] * prod;
    CHECK((prod - flow.to_terminal[0]).norm() < 1e-12);
    CHECK((flow.to_terminal[0] - transition_matrix(m, flow.x0, 0.0, 1.0)).norm() < 1e-10);
    CHECK(flow.cov[0](1, 1) == 0.0);
  }
}
