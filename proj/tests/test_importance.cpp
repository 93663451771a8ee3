#include <doctest.h>

#include <cmath>

#include "modev/errors.hpp"
#include "modev/importance.hpp"
#include "modev/model_io.hpp"
#include "modev/spectral.hpp"
#include "oracles.hpp"

using namespace modev;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
ControlPath constant_control(const Vec& u) {
  return ControlPath::from_function(static_cast<int>(u.size()), 100, [&](double) { return u; });
}
}  // namespace

TEST_SUITE("importance") {
  TEST_CASE("tilt schedule examples") {
    auto gauss = catalog_model("gauss1");
    const int n = 64;
    auto u = ControlPath::from_function(1, 100, [](double t) { return v1(std::sin(t)); });
    auto s = tilt_schedule_from_control(gauss, u, 10.0, n);
    const double amp = gauss.amplification(n);
    for (int i = 0; i < n; i += 7) CHECK(s.tilts(0, i) == doctest::Approx(std::sin(double(i) / n) / amp));

    auto clipped = tilt_schedule_from_control(gauss, constant_control(v1(4.0)), 2.0, n);
    CHECK(clipped.tilts(0, 5) == doctest::Approx(2.0 / amp));

    auto degen = catalog_model("degen2");
    auto ds = tilt_schedule_from_control(degen, constant_control(v2(0, 1)), 3.0, n);
    CHECK(ds.tilts(0, 0) == doctest::Approx(0.0));
    CHECK(ds.tilts(1, 0) == doctest::Approx(3.0 / degen.amplification(n)));
  }

  TEST_CASE("K too small for n names the minimum n") {
    auto exp1 = catalog_model("exp1");
    const double k = 4.0;
    const auto nmin = minimum_admissible_n(exp1, k);
    CHECK(nmin > 1);
    CHECK(k * k / exp1.amplification(nmin) < 1.0);
    CHECK(k * k / exp1.amplification(nmin - 1) >= 1.0);
    try {
      tilt_schedule_from_control(exp1, constant_control(v1(4.0)), k, 16);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find(std::to_string(nmin)) != std::string::npos);
    }
    CHECK(minimum_admissible_n(catalog_model("gauss1"), 100.0) == 1);
    CHECK(default_truncation(constant_control(v1(0.05))) == 1.0);
    CHECK(default_truncation(constant_control(v1(-3.0))) == doctest::Approx(30.0));
  }

  TEST_CASE("sample_tilted checks the radius") {
    auto k = make_centered_exponential_kernel(1);
    RngStream rng(1);
    CHECK_THROWS_AS(sample_tilted(*k, v1(0), v1(1.0), rng), DomainError);
    double mean = 0;
    for (int i = 0; i < 40000; ++i) mean += sample_tilted(*k, v1(0), v1(0.5), rng)(0);
    mean /= 40000;
    // tilted law: Exp(0.5) - 1, mean 1
    CHECK(std::abs(mean - 1.0) < 4 * 2.0 / std::sqrt(40000.0));
  }

  TEST_CASE("event parsing") {
    CHECK(parse_event("terminal>=1", 1).kind == Event::Kind::TerminalGe);
    CHECK(parse_event("terminal<=-0.5", 1).c == doctest::Approx(-0.5));
    auto h = parse_event("halfspace 1,2,3", 2);
    CHECK(h.kind == Event::Kind::HalfSpace);
    CHECK(h.v == v2(1, 2));
    CHECK(h.c == 3.0);
    CHECK(parse_event("supnorm>=2", 3).kind == Event::Kind::SupNormGe);
    CHECK(parse_event("always", 1).kind == Event::Kind::Always);
    CHECK_THROWS_AS(parse_event("terminal>1", 1), ConfigError);
    CHECK_THROWS_AS(parse_event("halfspace 1,2", 2), ConfigError);
    Mat nodes(1, 3);
    nodes << 0, -2, 0.5;
    GridPath p(nodes);
    CHECK(parse_event("supnorm>=2", 1).contains(p));
    CHECK_FALSE(parse_event("terminal>=1", 1).contains(p));
    CHECK(parse_event("terminal<=0.5", 1).contains(p));
  }

  TEST_CASE("whole-space event has estimate near one") {
    // Mild control: the weight variance grows like exp(int u^2 / a^2), and
    // the sample standard error is unreliable once the weights are heavy-tailed.
    for (const char* id : {"gauss1", "rad1", "tanh1"}) {
      auto m = catalog_model(id);
      auto u = ControlPath::from_function(1, 100, [](double t) { return v1(0.2 + 0.1 * t); });
      auto est = is_probability(m, Event::always(), u, 5.0, 128, 20000, 3);
      CHECK(std::abs(est.estimate - 1.0) <= 3 * est.std_error);
      CHECK(est.hits == est.N);
    }
  }

  TEST_CASE("Gaussian tail estimate covers the truth") {
    auto m = catalog_model("gauss1");
    const int n = 256;
    auto rate = event_rate(linearize(m, 1000), Event::terminal_ge(1.0));
    CHECK(rate.value == doctest::Approx(0.5));
    auto est = is_probability(m, Event::terminal_ge(1.0), *rate.control, 10.0, n, 4000, 11);
    const double truth = oracle::normal_tail(1.0 / m.a(n));
    CHECK(std::abs(est.estimate - truth) <= 4 * est.std_error);
    CHECK(est.relative_error < 0.05);
    CHECK(est.ess > 100);
    CHECK_FALSE(est.degenerate);
  }

  TEST_CASE("vanilla estimator with no hits is degenerate") {
    auto m = catalog_model("gauss1");
    auto est = is_probability(m, Event::terminal_ge(1.0), ControlSchedule::zero(1, 1024), 200, 1);
    CHECK(est.hits == 0);
    CHECK(est.degenerate);
    CHECK(est.estimate == 0.0);
    CHECK(est.relative_error == kInf);
  }

  TEST_CASE("Laplace estimator") {
    auto m = catalog_model("gauss1");
    auto c = is_laplace(m, *constant_functional(0.3), ControlSchedule::zero(1, 64), 100, 1);
    CHECK(c.estimate == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(c.approximate_ci);
    // Optimal tilt for a linear functional of Gaussian noise: zero variance.
    auto u = constant_control(v1(-1.0));
    auto lin = is_laplace(m, *terminal_linear(v1(1)), u, 10.0, 256, 200, 2);
    CHECK(lin.estimate == doctest::Approx(-0.5).epsilon(1e-9));
  }

  TEST_CASE("estimates are reproducible and thread-count independent") {
    auto m = catalog_model("tanh1");
    auto u = constant_control(v1(0.8));
    RunOptions one, four;
    four.threads = 4;
    auto a = is_probability(m, Event::terminal_ge(0.5), u, 5.0, 64, 3000, 4, one);
    auto b = is_probability(m, Event::terminal_ge(0.5), u, 5.0, 64, 3000, 4, four);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.fingerprint == b.fingerprint);
    CHECK_THROWS_AS(is_probability(m, Event::terminal_ge(0.5), u, 5.0, 64, 1, 4), ArgumentError);
  }

  TEST_CASE("event rates") {
    auto flow = linearize(catalog_model("gauss1"), 200);
    CHECK(event_rate(flow, Event::terminal_le(-2.0)).value == doctest::Approx(2.0));
    CHECK(event_rate(flow, Event::supnorm_ge(1.0)).value == doctest::Approx(0.5));
    CHECK(event_rate(flow, Event::always()).value == 0.0);
  }
}
