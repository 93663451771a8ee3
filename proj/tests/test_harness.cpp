#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "modev/errors.hpp"
#include "modev/harness.hpp"
#include "modev/model_io.hpp"
#include "oracles.hpp"

using namespace modev;

namespace {
std::string emit(const LadderReport& r, ReportFormat f) {
  std::ostringstream os;
  emit_report(r, os, f);
  return os.str();
}
}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("check_convergence examples") {
    CHECK(check_convergence({0.30, 0.12, 0.05}, {0.01, 0.01, 0.01}, 0.10).pass);
    CHECK_FALSE(check_convergence({0.05, 0.20, 0.40}, {0.01, 0.01, 0.01}, 0.10).pass);
    auto v = check_convergence({0.12, 0.14, 0.08}, {0.05, 0.05, 0.05}, 0.10);
    CHECK(v.pass);
    CHECK(v.inversions == 1);
    CHECK_FALSE(check_convergence({0.12, 0.14, 0.08}, {0.01, 0.01, 0.01}, 0.10).pass);
    CHECK_FALSE(check_convergence({0.30, 0.12, 0.11}, {0.01, 0.01, 0.01}, 0.10).pass);
  }

  TEST_CASE("Gronwall envelope") {
    std::vector<double> c{1.0, 2.0, 0.5, 3.0};
    auto e0 = discrete_gronwall_envelope({0, 0, 0, 0}, c);
    CHECK(e0 == c);
    const double beta = 0.3;
    auto e = discrete_gronwall_envelope({beta, beta, beta}, {1, 1, 1});
    CHECK(e[2] == doctest::Approx(1 + beta * std::exp(beta) + beta));
    CHECK_THROWS_AS(discrete_gronwall_envelope({-1, 0}, {1, 1}), ArgumentError);

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const int len = 1 + trial % 12;
      std::vector<double> b(len), cc(len);
      for (int i = 0; i < len; ++i) {
        b[i] = ud(gen);
        cc[i] = 2 * ud(gen);
      }
      auto env = discrete_gronwall_envelope(b, cc);
      auto extremal = oracle::gronwall_extremal(b, cc);
      for (int i = 0; i < len; ++i) CHECK(extremal[i] <= env[i] * (1 + 1e-12));
    }
  }

  TEST_CASE("report emission") {
    LadderReport empty;
    empty.model_id = "gauss1";
    CHECK(emit(empty, ReportFormat::Csv) == "n,a_n,estimate,stderr,neg_a2_log,prediction,gap,seconds,censored\n");

    LadderReport r = empty;
    for (int i = 0; i < 3; ++i) {
      LadderRow row;
      row.n = 256 << (2 * i);
      row.a_n = std::pow(row.n, -0.25);
      row.estimate = 1e-5 / (i + 1);
      row.std_error = 1e-7;
      row.neg_a2_log = 0.6 - 0.05 * i;
      row.prediction = 0.5;
      row.gap = row.neg_a2_log - 0.5;
      r.rows.push_back(row);
    }
    r.rows[2].censored = true;
    const std::string js = emit(r, ReportFormat::Json);
    auto parsed = nlohmann::json::parse(js);
    REQUIRE(parsed["rows"].size() == 3);
    for (int i = 0; i < 2; ++i) {
      CHECK(parsed["rows"][i]["n"].get<int>() == r.rows[i].n);
      CHECK(parsed["rows"][i]["neg_a2_log"].get<double>() == doctest::Approx(r.rows[i].neg_a2_log).epsilon(1e-10));
      CHECK(parsed["rows"][i]["estimate"].get<double>() == doctest::Approx(r.rows[i].estimate).epsilon(1e-10));
    }
    CHECK(parsed["rows"][2]["neg_a2_log"].is_null());
    CHECK(parsed["rows"][2]["gap"].is_null());
    CHECK(emit(r, ReportFormat::Csv).find("\n4096,0.125,3.333333333e-06,1e-07,,0.5,,0,1\n") != std::string::npos);
    CHECK(emit(r, ReportFormat::Json) == js);
    CHECK(parse_report_format("json") == ReportFormat::Json);
    CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
    CHECK_THROWS_AS(write_report(r, "/nonexistent-dir/x.csv", ReportFormat::Csv), Error);
  }

  TEST_CASE("Gaussian ladder gaps decrease") {
    auto m = catalog_model("gauss1");
    LadderOptions opt;
    opt.replications = 4000;
    opt.seed = 5;
    opt.record_timing = false;
    auto rep = run_ladder(m, LadderTarget::probability(Event::terminal_ge(1.0)), {256, 1024, 4096}, opt);
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) {
      const double truth = oracle::normal_tail(1.0 / row.a_n);
      CHECK(std::abs(row.estimate - truth) <= 4 * row.std_error);
      CHECK(row.prediction == doctest::Approx(0.5));
    }
    CHECK(rep.rows[0].gap > rep.rows[1].gap);
    CHECK(rep.rows[1].gap > rep.rows[2].gap);
    CHECK(check_convergence(rep, 0.1).pass);
  }

  TEST_CASE("zero-noise kernel flags a degenerate ladder") {
    auto m = catalog_model("zero1");
    LadderOptions opt;
    opt.replications = 10;
    opt.record_timing = false;
    auto hit = run_ladder(m, LadderTarget::probability(Event::terminal_le(0.0)), {16, 64}, opt);
    CHECK(hit.degenerate_kernel);
    for (const auto& row : hit.rows) CHECK(row.estimate == 1.0);
    auto miss = run_ladder(m, LadderTarget::probability(Event::terminal_ge(1.0)), {16, 64}, opt);
    for (const auto& row : miss.rows) {
      CHECK(row.estimate == 0.0);
      CHECK(row.censored);
    }
  }

  TEST_CASE("OU ladder rung") {
    auto m = catalog_model("ou1");
    LadderOptions opt;
    opt.replications = 4000;
    opt.seed = 2;
    auto rep = run_ladder(m, LadderTarget::probability(Event::terminal_ge(1.0)), {4096}, opt);
    CHECK(rep.rows[0].prediction == doctest::Approx(1.156518).epsilon(1e-4));
    CHECK(rep.rows[0].gap < 0.15);
    // Y(1) is exactly Gaussian here; its variance follows the discrete recursion.
    const int n = 4096;
    const double r = 1.0 - 1.0 / n;
    const double var = m.a(n) * m.a(n) / n * (1 - std::pow(r, 2 * n)) / (1 - r * r);
    const double truth = oracle::normal_tail(1.0 / std::sqrt(var));
    CHECK(std::abs(rep.rows[0].estimate - truth) <= 4 * rep.rows[0].std_error);
  }

  TEST_CASE("failing rung keeps the partial report") {
    auto m = catalog_model("gauss1");
    auto f = custom_functional(
        "fragile",
        [](const GridPath& p) {
          if (p.steps() == 64) throw NumericalError("refusing 64 steps");
          return p.terminal()(0);
        },
        [](const GridPath& p, Mat& g) {
          g = Mat::Zero(1, p.steps() + 1);
          g(0, p.steps()) = 1.0;
        });
    LadderOptions opt;
    opt.replications = 50;
    try {
      run_ladder(m, LadderTarget::laplace(f), {16, 64, 256}, opt);
      FAIL("expected LadderError");
    } catch (const LadderError& e) {
      CHECK(e.partial().rows.size() == 1);
    }
  }

  TEST_CASE("same seed gives byte-identical files") {
    auto m = catalog_model("gauss1");
    LadderOptions opt;
    opt.replications = 500;
    opt.seed = 77;
    opt.record_timing = false;
    const auto dir = std::filesystem::temp_directory_path();
    const std::string p1 = (dir / "modev_report_a.json").string();
    const std::string p2 = (dir / "modev_report_b.json").string();
    write_report(run_ladder(m, LadderTarget::probability(Event::terminal_ge(1.0)), {64, 256}, opt), p1, ReportFormat::Json);
    write_report(run_ladder(m, LadderTarget::probability(Event::terminal_ge(1.0)), {64, 256}, opt), p2, ReportFormat::Json);
    std::ifstream a(p1), b(p2);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(!sa.str().empty());
    CHECK(sa.str() == sb.str());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
  }
}
