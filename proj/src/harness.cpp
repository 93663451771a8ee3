#include "modev/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "modev/dynamics.hpp"
#include "modev/format.hpp"
#include "modev/rng.hpp"

namespace modev {

using nlohmann::json;

std::string LadderTarget::describe() const {
  if (event) return event->describe();
  return functional ? functional->describe() : "none";
}

LadderReport run_ladder(const ModelSpec& spec, const LadderTarget& target,
                        const std::vector<int>& n_list, const LadderOptions& options) {
  if (n_list.empty()) throw ArgumentError("n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw ArgumentError("n_list must be positive and strictly increasing");
    }
  }
  if (!target.event && !target.functional) throw ArgumentError("ladder needs an event or a functional");

  LadderReport report;
  report.model_id = spec.id;
  report.target = target.describe();
  report.kind = target.event ? "probability" : "laplace";
  report.replications = options.replications;
  report.gamma = spec.gamma;
  report.seed = options.seed;
  report.degenerate_kernel = spec.kernel->degenerate_zero();

  const LinearizedFlow flow = linearize(spec, options.rate_grid);
  const RateSolution rate =
      target.event ? event_rate(flow, *target.event) : laplace_value(flow, *target.functional);
  const ControlPath u = rate.control ? *rate.control : ControlPath::zero(spec.dim, flow.steps());
  const double k = options.k ? *options.k : default_truncation(u);
  report.k = k;
  report.control_fingerprint = hash_matrix(u.path().nodes());

  for (const int n : n_list) {
    LadderRow row;
    row.n = n;
    row.a_n = spec.a(n);
    row.prediction = rate.value;
    row.seed = mix64(options.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n)));
    const auto start = std::chrono::steady_clock::now();
    try {
      const RunOptions run{options.threads};
      const ISEstimate est =
          target.event
              ? is_probability(spec, *target.event, u, k, n, options.replications, row.seed, run)
              : is_laplace(spec, *target.functional, u, k, n, options.replications, row.seed, run);
      const double a2 = row.a_n * row.a_n;
      row.estimate = est.estimate;
      row.std_error = est.std_error;
      if (target.event) {
        row.censored = est.hits == 0;
        row.neg_a2_log = row.censored ? kInf : -a2 * est.log_estimate;
        row.gap_std_error = a2 * est.relative_error;
      } else {
        row.neg_a2_log = est.estimate;
        row.gap_std_error = est.std_error;
      }
      row.gap = row.censored ? kInf : std::abs(row.neg_a2_log - row.prediction);
    } catch (const Error& e) {
      throw LadderError("ladder rung n = " + std::to_string(n) + " failed: " + e.what(),
                        std::move(report));
    }
    if (options.record_timing) {
      row.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    report.rows.push_back(row);
  }
  return report;
}

ConvergenceVerdict check_convergence(const std::vector<double>& gaps,
                                     const std::vector<double>& std_errors, double tol_final) {
  if (gaps.size() < 3) throw ArgumentError("check_convergence needs at least 3 rows");
  if (std_errors.size() != gaps.size()) throw ArgumentError("gaps and std errors differ in length");
  ConvergenceVerdict v;
  v.final_gap = gaps.back();
  bool within_noise = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double rise = gaps[i] - gaps[i - 1];
    if (rise > 0.0 || !std::isfinite(gaps[i])) {
      ++v.inversions;
      v.largest_inversion = std::max(v.largest_inversion, rise);
      if (!(rise <= std_errors[i])) within_noise = false;
    }
  }
  const bool final_ok = v.final_gap <= tol_final;
  const bool trend_ok = v.inversions == 0 || (v.inversions == 1 && within_noise);
  v.pass = final_ok && trend_ok;
  v.detail = "final gap " + format_double(v.final_gap) + (final_ok ? " <= " : " > ") +
             format_double(tol_final) + ", " + std::to_string(v.inversions) + " inversion(s)";
  return v;
}

ConvergenceVerdict check_convergence(const LadderReport& report, double tol_final) {
  std::vector<double> gaps, errs;
  for (const auto& r : report.rows) {
    gaps.push_back(r.gap);
    errs.push_back(r.gap_std_error);
  }
  return check_convergence(gaps, errs, tol_final);
}

std::vector<double> discrete_gronwall_envelope(const std::vector<double>& b,
                                               const std::vector<double>& c) {
  if (b.size() != c.size()) throw ArgumentError("b and c must have the same length");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(b[i] >= 0.0) || !(c[i] >= 0.0)) {
      throw ArgumentError("discrete_gronwall_envelope needs nonnegative inputs (index " +
                          std::to_string(i) + ")");
    }
  }
  const std::size_t len = b.size();
  std::vector<double> e(len);
  for (std::size_t n = 0; n < len; ++n) {
    double total = c[n];
    double tail = 0.0;  // sum_{i=k+1}^{n-1} b_i
    for (std::size_t k = n; k-- > 0;) {
      total += b[k] * c[k] * std::exp(tail);
      tail += b[k];
    }
    e[n] = total;
  }
  return e;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ConfigError("unknown format '" + name + "'; expected csv or json");
}

namespace {

// Rounds through %.10g so JSON output is as stable as the CSV.
json rounded(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(format_double(x));
}

std::string cell(double x) { return std::isfinite(x) ? format_double(x) : ""; }

}  // namespace

json report_to_json(const LadderReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"a_n", rounded(r.a_n)},
                    {"estimate", rounded(r.estimate)},
                    {"stderr", rounded(r.std_error)},
                    {"neg_a2_log", r.censored ? json(nullptr) : rounded(r.neg_a2_log)},
                    {"prediction", rounded(r.prediction)},
                    {"gap", r.censored ? json(nullptr) : rounded(r.gap)},
                    {"gap_stderr", rounded(r.gap_std_error)},
                    {"seconds", rounded(r.seconds)},
                    {"censored", r.censored},
                    {"seed", r.seed}});
  }
  return {{"metadata",
           {{"model", report.model_id},
            {"target", report.target},
            {"kind", report.kind},
            {"control_fingerprint", format_fingerprint(report.control_fingerprint)},
            {"N", report.replications},
            {"K", rounded(report.k)},
            {"gamma", rounded(report.gamma)},
            {"seed", report.seed},
            {"degenerate_kernel", report.degenerate_kernel}}},
          {"rows", rows}};
}

void emit_report(const LadderReport& report, std::ostream& out, ReportFormat format) {
  if (format == ReportFormat::Json) {
    out << report_to_json(report).dump(2) << '\n';
    return;
  }
  out << "n,a_n,estimate,stderr,neg_a2_log,prediction,gap,seconds,censored\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << cell(r.a_n) << ',' << cell(r.estimate) << ',' << cell(r.std_error) << ','
        << (r.censored ? "" : cell(r.neg_a2_log)) << ',' << cell(r.prediction) << ','
        << (r.censored ? "" : cell(r.gap)) << ',' << cell(r.seconds) << ','
        << (r.censored ? 1 : 0) << '\n';
  }
}

void write_report(const LadderReport& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open report file '" + path + "' for writing");
  emit_report(report, out, format);
  out.flush();
  if (!out) throw Error("failed writing report file '" + path + "'");
}

}  // namespace modev
