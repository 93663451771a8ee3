#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modev/errors.hpp"
#include "modev/importance.hpp"
#include "modev/model.hpp"
#include "modev/ratefn.hpp"

namespace modev {

/// Either an event probability or a Laplace functional.
struct LadderTarget {
  std::optional<Event> event;
  FunctionalPtr functional;

  static LadderTarget probability(Event e) { return {std::move(e), nullptr}; }
  static LadderTarget laplace(FunctionalPtr f) { return {std::nullopt, std::move(f)}; }
  std::string describe() const;
};

struct LadderOptions {
  std::int64_t replications = 100000;
  std::optional<double> k;  ///< defaults to default_truncation(u*)
  std::uint64_t seed = 0;
  int threads = 1;
  int rate_grid = kDefaultRateGrid;
  bool record_timing = true;  ///< false writes 0 seconds (byte-stable reports)
};

struct LadderRow {
  int n = 0;
  double a_n = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double neg_a2_log = 0.0;   ///< -a^2 log p for probabilities, the estimate for Laplace
  double prediction = 0.0;
  double gap = 0.0;          ///< |neg_a2_log - prediction|
  double gap_std_error = 0.0;
  double seconds = 0.0;
  bool censored = false;     ///< no replication hit the event
  std::uint64_t seed = 0;
};

struct LadderReport {
  std::string model_id;
  std::string target;
  std::string kind;  ///< "probability" or "laplace"
  std::uint64_t control_fingerprint = 0;
  std::int64_t replications = 0;
  double k = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  bool degenerate_kernel = false;
  std::vector<LadderRow> rows;
};

/// Thrown when a rung fails; the rows completed so far are kept.
class LadderError : public Error {
 public:
  LadderError(const std::string& what, LadderReport partial)
      : Error(what), partial_(std::move(partial)) {}
  const LadderReport& partial() const { return partial_; }

 private:
  LadderReport partial_;
};

/// Per rung: u* from the rate problem, the tilt schedule, then the IS run.
/// Rung seeds are derived from (seed, n).
LadderReport run_ladder(const ModelSpec& spec, const LadderTarget& target,
                        const std::vector<int>& n_list, const LadderOptions& options);

struct ConvergenceVerdict {
  bool pass = false;
  double final_gap = 0.0;
  int inversions = 0;
  double largest_inversion = 0.0;
  std::string detail;
};

/// Pass iff the final gap is <= tol_final and the gaps are nonincreasing
/// except for at most one rise no larger than the rung's std error.
ConvergenceVerdict check_convergence(const LadderReport& report, double tol_final);
ConvergenceVerdict check_convergence(const std::vector<double>& gaps,
                                     const std::vector<double>& std_errors, double tol_final);

/// e_n = c_n + sum_{k<n} b_k c_k exp(sum_{i=k+1}^{n-1} b_i) for every n.
std::vector<double> discrete_gronwall_envelope(const std::vector<double>& b,
                                               const std::vector<double>& c);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& name);
nlohmann::json report_to_json(const LadderReport& report);
/// CSV: n,a_n,estimate,stderr,neg_a2_log,prediction,gap,seconds,censored.
/// JSON: {"metadata": {...}, "rows": [...]} with sorted keys. Numbers use
/// %.10g; censored and infinite cells are empty in CSV and null in JSON.
void emit_report(const LadderReport& report, std::ostream& out, ReportFormat format);
/// Writes to `path`; I/O failures raise Error naming the path.
void write_report(const LadderReport& report, const std::string& path, ReportFormat format);

}  // namespace modev
