#include "modev/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modev/dynamics.hpp"
#include "modev/format.hpp"
#include "modev/importance.hpp"
#include "modev/model_io.hpp"
#include "modev/parallel.hpp"
#include "modev/simulate.hpp"

namespace modev {

using nlohmann::json;

namespace {

const std::vector<std::string> kTasks = {"validate", "simulate", "rate", "laplace", "estimate", "ladder"};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::string body = text;
  std::replace_if(body.begin(), body.end(), [](char c) { return c == ',' || c == ';'; }, ' ');
  std::istringstream in(body);
  std::vector<double> values;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError("cannot read '" + tok + "' in " + what);
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError(what + " is empty");
  return values;
}

std::vector<int> to_int_list(const std::vector<double>& values, const std::string& what) {
  std::vector<int> out;
  for (double v : values) {
    if (v != std::floor(v) || v < 1 || v > 2e9) throw ConfigError(what + " must hold positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::optional<double> parse_k(const std::string& text) {
  if (text == "auto") return std::nullopt;
  const auto v = parse_list(text, "K");
  if (v.size() != 1) throw ConfigError("K must be a single number or 'auto'");
  return v[0];
}

void apply_json(const json& doc, RunConfig& cfg) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      std::string msg = "unknown key '" + key + "'";
      if (auto s = suggest_key(key)) msg += " (did you mean '" + *s + "'?)";
      throw ConfigError(msg);
    }
  }
  try {
    if (doc.contains("task")) cfg.task = doc["task"].get<std::string>();
    if (doc.contains("model")) {
      // Either a catalog id / path or an inline model document.
      if (doc["model"].is_object()) {
        cfg.model = doc["model"].dump();
      } else {
        cfg.model = doc["model"].get<std::string>();
      }
    }
    if (doc.contains("gamma")) cfg.gamma = doc["gamma"].get<double>();
    if (doc.contains("n")) cfg.n = doc["n"].get<int>();
    if (doc.contains("n_list")) cfg.n_list = doc["n_list"].get<std::vector<int>>();
    if (doc.contains("N")) cfg.replications = doc["N"].get<std::int64_t>();
    if (doc.contains("K")) {
      if (doc["K"].is_string()) {
        cfg.k = parse_k(doc["K"].get<std::string>());
      } else {
        cfg.k = doc["K"].get<double>();
      }
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
    if (doc.contains("format")) cfg.format = doc["format"].get<std::string>();
    if (doc.contains("json")) cfg.json = doc["json"].get<bool>();
    if (doc.contains("dump")) cfg.dump = doc["dump"].get<std::string>();
    if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
    if (doc.contains("event")) cfg.event = doc["event"].get<std::string>();
    if (doc.contains("functional")) cfg.functional = doc["functional"].get<std::string>();
    if (doc.contains("target")) {
      cfg.target = doc["target"].is_array() ? doc["target"].get<std::vector<double>>()
                                            : std::vector<double>{doc["target"].get<double>()};
    }
    if (doc.contains("control")) cfg.control = doc["control"].get<std::string>();
    if (doc.contains("m")) cfg.m = doc["m"].get<int>();
    if (doc.contains("probes")) cfg.probes = doc["probes"].get<int>();
    if (doc.contains("timing")) cfg.timing = doc["timing"].get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value in config: ") + e.what());
  }
}

void check_values(const RunConfig& cfg) {
  if (std::find(kTasks.begin(), kTasks.end(), cfg.task) == kTasks.end()) {
    throw ConfigError("unknown task '" + cfg.task + "'");
  }
  parse_report_format(cfg.format);
  if (cfg.control != "optimal" && cfg.control != "zero") {
    throw ConfigError("control must be 'optimal' or 'zero'");
  }
  if (cfg.n && *cfg.n < 1) throw ConfigError("n must be positive");
  if (cfg.replications && *cfg.replications < 2) throw ConfigError("N must be at least 2");
  if (cfg.k && !(*cfg.k > 0.0)) throw ConfigError("K must be positive");
  if (cfg.threads < 1) throw ConfigError("threads must be positive");
  if (cfg.m < 10) throw ConfigError("m must be at least 10");
  if (cfg.probes < 1) throw ConfigError("probes must be positive");
  for (std::size_t i = 1; i < cfg.n_list.size(); ++i) {
    if (cfg.n_list[i] <= cfg.n_list[i - 1]) throw ConfigError("n_list must be strictly increasing");
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "task", "model", "gamma", "n", "n_list", "N", "K", "seed", "out", "format",
      "json", "dump", "threads", "event", "functional", "target", "control", "m", "probes", "timing"};
  return keys;
}

std::optional<std::string> suggest_key(const std::string& key) {
  std::optional<std::string> best;
  std::size_t best_d = 3;
  for (const auto& k : config_keys()) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"moderate-deviation rates and importance sampling", "modev"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  for (const auto& t : kTasks) app.add_subcommand(t, "run the " + t + " task");

  std::string model, config, out, format, dump, event, functional, target, n_list, k_text, control;
  double gamma = 0.0;
  int n = 0, threads = 1, m = 0, probes = 0;
  std::int64_t replications = 0;
  std::uint64_t seed = 0;
  bool as_json = false, no_timing = false;
  auto* o_model = app.add_option("--model", model, "catalog id or model JSON path");
  auto* o_config = app.add_option("--config", config, "JSON config file");
  auto* o_gamma = app.add_option("--gamma", gamma, "a(n) = n^-gamma, gamma in (0, 1/2)");
  auto* o_n = app.add_option("--n", n, "number of steps");
  auto* o_N = app.add_option("--N", replications, "replications");
  auto* o_K = app.add_option("--K", k_text, "truncation level or 'auto'");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_out = app.add_option("--out", out, "output file");
  auto* o_format = app.add_option("--format", format, "csv or json");
  auto* o_json = app.add_flag("--json", as_json, "print one JSON object on stdout");
  auto* o_dump = app.add_option("--dump", dump, "trajectory CSV path");
  auto* o_threads = app.add_option("--threads", threads, "worker threads");
  auto* o_event = app.add_option("--event", event, "terminal>=c | terminal<=c | halfspace v,c | supnorm>=c");
  auto* o_functional = app.add_option("--functional", functional, "linear v | quadratic w,y | threshold v,c,w | constant c");
  auto* o_target = app.add_option("--target", target, "terminal point y (comma separated)");
  auto* o_nlist = app.add_option("--n-list", n_list, "ladder rungs (comma separated)");
  auto* o_control = app.add_option("--control", control, "optimal or zero");
  auto* o_m = app.add_option("--m", m, "rate grid size");
  auto* o_probes = app.add_option("--probes", probes, "validation probes");
  auto* o_timing = app.add_flag("--no-timing", no_timing, "write 0 for runtimes");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  RunConfig cfg;
  if (o_config->count()) {
    std::ifstream in(config);
    if (!in) throw ConfigError("cannot read config file '" + config + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("malformed JSON in '" + config + "': " + e.what());
    }
    apply_json(doc, cfg);
  }
  const auto subs = app.get_subcommands();
  if (!subs.empty()) cfg.task = subs.front()->get_name();
  if (o_model->count()) cfg.model = model;
  if (o_gamma->count()) cfg.gamma = gamma;
  if (o_n->count()) cfg.n = n;
  if (o_N->count()) cfg.replications = replications;
  if (o_K->count()) cfg.k = parse_k(k_text);
  if (o_seed->count()) cfg.seed = seed;
  if (o_out->count()) cfg.out = out;
  if (o_format->count()) cfg.format = format;
  if (o_json->count()) cfg.json = as_json;
  if (o_dump->count()) cfg.dump = dump;
  if (o_threads->count()) cfg.threads = threads;
  if (o_event->count()) cfg.event = event;
  if (o_functional->count()) cfg.functional = functional;
  if (o_target->count()) cfg.target = parse_list(target, "target");
  if (o_nlist->count()) cfg.n_list = to_int_list(parse_list(n_list, "n-list"), "n-list");
  if (o_control->count()) cfg.control = control;
  if (o_m->count()) cfg.m = m;
  if (o_probes->count()) cfg.probes = probes;
  if (o_timing->count()) cfg.timing = !no_timing;

  if (cfg.task.empty()) throw ConfigError("missing required key 'task'");
  check_values(cfg);
  return cfg;
}

void require_task_parameters(const RunConfig& cfg) {
  auto missing = [&](const std::string& key) {
    throw ConfigError("missing required key '" + key + "' for task " + cfg.task);
  };
  if (cfg.model.empty()) missing("model");
  if ((cfg.task == "simulate" || cfg.task == "estimate") && !cfg.n) missing("n");
  if (cfg.task == "rate" && cfg.target.empty() && cfg.event.empty()) missing("target");
  if (cfg.task == "laplace" && cfg.functional.empty()) missing("functional");
  if ((cfg.task == "estimate" || cfg.task == "ladder") && cfg.event.empty() &&
      cfg.functional.empty()) {
    missing("event");
  }
}

FunctionalPtr parse_functional(const std::string& text, int dim) {
  std::istringstream in(text);
  std::string head;
  in >> head;
  std::string rest;
  std::getline(in, rest);
  auto numbers = [&](std::size_t count) {
    const auto v = parse_list(rest, "functional '" + text + "'");
    if (v.size() != count) {
      throw ConfigError("functional '" + text + "' needs " + std::to_string(count) + " numbers");
    }
    return v;
  };
  auto vec = [&](const std::vector<double>& v, std::size_t from) {
    Vec out(dim);
    for (int k = 0; k < dim; ++k) out(k) = v[from + k];
    return out;
  };
  if (head == "constant") return constant_functional(numbers(1)[0]);
  if (head == "linear") return terminal_linear(vec(numbers(dim), 0));
  if (head == "quadratic") {
    const auto v = numbers(dim + 1);
    return terminal_quadratic(v[0], vec(v, 1));
  }
  if (head == "threshold") {
    const auto v = numbers(dim + 2);
    return terminal_threshold(vec(v, 0), v[dim], v[dim + 1]);
  }
  throw ConfigError("unknown functional '" + text +
                    "'; expected linear v, quadratic w,y, threshold v,c,w or constant c");
}

namespace {

ModelSpec resolve_model(const RunConfig& cfg) {
  ModelSpec spec;
  if (!cfg.model.empty() && cfg.model.front() == '{') {
    spec = model_from_json(json::parse(cfg.model));
  } else {
    spec = load_model(cfg.model);
  }
  if (cfg.gamma) {
    spec = make_model(spec.id, spec.x0, spec.drift, spec.kernel, *cfg.gamma, spec.bounds);
  }
  return spec;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void print_table(std::ostream& out, const json& obj) {
  std::size_t width = 0;
  for (const auto& [k, _] : obj.items()) width = std::max(width, k.size());
  for (const auto& [k, v] : obj.items()) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << k;
    if (v.is_number_float()) {
      out << format_double(v.get<double>());
    } else if (v.is_string()) {
      out << v.get<std::string>();
    } else {
      out << v.dump();
    }
    out << '\n';
  }
}

void emit(const RunConfig& cfg, std::ostream& out, const json& obj) {
  if (cfg.json) {
    out << obj.dump() << '\n';
  } else {
    print_table(out, obj);
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path + "'");
}

struct Target {
  std::optional<Event> event;
  FunctionalPtr functional;
};

Target resolve_target(const RunConfig& cfg, const ModelSpec& spec) {
  Target t;
  if (!cfg.event.empty()) {
    t.event = parse_event(cfg.event, spec.dim);
  } else if (!cfg.functional.empty()) {
    t.functional = parse_functional(cfg.functional, spec.dim);
  }
  return t;
}

// u* for the target, or zero for plain Monte Carlo.
ControlPath choose_control(const RunConfig& cfg, const ModelSpec& spec, const Target& t,
                           double& prediction) {
  const LinearizedFlow flow = linearize(spec, cfg.m);
  const RateSolution rate = t.event ? event_rate(flow, *t.event) : laplace_value(flow, *t.functional);
  prediction = rate.value;
  if (cfg.control == "zero" || !rate.control) return ControlPath::zero(spec.dim, flow.steps());
  return *rate.control;
}

int task_validate(const RunConfig& cfg, const ModelSpec& spec, std::ostream& out) {
  const ValidationReport rep = validate_model(spec, cfg.probes, cfg.seed);
  json clauses = json::array();
  for (const auto& c : rep.clauses) {
    clauses.push_back({{"name", c.name},
                       {"measured", finite_or_null(c.measured)},
                       {"bound", finite_or_null(c.bound)},
                       {"pass", c.pass},
                       {"detail", c.detail}});
  }
  if (cfg.json) {
    out << json{{"task", "validate"}, {"model", spec.id}, {"pass", rep.pass}, {"partial", rep.partial},
                {"probes", rep.probe_count}, {"probe_radius", rep.probe_radius}, {"clauses", clauses}}
               .dump()
        << '\n';
  } else {
    out << "model " << spec.id << ": " << (rep.pass ? "PASS" : "FAIL") << " (partial check on "
        << rep.probe_count << " probes, radius " << format_double(rep.probe_radius) << ")\n";
    for (const auto& c : rep.clauses) {
      out << "  " << std::left << std::setw(28) << c.name << (c.pass ? "pass  " : "FAIL  ")
          << "measured " << format_double(c.measured) << "  bound " << format_double(c.bound);
      if (!c.detail.empty()) out << "  " << c.detail;
      out << '\n';
    }
  }
  return rep.pass ? kExitOk : kExitNumerical;
}

int task_rate(const RunConfig& cfg, const ModelSpec& spec, std::ostream& out) {
  const LinearizedFlow flow = linearize(spec, cfg.m);
  RateSolution sol;
  std::string what;
  if (!cfg.target.empty()) {
    if (static_cast<int>(cfg.target.size()) != spec.dim) {
      throw ConfigError("target needs " + std::to_string(spec.dim) + " components");
    }
    const Vec y = Eigen::Map<const Vec>(cfg.target.data(), spec.dim);
    sol = terminal_rate(flow, y);
    what = "terminal " + format_vector(y);
  } else {
    const Event e = parse_event(cfg.event, spec.dim);
    sol = event_rate(flow, e);
    what = e.describe();
  }
  if (!cfg.out.empty()) write_text(cfg.out, sol.to_json().dump(2) + "\n");
  emit(cfg, out,
       {{"task", "rate"}, {"model", spec.id}, {"target", what}, {"value", finite_or_null(sol.value)},
        {"infinite", !std::isfinite(sol.value)}, {"grid", sol.diagnostics.grid_size},
        {"method", sol.diagnostics.method}});
  return kExitOk;
}

int task_laplace(const RunConfig& cfg, const ModelSpec& spec, std::ostream& out) {
  const FunctionalPtr f = parse_functional(cfg.functional, spec.dim);
  const RateSolution sol = laplace_value(spec, *f, cfg.m);
  if (!cfg.out.empty()) write_text(cfg.out, sol.to_json().dump(2) + "\n");
  json result = {{"task", "laplace"},
                 {"model", spec.id},
                 {"functional", f->describe()},
                 {"value", sol.value},
                 {"iterations", sol.diagnostics.iterations},
                 {"gradient_norm", sol.diagnostics.gradient_norm}};
  if (cfg.n) {
    const ControlPath& u = *sol.control;
    const double k = cfg.k ? *cfg.k : default_truncation(u);
    const ISEstimate est = is_laplace(spec, *f, u, k, *cfg.n, cfg.replications.value_or(10000),
                                      cfg.seed, {cfg.threads});
    result["estimate"] = est.to_json();
  }
  emit(cfg, out, result);
  return kExitOk;
}

int task_estimate(const RunConfig& cfg, const ModelSpec& spec, std::ostream& out) {
  const Target t = resolve_target(cfg, spec);
  double prediction = 0.0;
  const ControlPath u = choose_control(cfg, spec, t, prediction);
  const double k = cfg.k ? *cfg.k : default_truncation(u);
  const std::int64_t reps = cfg.replications.value_or(10000);
  const ISEstimate est = t.event
                             ? is_probability(spec, *t.event, u, k, *cfg.n, reps, cfg.seed, {cfg.threads})
                             : is_laplace(spec, *t.functional, u, k, *cfg.n, reps, cfg.seed, {cfg.threads});
  json result = est.to_json();
  result["task"] = "estimate";
  result["model"] = spec.id;
  result["target"] = t.event ? t.event->describe() : t.functional->describe();
  result["K"] = k;
  result["prediction"] = finite_or_null(prediction);
  if (!cfg.out.empty()) write_text(cfg.out, result.dump(2) + "\n");
  emit(cfg, out, result);
  return est.degenerate ? kExitNumerical : kExitOk;
}

int task_simulate(const RunConfig& cfg, const ModelSpec& spec, std::ostream& out) {
  const int n = *cfg.n;
  const std::int64_t reps = cfg.replications.value_or(1);
  ControlSchedule schedule = ControlSchedule::zero(spec.dim, n);
  double k = 0.0;
  if (!cfg.event.empty() || !cfg.functional.empty()) {
    const Target t = resolve_target(cfg, spec);
    double prediction = 0.0;
    const ControlPath u = choose_control(cfg, spec, t, prediction);
    k = cfg.k ? *cfg.k : default_truncation(u);
    schedule = tilt_schedule_from_control(spec, u, k, n);
  }
  const PathSampler sampler(spec, n);
  sampler.prepare(schedule);
  std::vector<ControlledTrajectory> runs(static_cast<std::size_t>(reps));
  {
    std::vector<PathSampler::Workspace> ws(cfg.threads, sampler.make_workspace());
    parallel_for(reps, cfg.threads, [&](std::int64_t r, int w) {
      sampler.run(schedule, cfg.seed, r, ws[w], &runs[static_cast<std::size_t>(r)]);
    });
  }
  Vec sum = Vec::Zero(spec.dim), sum2 = Vec::Zero(spec.dim);
  double llr = 0.0, cost = 0.0, resid = 0.0, defect = 0.0;
  for (const auto& tr : runs) {
    const Vec y1 = tr.ybar.col(n);
    sum += y1;
    sum2 += y1.cwiseProduct(y1);
    llr += tr.log_likelihood_ratio();
    cost += control_cost(spec, schedule, tr);
    resid += martingale_residual(tr, spec, n);
    defect = std::max(defect, identity_defect(tr));
  }
  const double r = static_cast<double>(reps);
  const Vec mean = sum / r;
  const Vec var = reps > 1 ? Vec((sum2 - r * mean.cwiseProduct(mean)) / (r - 1.0)) : Vec::Zero(spec.dim);
  if (!cfg.dump.empty()) {
    std::ofstream f(cfg.dump, std::ios::binary);
    if (!f) throw Error("cannot open '" + cfg.dump + "' for writing");
    write_trajectory_csv(runs.front(), f);
  }
  json result = {{"task", "simulate"},
                 {"model", spec.id},
                 {"n", n},
                 {"N", reps},
                 {"a_n", spec.a(n)},
                 {"K", k},
                 {"terminal_mean", format_vector(mean)},
                 {"terminal_variance", format_vector(var)},
                 {"mean_log_lr", llr / r},
                 {"mean_control_cost", cost / r},
                 {"mean_martingale_residual", resid / r},
                 {"identity_defect", defect}};
  if (!cfg.out.empty()) write_text(cfg.out, result.dump(2) + "\n");
  emit(cfg, out, result);
  return kExitOk;
}

int task_ladder(const RunConfig& cfg, const ModelSpec& spec, std::ostream& out, std::ostream& err) {
  const Target t = resolve_target(cfg, spec);
  const LadderTarget target = t.event ? LadderTarget::probability(*t.event)
                                      : LadderTarget::laplace(t.functional);
  LadderOptions opt;
  opt.replications = cfg.replications.value_or(100000);
  opt.k = cfg.k;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  opt.rate_grid = cfg.m;
  opt.record_timing = cfg.timing;
  const ReportFormat format = parse_report_format(cfg.format);
  auto publish = [&](const LadderReport& report) {
    if (!cfg.out.empty()) write_report(report, cfg.out, format);
    if (cfg.json) {
      out << report_to_json(report).dump() << '\n';
    } else if (cfg.out.empty()) {
      emit_report(report, out, format);
    } else {
      emit_report(report, out, ReportFormat::Csv);
    }
  };
  try {
    const LadderReport report = run_ladder(spec, target, cfg.n_list, opt);
    publish(report);
  } catch (const LadderError& e) {
    publish(e.partial());
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_task_parameters(cfg);
  const ModelSpec spec = resolve_model(cfg);
  if (cfg.task == "validate") return task_validate(cfg, spec, out);
  if (cfg.task == "rate") return task_rate(cfg, spec, out);
  if (cfg.task == "laplace") return task_laplace(cfg, spec, out);
  if (cfg.task == "estimate") return task_estimate(cfg, spec, out);
  if (cfg.task == "simulate") return task_simulate(cfg, spec, out);
  if (cfg.task == "ladder") return task_ladder(cfg, spec, out, err);
  throw ConfigError("unknown task '" + cfg.task + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_config(args);
    return dispatch(cfg, out, err);
  } catch (const CLI::CallForHelp&) {
    out << "usage: modev <validate|simulate|rate|laplace|estimate|ladder> [--model ID|PATH]\n"
           "  [--config FILE] [--gamma G] [--n N] [--N REPS] [--K K|auto] [--seed S]\n"
           "  [--out PATH] [--format csv|json] [--json] [--dump PATH] [--threads T]\n"
           "  [--event SPEC] [--functional SPEC] [--target Y] [--n-list LIST]\n"
           "  [--control optimal|zero] [--m GRID] [--probes P] [--no-timing]\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace modev
