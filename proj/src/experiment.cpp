#include "qwalk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qwalk/parallel_walk.hpp"

namespace qwalk {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fig1_chain: return "fig1_chain";
    case ExperimentKind::fig2_random: return "fig2_random";
    case ExperimentKind::fig3_parallel: return "fig3_parallel";
    case ExperimentKind::spectrum_suite: return "spectrum_suite";
    case ExperimentKind::cost_report: return "cost_report";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::fig1_chain, ExperimentKind::fig2_random, ExperimentKind::fig3_parallel,
                 ExperimentKind::spectrum_suite, ExperimentKind::cost_report})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

namespace {

const std::vector<std::string> kMethods{"classical", "zeno", "zeno_rewind", "unitary"};

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(where + "." + key + ": " + e.what());
  }
}

std::vector<std::size_t> parse_sizes(const json& j) {
  if (j.is_array()) return j.get<std::vector<std::size_t>>();
  check_keys(j, {"min", "max", "step"}, "sizes");
  const auto lo = j.at("min").get<std::size_t>();
  const auto hi = j.at("max").get<std::size_t>();
  const auto step = j.value("step", std::size_t{1});
  if (step == 0 || hi < lo) throw std::invalid_argument("sizes: need min <= max and step >= 1");
  std::vector<std::size_t> out;
  for (auto n = lo; n <= hi; n += step) out.push_back(n);
  return out;
}

HeuristicConfig parse_heuristics(const json& j, HeuristicConfig h) {
  check_keys(j, {"beta_final", "confidence", "rule", "target", "classical_padded", "v_completion",
                 "unitary_duration", "scan"},
             "heuristics");
  read(j, "beta_final", h.beta_final, "heuristics");
  read(j, "confidence", h.confidence, "heuristics");
  read(j, "classical_padded", h.classical_padded, "heuristics");
  if (j.contains("rule")) h.rule = acceptance_rule_from_string(j["rule"].get<std::string>());
  if (j.contains("target")) h.target = target_mode_from_string(j["target"].get<std::string>());
  if (j.contains("v_completion")) h.completion = v_completion_from_string(j["v_completion"].get<std::string>());
  if (j.contains("unitary_duration"))
    h.unitary_duration = unitary_duration_from_string(j["unitary_duration"].get<std::string>());
  if (j.contains("scan")) {
    const auto& s = j["scan"];
    check_keys(s, {"growth", "stop_factor", "refine_fraction", "refine_points", "max_duration"}, "heuristics.scan");
    read(s, "growth", h.scan.growth, "scan");
    read(s, "stop_factor", h.scan.stop_factor, "scan");
    read(s, "refine_fraction", h.scan.refine_fraction, "scan");
    read(s, "refine_points", h.scan.refine_points, "scan");
    read(s, "max_duration", h.scan.max_duration, "scan");
  }
  return h;
}

json heuristics_json(const HeuristicConfig& h) {
  return {{"beta_final", h.beta_final},
          {"confidence", h.confidence},
          {"rule", to_string(h.rule)},
          {"target", to_string(h.target)},
          {"classical_padded", h.classical_padded},
          {"v_completion", to_string(h.completion)},
          {"unitary_duration", to_string(h.unitary_duration)},
          {"scan",
           {{"growth", h.scan.growth},
            {"stop_factor", h.scan.stop_factor},
            {"refine_fraction", h.scan.refine_fraction},
            {"refine_points", h.scan.refine_points},
            {"max_duration", h.scan.max_duration}}}};
}

bool is_heuristic(ExperimentKind k) { return k == ExperimentKind::fig1_chain || k == ExperimentKind::fig2_random; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string csv_escape(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

void write_json_file(const fs::path& p, const json& j) {
  const fs::path tmp = p.string() + ".tmp";
  {
    auto out = open_out(tmp);
    out << j.dump(2) << '\n';
    close_out(out, tmp);
  }
  fs::rename(tmp, p);
}

std::optional<json> read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + p.string() + "': " + ec.message());
}

/// Runs task(i) for i in [0, count) on `workers` threads. Tasks must not throw.
void run_pool(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) task(i);
  };
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
}

std::string instance_id(std::size_t n, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "n%03zu-i%04zu", n, index);
  return buf;
}

struct Instance {
  std::string id;
  std::size_t n;
  std::size_t index;
  std::uint64_t seed;
};

std::vector<Instance> make_instances(const ExperimentConfig& cfg) {
  std::vector<Instance> out;
  for (auto n : cfg.sizes)
    for (std::size_t i = 0; i < cfg.instances_per_size; ++i)
      out.push_back({instance_id(n, i), n, i, instance_seed(*cfg.master_seed, n, i)});
  return out;
}

IsingModel instance_model(const ExperimentConfig& cfg, const Instance& inst) {
  if (cfg.kind == ExperimentKind::fig1_chain) return build_chain(inst.n);
  if (cfg.kind == ExperimentKind::spectrum_suite && cfg.spectrum.model == "chain") return build_chain(inst.n);
  return build_random_sparse(inst.n, cfg.pair_count.value_or(default_pair_count(inst.n)), inst.seed);
}

std::string header_comment(const ExperimentConfig& cfg) {
  return "# qwalk " + std::string(kVersion) + " schema " + std::to_string(kResultSchema) + " flags " +
         design_flags(cfg).dump();
}

const char* kResultsHeader = "instance_id,n,seed,method,min_tts,argmin_duration,success_prob,wall_time_s";

void write_results_csv(const fs::path& p, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  auto out = open_out(p);
  out << header_comment(cfg) << '\n' << kResultsHeader << '\n';
  for (const auto& r : rows)
    out << r.instance_id << ',' << r.n << ',' << r.seed << ',' << r.method << ',' << fmt(r.min_tts) << ','
        << fmt(r.argmin_duration) << ',' << fmt(r.success_prob) << ',' << fmt(r.wall_time_s) << '\n';
  close_out(out, p);
}

void write_errors_csv(const fs::path& p, const ExperimentConfig& cfg, const std::vector<ErrorRow>& errors) {
  auto out = open_out(p);
  out << header_comment(cfg) << '\n' << "instance_id,n,seed,method,message\n";
  for (const auto& e : errors)
    out << e.instance_id << ',' << e.n << ',' << e.seed << ',' << e.method << ',' << csv_escape(e.message) << '\n';
  close_out(out, p);
}

json row_to_json(const ResultRow& r) {
  return {{"instance_id", r.instance_id}, {"n", r.n},
          {"seed", r.seed},               {"method", r.method},
          {"min_tts", fmt(r.min_tts)},    {"argmin_duration", fmt(r.argmin_duration)},
          {"success_prob", fmt(r.success_prob)}, {"wall_time_s", fmt(r.wall_time_s)}};
}

ResultRow row_from_json(const json& j) {
  return {j.at("instance_id").get<std::string>(),
          j.at("n").get<std::size_t>(),
          j.at("seed").get<std::uint64_t>(),
          j.at("method").get<std::string>(),
          parse_double(j.at("min_tts").get<std::string>()),
          parse_double(j.at("argmin_duration").get<std::string>()),
          parse_double(j.at("success_prob").get<std::string>()),
          parse_double(j.at("wall_time_s").get<std::string>())};
}

json error_to_json(const ErrorRow& e) {
  return {{"instance_id", e.instance_id}, {"n", e.n}, {"seed", e.seed}, {"method", e.method}, {"message", e.message}};
}

ErrorRow error_from_json(const json& j) {
  return {j.at("instance_id").get<std::string>(), j.at("n").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
          j.at("method").get<std::string>(), j.at("message").get<std::string>()};
}

/// Everything a stored instance result depends on; a mismatch forces recomputation.
json instance_fingerprint(const ExperimentConfig& cfg) {
  json f = {{"schema", kResultSchema}, {"kind", to_string(cfg.kind)}, {"master_seed", *cfg.master_seed}};
  if (is_heuristic(cfg.kind)) {
    f["heuristics"] = heuristics_json(cfg.heuristics);
    f["pair_count"] = cfg.pair_count ? json(*cfg.pair_count) : json(nullptr);
  }
  return f;
}

// ---------------------------------------------------------------------------------------------
// Heuristic comparison (chains and random models)

struct InstanceResult {
  std::vector<ResultRow> rows;
  std::vector<ErrorRow> errors;
  std::map<std::string, TTSCurve> curves;
};

InstanceResult run_heuristics(const ExperimentConfig& cfg, const Instance& inst) {
  InstanceResult res;
  WalkTablePtr table;
  try {
    table = make_walk_table(instance_model(cfg, inst), MoveSet::single_spin_flips(inst.n));
  } catch (const std::exception& e) {
    res.errors.push_back({inst.id, inst.n, inst.seed, "model", e.what()});
    return res;
  }
  for (const auto& method : cfg.methods) {
    const auto start = std::chrono::steady_clock::now();
    try {
      TTSCurve curve;
      if (method == "classical") curve = classical_min_tts(table, cfg.heuristics);
      else if (method == "zeno") curve = zeno_min_tts(table, cfg.heuristics, false);
      else if (method == "zeno_rewind") curve = zeno_min_tts(table, cfg.heuristics, true);
      else curve = unitary_min_tts(table, cfg.heuristics);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const auto& best = curve.best();
      res.rows.push_back({inst.id, inst.n, inst.seed, method, best.tts, best.duration, best.success_prob, wall});
      res.curves.emplace(method, std::move(curve));
    } catch (const std::exception& e) {
      res.errors.push_back({inst.id, inst.n, inst.seed, method, e.what()});
    }
  }
  return res;
}

json instance_to_json(const ExperimentConfig& cfg, const Instance& inst, const InstanceResult& r) {
  json j = {{"instance_id", inst.id}, {"n", inst.n}, {"seed", inst.seed}, {"fingerprint", instance_fingerprint(cfg)}};
  j["rows"] = json::array();
  for (const auto& row : r.rows) j["rows"].push_back(row_to_json(row));
  j["errors"] = json::array();
  for (const auto& e : r.errors) j["errors"].push_back(error_to_json(e));
  j["curves"] = json::object();
  for (const auto& [method, curve] : r.curves) {
    json rows = json::array();
    for (const auto& c : curve.rows) rows.push_back({fmt(c.duration), fmt(c.success_prob), fmt(c.tts)});
    j["curves"][method] = {{"argmin", curve.argmin}, {"rows", rows}};
  }
  return j;
}

std::optional<InstanceResult> instance_from_json(const ExperimentConfig& cfg, const json& j) {
  try {
    if (j.at("fingerprint") != instance_fingerprint(cfg)) return std::nullopt;
    InstanceResult r;
    for (const auto& row : j.at("rows")) r.rows.push_back(row_from_json(row));
    for (const auto& e : j.at("errors")) r.errors.push_back(error_from_json(e));
    for (const auto& [method, c] : j.at("curves").items()) {
      TTSCurve curve;
      curve.argmin = c.at("argmin").get<std::size_t>();
      for (const auto& row : c.at("rows"))
        curve.rows.push_back({parse_double(row[0].get<std::string>()), parse_double(row[1].get<std::string>()),
                              parse_double(row[2].get<std::string>())});
      r.curves.emplace(method, std::move(curve));
    }
    // Only methods requested now must all be present.
    for (const auto& m : cfg.methods) {
      const bool have = std::any_of(r.rows.begin(), r.rows.end(), [&](const auto& x) { return x.method == m; }) ||
                        std::any_of(r.errors.begin(), r.errors.end(), [&](const auto& x) { return x.method == m; });
      if (!have) return std::nullopt;
    }
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

json fits_json(const std::map<std::string, SpeedupFit>& fits) {
  json out = json::object();
  for (const auto& [method, f] : fits)
    out[method] = {{"exponent", f.exponent}, {"intercept", f.intercept}, {"residual", f.residual},
                   {"pairs", f.pairs.size()}};
  return out;
}

RunOutcome run_heuristic_experiment(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  const fs::path inst_dir = dir / "instances";
  ensure_dir(inst_dir);
  const auto instances = make_instances(cfg);

  std::vector<std::optional<InstanceResult>> results(instances.size());
  std::size_t resumed = 0;
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (auto j = read_json_file(inst_dir / (instances[i].id + ".json")))
      if ((results[i] = instance_from_json(cfg, *j))) {
        ++resumed;
        continue;
      }
    todo.push_back(i);
  }

  std::mutex collector;
  std::exception_ptr io_failure;
  run_pool(todo.size(), cfg.workers, [&](std::size_t k) {
    const auto& inst = instances[todo[k]];
    InstanceResult r = run_heuristics(cfg, inst);
    std::lock_guard lock(collector);
    try {
      write_json_file(inst_dir / (inst.id + ".json"), instance_to_json(cfg, inst, r));
    } catch (...) {
      if (!io_failure) io_failure = std::current_exception();
    }
    results[todo[k]] = std::move(r);
  });
  if (io_failure) std::rethrow_exception(io_failure);

  RunOutcome out;
  out.resumed = resumed;
  std::vector<std::tuple<std::string, std::string, std::size_t, std::uint64_t, TTSRow>> curve_rows;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto& r = *results[i];
    out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    out.errors.insert(out.errors.end(), r.errors.begin(), r.errors.end());
  }
  auto method_rank = [](const std::string& m) {
    return std::find(kMethods.begin(), kMethods.end(), m) - kMethods.begin();
  };
  std::sort(out.rows.begin(), out.rows.end(), [&](const auto& a, const auto& b) {
    return std::pair(a.instance_id, method_rank(a.method)) < std::pair(b.instance_id, method_rank(b.method));
  });

  write_results_csv(dir / "results.csv", cfg, out.rows);
  write_errors_csv(dir / "errors.csv", cfg, out.errors);
  {
    const fs::path p = dir / "curves.csv";
    auto f = open_out(p);
    f << header_comment(cfg) << '\n' << "instance_id,n,seed,method,duration,success_prob,tts\n";
    for (std::size_t i = 0; i < instances.size(); ++i)
      for (const auto& m : kMethods) {
        auto it = results[i]->curves.find(m);
        if (it == results[i]->curves.end()) continue;
        for (const auto& c : it->second.rows)
          f << instances[i].id << ',' << instances[i].n << ',' << instances[i].seed << ',' << m << ','
            << fmt(c.duration) << ',' << fmt(c.success_prob) << ',' << fmt(c.tts) << '\n';
      }
    close_out(f, p);
  }

  json fits = json::object();
  json fit_errors = json::object();
  if (!out.rows.empty()) {
    try {
      fits = fits_json(emit_plot_data(out.rows, dir / "plot"));
    } catch (const std::exception& e) {
      fit_errors["plot"] = e.what();
    }
  }
  out.summary = {{"version", kVersion},
                 {"schema", kResultSchema},
                 {"config", to_json(cfg)},
                 {"flags", design_flags(cfg)},
                 {"instances", instances.size()},
                 {"resumed", resumed},
                 {"rows", out.rows.size()},
                 {"errors", out.errors.size()},
                 {"fits", fits}};
  if (!fit_errors.empty()) out.summary["fit_errors"] = fit_errors;
  write_json_file(dir / "summary.json", out.summary);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Parallel walk benchmark

struct TraceTask {
  WalkKind kind;
  double q;
  std::size_t seed_index;
  std::uint64_t seed;
};

std::string series_name(WalkKind kind, double q) {
  if (kind == WalkKind::standard) return "standard";
  char buf[48];
  std::snprintf(buf, sizeof buf, "parallel_q%g", q);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

RunOutcome run_fig3(const ExperimentConfig& cfg) {
  const auto& o = cfg.fig3;
  const fs::path dir = cfg.output_dir;
  const fs::path trace_dir = dir / "traces";
  ensure_dir(trace_dir);

  const std::uint64_t model_seed = instance_seed(*cfg.master_seed, o.n, 0);
  const IsingModel model = build_complete_binary(o.n, model_seed, o.ordered_pairs);
  const std::uint64_t stride = (o.sample_stride + o.n - 1) / o.n * o.n;

  std::vector<TraceTask> tasks;
  for (std::size_t s = 0; s < o.seeds; ++s) {
    // Every series starts from the same random configurations.
    const std::uint64_t seed = instance_seed(*cfg.master_seed, o.n, s + 1);
    tasks.push_back({WalkKind::standard, 1.0, s, seed});
    for (double q : o.qs) tasks.push_back({WalkKind::parallel, q, s, seed});
  }
  const json fingerprint = {{"schema", kResultSchema}, {"n", o.n},           {"beta", o.beta},
                            {"budget", o.budget},      {"stride", stride},   {"model_seed", model_seed},
                            {"ordered_pairs", o.ordered_pairs}};

  std::vector<EnergyTrace> traces(tasks.size());
  std::vector<std::optional<std::string>> failures(tasks.size());
  std::size_t resumed = 0;
  std::vector<std::size_t> todo;
  auto trace_path = [&](const TraceTask& t) {
    return trace_dir / (series_name(t.kind, t.q) + "_s" + std::to_string(t.seed_index) + ".json");
  };
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (auto j = read_json_file(trace_path(tasks[i]))) {
      try {
        if (j->at("fingerprint") == fingerprint && j->at("seed").get<std::uint64_t>() == tasks[i].seed) {
          auto& tr = traces[i];
          tr.kind = tasks[i].kind;
          tr.q = j->at("q").get<double>();
          tr.beta = o.beta;
          tr.seed = tasks[i].seed;
          tr.min_energy = j->at("min_energy").get<double>();
          tr.max_resync_error = j->at("max_resync_error").get<double>();
          for (const auto& p : j->at("points")) tr.points.push_back({p[0].get<double>(), p[1].get<double>()});
          ++resumed;
          continue;
        }
      } catch (const json::exception&) {
      }
    }
    todo.push_back(i);
  }

  std::mutex collector;
  std::exception_ptr io_failure;
  run_pool(todo.size(), cfg.workers, [&](std::size_t k) {
    const std::size_t i = todo[k];
    const auto& t = tasks[i];
    try {
      EnergyTrace tr = energy_trace(model, t.kind, t.q, o.beta, o.budget, t.seed, stride);
      json j = {{"fingerprint", fingerprint}, {"seed", t.seed}, {"q", tr.q}, {"min_energy", tr.min_energy},
                {"max_resync_error", tr.max_resync_error}};
      j["points"] = json::array();
      for (const auto& p : tr.points) j["points"].push_back({p.normalized_step, p.energy});
      std::lock_guard lock(collector);
      try {
        write_json_file(trace_path(t), j);
      } catch (...) {
        if (!io_failure) io_failure = std::current_exception();
      }
      traces[i] = std::move(tr);
    } catch (const std::exception& e) {
      std::lock_guard lock(collector);
      failures[i] = e.what();
    }
  });
  if (io_failure) std::rethrow_exception(io_failure);

  RunOutcome out;
  out.resumed = resumed;
  double baseline = std::numeric_limits<double>::infinity();
  double worst_resync = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (failures[i]) {
      out.errors.push_back({series_name(tasks[i].kind, tasks[i].q) + "_s" + std::to_string(tasks[i].seed_index),
                            o.n, tasks[i].seed, series_name(tasks[i].kind, tasks[i].q), *failures[i]});
      continue;
    }
    baseline = std::min(baseline, traces[i].min_energy);
    worst_resync = std::max(worst_resync, traces[i].max_resync_error);
  }

  const fs::path p = dir / "traces.csv";
  {
    auto f = open_out(p);
    f << header_comment(cfg) << '\n'
      << "# n " << o.n << " beta " << fmt(o.beta) << " budget " << o.budget << " model_seed " << model_seed << '\n'
      << "# baseline " << fmt(baseline) << " (lowest energy observed across all traces)\n"
      << "series,q,seed,normalized_step,energy_above_baseline\n";
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (failures[i]) continue;
      for (const auto& pt : traces[i].points)
        f << series_name(tasks[i].kind, tasks[i].q) << ',' << fmt(traces[i].q) << ',' << tasks[i].seed << ','
          << fmt(pt.normalized_step) << ',' << fmt(pt.energy - baseline) << '\n';
    }
    close_out(f, p);
  }
  write_errors_csv(dir / "errors.csv", cfg, out.errors);

  std::map<std::string, std::vector<double>> finals;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!failures[i]) finals[series_name(tasks[i].kind, tasks[i].q)].push_back(traces[i].final_energy() - baseline);
  json medians = json::object();
  for (const auto& [name, v] : finals) medians[name] = median(v);
  json beats = json::object();
  if (finals.count("standard"))
    for (double q : o.qs) {
      const auto name = series_name(WalkKind::parallel, q);
      if (finals.count(name)) beats[name] = median(finals[name]) <= median(finals["standard"]);
    }
  out.summary = {{"version", kVersion},
                 {"schema", kResultSchema},
                 {"config", to_json(cfg)},
                 {"flags", design_flags(cfg)},
                 {"baseline_energy", baseline},
                 {"median_final_energy_above_baseline", medians},
                 {"parallel_not_worse_than_standard", beats},
                 {"max_resync_error", worst_resync},
                 {"resumed", resumed},
                 {"errors", out.errors.size()}};
  write_json_file(dir / "summary.json", out.summary);
  emit_plot_data(dir, dir / "plot");
  return out;
}

// ---------------------------------------------------------------------------------------------
// Spectral gaps

RunOutcome run_spectrum(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  const auto instances = make_instances(cfg);

  struct Row {
    std::string id;
    std::size_t n;
    std::uint64_t seed;
    AcceptanceRule rule;
    double beta;
    SpectralReport rep;
  };
  std::vector<std::vector<Row>> rows(instances.size());
  std::vector<std::vector<ErrorRow>> errs(instances.size());
  run_pool(instances.size(), cfg.workers, [&](std::size_t i) {
    const auto& inst = instances[i];
    try {
      auto table = make_walk_table(instance_model(cfg, inst), MoveSet::single_spin_flips(inst.n));
      for (auto rule : cfg.spectrum.rules)
        for (double beta : cfg.spectrum.betas) {
          try {
            WalkSpec spec{table, beta, rule, cfg.spectrum.padded};
            rows[i].push_back({inst.id, inst.n, inst.seed, rule, beta, spectral(spec)});
          } catch (const std::exception& e) {
            errs[i].push_back({inst.id, inst.n, inst.seed, to_string(rule) + "@" + fmt(beta), e.what()});
          }
        }
    } catch (const std::exception& e) {
      errs[i].push_back({inst.id, inst.n, inst.seed, "model", e.what()});
    }
  });

  RunOutcome out;
  const fs::path p = dir / "spectrum.csv";
  auto f = open_out(p);
  f << header_comment(cfg) << '\n'
    << "instance_id,n,seed,rule,beta,lambda1,gap,phase_gap,sqrt_gap,method,residual,iterations\n";
  std::size_t violations = 0, reports = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& r : rows[i]) {
      const double sq = std::sqrt(std::max(0.0, r.rep.gap));
      ++reports;
      worst_margin = std::min(worst_margin, r.rep.phase_gap - sq);
      if (r.rep.phase_gap < sq - 1e-9) ++violations;
      f << r.id << ',' << r.n << ',' << r.seed << ',' << to_string(r.rule) << ',' << fmt(r.beta) << ','
        << fmt(r.rep.lambda1) << ',' << fmt(r.rep.gap) << ',' << fmt(r.rep.phase_gap) << ',' << fmt(sq) << ','
        << r.rep.method << ',' << fmt(r.rep.residual) << ',' << r.rep.iterations << '\n';
    }
    out.errors.insert(out.errors.end(), errs[i].begin(), errs[i].end());
  }
  close_out(f, p);
  write_errors_csv(dir / "errors.csv", cfg, out.errors);
  out.summary = {{"version", kVersion},
                 {"schema", kResultSchema},
                 {"config", to_json(cfg)},
                 {"flags", design_flags(cfg)},
                 {"reports", reports},
                 {"phase_gap_bound_violations", violations},
                 {"min_phase_gap_minus_sqrt_gap", reports ? json(worst_margin) : json(nullptr)},
                 {"errors", out.errors.size()}};
  write_json_file(dir / "summary.json", out.summary);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Circuit costs

RunOutcome run_cost(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  const auto& c = cfg.cost;
  json report = {{"version", kVersion}, {"config", to_json(cfg)}, {"flags", design_flags(cfg)}};
  report["components"] = to_json(component_costs(c.n, c.moves, c.degree, c.epsilon));
  report["synthesis_count"] = synthesis_count(c.epsilon);
  report["scenarios"] = json::array();
  for (double alpha : c.alphas) {
    ScenarioInputs in = c.scenario;
    in.alpha = alpha;
    json s = to_json(scenario(in));
    for (const auto& pub : published_gate_times())
      if (std::abs(pub.alpha - alpha) < 1e-12)
        s["published"] = {{"gate_time_online", pub.online},
                          {"gate_time_offline", pub.offline},
                          {"online_ratio", s["gate_time_online_s"].get<double>() / pub.online},
                          {"offline_ratio", s["gate_time_offline_s"].get<double>() / pub.offline}};
    report["scenarios"].push_back(s);
  }
  write_json_file(dir / "cost.json", report);
  write_errors_csv(dir / "errors.csv", cfg, {});
  RunOutcome out;
  out.summary = report;
  write_json_file(dir / "summary.json", report);
  return out;
}

} // namespace

void ExperimentConfig::validate() const {
  if (!master_seed) throw std::invalid_argument("config: master_seed is required");
  if (workers == 0) throw std::invalid_argument("config: workers must be >= 1");
  if (output_dir.empty()) throw std::invalid_argument("config: output_dir must not be empty");
  if (is_heuristic(kind) || kind == ExperimentKind::spectrum_suite) {
    if (sizes.empty()) throw std::invalid_argument("config: sizes must not be empty");
    if (instances_per_size == 0) throw std::invalid_argument("config: instances_per_size must be >= 1");
    std::set<std::size_t> seen;
    for (auto n : sizes) {
      if (n < 2 || n > 20) throw std::invalid_argument("config: sizes must lie in [2, 20]");
      if (!seen.insert(n).second) throw std::invalid_argument("config: duplicate size " + std::to_string(n));
      if (pair_count && *pair_count > n * (n - 1) / 2)
        throw std::invalid_argument("config: pair_count exceeds the number of spin pairs at n = " +
                                    std::to_string(n));
    }
  }
  if (is_heuristic(kind)) {
    if (methods.empty()) throw std::invalid_argument("config: methods must not be empty");
    std::set<std::string> seen;
    for (const auto& m : methods) {
      if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
        throw std::invalid_argument("config: unknown method '" + m + "'");
      if (!seen.insert(m).second) throw std::invalid_argument("config: duplicate method '" + m + "'");
    }
    const auto& h = heuristics;
    if (!(h.beta_final >= 0.0) || !std::isfinite(h.beta_final))
      throw std::invalid_argument("config: beta_final must be finite and >= 0");
    if (!(h.confidence > 0.0 && h.confidence < 1.0)) throw std::invalid_argument("config: confidence must lie in (0, 1)");
    if (!(h.scan.growth > 1.0)) throw std::invalid_argument("config: scan.growth must exceed 1");
    if (!(h.scan.stop_factor > 1.0)) throw std::invalid_argument("config: scan.stop_factor must exceed 1");
    if (!(h.scan.refine_fraction >= 0.0)) throw std::invalid_argument("config: scan.refine_fraction must be >= 0");
    if (h.scan.refine_points == 0 || h.scan.max_duration == 0)
      throw std::invalid_argument("config: scan.refine_points and scan.max_duration must be >= 1");
  }
  if (kind == ExperimentKind::fig3_parallel) {
    const auto& o = fig3;
    if (o.n < 2) throw std::invalid_argument("config: fig3.n must be >= 2");
    if (!(o.beta >= 0.0) || !std::isfinite(o.beta)) throw std::invalid_argument("config: fig3.beta must be >= 0");
    if (o.budget == 0 || o.seeds == 0 || o.sample_stride == 0)
      throw std::invalid_argument("config: fig3 budget, seeds and sample_stride must be positive");
    for (double q : o.qs)
      if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("config: fig3.qs must lie in (0, 1]");
  }
  if (kind == ExperimentKind::spectrum_suite) {
    if (spectrum.model != "chain" && spectrum.model != "random")
      throw std::invalid_argument("config: spectrum.model must be chain or random");
    for (double b : spectrum.betas)
      if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("config: spectrum betas must be >= 0");
  }
  if (kind == ExperimentKind::cost_report) {
    if (cost.n == 0 || cost.moves == 0) throw std::invalid_argument("config: cost.n and cost.moves must be >= 1");
    if (!(cost.epsilon > 0.0 && cost.epsilon < 1.0)) throw std::invalid_argument("config: cost.epsilon must lie in (0, 1)");
    const auto& s = cost.scenario;
    if (!(s.classical_rate > 0 && s.duration_s > 0 && s.per_step_depth > 0 && s.synthesis_factor > 0))
      throw std::invalid_argument("config: scenario inputs must be positive");
    for (double a : cost.alphas)
      if (!(a > 0.0)) throw std::invalid_argument("config: cost.alphas must be positive");
  }
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"kind", "master_seed", "sizes", "instances_per_size", "pair_count", "methods", "heuristics", "fig3",
                 "spectrum", "cost", "output_dir", "workers"},
             "config");
  ExperimentConfig c;
  if (!j.contains("kind")) throw std::invalid_argument("config: kind is required");
  c.kind = experiment_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("master_seed") && !j["master_seed"].is_null()) c.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("sizes")) c.sizes = parse_sizes(j["sizes"]);
  read(j, "instances_per_size", c.instances_per_size, "config");
  if (j.contains("pair_count") && !j["pair_count"].is_null()) c.pair_count = j["pair_count"].get<std::size_t>();
  read(j, "methods", c.methods, "config");
  if (j.contains("heuristics")) c.heuristics = parse_heuristics(j["heuristics"], c.heuristics);
  if (j.contains("fig3")) {
    const auto& f = j["fig3"];
    check_keys(f, {"n", "beta", "qs", "budget", "seeds", "sample_stride", "ordered_pairs"}, "fig3");
    read(f, "n", c.fig3.n, "fig3");
    read(f, "beta", c.fig3.beta, "fig3");
    read(f, "qs", c.fig3.qs, "fig3");
    read(f, "budget", c.fig3.budget, "fig3");
    read(f, "seeds", c.fig3.seeds, "fig3");
    read(f, "sample_stride", c.fig3.sample_stride, "fig3");
    read(f, "ordered_pairs", c.fig3.ordered_pairs, "fig3");
  }
  if (j.contains("spectrum")) {
    const auto& s = j["spectrum"];
    check_keys(s, {"betas", "rules", "padded", "model"}, "spectrum");
    read(s, "betas", c.spectrum.betas, "spectrum");
    read(s, "padded", c.spectrum.padded, "spectrum");
    read(s, "model", c.spectrum.model, "spectrum");
    if (s.contains("rules")) {
      c.spectrum.rules.clear();
      for (const auto& r : s["rules"]) c.spectrum.rules.push_back(acceptance_rule_from_string(r.get<std::string>()));
    }
  }
  if (j.contains("cost")) {
    const auto& s = j["cost"];
    check_keys(s, {"n", "moves", "degree", "epsilon", "alphas", "classical_rate", "duration_s", "per_step_depth",
                   "synthesis_factor"},
               "cost");
    read(s, "n", c.cost.n, "cost");
    read(s, "moves", c.cost.moves, "cost");
    read(s, "degree", c.cost.degree, "cost");
    read(s, "epsilon", c.cost.epsilon, "cost");
    read(s, "alphas", c.cost.alphas, "cost");
    read(s, "classical_rate", c.cost.scenario.classical_rate, "cost");
    read(s, "duration_s", c.cost.scenario.duration_s, "cost");
    read(s, "per_step_depth", c.cost.scenario.per_step_depth, "cost");
    read(s, "synthesis_factor", c.cost.scenario.synthesis_factor, "cost");
  }
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  read(j, "workers", c.workers, "config");
  return c;
}

json to_json(const ExperimentConfig& c) {
  json rules = json::array();
  for (auto r : c.spectrum.rules) rules.push_back(to_string(r));
  return {{"kind", to_string(c.kind)},
          {"master_seed", c.master_seed ? json(*c.master_seed) : json(nullptr)},
          {"sizes", c.sizes},
          {"instances_per_size", c.instances_per_size},
          {"pair_count", c.pair_count ? json(*c.pair_count) : json(nullptr)},
          {"methods", c.methods},
          {"heuristics", heuristics_json(c.heuristics)},
          {"fig3",
           {{"n", c.fig3.n},
            {"beta", c.fig3.beta},
            {"qs", c.fig3.qs},
            {"budget", c.fig3.budget},
            {"seeds", c.fig3.seeds},
            {"sample_stride", c.fig3.sample_stride},
            {"ordered_pairs", c.fig3.ordered_pairs}}},
          {"spectrum",
           {{"betas", c.spectrum.betas}, {"rules", rules}, {"padded", c.spectrum.padded}, {"model", c.spectrum.model}}},
          {"cost",
           {{"n", c.cost.n},
            {"moves", c.cost.moves},
            {"degree", c.cost.degree},
            {"epsilon", c.cost.epsilon},
            {"alphas", c.cost.alphas},
            {"classical_rate", c.cost.scenario.classical_rate},
            {"duration_s", c.cost.scenario.duration_s},
            {"per_step_depth", c.cost.scenario.per_step_depth},
            {"synthesis_factor", c.cost.scenario.synthesis_factor}}},
          {"output_dir", c.output_dir.string()},
          {"workers", c.workers}};
}

json design_flags(const ExperimentConfig& c) {
  const auto& h = c.heuristics;
  return {{"v_completion", to_string(h.completion)},
          {"tts_duration", to_string(h.unitary_duration)},
          {"confidence", h.confidence},
          {"target_set", to_string(h.target)},
          {"acceptance_rule", to_string(h.rule)},
          {"classical_padded", h.classical_padded},
          {"quantum_padded", true},
          {"fig3_baseline", "best_observed"}};
}

std::uint64_t instance_seed(std::uint64_t master, std::uint64_t size, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ size) ^ index);
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.output_dir);
  switch (cfg.kind) {
    case ExperimentKind::fig1_chain:
    case ExperimentKind::fig2_random: return run_heuristic_experiment(cfg);
    case ExperimentKind::fig3_parallel: return run_fig3(cfg);
    case ExperimentKind::spectrum_suite: return run_spectrum(cfg);
    case ExperimentKind::cost_report: return run_cost(cfg);
  }
  throw std::logic_error("run_experiment: unhandled kind");
}

std::map<std::string, SpeedupFit> emit_plot_data(const std::vector<ResultRow>& rows, const fs::path& out_dir) {
  if (rows.empty()) throw std::invalid_argument("emit_plot_data: no result rows");
  std::map<std::string, double> classical;
  for (const auto& r : rows)
    if (r.method == "classical") classical[r.instance_id] = r.min_tts;
  if (classical.empty()) throw std::invalid_argument("emit_plot_data: no classical rows to compare against");
  ensure_dir(out_dir);

  std::map<std::string, SpeedupFit> fits;
  const fs::path lines_path = out_dir / "lines.csv";
  auto lines = open_out(lines_path);
  lines << "method,line,slope,intercept,x,y\n";
  for (const auto& method : kMethods) {
    if (method == "classical") continue;
    std::vector<std::pair<std::string, const ResultRow*>> matched;
    for (const auto& r : rows)
      if (r.method == method && classical.count(r.instance_id)) matched.emplace_back(r.instance_id, &r);
    if (matched.empty()) continue;

    const fs::path sp = out_dir / ("scatter_" + method + ".csv");
    auto scatter = open_out(sp);
    scatter << "instance_id,n,classical_tts,quantum_tts\n";
    std::vector<std::pair<double, double>> pairs;
    for (const auto& [id, r] : matched) {
      const double c = classical[id];
      scatter << id << ',' << r->n << ',' << fmt(c) << ',' << fmt(r->min_tts) << '\n';
      if (std::isfinite(c) && std::isfinite(r->min_tts) && c > 0 && r->min_tts > 0) pairs.emplace_back(c, r->min_tts);
    }
    close_out(scatter, sp);
    if (pairs.size() < 3) continue;

    const SpeedupFit fit = fit_speedup(pairs);
    double lo = pairs.front().first, hi = lo;
    for (const auto& p : pairs) {
      lo = std::min(lo, p.first);
      hi = std::max(hi, p.first);
    }
    for (double x : {lo, hi})
      lines << method << ",fit," << fmt(fit.exponent) << ',' << fmt(fit.intercept) << ',' << fmt(x) << ','
            << fmt(std::exp(fit.intercept) * std::pow(x, fit.exponent)) << '\n';
    for (double x : {lo, hi}) lines << method << ",reference,1,0," << fmt(x) << ',' << fmt(x) << '\n';
    fits.emplace(method, fit);
  }
  close_out(lines, lines_path);
  return fits;
}

std::vector<ResultRow> read_results_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read '" + path.string() + "'");
  std::vector<ResultRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kResultsHeader) throw std::invalid_argument("'" + path.string() + "': unexpected header");
      header = true;
      continue;
    }
    const auto c = split_csv(line);
    if (c.size() != 8) throw std::invalid_argument("'" + path.string() + "': malformed row '" + line + "'");
    rows.push_back({c[0], std::stoul(c[1]), std::stoull(c[2]), c[3], parse_double(c[4]), parse_double(c[5]),
                    parse_double(c[6]), parse_double(c[7])});
  }
  if (!header) throw std::invalid_argument("'" + path.string() + "': missing header");
  return rows;
}

void emit_plot_data(const fs::path& run_dir, const fs::path& out_dir) {
  if (fs::exists(run_dir / "results.csv")) {
    const auto fits = emit_plot_data(read_results_csv(run_dir / "results.csv"), out_dir);
    write_json_file(out_dir / "fits.json", fits_json(fits));
    return;
  }
  const fs::path traces = run_dir / "traces.csv";
  if (!fs::exists(traces))
    throw std::invalid_argument("plot-data: '" + run_dir.string() + "' has neither results.csv nor traces.csv");

  // Median across seeds of each series at every shared sample point.
  std::ifstream in(traces);
  std::map<std::string, std::map<double, std::vector<double>>> series;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto c = split_csv(line);
    if (c.size() != 5) throw std::invalid_argument("'" + traces.string() + "': malformed row '" + line + "'");
    series[c[0]][parse_double(c[3])].push_back(parse_double(c[4]));
  }
  if (series.empty()) throw std::invalid_argument("'" + traces.string() + "': no trace rows");
  std::set<double> steps;
  for (const auto& [name, s] : series)
    for (const auto& [step, v] : s) steps.insert(step);

  ensure_dir(out_dir);
  const fs::path p = out_dir / "traces_overlay.csv";
  auto out = open_out(p);
  out << "# median energy above baseline across seeds\nnormalized_step";
  for (const auto& [name, s] : series) out << ',' << name;
  out << '\n';
  for (double step : steps) {
    out << fmt(step);
    for (const auto& [name, s] : series) {
      auto it = s.find(step);
      out << ',' << (it == s.end() ? std::string() : fmt(median(it->second)));
    }
    out << '\n';
  }
  close_out(out, p);
}

} // namespace qwalk
