#pragma once

// End-to-end runs behind the CLI subcommands (gen / fit / eval / mas / bench),
// exposed as plain functions so tests can drive them in-process. Requires the
// vendored nlohmann json single header on the include path.

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dagmas/csv.hpp"
#include "dagmas/datagen.hpp"
#include "dagmas/mas.hpp"
#include "dagmas/metrics.hpp"
#include "dagmas/solver.hpp"
#include "dagmas/version.hpp"

namespace dagmas {

inline const char* to_string(GraphModel m) { return m == GraphModel::er ? "er" : "sf"; }
inline const char* to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::exponential: return "exponential";
    default: return "gumbel";
  }
}
inline const char* to_string(ScaleMode m) { return m == ScaleMode::ev ? "ev" : "nv"; }
inline const char* to_string(SfDirection d) {
  return d == SfDirection::existing_to_new ? "existing_to_new" : "new_to_existing";
}

inline GraphModel parse_model(std::string_view s) {
  if (s == "er") return GraphModel::er;
  if (s == "sf") return GraphModel::sf;
  throw std::invalid_argument("unknown graph model '" + std::string(s) + "' (expected er|sf)");
}
inline NoiseFamily parse_noise(std::string_view s) {
  if (s == "gaussian") return NoiseFamily::gaussian;
  if (s == "exponential") return NoiseFamily::exponential;
  if (s == "gumbel") return NoiseFamily::gumbel;
  throw std::invalid_argument("unknown noise family '" + std::string(s) +
                              "' (expected gaussian|exponential|gumbel)");
}
inline ScaleMode parse_scale(std::string_view s) {
  if (s == "ev") return ScaleMode::ev;
  if (s == "nv") return ScaleMode::nv;
  throw std::invalid_argument("unknown scale mode '" + std::string(s) + "' (expected ev|nv)");
}
inline SfDirection parse_sf_direction(std::string_view s) {
  if (s == "existing_to_new") return SfDirection::existing_to_new;
  if (s == "new_to_existing") return SfDirection::new_to_existing;
  throw std::invalid_argument("unknown sf direction '" + std::string(s) +
                              "' (expected existing_to_new|new_to_existing)");
}
inline Method parse_method(std::string_view s) {
  if (s == "proximas") return Method::proximas;
  if (s == "optimas") return Method::optimas;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected proximas|optimas)");
}

namespace detail {

inline std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw data_error("write failed: " + path.string());
}

}  // namespace detail

// ---------------------------------------------------------------- gen

struct GenOptions {
  int d = 100;
  int k = 1;
  GraphModel model = GraphModel::er;
  SfDirection sf_direction = SfDirection::existing_to_new;
  NoiseFamily noise = NoiseFamily::gaussian;
  ScaleMode scale = ScaleMode::ev;
  int n = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

/// Writes X_train.csv, X_val.csv, W_true.csv, and meta.json into `out`.
/// The validation set is an independent draw from the same truth with seed+1,
/// both sets with n rows. Deterministic: meta.json carries no timestamps.
inline GroundTruth run_gen(const GenOptions& opt) {
  GraphSpec gspec;
  gspec.d = opt.d;
  gspec.k = opt.k;
  gspec.model = opt.model;
  gspec.sf_direction = opt.sf_direction;

  Rng rng(opt.seed);
  GroundTruth truth = sample_dag(gspec, rng);
  assign_weights(truth, rng);
  const NoiseSpec noise = make_noise_spec(opt.noise, opt.scale, opt.d, rng);
  const Dataset train = sample_data(truth, noise, opt.n, rng);
  Rng val_rng(opt.seed + 1);
  const Dataset val = sample_data(truth, noise, opt.n, val_rng);

  std::filesystem::create_directories(opt.out);
  write_matrix(opt.out / "X_train.csv", train.X);
  write_matrix(opt.out / "X_val.csv", val.X);
  write_triplets(opt.out / "W_true.csv", truth.W_true);

  nlohmann::ordered_json meta;
  meta["d"] = opt.d;
  meta["k"] = opt.k;
  meta["model"] = to_string(opt.model);
  meta["sf_direction"] = to_string(opt.sf_direction);
  meta["noise"] = to_string(opt.noise);
  meta["scale_mode"] = to_string(opt.scale);
  meta["scales"] = std::vector<double>(noise.scales.data(), noise.scales.data() + noise.scales.size());
  meta["n_train"] = opt.n;
  meta["n_val"] = opt.n;
  meta["seed"] = opt.seed;
  meta["arcs"] = static_cast<long>(truth.mask_true.count());
  meta["version"] = version;
  detail::write_json(opt.out / "meta.json", meta);
  return truth;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  Method method = Method::proximas;
  double lambda1 = 0.1;
  double lambda2 = 20.0;
  int iters = 1000;
  std::optional<double> time_budget;  // seconds
  double warmstart_frac = 0.8;
  double lr = 0.001;
  std::uint64_t seed = 0;
  int snapshot_every = 100;
  std::filesystem::path data;  // directory containing X_train.csv
  std::filesystem::path out;
  bool write_snapshots = true;
};

/// Fits on `data`/X_train.csv and writes W_best.csv, trace.csv (snapshot rows
/// plus one final summary row for the returned best), snapshot_<k>.csv files,
/// and manifest.json into `out`.
inline FitResult run_fit(const FitOptions& opt) {
  const std::string started = detail::iso_utc_now();
  const Dataset train = make_dataset(read_matrix(opt.data / "X_train.csv"));
  std::filesystem::create_directories(opt.out);

  FitConfig cfg;
  cfg.method = opt.method;
  cfg.lambda1 = opt.lambda1;
  cfg.lambda2 = opt.lambda2;
  cfg.max_iterations = opt.iters;
  cfg.time_budget = opt.time_budget;
  cfg.warmstart_fraction = opt.warmstart_frac;
  cfg.learning_rate = opt.lr;
  cfg.seed = opt.seed;
  cfg.snapshot_every = opt.snapshot_every;
  if (opt.write_snapshots) {
    cfg.on_snapshot = [&](const Snapshot& snap, const Matrix& W) {
      write_triplets(opt.out / ("snapshot_" + std::to_string(snap.iteration) + ".csv"), W);
    };
  }

  const FitResult result = fit(train, cfg);

  write_triplets(opt.out / "W_best.csv", result.best);
  std::vector<Snapshot> trace = result.history;
  trace.push_back({result.total_iterations, result.total_time, result.best_objective, true});
  write_trace(opt.out / "trace.csv", trace);

  nlohmann::ordered_json manifest;
  manifest["command"] = "fit";
  manifest["version"] = version;
  manifest["method"] = method_name(opt.method);
  manifest["lambda1"] = opt.lambda1;
  manifest["lambda2"] = opt.lambda2;
  manifest["iters"] = opt.iters;
  if (opt.time_budget) {
    manifest["time_budget_s"] = *opt.time_budget;
  } else {
    manifest["time_budget_s"] = nullptr;
  }
  manifest["warmstart_frac"] = opt.warmstart_frac;
  manifest["lr"] = opt.lr;
  manifest["seed"] = opt.seed;
  manifest["snapshot_every"] = opt.snapshot_every;
  manifest["data"] = opt.data.string();
  manifest["out"] = opt.out.string();
  manifest["started"] = started;
  manifest["finished"] = detail::iso_utc_now();
  manifest["result"] = {{"best_objective", result.best_objective},
                        {"best_iteration", result.best_iteration},
                        {"iterations", result.total_iterations},
                        {"wall_time_s", result.total_time},
                        {"setup_time_s", result.setup_time}};
  detail::write_json(opt.out / "manifest.json", manifest);
  return result;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::filesystem::path weights;
  std::filesystem::path truth;
  std::filesystem::path val;
  std::filesystem::path out;
  std::vector<double> thresholds;  // empty → default_thresholds()
  std::optional<std::filesystem::path> fit_manifest;  // default: sibling of `weights`
};

/// Writes metrics.csv (one row per threshold) and summary.csv. The summary's
/// best_objective/iterations/wall_time_s come from the fit manifest next to
/// the weights file when present, else nan/0/nan.
inline EvalSummary run_eval(const EvalOptions& opt) {
  const Matrix X_val = read_matrix(opt.val);
  const Dataset val = make_dataset(X_val);
  const Eigen::Index d = val.dim();
  const Matrix W_true = read_triplets(opt.truth, d);
  const Matrix W = read_triplets(opt.weights, d);
  const Mask truth = threshold(W_true, 0.0);
  if (!truth.any()) throw data_error(opt.truth.string() + ": ground truth has no arcs");

  const std::vector<double> thresholds =
      opt.thresholds.empty() ? default_thresholds() : opt.thresholds;
  EvalSummary summary;
  summary.rows = threshold_sweep(W, truth, thresholds);
  summary.average_precision = average_precision(W, truth);
  summary.gaussian_nll = gaussian_nll(val, W);

  double best_objective = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
  const std::filesystem::path manifest_path =
      opt.fit_manifest ? *opt.fit_manifest : opt.weights.parent_path() / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json doc;
    try {
      in >> doc;
      const auto& res = doc.at("result");
      best_objective = res.at("best_objective").get<double>();
      iterations = res.at("iterations").get<long>();
      wall_time_s = res.at("wall_time_s").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw data_error(manifest_path.string() + ": " + e.what());
    }
  }

  std::filesystem::create_directories(opt.out);
  {
    auto out = detail::open_out(opt.out / "metrics.csv");
    out << "threshold,fnr_dir,fpr_dir,shd_norm_dir,fnr_undir,fpr_undir,shd_norm_undir\n";
    for (const MetricsRow& r : summary.rows) {
      out << detail::fmt_auto(r.threshold) << ',' << detail::fmt_auto(r.fnr_dir) << ','
          << detail::fmt_auto(r.fpr_dir) << ',' << detail::fmt_auto(r.shd_norm_dir) << ','
          << detail::fmt_auto(r.fnr_undir) << ',' << detail::fmt_auto(r.fpr_undir) << ','
          << detail::fmt_auto(r.shd_norm_undir) << '\n';
    }
    if (!out) throw data_error("write failed: " + (opt.out / "metrics.csv").string());
  }
  {
    auto out = detail::open_out(opt.out / "summary.csv");
    out << "average_precision,gaussian_nll,best_objective,iterations,wall_time_s\n";
    out << detail::fmt_auto(summary.average_precision) << ','
        << detail::fmt_auto(summary.gaussian_nll) << ',' << detail::fmt_auto(best_objective) << ','
        << iterations << ',' << detail::fmt_auto(wall_time_s) << '\n';
    if (!out) throw data_error("write failed: " + (opt.out / "summary.csv").string());
  }
  return summary;
}

// ---------------------------------------------------------------- mas

struct MasOptions {
  std::filesystem::path in;
  std::filesystem::path out;  // output triplet file
  Eigen::Index d = -1;        // inferred from indices when negative
};

inline MasResult run_mas(const MasOptions& opt) {
  const Matrix W = read_triplets(opt.in, opt.d);
  MasResult result = greedy_mas(W);
  if (opt.out.has_parent_path()) std::filesystem::create_directories(opt.out.parent_path());
  write_triplets(opt.out, result.projected);
  return result;
}

// ---------------------------------------------------------------- bench

struct BenchGrid {
  std::vector<int> d{50};
  std::vector<int> k{1};
  std::vector<GraphModel> model{GraphModel::er};
  std::vector<NoiseFamily> noise{NoiseFamily::gaussian};
  std::vector<ScaleMode> scale{ScaleMode::ev};
  std::vector<int> n{1000};
  std::vector<Method> method{Method::proximas};
  int repetitions = 1;
  int budget = 1000;  // fit iterations per cell
  std::optional<double> time_budget;
  double lambda1 = 0.1;
  double lambda2 = 20.0;
  double warmstart_frac = 0.8;
  double lr = 0.001;
  std::uint64_t seed = 0;  // base seed; repetition r uses seed + r
  int snapshot_every = 100;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline long grid_long(std::string_view tok, const std::string& key) {
  try {
    return parse_long(trim(tok), "grid " + key);
  } catch (const data_error& e) {
    throw std::invalid_argument(e.what());
  }
}

inline double grid_double(std::string_view tok, const std::string& key) {
  try {
    return parse_double(trim(tok), "grid " + key);
  } catch (const data_error& e) {
    throw std::invalid_argument(e.what());
  }
}

template <typename T, typename Parse>
std::vector<T> grid_list(std::string_view value, Parse parse) {
  std::vector<T> out;
  for (std::string_view tok : split_commas(value)) out.push_back(parse(trim(tok)));
  if (out.empty()) throw std::invalid_argument("grid: empty value list");
  return out;
}

}  // namespace detail

/// Grid files are plain `key=value` lines; comma-separated values for the swept
/// keys (d, k, model, noise, scale, n, method), scalars for the rest
/// (repetitions, budget, time_budget, lambda1, lambda2, warmstart_frac, lr,
/// seed, snapshot_every). `#` starts a comment.
inline BenchGrid parse_grid(const std::filesystem::path& path) {
  BenchGrid grid;
  for (const std::string& raw : detail::read_lines(path)) {
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("grid: expected key=value, got '" + std::string(line) + "'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const auto as_int = [&](std::string_view tok) {
      return static_cast<int>(detail::grid_long(tok, key));
    };
    if (key == "d") {
      grid.d = detail::grid_list<int>(value, as_int);
    } else if (key == "k") {
      grid.k = detail::grid_list<int>(value, as_int);
    } else if (key == "model") {
      grid.model = detail::grid_list<GraphModel>(value, parse_model);
    } else if (key == "noise") {
      grid.noise = detail::grid_list<NoiseFamily>(value, parse_noise);
    } else if (key == "scale") {
      grid.scale = detail::grid_list<ScaleMode>(value, parse_scale);
    } else if (key == "n") {
      grid.n = detail::grid_list<int>(value, as_int);
    } else if (key == "method") {
      grid.method = detail::grid_list<Method>(value, parse_method);
    } else if (key == "repetitions") {
      grid.repetitions = as_int(value);
    } else if (key == "budget") {
      grid.budget = as_int(value);
    } else if (key == "time_budget") {
      grid.time_budget = detail::grid_double(value, key);
    } else if (key == "lambda1") {
      grid.lambda1 = detail::grid_double(value, key);
    } else if (key == "lambda2") {
      grid.lambda2 = detail::grid_double(value, key);
    } else if (key == "warmstart_frac") {
      grid.warmstart_frac = detail::grid_double(value, key);
    } else if (key == "lr") {
      grid.lr = detail::grid_double(value, key);
    } else if (key == "seed") {
      grid.seed = static_cast<std::uint64_t>(detail::grid_long(value, key));
    } else if (key == "snapshot_every") {
      grid.snapshot_every = as_int(value);
    } else {
      throw std::invalid_argument("grid: unknown key '" + key + "'");
    }
  }
  if (grid.repetitions < 1) throw std::invalid_argument("grid: repetitions must be >= 1");
  return grid;
}

struct BenchRow {
  int d = 0;
  int k = 0;
  GraphModel model = GraphModel::er;
  NoiseFamily noise = NoiseFamily::gaussian;
  ScaleMode scale = ScaleMode::ev;
  int n = 0;
  Method method = Method::proximas;
  int repetition = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  double average_precision = std::numeric_limits<double>::quiet_NaN();
  double gaussian_nll = std::numeric_limits<double>::quiet_NaN();
  double best_objective = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
};

struct BenchOptions {
  std::filesystem::path grid_file;
  std::filesystem::path out;
  int jobs = 1;
};

namespace detail {

inline std::string cell_dir_name(const BenchRow& row) {
  return "d" + std::to_string(row.d) + "_k" + std::to_string(row.k) + "_" + to_string(row.model) +
         "_" + to_string(row.noise) + "_" + to_string(row.scale) + "_n" + std::to_string(row.n) +
         "_" + method_name(row.method) + "/rep" + std::to_string(row.repetition);
}

}  // namespace detail

/// Runs gen → fit → eval over the cartesian grid × repetitions, each task in
/// its own subdirectory, at most `jobs` tasks in flight. Failures are recorded
/// in the row's status and the batch continues. bench.csv rows are written in
/// grid order regardless of jobs.
inline std::vector<BenchRow> run_bench(const BenchOptions& opt) {
  if (opt.jobs < 1) throw std::invalid_argument("bench: jobs must be >= 1");
  const BenchGrid grid = parse_grid(opt.grid_file);
  std::filesystem::create_directories(opt.out);

  std::vector<BenchRow> rows;
  for (int d : grid.d)
    for (int k : grid.k)
      for (GraphModel model : grid.model)
        for (NoiseFamily noise : grid.noise)
          for (ScaleMode scale : grid.scale)
            for (int n : grid.n)
              for (Method method : grid.method)
                for (int rep = 0; rep < grid.repetitions; ++rep) {
                  BenchRow row;
                  row.d = d;
                  row.k = k;
                  row.model = model;
                  row.noise = noise;
                  row.scale = scale;
                  row.n = n;
                  row.method = method;
                  row.repetition = rep;
                  row.seed = grid.seed + static_cast<std::uint64_t>(rep);
                  rows.push_back(row);
                }

  const auto run_cell = [&](BenchRow& row) {
    const std::filesystem::path dir = opt.out / detail::cell_dir_name(row);
    try {
      GenOptions gen;
      gen.d = row.d;
      gen.k = row.k;
      gen.model = row.model;
      gen.noise = row.noise;
      gen.scale = row.scale;
      gen.n = row.n;
      gen.seed = row.seed;
      gen.out = dir / "data";
      run_gen(gen);

      FitOptions fit;
      fit.method = row.method;
      fit.lambda1 = grid.lambda1;
      fit.lambda2 = grid.lambda2;
      fit.iters = grid.budget;
      fit.time_budget = grid.time_budget;
      fit.warmstart_frac = grid.warmstart_frac;
      fit.lr = grid.lr;
      fit.seed = row.seed;
      fit.snapshot_every = grid.snapshot_every;
      fit.data = gen.out;
      fit.out = dir / "fit";
      const FitResult fitted = run_fit(fit);

      EvalOptions eval;
      eval.weights = fit.out / "W_best.csv";
      eval.truth = gen.out / "W_true.csv";
      eval.val = gen.out / "X_val.csv";
      eval.out = dir / "eval";
      const EvalSummary summary = run_eval(eval);

      row.status = "ok";
      row.average_precision = summary.average_precision;
      row.gaussian_nll = summary.gaussian_nll;
      row.best_objective = fitted.best_objective;
      row.iterations = fitted.total_iterations;
      row.wall_time_s = fitted.total_time;
    } catch (const data_error&) {
      row.status = "data_error";
    } catch (const numerical_error&) {
      row.status = "numerical_error";
    } catch (const std::exception&) {
      row.status = "error";
    }
  };

  const int jobs = std::min<int>(opt.jobs, static_cast<int>(rows.size()));
  if (jobs <= 1) {
    for (BenchRow& row : rows) run_cell(row);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= rows.size()) return;
          run_cell(rows[i]);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  auto out = detail::open_out(opt.out / "bench.csv");
  out << "d,k,model,noise,scale,n,method,repetition,seed,status,average_precision,gaussian_nll,"
         "best_objective,iterations,wall_time_s\n";
  for (const BenchRow& r : rows) {
    out << r.d << ',' << r.k << ',' << to_string(r.model) << ',' << to_string(r.noise) << ','
        << to_string(r.scale) << ',' << r.n << ',' << method_name(r.method) << ',' << r.repetition
        << ',' << r.seed << ',' << r.status << ',' << detail::fmt_auto(r.average_precision) << ','
        << detail::fmt_auto(r.gaussian_nll) << ',' << detail::fmt_auto(r.best_objective) << ','
        << r.iterations << ',' << detail::fmt_auto(r.wall_time_s) << '\n';
  }
  if (!out) throw data_error("write failed: " + (opt.out / "bench.csv").string());
  return rows;
}

}  // namespace dagmas
