// dagmas: learn large DAG structures for linear SEMs by alternating
// unconstrained proximal/subgradient steps with a greedy maximum-acyclic-
// subgraph projection. Subcommands: gen, fit, eval, mas, bench.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "dagmas/pipeline.hpp"
#include "dagmas/version.hpp"

namespace {

int dispatch(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const dagmas::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const dagmas::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Learns large DAG structures for linear SEMs by alternating proximal/subgradient "
      "optimization with greedy maximum-acyclic-subgraph projection."};
  app.set_version_flag("--version", dagmas::version);
  app.require_subcommand(1);

  // gen ------------------------------------------------------------------
  dagmas::GenOptions gen;
  std::string gen_model = "er", gen_noise = "gaussian", gen_scale = "ev";
  std::string gen_sf_direction = "existing_to_new", gen_out;
  CLI::App* cmd_gen = app.add_subcommand("gen", "Generate a synthetic benchmark dataset");
  cmd_gen->add_option("--d", gen.d, "node count")->required();
  cmd_gen->add_option("--k", gen.k, "density multiplier (roughly k*d arcs)");
  cmd_gen->add_option("--model", gen_model, "graph model: er|sf");
  cmd_gen->add_option("--noise", gen_noise, "noise family: gaussian|exponential|gumbel");
  cmd_gen->add_option("--scale", gen_scale, "noise scale mode: ev|nv");
  cmd_gen->add_option("--n", gen.n, "sample count (train and validation each)");
  cmd_gen->add_option("--seed", gen.seed, "rng seed (validation draw uses seed+1)");
  cmd_gen->add_option("--sf-direction", gen_sf_direction,
                      "sf arc orientation: existing_to_new|new_to_existing");
  cmd_gen->add_option("--out", gen_out, "output directory")->required();

  // fit ------------------------------------------------------------------
  dagmas::FitOptions fit;
  std::string fit_method, fit_data, fit_out;
  double fit_time_budget = 0.0;
  CLI::App* cmd_fit = app.add_subcommand("fit", "Fit a DAG to a generated dataset");
  cmd_fit->add_option("--method", fit_method, "solver: proximas|optimas")->required();
  cmd_fit->add_option("--lambda1", fit.lambda1, "l1 sparsity weight");
  cmd_fit->add_option("--lambda2", fit.lambda2, "proximity weight toward the acyclic anchor");
  cmd_fit->add_option("--iters", fit.iters, "iteration budget");
  CLI::Option* opt_budget =
      cmd_fit->add_option("--time-budget", fit_time_budget, "wall-clock budget in seconds");
  cmd_fit->add_option("--warmstart-frac", fit.warmstart_frac,
                      "fraction of the budget run without acyclicity");
  cmd_fit->add_option("--lr", fit.lr, "optimas learning rate");
  cmd_fit->add_option("--seed", fit.seed, "rng seed (recorded in the manifest)");
  cmd_fit->add_option("--snapshot-every", fit.snapshot_every, "iterations between snapshots");
  cmd_fit->add_option("--data", fit_data, "directory containing X_train.csv")->required();
  cmd_fit->add_option("--out", fit_out, "output directory")->required();

  // eval -----------------------------------------------------------------
  dagmas::EvalOptions eval;
  std::string eval_weights, eval_truth, eval_val, eval_out, eval_manifest;
  CLI::App* cmd_eval = app.add_subcommand("eval", "Score learned weights against ground truth");
  cmd_eval->add_option("--weights", eval_weights, "learned weights (triplet csv)")->required();
  cmd_eval->add_option("--truth", eval_truth, "ground-truth weights (triplet csv)")->required();
  cmd_eval->add_option("--val", eval_val, "validation data (dense csv)")->required();
  cmd_eval->add_option("--out", eval_out, "output directory")->required();
  cmd_eval->add_option("--thresholds", eval.thresholds, "ascending threshold list")
      ->delimiter(',');
  cmd_eval->add_option("--fit-manifest", eval_manifest,
                       "fit manifest to pull objective/timing from (default: next to --weights)");

  // mas ------------------------------------------------------------------
  dagmas::MasOptions mas;
  std::string mas_in, mas_out;
  long mas_d = -1;
  CLI::App* cmd_mas = app.add_subcommand("mas", "Project a weight matrix onto an acyclic support");
  cmd_mas->add_option("--in", mas_in, "input weights (triplet csv)")->required();
  cmd_mas->add_option("--out", mas_out, "output triplet csv")->required();
  cmd_mas->add_option("--d", mas_d, "matrix dimension (default: inferred from indices)");

  // bench ----------------------------------------------------------------
  dagmas::BenchOptions bench;
  std::string bench_grid, bench_out;
  CLI::App* cmd_bench = app.add_subcommand("bench", "Run gen/fit/eval over a parameter grid");
  cmd_bench->add_option("--grid", bench_grid, "grid file (key=value lines)")->required();
  cmd_bench->add_option("--out", bench_out, "output directory")->required();
  cmd_bench->add_option("--jobs", bench.jobs, "concurrent grid cells");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_gen->parsed()) {
    return dispatch([&] {
      gen.model = dagmas::parse_model(gen_model);
      gen.noise = dagmas::parse_noise(gen_noise);
      gen.scale = dagmas::parse_scale(gen_scale);
      gen.sf_direction = dagmas::parse_sf_direction(gen_sf_direction);
      gen.out = gen_out;
      dagmas::run_gen(gen);
    });
  }
  if (cmd_fit->parsed()) {
    return dispatch([&] {
      fit.method = dagmas::parse_method(fit_method);
      if (opt_budget->count() > 0) {
        if (fit_time_budget <= 0.0) throw std::invalid_argument("--time-budget must be positive");
        fit.time_budget = fit_time_budget;
      }
      fit.data = fit_data;
      fit.out = fit_out;
      dagmas::run_fit(fit);
    });
  }
  if (cmd_eval->parsed()) {
    return dispatch([&] {
      eval.weights = eval_weights;
      eval.truth = eval_truth;
      eval.val = eval_val;
      eval.out = eval_out;
      if (!eval_manifest.empty()) eval.fit_manifest = eval_manifest;
      dagmas::run_eval(eval);
    });
  }
  if (cmd_mas->parsed()) {
    return dispatch([&] {
      mas.in = mas_in;
      mas.out = mas_out;
      mas.d = mas_d;
      const dagmas::MasResult result = dagmas::run_mas(mas);
      std::cout << "retained_weight=" << result.retained_weight
                << " removed_weight=" << result.removed_weight << '\n';
    });
  }
  if (cmd_bench->parsed()) {
    return dispatch([&] {
      bench.grid_file = bench_grid;
      bench.out = bench_out;
      const auto rows = dagmas::run_bench(bench);
      std::size_t ok = 0;
      for (const auto& row : rows) ok += row.status == "ok";
      std::cout << "bench: " << ok << "/" << rows.size() << " cells ok\n";
    });
  }
  return 2;  // unreachable: a subcommand is required
}
