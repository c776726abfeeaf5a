// Experiment runner: certified-bound arithmetic, the two-phase training
// pipeline, finite-problem validity simulation, and dependence measures,
// each behind a subcommand with machine-readable outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pacbound/bounds.hpp"
#include "pacbound/config.hpp"
#include "pacbound/datasets.hpp"
#include "pacbound/gaussian_net.hpp"
#include "pacbound/mutual_info.hpp"
#include "pacbound/training.hpp"
#include "pacbound/validity_sim.hpp"

namespace {

constexpr int kSchemaVersion = 1;

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t a = tok.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = tok.find_last_not_of(" \t");
    out.push_back(tok.substr(a, b - a + 1));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text,
                                  const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t a = tok.find_first_not_of(" \t");
    if (a == std::string::npos) {
      throw std::invalid_argument(flag + ": empty entry in list");
    }
    std::size_t b = tok.find_last_not_of(" \t");
    try {
      std::size_t used = 0;
      std::string piece = tok.substr(a, b - a + 1);
      double v = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": cannot parse '" + tok +
                                  "' as a number");
    }
  }
  if (out.empty()) {
    throw std::invalid_argument(flag + ": needs at least one entry");
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return (std::filesystem::path(dir) / name).string();
}

// ---------------------------------------------------------------- bound --

struct BoundArgs {
  std::string method;
  long long m = 0;
  double delta = 0.05;
  int t_priors = 1;
  double alpha = 2.0;
  double sigma2 = 0.0;
  double risk = -1.0;
  std::string risks_text;
  double sq_dist = -1.0;
  double dkl = 0.0;
  bool has_dkl = false;
  std::string c_grid_text;
  bool has_c_grid = false;
  std::string out_path;
};

int cmd_bound(const BoundArgs& args) {
  pacb::BoundContext ctx;
  ctx.m = args.m;
  ctx.delta = args.delta;
  ctx.t_priors = args.t_priors;
  ctx.alpha = args.alpha;
  ctx.validate();

  if (!(args.sigma2 > 0.0)) {
    throw std::invalid_argument("--sigma2 must be > 0");
  }

  std::vector<double> c_grid = pacb::kDefaultCGrid;
  if (args.has_c_grid) {
    c_grid = parse_doubles(args.c_grid_text, "--c-grid");
  }

  auto need_risk = [&]() {
    if (args.risk < 0.0 || args.risk > 1.0) {
      throw std::invalid_argument("--risk must be given in [0,1] for method " +
                                  args.method);
    }
  };
  auto need_sq = [&]() {
    if (args.sq_dist < 0.0) {
      throw std::invalid_argument("--sq-dist must be given (>= 0) for method " +
                                  args.method);
    }
  };

  pacb::BoundReport report;
  if (args.method == "ours") {
    need_risk();
    need_sq();
    report = pacb::bound_ours_sq(ctx, args.risk, args.sq_dist, args.sigma2);
  } else if (args.method == "rivasplata" || args.method == "blanchard" ||
             args.method == "catoni") {
    need_risk();
    if (!args.has_dkl) {
      throw std::invalid_argument("--dkl must be given for method " +
                                  args.method);
    }
    pacb::BaselineMethod m = args.method == "rivasplata"
                                 ? pacb::BaselineMethod::rivasplata
                             : args.method == "blanchard"
                                 ? pacb::BaselineMethod::blanchard
                                 : pacb::BaselineMethod::catoni;
    report = pacb::bound_baseline_dkl(ctx, m, args.risk, args.dkl, args.sigma2,
                                      c_grid);
  } else if (args.method == "stochastic") {
    if (args.risks_text.empty()) {
      throw std::invalid_argument("--risks must be given for method stochastic");
    }
    need_sq();
    std::vector<double> risks = parse_doubles(args.risks_text, "--risks");
    report = pacb::bound_stochastic_sq(ctx, risks, args.sq_dist, args.sigma2);
  } else {
    throw std::invalid_argument("--method must be one of ours, rivasplata, "
                                "blanchard, catoni, stochastic");
  }

  nlohmann::json j = pacb::to_json(report);
  j["schema_version"] = kSchemaVersion;
  std::string text = j.dump(2) + "\n";
  if (!args.out_path.empty()) {
    write_text(args.out_path, text);
  } else {
    std::cout << text;
  }
  return 0;
}

// ---------------------------------------------------------------- train --

pacb::LabeledDataset dataset_from_config(const pacb::Config& cfg,
                                         const std::string& which,
                                         pacb::SplitTag tag, int n,
                                         std::uint64_t seed,
                                         std::uint64_t stream_key) {
  std::string kind = cfg.get_string("data.kind", "blobs");
  if (kind == "csv") {
    return pacb::load_csv(cfg.require_string("data." + which + "_csv"), tag);
  }
  pacb::RngStream stream =
      pacb::make_stream(seed, pacb::StreamPhase::dataset, stream_key);
  if (kind == "blobs") {
    int classes = static_cast<int>(cfg.get_int("data.classes", 2));
    int dim = static_cast<int>(cfg.get_int("data.dim", 2));
    double spread = cfg.get_double("data.spread", 0.5);
    return pacb::make_blobs(n, classes, dim, spread, tag, stream);
  }
  if (kind == "moons") {
    double noise = cfg.get_double("data.noise", 0.1);
    return pacb::make_two_moons(n, noise, tag, stream);
  }
  throw std::invalid_argument("unknown data.kind: " + kind);
}

pacb::TrainingConfig training_from_config(const pacb::Config& cfg,
                                          std::uint64_t seed) {
  pacb::TrainingConfig tc;
  tc.epochs_prior =
      static_cast<int>(cfg.get_int("train.epochs_prior", tc.epochs_prior));
  tc.epochs_posterior = static_cast<int>(
      cfg.get_int("train.epochs_posterior", tc.epochs_posterior));
  tc.lr_prior = cfg.get_double("train.lr_prior", tc.lr_prior);
  tc.lr_posterior = cfg.get_double("train.lr_posterior", tc.lr_posterior);
  tc.batch_size =
      static_cast<int>(cfg.get_int("train.batch_size", tc.batch_size));
  tc.sigma2 = cfg.get_double("train.sigma2", tc.sigma2);
  tc.delta = cfg.get_double("train.delta", tc.delta);
  tc.objective = pacb::objective_from_string(
      cfg.get_string("train.objective", "ours"));
  tc.c_grid = cfg.get_doubles("train.c_grid", tc.c_grid);
  tc.n_eval = static_cast<int>(cfg.get_int("train.n_eval", tc.n_eval));
  tc.seed = seed;
  return tc;
}

void print_summary(const pacb::TrainRun& run, pacb::Objective objective) {
  std::printf("%-11s %-17s %-17s %-17s %-17s %s\n", "method", "risk_test",
              "bound_01", "bound_ce", "risk_train", "divergence");
  char cell[64];
  for (const pacb::EvalRow& row : run.eval.rows) {
    if (row.method == "stochastic" && objective != pacb::Objective::ours) {
      continue;
    }
    std::printf("%-11s", row.method.c_str());
    auto pair = [&](double mean, double std) {
      std::snprintf(cell, sizeof(cell), " %.4f +- %.4f", mean, std);
      std::printf("%-18s", cell);
    };
    pair(row.risk_test_mean, row.risk_test_std);
    pair(row.bound_01_mean, row.bound_01_std);
    pair(row.bound_ce_mean, row.bound_ce_std);
    pair(row.risk_s_mean, row.risk_s_std);
    std::printf(" %.4f +- %.4f\n", row.divergence_mean, row.divergence_std);
  }
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              long long seed_override) {
  pacb::Config cfg = pacb::Config::from_file(config_path);
  std::uint64_t seed = seed_override >= 0
                           ? static_cast<std::uint64_t>(seed_override)
                           : static_cast<std::uint64_t>(cfg.get_int("seed", 1));

  pacb::TrainingConfig tc = training_from_config(cfg, seed);
  tc.validate();

  std::vector<double> widths_d =
      cfg.get_doubles("net.widths", std::vector<double>{});
  if (widths_d.empty()) {
    throw std::invalid_argument("config key 'net.widths' is required");
  }
  pacb::MlpArchitecture arch;
  for (double w : widths_d) arch.widths.push_back(static_cast<int>(w));
  arch.validate();

  int n_prior = static_cast<int>(cfg.get_int("data.n_prior", 500));
  int n_posterior = static_cast<int>(cfg.get_int("data.n_posterior", 500));
  int n_test = static_cast<int>(cfg.get_int("data.n_test", 1000));

  pacb::LabeledDataset s_prior = dataset_from_config(
      cfg, "prior", pacb::SplitTag::prior_split, n_prior, seed, 0);
  pacb::LabeledDataset s = dataset_from_config(
      cfg, "posterior", pacb::SplitTag::posterior_split, n_posterior, seed, 1);
  pacb::LabeledDataset s_test = dataset_from_config(
      cfg, "test", pacb::SplitTag::test_split, n_test, seed, 2);

  if (s_prior.n_features() != arch.n_inputs() ||
      s.n_classes() > arch.n_classes()) {
    throw std::invalid_argument(
        "net.widths does not match the dataset: input dim " +
        std::to_string(s_prior.n_features()) + ", classes " +
        std::to_string(s.n_classes()));
  }

  pacb::TrainRun run = pacb::run_training(arch, tc, s_prior, s);
  pacb::evaluate_run(arch, run, s, s_test, tc);

  ensure_dir(out_dir);
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"config", cfg.resolved_json()},
                      {"seed", seed},
                      {"run", pacb::to_json(run)}};
  write_text(join_path(out_dir, "train_run.json"), j.dump(2) + "\n");
  pacb::write_metrics_csv(join_path(out_dir, "metrics.csv"), run.history);

  print_summary(run, tc.objective);
  return 0;
}

// ------------------------------------------------------------- validate --

int cmd_validate(const std::string& config_path, const std::string& out_dir,
                 long long seed_override) {
  pacb::Config cfg = pacb::Config::from_file(config_path);
  std::uint64_t seed = seed_override >= 0
                           ? static_cast<std::uint64_t>(seed_override)
                           : static_cast<std::uint64_t>(cfg.get_int("seed", 1));

  pacb::FiniteLearningProblem problem = pacb::problem_from_config(cfg);

  std::string kinds_text = cfg.get_string("validate.kinds", "all");
  std::vector<pacb::BoundKind> kinds;
  if (kinds_text == "all") {
    kinds = {pacb::BoundKind::thm2_alpha2, pacb::BoundKind::thm3_lambda,
             pacb::BoundKind::corollary5_analog, pacb::BoundKind::thm8,
             pacb::BoundKind::seeger_mi};
  } else {
    for (const std::string& name : split_names(kinds_text)) {
      kinds.push_back(pacb::bound_kind_from_string(name));
    }
  }

  std::vector<double> deltas =
      cfg.get_doubles("validate.deltas", {0.05, 0.1});
  std::string mode = cfg.get_string("validate.mode", "exact");
  long long trials = cfg.get_int("validate.trials", 20000);
  double alpha = cfg.get_double("validate.alpha", 2.0);

  std::vector<pacb::CoverageResult> rows;
  for (pacb::BoundKind kind : kinds) {
    for (double delta : deltas) {
      pacb::CoverageResult r;
      if (mode == "exact") {
        r = pacb::coverage_exact(problem, kind, delta, alpha);
      } else if (mode == "mc") {
        r = pacb::coverage(problem, kind, delta, trials, seed, alpha);
      } else {
        throw std::invalid_argument("validate.mode must be exact or mc");
      }
      rows.push_back(r);
      std::printf("%-18s delta=%.3f rate=%.6f cp_upper=%.6f %s\n",
                  r.bound_kind.c_str(), r.delta, r.empirical_rate, r.cp_upper,
                  r.empirical_rate <= delta ? "ok" : "VIOLATED");
    }
  }

  ensure_dir(out_dir);
  pacb::append_coverage_csv(join_path(out_dir, "coverage.csv"), rows);

  int maurer_m = static_cast<int>(cfg.get_int("validate.maurer_m", 0));
  if (maurer_m > 0) {
    std::vector<pacb::MaurerRow> table = pacb::maurer_check(maurer_m);
    std::ofstream out(join_path(out_dir, "maurer.csv"), std::ios::binary);
    out << "m,max_moment,bound,pass\n";
    bool all_pass = true;
    char buf[128];
    for (const pacb::MaurerRow& row : table) {
      std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%d\n", row.m,
                    row.max_moment, row.bound, row.pass ? 1 : 0);
      out << buf;
      all_pass = all_pass && row.pass;
    }
    std::printf("moment constant through m=%d: %s\n", maurer_m,
                all_pass ? "ok" : "VIOLATED");
    if (!all_pass) return 1;
  }

  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"config", cfg.resolved_json()},
                      {"seed", seed}};
  write_text(join_path(out_dir, "resolved_config.json"), j.dump(2) + "\n");

  for (const pacb::CoverageResult& r : rows) {
    if (r.empirical_rate > r.delta) return 1;
  }
  return 0;
}

// ------------------------------------------------------------------- mi --

int cmd_mi(const std::string& config_path, const std::string& out_dir,
           long long seed_override) {
  pacb::Config cfg = pacb::Config::from_file(config_path);
  std::uint64_t seed = seed_override >= 0
                           ? static_cast<std::uint64_t>(seed_override)
                           : static_cast<std::uint64_t>(cfg.get_int("seed", 1));

  pacb::FiniteLearningProblem problem = pacb::problem_from_config(cfg);
  std::vector<double> alphas = cfg.get_doubles("mi.alphas", {2.0});
  bool shannon = cfg.get_bool("mi.shannon", true);
  std::string mode = cfg.get_string("mi.mode", "enumerate");
  long long samples = cfg.get_int("mi.samples", 20000);

  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"config", cfg.resolved_json()},
                      {"seed", seed}};

  nlohmann::json alpha_rows = nlohmann::json::array();
  for (double alpha : alphas) {
    pacb::MiResult r;
    if (mode == "enumerate") {
      r = pacb::sibson_mi(problem, alpha);
    } else if (mode == "mc") {
      r = pacb::sibson_mi_mc(problem, alpha, samples, seed);
    } else {
      throw std::invalid_argument("mi.mode must be enumerate or mc");
    }
    std::printf("I_%g = %.12g\n", alpha, r.value);
    alpha_rows.push_back({{"alpha", alpha},
                          {"value", r.value},
                          {"optimal_prior", r.optimal_prior},
                          {"monte_carlo", r.monte_carlo},
                          {"std_error", r.std_error},
                          {"samples", r.samples}});
  }
  j["alphas"] = alpha_rows;

  if (shannon) {
    pacb::MiResult r = mode == "mc"
                           ? pacb::shannon_mi_mc(problem, samples, seed)
                           : pacb::shannon_mi(problem);
    std::printf("I = %.12g\n", r.value);
    j["shannon"] = {{"value", r.value},
                    {"optimal_prior", r.optimal_prior},
                    {"monte_carlo", r.monte_carlo},
                    {"std_error", r.std_error},
                    {"samples", r.samples}};
  }

  std::string bounds_text = cfg.get_string("mi.bounds", "");
  if (!bounds_text.empty()) {
    double delta = cfg.get_double("mi.delta", 0.05);
    double alpha = cfg.get_double("mi.bound_alpha", 2.0);
    double risk = cfg.get_double("mi.empirical_risk",
                                 std::numeric_limits<double>::quiet_NaN());
    nlohmann::json bound_rows = nlohmann::json::array();
    for (const std::string& name : split_names(bounds_text)) {
      pacb::InfoBoundKind kind = pacb::info_bound_kind_from_string(name);
      pacb::InfoBoundResult r =
          pacb::info_bound_rhs(kind, problem, alpha, delta, risk);
      nlohmann::json row = {{"kind", pacb::to_string(r.kind)},
                            {"alpha", r.alpha},
                            {"mi", r.mi},
                            {"log_moment", r.log_moment},
                            {"value", r.value}};
      if (std::isfinite(r.certified_risk)) {
        row["certified_risk"] = r.certified_risk;
      }
      bound_rows.push_back(row);
      std::printf("%s rhs = %.12g\n", pacb::to_string(r.kind).c_str(),
                  r.value);
    }
    j["bounds"] = bound_rows;
  }

  ensure_dir(out_dir);
  write_text(join_path(out_dir, "mi.json"), j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disintegrated PAC-Bayes bounds: computation, training, "
               "validation, dependence measures"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed_override = -1;

  BoundArgs bargs;
  CLI::App* bound = app.add_subcommand("bound", "evaluate one bound report");
  bound->add_option("--method", bargs.method,
                    "ours | rivasplata | blanchard | catoni | stochastic")
      ->required();
  bound->add_option("--m", bargs.m, "sample count")->required();
  bound->add_option("--delta", bargs.delta, "confidence level");
  bound->add_option("--t-priors", bargs.t_priors, "prior checkpoints T");
  bound->add_option("--alpha", bargs.alpha, "Renyi order");
  bound->add_option("--sigma2", bargs.sigma2, "posterior variance")
      ->required();
  bound->add_option("--risk", bargs.risk, "empirical risk of the sampled net");
  bound->add_option("--risks", bargs.risks_text,
                    "comma-separated per-net risks (stochastic)");
  bound->add_option("--sq-dist", bargs.sq_dist,
                    "||w - v||^2 (ours, stochastic)");
  bound->add_option("--dkl", bargs.dkl, "disintegrated KL (baselines)");
  bound->add_option("--c-grid", bargs.c_grid_text,
                    "comma-separated grid (catoni)");
  bound->add_option("--out", bargs.out_path, "write JSON here instead of stdout");

  CLI::App* train = app.add_subcommand("train", "two-phase certified training");
  CLI::App* validate =
      app.add_subcommand("validate", "coverage simulation on finite problems");
  CLI::App* mi = app.add_subcommand("mi", "dependence measures and budgets");
  for (CLI::App* sub : {train, validate, mi}) {
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "override the config seed");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) {
      bargs.has_dkl = bound->count("--dkl") > 0;
      bargs.has_c_grid = bound->count("--c-grid") > 0;
      return cmd_bound(bargs);
    }
    if (train->parsed()) return cmd_train(config_path, out_dir, seed_override);
    if (validate->parsed()) {
      return cmd_validate(config_path, out_dir, seed_override);
    }
    if (mi->parsed()) return cmd_mi(config_path, out_dir, seed_override);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
