#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacbound/bounds.hpp"
#include "pacbound/datasets.hpp"
#include "pacbound/gaussian_net.hpp"

namespace pacb {

// Which bound the posterior phase minimizes. All four certify the sampled
// net; they differ in the divergence term: ours uses the noise-free
// ||w - v||^2 / sigma2, the baselines the noise-dependent disintegrated KL.
enum class Objective { ours, rivasplata, blanchard, catoni };
Objective objective_from_string(const std::string& s);
std::string to_string(Objective obj);

struct TrainingConfig {
  int epochs_prior = 5;  // T: one checkpoint per epoch
  int epochs_posterior = 10;
  double lr_prior = 1e-4;
  double lr_posterior = 1e-4;
  int batch_size = 32;
  double sigma2 = 1e-3;
  double delta = 0.05;
  Objective objective = Objective::ours;
  std::vector<double> c_grid = kDefaultCGrid;
  std::uint64_t seed = 1;
  int n_eval = 400;  // sampled nets in the final evaluation

  void validate() const;
};

struct EpochMetric {
  long long epoch = 0;
  std::string phase;  // "prior" or "posterior"
  double objective_value = 0.0;
  double surrogate_risk = 0.0;
  double divergence = 0.0;
  double psi = 0.0;
};

// One row of the final summary per method, each statistic aggregated over
// the n_eval sampled nets (columns mirror test risk, certified bound,
// training risk, divergence).
struct EvalRow {
  std::string method;
  double risk_test_mean = 0.0;
  double risk_test_std = 0.0;
  double bound_01_mean = 0.0;  // certified zero-one risk
  double bound_01_std = 0.0;
  double bound_ce_mean = 0.0;  // certified bounded cross entropy
  double bound_ce_std = 0.0;
  double risk_s_mean = 0.0;
  double risk_s_std = 0.0;
  double divergence_mean = 0.0;
  double divergence_std = 0.0;
};

struct EvalReport {
  int n_eval = 0;
  // per sampled net: risks on the posterior split and the test split, plus
  // the noise-dependent disintegrated KL of that draw
  std::vector<double> net_risk_s_01;
  std::vector<double> net_risk_s_ce;
  std::vector<double> net_risk_t_01;
  std::vector<double> net_risk_t_ce;
  std::vector<double> net_dkl;
  double renyi_divergence = 0.0;  // constant across draws by construction
  std::vector<EvalRow> rows;      // ours, rivasplata, blanchard, catoni,
                                  // stochastic
};

struct TrainRun {
  std::vector<FlatWeights> prior_checkpoints;
  int selected_prior_index = 1;  // 1-based
  FlatWeights posterior_mean;
  std::vector<EpochMetric> history;
  bool evaluated = false;
  EvalReport eval;
};

nlohmann::json to_json(const TrainRun& run);
void write_metrics_csv(const std::string& path,
                       const std::vector<EpochMetric>& history);

struct PriorPhase {
  std::vector<FlatWeights> checkpoints;
  std::vector<EpochMetric> history;
};

// Phase 1: noisy bounded-cross-entropy descent on the prior split, one
// checkpoint per epoch.
PriorPhase learn_priors(const MlpArchitecture& arch, const TrainingConfig& cfg,
                        const LabeledDataset& s_prior);

// Early stopping over the checkpoints: argmin of the noise-free mean
// bounded cross entropy on the posterior split, ties to the smallest index.
// Returns a 1-based index.
int select_prior(const MlpArchitecture& arch,
                 const std::vector<FlatWeights>& checkpoints,
                 const LabeledDataset& s);

// One posterior-phase objective evaluation at mean omega with frozen noise
// eps: the certified-risk objective value, its pieces, and its gradient with
// respect to omega (through the kl inversion and the divergence
// analytically, through the surrogate risk pathwise at omega + eps).
struct ObjectiveEval {
  double value = 0.0;
  double q_hat = 0.0;  // mini-batch bounded cross entropy at omega + eps
  double psi = 0.0;
  double divergence = 0.0;
  double dvalue_dc = 0.0;  // catoni only
  FlatWeights grad;
};

ObjectiveEval posterior_objective(const MlpArchitecture& arch,
                                  const TrainingConfig& cfg,
                                  const LabeledDataset& s,
                                  const std::vector<int>& batch,
                                  const FlatWeights& omega,
                                  const FlatWeights& eps,
                                  const FlatWeights& v_anchor,
                                  double catoni_c = 1.0);

// The displayed catoni objective (1 - e^{-c q - psi}) / (1 - e^{-c}) and its
// first-batch grid initialization.
double catoni_objective(double c, double q_hat, double psi_c);
double catoni_init(const std::vector<double>& c_grid, double q_hat,
                   double psi_c);

// c = exp(u) kept positive by construction; step performs plain gradient
// descent on u given d(objective)/dc.
struct CatoniParam {
  double u = 0.0;
  double c() const;
  void step(double lr, double dvalue_dc);
};

// Phase 2: starts from the selected checkpoint and minimizes the chosen
// bound objective. Returns the run with both phases' history merged.
TrainRun learn_posterior(const MlpArchitecture& arch, const TrainingConfig& cfg,
                         const LabeledDataset& s, const PriorPhase& priors,
                         int selected_index);

// learn_priors + select_prior + learn_posterior. Enforces the split
// discipline: s_prior must carry the prior tag and s the posterior tag.
TrainRun run_training(const MlpArchitecture& arch, const TrainingConfig& cfg,
                      const LabeledDataset& s_prior, const LabeledDataset& s);

// Samples n_eval nets from the posterior, evaluates risks and every bound,
// and fills run.eval. m for the bounds is s.size().
void evaluate_run(const MlpArchitecture& arch, TrainRun& run,
                  const LabeledDataset& s, const LabeledDataset& s_test,
                  const TrainingConfig& cfg);

}  // namespace pacb
