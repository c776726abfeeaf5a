#include "pacbound/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "pacbound/binary_kl.hpp"
#include "pacbound/divergences.hpp"
#include "pacbound/parallel.hpp"
#include "pacbound/rng.hpp"

namespace pacb {
namespace {

// adaptive per-coordinate steps; all state is deterministic given the
// gradient sequence, which keeps reruns bit-identical
struct Adam {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<double> m;
  std::vector<double> v;
  long long t = 0;

  explicit Adam(int dim) : m(dim, 0.0), v(dim, 0.0) {}

  void step(double lr, const std::vector<double>& grad,
            std::vector<double>& w) {
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }
};

std::vector<std::vector<int>> make_batches(int n, int batch_size,
                                           RngStream& stream) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(stream.next_unit() * (i + 1));
    if (j > i) j = i;
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::vector<int>> batches;
  for (int b = 0; b < n; b += batch_size) {
    int e = std::min(n, b + batch_size);
    batches.emplace_back(idx.begin() + b, idx.begin() + e);
  }
  return batches;
}

double sq_distance(const std::vector<double>& a,
                   const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_finite(double value, const char* phase, long long epoch,
                  long long step) {
  if (!std::isfinite(value)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%s training diverged (non-finite objective) at epoch %lld "
                  "step %lld",
                  phase, epoch, step);
    throw std::runtime_error(buf);
  }
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  // bitwise-constant samples (the noise-free divergence) must report exactly
  // zero scatter, not mean-rounding dust
  bool all_equal = true;
  for (double x : xs) {
    if (x != xs.front()) all_equal = false;
  }
  if (all_equal) return 0.0;
  double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace

Objective objective_from_string(const std::string& s) {
  if (s == "ours") return Objective::ours;
  if (s == "rivasplata") return Objective::rivasplata;
  if (s == "blanchard") return Objective::blanchard;
  if (s == "catoni") return Objective::catoni;
  throw std::invalid_argument("unknown objective: " + s);
}

std::string to_string(Objective obj) {
  switch (obj) {
    case Objective::ours: return "ours";
    case Objective::rivasplata: return "rivasplata";
    case Objective::blanchard: return "blanchard";
    case Objective::catoni: return "catoni";
  }
  throw std::logic_error("unreachable objective");
}

void TrainingConfig::validate() const {
  if (epochs_prior < 1) {
    throw std::invalid_argument("epochs_prior must be >= 1");
  }
  if (epochs_posterior < 0) {
    throw std::invalid_argument("epochs_posterior must be >= 0");
  }
  if (!(lr_prior >= 0.0) || !(lr_posterior >= 0.0)) {
    throw std::invalid_argument("learning rates must be >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1)");
  }
  if (objective == Objective::catoni && c_grid.empty()) {
    throw std::invalid_argument("catoni objective needs a nonempty c_grid");
  }
  for (double c : c_grid) {
    if (!(c > 0.0)) throw std::invalid_argument("c_grid entries must be > 0");
  }
  if (n_eval < 1) throw std::invalid_argument("n_eval must be >= 1");
}

PriorPhase learn_priors(const MlpArchitecture& arch, const TrainingConfig& cfg,
                        const LabeledDataset& s_prior) {
  arch.validate();
  cfg.validate();
  s_prior.validate();

  PriorPhase out;
  RngStream init_stream = make_stream(cfg.seed, StreamPhase::init);
  FlatWeights omega = init_weights(arch, init_stream);

  Adam opt(arch.n_params());
  for (int epoch = 1; epoch <= cfg.epochs_prior; ++epoch) {
    RngStream shuffle_stream =
        make_stream(cfg.seed, StreamPhase::shuffle, 0, epoch);
    auto batches = make_batches(s_prior.size(), cfg.batch_size, shuffle_stream);
    double loss_sum = 0.0;
    for (std::size_t step = 0; step < batches.size(); ++step) {
      RngStream noise = make_stream(cfg.seed, StreamPhase::prior, epoch,
                                    static_cast<std::uint64_t>(step));
      SampledWeights sw = sample_weights(omega, cfg.sigma2, noise);
      BatchGradient g = backward(arch, sw.weights, s_prior, batches[step]);
      check_finite(g.mean_loss, "prior", epoch, static_cast<long long>(step));
      loss_sum += g.mean_loss;
      opt.step(cfg.lr_prior, g.grad.v, omega.v);
    }
    out.checkpoints.push_back(omega);
    double mean_loss = loss_sum / static_cast<double>(batches.size());
    out.history.push_back(
        {epoch, "prior", mean_loss, mean_loss, 0.0, 0.0});
  }
  return out;
}

int select_prior(const MlpArchitecture& arch,
                 const std::vector<FlatWeights>& checkpoints,
                 const LabeledDataset& s) {
  if (checkpoints.empty()) {
    throw std::invalid_argument("no checkpoints to select from");
  }
  s.validate();
  int best = 1;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < checkpoints.size(); ++t) {
    double loss = risks(arch, checkpoints[t], s).bounded_ce;
    if (loss < best_loss) {
      best_loss = loss;
      best = static_cast<int>(t) + 1;
    }
  }
  return best;
}

double catoni_objective(double c, double q_hat, double psi_c) {
  return (1.0 - std::exp(-c * q_hat - psi_c)) / (1.0 - std::exp(-c));
}

double catoni_init(const std::vector<double>& c_grid, double q_hat,
                   double psi_c) {
  if (c_grid.empty()) throw std::invalid_argument("empty c_grid");
  double best_c = c_grid.front();
  double best = catoni_objective(best_c, q_hat, psi_c);
  for (double c : c_grid) {
    double v = catoni_objective(c, q_hat, psi_c);
    if (v < best) {
      best = v;
      best_c = c;
    }
  }
  return best_c;
}

double CatoniParam::c() const { return std::exp(u); }

void CatoniParam::step(double lr, double dvalue_dc) {
  // chain rule through c = e^u keeps c positive without projection
  u -= lr * dvalue_dc * std::exp(u);
}

ObjectiveEval posterior_objective(const MlpArchitecture& arch,
                                  const TrainingConfig& cfg,
                                  const LabeledDataset& s,
                                  const std::vector<int>& batch,
                                  const FlatWeights& omega,
                                  const FlatWeights& eps,
                                  const FlatWeights& v_anchor,
                                  double catoni_c) {
  const double md = static_cast<double>(s.size());
  const double t = static_cast<double>(cfg.epochs_prior);

  FlatWeights sampled = omega;
  for (int i = 0; i < sampled.size(); ++i) sampled.v[i] += eps.v[i];
  BatchGradient g = backward(arch, sampled, s, batch);

  ObjectiveEval out;
  out.q_hat = g.mean_loss;
  out.grad.v.assign(omega.size(), 0.0);

  // divergence and budget, plus d psi / d omega as a scale on (shift)
  double dpsi_scale = 0.0;              // multiplies the per-coordinate shift
  std::vector<double> shift(omega.size());
  double raw_psi = 0.0;
  if (cfg.objective == Objective::ours) {
    for (int i = 0; i < omega.size(); ++i) shift[i] = omega.v[i] - v_anchor.v[i];
    out.divergence = sq_distance(omega.v, v_anchor.v) / cfg.sigma2;
    double log_term = std::log(16.0 * t) + 0.5 * std::log(md) -
                      3.0 * std::log(cfg.delta);
    raw_psi = (out.divergence + log_term) / md;
    dpsi_scale = 2.0 / (cfg.sigma2 * md);
  } else {
    for (int i = 0; i < omega.size(); ++i) {
      shift[i] = omega.v[i] + eps.v[i] - v_anchor.v[i];
    }
    out.divergence =
        disintegrated_kl_gaussian(omega.v, eps.v, v_anchor.v, cfg.sigma2);
    if (cfg.objective == Objective::rivasplata) {
      double log_term =
          std::log(2.0 * t) + 0.5 * std::log(md) - std::log(cfg.delta);
      raw_psi = (out.divergence + log_term) / md;
      dpsi_scale = 1.0 / (cfg.sigma2 * md);
    } else if (cfg.objective == Objective::blanchard) {
      double log_term = std::log(t * (md + 1.0)) - std::log(cfg.delta);
      raw_psi = ((md + 1.0) / md * out.divergence + log_term) / md;
      dpsi_scale = (md + 1.0) / md / (cfg.sigma2 * md);
    } else {  // catoni: psi_c = (dkl + ln(T |C|/delta)) / m
      double log_term = std::log(t * static_cast<double>(cfg.c_grid.size())) -
                        std::log(cfg.delta);
      raw_psi = (out.divergence + log_term) / md;
      dpsi_scale = 1.0 / (cfg.sigma2 * md);
    }
  }

  // negative budgets are clamped like the evaluated bounds; the clamp also
  // zeroes the divergence gradient path
  bool clamped = raw_psi < 0.0;
  out.psi = clamped ? 0.0 : raw_psi;

  if (cfg.objective == Objective::catoni) {
    const double c = catoni_c;
    double a = std::exp(-c * out.q_hat - out.psi);
    double denom = 1.0 - std::exp(-c);
    out.value = (1.0 - a) / denom;
    double dvalue_dq = c * a / denom;
    double dvalue_dpsi = clamped ? 0.0 : a / denom;
    out.dvalue_dc = (out.q_hat * a * denom - (1.0 - a) * std::exp(-c)) /
                    (denom * denom);
    for (int i = 0; i < omega.size(); ++i) {
      out.grad.v[i] =
          dvalue_dq * g.grad.v[i] + dvalue_dpsi * dpsi_scale * shift[i];
    }
    return out;
  }

  if (out.psi < kKlGradPsiGuard) {
    // kl_inverse(q, 0) = q: the objective reduces to the surrogate risk
    out.value = out.q_hat;
    out.grad = g.grad;
    return out;
  }

  out.value = kl_inverse(out.q_hat, out.psi).p_star;
  KlInverseGrad kg = kl_inverse_grad(out.q_hat, out.psi);
  double dpsi_path = clamped ? 0.0 : kg.dpsi;
  for (int i = 0; i < omega.size(); ++i) {
    out.grad.v[i] = kg.dq * g.grad.v[i] + dpsi_path * dpsi_scale * shift[i];
  }
  return out;
}

TrainRun learn_posterior(const MlpArchitecture& arch, const TrainingConfig& cfg,
                         const LabeledDataset& s, const PriorPhase& priors,
                         int selected_index) {
  arch.validate();
  cfg.validate();
  s.validate();
  if (selected_index < 1 ||
      selected_index > static_cast<int>(priors.checkpoints.size())) {
    throw std::invalid_argument("selected prior index out of range");
  }

  TrainRun run;
  run.prior_checkpoints = priors.checkpoints;
  run.selected_prior_index = selected_index;
  run.history = priors.history;

  const FlatWeights& anchor = priors.checkpoints[selected_index - 1];
  FlatWeights omega = anchor;

  Adam opt(arch.n_params());
  CatoniParam catoni;
  bool catoni_ready = false;

  for (int epoch = 1; epoch <= cfg.epochs_posterior; ++epoch) {
    RngStream shuffle_stream =
        make_stream(cfg.seed, StreamPhase::shuffle, 1, epoch);
    auto batches = make_batches(s.size(), cfg.batch_size, shuffle_stream);
    double obj_sum = 0.0;
    double risk_sum = 0.0;
    double div_sum = 0.0;
    double psi_sum = 0.0;
    for (std::size_t step = 0; step < batches.size(); ++step) {
      RngStream noise = make_stream(cfg.seed, StreamPhase::posterior, epoch,
                                    static_cast<std::uint64_t>(step));
      SampledWeights sw = sample_weights(omega, cfg.sigma2, noise);

      if (cfg.objective == Objective::catoni && !catoni_ready) {
        // grid initialization on the very first mini-batch
        ObjectiveEval probe = posterior_objective(arch, cfg, s, batches[step],
                                                  omega, sw.eps, anchor, 1.0);
        catoni.u = std::log(catoni_init(cfg.c_grid, probe.q_hat, probe.psi));
        catoni_ready = true;
      }

      ObjectiveEval eval =
          posterior_objective(arch, cfg, s, batches[step], omega, sw.eps,
                              anchor, catoni_ready ? catoni.c() : 1.0);
      check_finite(eval.value, "posterior", epoch,
                   static_cast<long long>(step));
      obj_sum += eval.value;
      risk_sum += eval.q_hat;
      div_sum += eval.divergence;
      psi_sum += eval.psi;
      opt.step(cfg.lr_posterior, eval.grad.v, omega.v);
      if (cfg.objective == Objective::catoni) {
        catoni.step(cfg.lr_posterior, eval.dvalue_dc);
      }
    }
    double n = static_cast<double>(batches.size());
    run.history.push_back({epoch, "posterior", obj_sum / n, risk_sum / n,
                           div_sum / n, psi_sum / n});
  }

  run.posterior_mean = omega;
  return run;
}

TrainRun run_training(const MlpArchitecture& arch, const TrainingConfig& cfg,
                      const LabeledDataset& s_prior, const LabeledDataset& s) {
  if (s_prior.tag != SplitTag::prior_split) {
    throw std::invalid_argument("prior-phase dataset must carry the prior tag");
  }
  if (s.tag != SplitTag::posterior_split) {
    throw std::invalid_argument(
        "posterior-phase dataset must carry the posterior tag");
  }
  PriorPhase priors = learn_priors(arch, cfg, s_prior);
  int selected = select_prior(arch, priors.checkpoints, s);
  return learn_posterior(arch, cfg, s, priors, selected);
}

void evaluate_run(const MlpArchitecture& arch, TrainRun& run,
                  const LabeledDataset& s, const LabeledDataset& s_test,
                  const TrainingConfig& cfg) {
  cfg.validate();
  s.validate();
  s_test.validate();
  if (run.prior_checkpoints.empty() || run.posterior_mean.size() == 0) {
    throw std::invalid_argument("run has no trained posterior to evaluate");
  }

  const FlatWeights& v = run.prior_checkpoints[run.selected_prior_index - 1];
  const FlatWeights& w = run.posterior_mean;
  const double sq_dist = sq_distance(w.v, v.v);
  const int n = cfg.n_eval;

  EvalReport& ev = run.eval;
  ev = EvalReport{};
  ev.n_eval = n;
  ev.renyi_divergence = sq_dist / cfg.sigma2;  // order-2 value
  ev.net_risk_s_01.resize(n);
  ev.net_risk_s_ce.resize(n);
  ev.net_risk_t_01.resize(n);
  ev.net_risk_t_ce.resize(n);
  ev.net_dkl.resize(n);

  parallel_items(n, [&](std::size_t i) {
    RngStream stream =
        make_stream(cfg.seed, StreamPhase::eval, static_cast<std::uint64_t>(i));
    SampledWeights sw = sample_weights(w, cfg.sigma2, stream);
    RiskEstimate rs = risks(arch, sw.weights, s);
    RiskEstimate rt = risks(arch, sw.weights, s_test);
    ev.net_risk_s_01[i] = rs.zero_one;
    ev.net_risk_s_ce[i] = rs.bounded_ce;
    ev.net_risk_t_01[i] = rt.zero_one;
    ev.net_risk_t_ce[i] = rt.bounded_ce;
    ev.net_dkl[i] =
        disintegrated_kl_gaussian(w.v, sw.eps.v, v.v, cfg.sigma2);
  });

  BoundContext ctx;
  ctx.m = s.size();
  ctx.delta = cfg.delta;
  ctx.t_priors = static_cast<int>(run.prior_checkpoints.size());
  ctx.alpha = 2.0;

  auto row_from = [&](const std::string& method,
                      const std::vector<double>& bound01,
                      const std::vector<double>& boundce,
                      const std::vector<double>& divs) {
    EvalRow row;
    row.method = method;
    row.risk_test_mean = mean_of(ev.net_risk_t_01);
    row.risk_test_std = std_of(ev.net_risk_t_01);
    row.bound_01_mean = mean_of(bound01);
    row.bound_01_std = std_of(bound01);
    row.bound_ce_mean = mean_of(boundce);
    row.bound_ce_std = std_of(boundce);
    row.risk_s_mean = mean_of(ev.net_risk_s_01);
    row.risk_s_std = std_of(ev.net_risk_s_01);
    row.divergence_mean = mean_of(divs);
    row.divergence_std = std_of(divs);
    return row;
  };

  std::vector<double> b01(n), bce(n), divs(n);

  // noise-free divergence: one certificate shape, risk varies per net
  for (int i = 0; i < n; ++i) {
    b01[i] = bound_ours_sq(ctx, ev.net_risk_s_01[i], sq_dist, cfg.sigma2)
                 .certified_risk;
    bce[i] = bound_ours_sq(ctx, ev.net_risk_s_ce[i], sq_dist, cfg.sigma2)
                 .certified_risk;
    divs[i] = ev.renyi_divergence;
  }
  ev.rows.push_back(row_from("ours", b01, bce, divs));

  for (BaselineMethod method : {BaselineMethod::rivasplata,
                                BaselineMethod::blanchard,
                                BaselineMethod::catoni}) {
    std::string name = method == BaselineMethod::rivasplata ? "rivasplata"
                       : method == BaselineMethod::blanchard ? "blanchard"
                                                             : "catoni";
    for (int i = 0; i < n; ++i) {
      b01[i] = bound_baseline_dkl(ctx, method, ev.net_risk_s_01[i],
                                  ev.net_dkl[i], cfg.sigma2, cfg.c_grid)
                   .certified_risk;
      bce[i] = bound_baseline_dkl(ctx, method, ev.net_risk_s_ce[i],
                                  ev.net_dkl[i], cfg.sigma2, cfg.c_grid)
                   .certified_risk;
      divs[i] = ev.net_dkl[i];
    }
    ev.rows.push_back(row_from(name, b01, bce, divs));
  }

  BoundReport st01 = bound_stochastic_sq(ctx, ev.net_risk_s_01, sq_dist,
                                         cfg.sigma2);
  BoundReport stce = bound_stochastic_sq(ctx, ev.net_risk_s_ce, sq_dist,
                                         cfg.sigma2);
  EvalRow srow;
  srow.method = "stochastic";
  srow.risk_test_mean = mean_of(ev.net_risk_t_01);
  srow.risk_test_std = std_of(ev.net_risk_t_01);
  srow.bound_01_mean = st01.certified_risk;
  srow.bound_ce_mean = stce.certified_risk;
  srow.risk_s_mean = mean_of(ev.net_risk_s_01);
  srow.risk_s_std = std_of(ev.net_risk_s_01);
  srow.divergence_mean = st01.divergence_term;
  ev.rows.push_back(srow);

  run.evaluated = true;
}

nlohmann::json to_json(const TrainRun& run) {
  nlohmann::json checkpoints = nlohmann::json::array();
  for (const FlatWeights& w : run.prior_checkpoints) checkpoints.push_back(w.v);

  nlohmann::json history = nlohmann::json::array();
  for (const EpochMetric& m : run.history) {
    history.push_back({{"epoch", m.epoch},
                       {"phase", m.phase},
                       {"objective", m.objective_value},
                       {"surrogate_risk", m.surrogate_risk},
                       {"divergence", m.divergence},
                       {"psi", m.psi}});
  }

  nlohmann::json j = {{"prior_checkpoints", checkpoints},
                      {"selected_prior_index", run.selected_prior_index},
                      {"posterior_mean", run.posterior_mean.v},
                      {"history", history},
                      {"evaluated", run.evaluated}};

  if (run.evaluated) {
    const EvalReport& ev = run.eval;
    nlohmann::json rows = nlohmann::json::array();
    for (const EvalRow& r : ev.rows) {
      rows.push_back({{"method", r.method},
                      {"risk_test_mean", r.risk_test_mean},
                      {"risk_test_std", r.risk_test_std},
                      {"bound_01_mean", r.bound_01_mean},
                      {"bound_01_std", r.bound_01_std},
                      {"bound_ce_mean", r.bound_ce_mean},
                      {"bound_ce_std", r.bound_ce_std},
                      {"risk_s_mean", r.risk_s_mean},
                      {"risk_s_std", r.risk_s_std},
                      {"divergence_mean", r.divergence_mean},
                      {"divergence_std", r.divergence_std}});
    }
    j["eval"] = {{"n_eval", ev.n_eval},
                 {"renyi_divergence", ev.renyi_divergence},
                 {"net_risk_s_01", ev.net_risk_s_01},
                 {"net_risk_s_ce", ev.net_risk_s_ce},
                 {"net_risk_t_01", ev.net_risk_t_01},
                 {"net_risk_t_ce", ev.net_risk_t_ce},
                 {"net_dkl", ev.net_dkl},
                 {"rows", rows}};
  }
  return j;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<EpochMetric>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open metrics file: " + path);
  out << "epoch,phase,objective,surrogate_risk,divergence,psi\n";
  char buf[256];
  for (const EpochMetric& m : history) {
    std::snprintf(buf, sizeof(buf), "%lld,%s,%.10g,%.10g,%.10g,%.10g\n",
                  m.epoch, m.phase.c_str(), m.objective_value,
                  m.surrogate_risk, m.divergence, m.psi);
    out << buf;
  }
}

}  // namespace pacb
