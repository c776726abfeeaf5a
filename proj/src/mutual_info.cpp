#include "pacbound/mutual_info.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pacbound/binary_kl.hpp"
#include "pacbound/parallel.hpp"

namespace pacb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// streaming log-sum-exp; mergeable, merge order fixed by the caller
struct LogSumAcc {
  double max = -kInf;
  double sum = 0.0;

  void add(double lx) {
    if (lx == -kInf) return;
    if (lx <= max) {
      sum += std::exp(lx - max);
    } else {
      sum = sum * std::exp(max - lx) + 1.0;
      max = lx;
    }
  }
  void merge(const LogSumAcc& o) {
    if (o.max == -kInf) return;
    if (o.max <= max) {
      sum += o.sum * std::exp(o.max - max);
    } else {
      sum = sum * std::exp(max - o.max) + o.sum;
      max = o.max;
    }
  }
  double log() const { return max == -kInf ? -kInf : max + std::log(sum); }
};

double kl_discrete(const std::vector<double>& q, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return kInf;
    s += q[i] * std::log(q[i] / p[i]);
  }
  return s;
}

void check_measure(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) +
                                  " has a negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + " does not sum to 1");
  }
}

// per-hypothesis sums of f(tuple) over all tuples. Per-chunk partials
// combined in fixed 256-chunk index order in both modes: the summation tree
// is part of the result's definition, so the serial reference agrees
// bitwise with the parallel kernel and results never depend on thread count.
std::vector<double> sum_over_tuples(
    const FiniteLearningProblem& pb, int width,
    const std::function<void(std::size_t, double*)>& add_terms,
    bool parallel = true) {
  const std::size_t n = pb.n_tuples();
  std::vector<std::vector<double>> partial(kParallelChunks,
                                           std::vector<double>(width, 0.0));
  auto body = [&](int c) {
    auto [b, e] = chunk_range(n, c);
    double* acc = partial[c].data();
    for (std::size_t t = b; t < e; ++t) add_terms(t, acc);
  };
  if (parallel) {
    parallel_chunks(body);
  } else {
    for (int c = 0; c < static_cast<int>(kParallelChunks); ++c) body(c);
  }
  std::vector<double> total(width, 0.0);
  for (int c = 0; c < kParallelChunks; ++c) {
    for (int i = 0; i < width; ++i) total[i] += partial[c][i];
  }
  return total;
}

MiResult sibson_from_moments(const std::vector<double>& a, double alpha) {
  MiResult res;
  double z = 0.0;
  std::vector<double> root(a.size());
  for (std::size_t h = 0; h < a.size(); ++h) {
    root[h] = std::pow(a[h], 1.0 / alpha);
    z += root[h];
  }
  res.value = alpha / (alpha - 1.0) * std::log(z);
  res.optimal_prior.resize(a.size());
  for (std::size_t h = 0; h < a.size(); ++h) res.optimal_prior[h] = root[h] / z;
  return res;
}

void require_alpha(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be finite and > 1");
  }
}

// ln E_S E_{h~prior} exp(weight * ln phi(h,S)); phi defaults to e^{m kl} via
// lifted = true (weight then multiplies m*kl directly)
double log_phi_moment(const FiniteLearningProblem& pb,
                      const std::vector<double>& prior, double weight,
                      const PhiFn& phi, bool require_ge_one, bool parallel) {
  const std::size_t n = pb.n_tuples();
  const int nh = pb.n_hyp();
  std::vector<double> true_r(nh);
  for (int h = 0; h < nh; ++h) true_r[h] = pb.true_risk(h);

  auto term = [&](std::size_t t, LogSumAcc& acc) {
    std::vector<int> tuple = pb.decode_tuple(t);
    double prob = pb.tuple_prob(tuple);
    if (prob <= 0.0) return;  // avoids -inf + inf against infinite kl terms
    double lp = std::log(prob);
    for (int h = 0; h < nh; ++h) {
      if (prior[h] <= 0.0) continue;
      double lphi;
      if (phi) {
        double v = phi(h, tuple);
        if (!(v >= 0.0)) throw std::invalid_argument("phi must be >= 0");
        if (require_ge_one && v < 1.0 - 1e-12) {
          throw std::invalid_argument(
              "this bound form needs phi >= 1 everywhere");
        }
        lphi = std::log(v);
      } else {
        lphi = pb.m * kl(pb.empirical_risk(h, tuple), true_r[h]);
      }
      acc.add(lp + std::log(prior[h]) + weight * lphi);
    }
  };

  // same chunked merge order in both modes, see sum_over_tuples
  std::vector<LogSumAcc> partial(kParallelChunks);
  auto body = [&](int c) {
    auto [b, e] = chunk_range(n, c);
    for (std::size_t t = b; t < e; ++t) term(t, partial[c]);
  };
  if (parallel) {
    parallel_chunks(body);
  } else {
    for (int c = 0; c < static_cast<int>(kParallelChunks); ++c) body(c);
  }
  LogSumAcc acc;
  for (int c = 0; c < kParallelChunks; ++c) acc.merge(partial[c]);
  return acc.log();
}

}  // namespace

void FiniteLearningProblem::validate() const {
  check_measure(z_probs, "z_probs");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (loss.empty()) throw std::invalid_argument("loss table is empty");
  for (const auto& row : loss) {
    if (static_cast<int>(row.size()) != n_z()) {
      throw std::invalid_argument("loss row width must equal |Z|");
    }
    for (double v : row) {
      if (!(v >= 0.0) || !(v <= 1.0)) {
        throw std::invalid_argument("loss entries must lie in [0,1]");
      }
    }
  }
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  for (const auto& p : priors) {
    if (static_cast<int>(p.size()) != n_hyp()) {
      throw std::invalid_argument("prior width must equal |H|");
    }
    check_measure(p, "prior");
  }
}

double FiniteLearningProblem::pair_count() const {
  return std::pow(static_cast<double>(n_z()), m) * n_hyp();
}

std::size_t FiniteLearningProblem::n_tuples() const {
  if (pair_count() > kEnumerationCap) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "enumeration size |Z|^m * |H| = %.3g exceeds cap %.3g; "
                  "use the Monte Carlo mode",
                  pair_count(), kEnumerationCap);
    throw std::runtime_error(buf);
  }
  std::size_t n = 1;
  for (int i = 0; i < m; ++i) n *= static_cast<std::size_t>(n_z());
  return n;
}

std::vector<std::vector<double>> FiniteLearningProblem::effective_priors()
    const {
  if (!priors.empty()) return priors;
  return {std::vector<double>(n_hyp(), 1.0 / n_hyp())};
}

std::vector<int> FiniteLearningProblem::decode_tuple(std::size_t index) const {
  std::vector<int> tuple(m);
  const std::size_t nz = static_cast<std::size_t>(n_z());
  for (int j = 0; j < m; ++j) {
    tuple[j] = static_cast<int>(index % nz);
    index /= nz;
  }
  return tuple;
}

double FiniteLearningProblem::tuple_prob(const std::vector<int>& tuple) const {
  double p = 1.0;
  for (int z : tuple) p *= z_probs[z];
  return p;
}

double FiniteLearningProblem::empirical_risk(
    int h, const std::vector<int>& tuple) const {
  double s = 0.0;
  for (int z : tuple) s += loss[h][z];
  return s / static_cast<double>(m);
}

double FiniteLearningProblem::true_risk(int h) const {
  double s = 0.0;
  for (int z = 0; z < n_z(); ++z) s += z_probs[z] * loss[h][z];
  return s;
}

std::vector<double> FiniteLearningProblem::posterior(
    const std::vector<int>& tuple) const {
  if (custom_algorithm) {
    std::vector<double> q = custom_algorithm(tuple);
    if (static_cast<int>(q.size()) != n_hyp()) {
      throw std::invalid_argument("custom algorithm returned wrong width");
    }
    check_measure(q, "custom posterior");
    return q;
  }
  std::vector<double> arg(n_hyp());
  for (int h = 0; h < n_hyp(); ++h) arg[h] = -beta * m * empirical_risk(h, tuple);
  double amax = *std::max_element(arg.begin(), arg.end());
  double sum = 0.0;
  for (double& a : arg) {
    a = std::exp(a - amax);
    sum += a;
  }
  for (double& a : arg) a /= sum;
  return arg;
}

std::vector<int> FiniteLearningProblem::sample_tuple(RngStream& stream) const {
  std::vector<int> tuple(m);
  for (int j = 0; j < m; ++j) {
    tuple[j] = sample_index(z_probs, stream.next_unit());
  }
  return tuple;
}

int FiniteLearningProblem::sample_index(const std::vector<double>& probs,
                                        double u) {
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    c += probs[i];
    if (u < c) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

FiniteLearningProblem problem_from_config(const Config& cfg) {
  FiniteLearningProblem pb;
  pb.z_probs = cfg.get_doubles("problem.z_probs", {});
  if (pb.z_probs.empty()) {
    throw std::invalid_argument("config key 'problem.z_probs' is required");
  }
  pb.m = static_cast<int>(cfg.get_int("problem.m", 0));
  if (pb.m < 1) {
    throw std::invalid_argument("config key 'problem.m' must be >= 1");
  }
  pb.loss = cfg.get_matrix("problem.loss", {});
  if (pb.loss.empty()) {
    throw std::invalid_argument("config key 'problem.loss' is required");
  }
  pb.beta = cfg.get_double("problem.beta", 1.0);
  pb.priors = cfg.get_matrix("problem.priors", {});
  std::string alg = cfg.get_string("problem.algorithm", "gibbs");
  if (alg != "gibbs") {
    throw std::invalid_argument("unknown problem.algorithm: " + alg);
  }
  pb.validate();
  return pb;
}

namespace {

MiResult sibson_mi_impl(const FiniteLearningProblem& pb, double alpha,
                        bool parallel) {
  pb.validate();
  require_alpha(alpha);
  const int nh = pb.n_hyp();
  std::vector<double> a = sum_over_tuples(
      pb, nh,
      [&](std::size_t t, double* acc) {
        std::vector<int> tuple = pb.decode_tuple(t);
        double prob = pb.tuple_prob(tuple);
        std::vector<double> q = pb.posterior(tuple);
        for (int h = 0; h < nh; ++h) acc[h] += prob * std::pow(q[h], alpha);
      },
      parallel);
  return sibson_from_moments(a, alpha);
}

}  // namespace

MiResult sibson_mi(const FiniteLearningProblem& pb, double alpha) {
  return sibson_mi_impl(pb, alpha, true);
}

MiResult sibson_mi_serial(const FiniteLearningProblem& pb, double alpha) {
  return sibson_mi_impl(pb, alpha, false);
}

MiResult sibson_mi_mc(const FiniteLearningProblem& pb, double alpha,
                      long long n_samples, std::uint64_t seed) {
  pb.validate();
  require_alpha(alpha);
  constexpr int kBatches = 10;
  if (n_samples < kBatches) {
    throw std::invalid_argument("Monte Carlo mode needs >= 10 samples");
  }
  const long long n = n_samples - n_samples % kBatches;
  const int nh = pb.n_hyp();

  // per-batch moment accumulators, combined in fixed chunk order
  std::vector<std::vector<double>> partial(
      kParallelChunks, std::vector<double>(kBatches * nh, 0.0));
  parallel_chunks([&](int c) {
    auto [b, e] = chunk_range(static_cast<std::size_t>(n), c);
    double* acc = partial[c].data();
    for (std::size_t i = b; i < e; ++i) {
      RngStream stream = make_stream(seed, StreamPhase::mc_moment, i);
      std::vector<int> tuple = pb.sample_tuple(stream);
      std::vector<double> q = pb.posterior(tuple);
      int batch = static_cast<int>(i * kBatches / static_cast<std::size_t>(n));
      for (int h = 0; h < nh; ++h) {
        acc[batch * nh + h] += std::pow(q[h], alpha);
      }
    }
  });
  std::vector<double> batch_a(kBatches * nh, 0.0);
  for (int c = 0; c < kParallelChunks; ++c) {
    for (int i = 0; i < kBatches * nh; ++i) batch_a[i] += partial[c][i];
  }

  const double per_batch = static_cast<double>(n) / kBatches;
  std::vector<double> pooled(nh, 0.0);
  double mean_i = 0.0;
  std::vector<double> batch_i(kBatches);
  for (int b = 0; b < kBatches; ++b) {
    std::vector<double> a(nh);
    for (int h = 0; h < nh; ++h) {
      a[h] = batch_a[b * nh + h] / per_batch;
      pooled[h] += batch_a[b * nh + h];
    }
    batch_i[b] = sibson_from_moments(a, alpha).value;
    mean_i += batch_i[b] / kBatches;
  }
  for (int h = 0; h < nh; ++h) pooled[h] /= static_cast<double>(n);

  MiResult res = sibson_from_moments(pooled, alpha);
  res.monte_carlo = true;
  res.samples = n;
  double var = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    var += (batch_i[b] - mean_i) * (batch_i[b] - mean_i);
  }
  res.std_error = std::sqrt(var / (kBatches * (kBatches - 1.0)));
  return res;
}

namespace {

MiResult shannon_mi_impl(const FiniteLearningProblem& pb, bool parallel) {
  pb.validate();
  const int nh = pb.n_hyp();
  std::vector<double> marginal = sum_over_tuples(
      pb, nh,
      [&](std::size_t t, double* acc) {
        std::vector<int> tuple = pb.decode_tuple(t);
        double prob = pb.tuple_prob(tuple);
        std::vector<double> q = pb.posterior(tuple);
        for (int h = 0; h < nh; ++h) acc[h] += prob * q[h];
      },
      parallel);
  std::vector<double> total = sum_over_tuples(
      pb, 1,
      [&](std::size_t t, double* acc) {
        std::vector<int> tuple = pb.decode_tuple(t);
        acc[0] +=
            pb.tuple_prob(tuple) * kl_discrete(pb.posterior(tuple), marginal);
      },
      parallel);
  MiResult res;
  res.value = total[0];
  res.optimal_prior = std::move(marginal);
  return res;
}

}  // namespace

MiResult shannon_mi(const FiniteLearningProblem& pb) {
  return shannon_mi_impl(pb, true);
}

MiResult shannon_mi_serial(const FiniteLearningProblem& pb) {
  return shannon_mi_impl(pb, false);
}

MiResult shannon_mi_mc(const FiniteLearningProblem& pb, long long n_samples,
                       std::uint64_t seed) {
  pb.validate();
  constexpr int kBatches = 10;
  if (n_samples < kBatches) {
    throw std::invalid_argument("Monte Carlo mode needs >= 10 samples");
  }
  const long long n = n_samples - n_samples % kBatches;
  const int nh = pb.n_hyp();

  auto batch_of = [&](std::size_t i) {
    return static_cast<int>(i * kBatches / static_cast<std::size_t>(n));
  };

  // pass 1: per-batch marginals
  std::vector<std::vector<double>> partial(
      kParallelChunks, std::vector<double>(kBatches * nh, 0.0));
  parallel_chunks([&](int c) {
    auto [b, e] = chunk_range(static_cast<std::size_t>(n), c);
    double* acc = partial[c].data();
    for (std::size_t i = b; i < e; ++i) {
      RngStream stream = make_stream(seed, StreamPhase::mc_moment, i);
      std::vector<double> q = pb.posterior(pb.sample_tuple(stream));
      for (int h = 0; h < nh; ++h) acc[batch_of(i) * nh + h] += q[h];
    }
  });
  std::vector<double> batch_marg(kBatches * nh, 0.0);
  for (int c = 0; c < kParallelChunks; ++c) {
    for (int i = 0; i < kBatches * nh; ++i) batch_marg[i] += partial[c][i];
  }
  const double per_batch = static_cast<double>(n) / kBatches;
  std::vector<double> pooled(nh, 0.0);
  for (int b = 0; b < kBatches; ++b) {
    for (int h = 0; h < nh; ++h) {
      pooled[h] += batch_marg[b * nh + h] / static_cast<double>(n);
      batch_marg[b * nh + h] /= per_batch;
    }
  }

  // pass 2: per-batch mean KL against that batch's marginal (streams replay)
  std::vector<std::vector<double>> partial2(
      kParallelChunks, std::vector<double>(kBatches + 1, 0.0));
  parallel_chunks([&](int c) {
    auto [b, e] = chunk_range(static_cast<std::size_t>(n), c);
    double* acc = partial2[c].data();
    for (std::size_t i = b; i < e; ++i) {
      RngStream stream = make_stream(seed, StreamPhase::mc_moment, i);
      std::vector<double> q = pb.posterior(pb.sample_tuple(stream));
      int bb = batch_of(i);
      std::vector<double> bm(batch_marg.begin() + bb * nh,
                             batch_marg.begin() + (bb + 1) * nh);
      acc[bb] += kl_discrete(q, bm);
      acc[kBatches] += kl_discrete(q, pooled);
    }
  });
  std::vector<double> sums(kBatches + 1, 0.0);
  for (int c = 0; c < kParallelChunks; ++c) {
    for (int i = 0; i <= kBatches; ++i) sums[i] += partial2[c][i];
  }

  MiResult res;
  res.monte_carlo = true;
  res.samples = n;
  res.value = sums[kBatches] / static_cast<double>(n);
  res.optimal_prior = pooled;
  double mean_i = 0.0;
  for (int b = 0; b < kBatches; ++b) mean_i += sums[b] / per_batch / kBatches;
  double var = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    double ib = sums[b] / per_batch;
    var += (ib - mean_i) * (ib - mean_i);
  }
  res.std_error = std::sqrt(var / (kBatches * (kBatches - 1.0)));
  return res;
}

double sibson_objective(const FiniteLearningProblem& pb, double alpha,
                        const std::vector<double>& prior) {
  pb.validate();
  require_alpha(alpha);
  if (static_cast<int>(prior.size()) != pb.n_hyp()) {
    throw std::invalid_argument("prior width must equal |H|");
  }
  const std::size_t n = pb.n_tuples();
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<int> tuple = pb.decode_tuple(t);
    double prob = pb.tuple_prob(tuple);
    std::vector<double> q = pb.posterior(tuple);
    for (int h = 0; h < pb.n_hyp(); ++h) {
      if (q[h] <= 0.0) continue;
      if (prior[h] <= 0.0) return kInf;
      total += prob * std::pow(q[h], alpha) * std::pow(prior[h], 1.0 - alpha);
    }
  }
  return std::log(total) / (alpha - 1.0);
}

double shannon_objective(const FiniteLearningProblem& pb,
                         const std::vector<double>& prior) {
  pb.validate();
  if (static_cast<int>(prior.size()) != pb.n_hyp()) {
    throw std::invalid_argument("prior width must equal |H|");
  }
  const std::size_t n = pb.n_tuples();
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<int> tuple = pb.decode_tuple(t);
    total += pb.tuple_prob(tuple) * kl_discrete(pb.posterior(tuple), prior);
  }
  return total;
}

double log_moment_enumerated(const FiniteLearningProblem& pb,
                             const std::vector<double>& prior, double weight,
                             const PhiFn& phi, bool parallel) {
  pb.validate();
  if (static_cast<int>(prior.size()) != pb.n_hyp()) {
    throw std::invalid_argument("prior width must equal |H|");
  }
  return log_phi_moment(pb, prior, weight, phi, /*require_ge_one=*/false,
                        parallel);
}

InfoBoundKind info_bound_kind_from_string(const std::string& s) {
  if (s == "thm8") return InfoBoundKind::thm8;
  if (s == "kl_version") return InfoBoundKind::kl_version;
  if (s == "seeger_mi") return InfoBoundKind::seeger_mi;
  if (s == "esposito") return InfoBoundKind::esposito;
  throw std::invalid_argument("unknown information bound kind: " + s);
}

std::string to_string(InfoBoundKind kind) {
  switch (kind) {
    case InfoBoundKind::thm8: return "thm8";
    case InfoBoundKind::kl_version: return "kl_version";
    case InfoBoundKind::seeger_mi: return "seeger_mi";
    case InfoBoundKind::esposito: return "esposito";
  }
  return "seeger_mi";
}

InfoBoundResult info_bound_rhs(InfoBoundKind kind,
                               const FiniteLearningProblem& pb, double alpha,
                               double delta, double empirical_risk,
                               const PhiFn& phi) {
  pb.validate();
  if (!(delta > 0.0) || !(delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1]");
  }
  InfoBoundResult res;
  res.kind = kind;
  res.alpha = alpha;
  const double m = static_cast<double>(pb.m);

  switch (kind) {
    case InfoBoundKind::seeger_mi: {
      require_alpha(alpha);
      MiResult mi = sibson_mi(pb, alpha);
      res.mi = mi.value;
      res.value = (mi.value + std::log(2.0) + 0.5 * std::log(m) +
                   alpha / (alpha - 1.0) * std::log(1.0 / delta)) /
                  m;
      if (!std::isnan(empirical_risk)) {
        res.certified_risk = kl_inverse(empirical_risk, res.value).p_star;
      }
      break;
    }
    case InfoBoundKind::esposito: {
      require_alpha(alpha);
      MiResult mi = sibson_mi(pb, alpha);
      res.mi = mi.value;
      res.value = (mi.value + std::log(2.0) +
                   alpha / (alpha - 1.0) * std::log(1.0 / delta)) /
                  m;
      break;
    }
    case InfoBoundKind::thm8: {
      require_alpha(alpha);
      MiResult mi = sibson_mi(pb, alpha);
      res.mi = mi.value;
      // default phi is exp[(alpha-1)/alpha * m * kl], so the lifted power
      // phi^{alpha/(alpha-1)} is e^{m kl}: weight 1 on m*kl
      double weight = phi ? alpha / (alpha - 1.0) : 1.0;
      res.log_moment = log_phi_moment(pb, mi.optimal_prior, weight, phi,
                                      /*require_ge_one=*/false,
                                      /*parallel=*/true);
      res.value = mi.value + alpha / (alpha - 1.0) * std::log(1.0 / delta) +
                  res.log_moment;
      break;
    }
    case InfoBoundKind::kl_version: {
      MiResult mi = shannon_mi(pb);
      res.mi = mi.value;
      res.log_moment = log_phi_moment(pb, mi.optimal_prior, 1.0, phi,
                                      /*require_ge_one=*/phi != nullptr,
                                      /*parallel=*/true);
      res.value = (mi.value + res.log_moment) / delta;
      break;
    }
  }
  return res;
}

}  // namespace pacb
