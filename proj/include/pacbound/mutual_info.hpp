#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pacbound/config.hpp"
#include "pacbound/rng.hpp"

namespace pacb {

// exact enumeration refuses once |Z|^m * |H| exceeds this
inline constexpr double kEnumerationCap = 1e6;

// A fully enumerable learning setup: finite example space with sampling
// probabilities z_probs, ordered i.i.d. samples of size m, a finite
// hypothesis list with loss[h][z] in [0,1], and a deterministic algorithm
// mapping every sample tuple to a posterior over hypotheses. The built-in
// algorithm is Gibbs: Q_S(h) proportional to exp(-beta * m * R_S(h)).
struct FiniteLearningProblem {
  std::vector<double> z_probs;
  int m = 1;
  std::vector<std::vector<double>> loss;
  double beta = 1.0;
  // reference priors P_1..P_T over hypotheses; defaults to one uniform prior
  std::vector<std::vector<double>> priors;
  // optional replacement for the Gibbs algorithm (tuple -> posterior)
  std::function<std::vector<double>(const std::vector<int>&)> custom_algorithm;

  void validate() const;
  int n_z() const { return static_cast<int>(z_probs.size()); }
  int n_hyp() const { return static_cast<int>(loss.size()); }
  double pair_count() const;  // |Z|^m * |H|
  std::size_t n_tuples() const;  // throws when over the enumeration cap
  std::vector<std::vector<double>> effective_priors() const;

  std::vector<int> decode_tuple(std::size_t index) const;
  double tuple_prob(const std::vector<int>& tuple) const;
  double empirical_risk(int h, const std::vector<int>& tuple) const;
  double true_risk(int h) const;
  std::vector<double> posterior(const std::vector<int>& tuple) const;

  std::vector<int> sample_tuple(RngStream& stream) const;
  static int sample_index(const std::vector<double>& probs, double u);
};

// reads problem.z_probs, problem.m, problem.loss, problem.beta,
// problem.priors (rows of probabilities; absent = one uniform prior)
FiniteLearningProblem problem_from_config(const Config& cfg);

struct MiResult {
  double value = 0.0;
  std::vector<double> optimal_prior;
  bool monte_carlo = false;
  double std_error = 0.0;  // batch-means standard error (MC mode only)
  long long samples = 0;
};

// Sibson dependence measure I_alpha(h;S) with its closed-form minimizing
// prior P*(h) proportional to [E_S Q_S(h)^alpha]^(1/alpha).
MiResult sibson_mi(const FiniteLearningProblem& problem, double alpha);
MiResult sibson_mi_serial(const FiniteLearningProblem& problem, double alpha);
MiResult sibson_mi_mc(const FiniteLearningProblem& problem, double alpha,
                      long long n_samples, std::uint64_t seed);

// Shannon dependence I(h;S) = min_P E_S KL(Q_S || P), minimized by the
// marginal P*(h) = E_S Q_S(h).
MiResult shannon_mi(const FiniteLearningProblem& problem);
MiResult shannon_mi_serial(const FiniteLearningProblem& problem);
MiResult shannon_mi_mc(const FiniteLearningProblem& problem,
                       long long n_samples, std::uint64_t seed);

// divergence of the joint (S,h) law against z_probs^m x prior, for checking
// that the closed-form priors actually minimize
double sibson_objective(const FiniteLearningProblem& problem, double alpha,
                        const std::vector<double>& prior);
double shannon_objective(const FiniteLearningProblem& problem,
                         const std::vector<double>& prior);

enum class InfoBoundKind { thm8, kl_version, seeger_mi, esposito };
InfoBoundKind info_bound_kind_from_string(const std::string& s);
std::string to_string(InfoBoundKind kind);

// test function phi(h, S); defaults per kind are the kl instantiations
using PhiFn = std::function<double(int h, const std::vector<int>& tuple)>;

struct InfoBoundResult {
  InfoBoundKind kind = InfoBoundKind::seeger_mi;
  double alpha = 2.0;
  double mi = 0.0;          // I_alpha, or I for the kl_version kind
  double log_moment = 0.0;  // enumerated moment term; 0 for closed forms
  double value = 0.0;       // the right-hand side of the named statement
  double certified_risk = std::numeric_limits<double>::quiet_NaN();
};

// Right-hand sides bounded by, per kind:
//   thm8:       (alpha/(alpha-1)) ln phi(h,S), moment enumerated under the
//               Sibson prior (default phi makes that m*kl(R_S||R_D))
//   kl_version: ln phi(h,S); requires phi >= 1 everywhere; the whole
//               bracket is divided by delta (Markov on ln phi)
//   seeger_mi:  kl(R_S||R_D); budget (1/m)[I_alpha + ln(2 sqrt(m)) +
//               (alpha/(alpha-1)) ln(1/delta)]; empirical_risk, when given,
//               is kl-inverted into certified_risk
//   esposito:   2 (R_S - R_D)^2; budget (1/m)[I_alpha + ln 2 +
//               (alpha/(alpha-1)) ln(1/delta)]
InfoBoundResult info_bound_rhs(
    InfoBoundKind kind, const FiniteLearningProblem& problem, double alpha,
    double delta,
    double empirical_risk = std::numeric_limits<double>::quiet_NaN(),
    const PhiFn& phi = {});

// ln E_{S~D^m} E_{h~prior} e^{weight * ln phi(h,S)} by exact enumeration in
// the log domain; with no phi the integrand is e^{weight * m * kl(R_S||R_D)}
double log_moment_enumerated(const FiniteLearningProblem& problem,
                             const std::vector<double>& prior, double weight,
                             const PhiFn& phi = {}, bool parallel = true);

}  // namespace pacb
