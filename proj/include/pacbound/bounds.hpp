#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pacbound/divergences.hpp"

namespace pacb {

// Shared inputs of every bound: sample count, confidence, number of prior
// checkpoints covered by the union bound, Renyi order.
struct BoundContext {
  long long m = 1;
  double delta = 0.05;
  int t_priors = 1;
  double alpha = 2.0;

  void validate() const;  // throws invalid_argument naming the field
};

// One bound evaluation. psi is recomputable from divergence_term and log_term
// as the method prescribes (ours/rivasplata/catoni: (div + log)/m; blanchard:
// (div (m+1)/m + log)/m; stochastic: (div + log)/m on the outer level).
struct BoundReport {
  std::string method;  // ours | rivasplata | blanchard | catoni | stochastic
  long long m = 0;
  double delta = 0.0;
  int t_priors = 1;
  double sigma2 = 0.0;
  double alpha = 2.0;
  double empirical_risk = 0.0;
  double divergence_term = 0.0;
  double log_term = 0.0;
  double psi = 0.0;
  double certified_risk = 0.0;
  nlohmann::json extras;
};

nlohmann::json to_json(const BoundReport& r);

inline const std::vector<double> kDefaultCGrid{1e-3, 1e-2, 1e-1, 1.0,
                                               1e1,  1e2,  1e3};

// 2 sqrt(m): the moment constant E e^{m kl} <= 2 sqrt(m).
double maurer_moment_bound(long long m);

// Main Gaussian bound: psi = (1/m) [ ||w-v||^2/sigma2 + ln(16 T sqrt(m)/delta^3) ],
// certified risk = kl_inverse(r_s, psi). The divergence is the order-2 Renyi
// divergence, a function of the posterior mean only (no noise enters).
BoundReport bound_ours(const BoundContext& ctx, double r_s,
                       const std::vector<double>& w,
                       const std::vector<double>& v, double sigma2);
BoundReport bound_ours_sq(const BoundContext& ctx, double r_s, double sq_dist,
                          double sigma2);

enum class BaselineMethod { rivasplata, blanchard, catoni };

// Baselines driven by the noise-dependent disintegrated KL
// dkl = (||w+eps-v||^2 - ||eps||^2)/(2 sigma2):
//   rivasplata: psi = (1/m) [ dkl + ln(2 T sqrt(m)/delta) ]
//   blanchard:  psi = (1/m) [ (m+1)/m dkl + ln(T (m+1)/delta) ]
//   catoni:     risk <= (1 - exp(-c r_s - (1/m)[dkl + ln(T |C|/delta)]))
//                       / (1 - exp(-c)), minimized over the a-priori grid C
// Negative budgets (dkl can be < 0) are clamped at 0; a realized negative
// budget lies inside the delta failure event, so the clamp cannot invalidate
// the guarantee. Catoni's certified risk is clipped to [0,1].
BoundReport bound_baseline(const BoundContext& ctx, BaselineMethod method,
                           double r_s, const std::vector<double>& w,
                           const std::vector<double>& eps,
                           const std::vector<double>& v, double sigma2,
                           const std::vector<double>& c_grid = kDefaultCGrid);
BoundReport bound_baseline_dkl(const BoundContext& ctx, BaselineMethod method,
                               double r_s, double dkl, double sigma2,
                               const std::vector<double>& c_grid = kDefaultCGrid);

// Randomized-classifier bound from n sampled per-net risks. Two nested
// inversions: inner = kl_inverse(mean risk, (1/n) ln(4/delta)) bounds the
// posterior's average empirical risk; the outer budget
// (1/m)[ ||w-v||^2/(2 sigma2) + ln(4 T sqrt(m)/delta) ] then bounds the
// average true risk.
BoundReport bound_stochastic(const BoundContext& ctx,
                             const std::vector<double>& risks_n,
                             const std::vector<double>& w,
                             const std::vector<double>& v, double sigma2);
BoundReport bound_stochastic_sq(const BoundContext& ctx,
                                const std::vector<double>& risks_n,
                                double sq_dist, double sigma2);

// Right-hand side of the general disintegrated bound on (alpha/(alpha-1)) ln phi:
//   ((2 alpha - 1)/(alpha - 1)) ln(2/delta) + d_alpha + log_moment
// where log_moment = ln E_{S'} E_{h'~P} phi^{alpha/(alpha-1)}.
double theorem2_rhs(double d_alpha, double alpha, double delta,
                    double log_moment);

// Right-hand side of the parametrized variant, a bound on ln phi:
//   ln( lam/2 e^{d2} + 8 e^{log_moment2} / (2 lam delta^3) )
// evaluated with log-sum-exp so huge d2 survives. optimal_lambda returns the
// closed-form minimizer sqrt(8 e^{log_moment2} / (delta^3 e^{d2}));
// 2 * theorem3_rhs(optimal_lambda(...)) equals theorem2_rhs at alpha = 2.
double theorem3_rhs(double lam, double d2, double delta, double log_moment2);
double optimal_lambda(double d2, double delta, double log_moment2);

// alpha -> 1 and alpha -> infinity limits of the general bound.
//   one:      ln(2/delta) + ln esssup phi
//   infinity: ln esssup(Q/P) + ln(4/delta^2 * E E phi)
// The infinity kind needs the density-ratio esssup, available only on finite
// spaces; the Gaussian overload rejects with an unsupported-space error.
double alpha_limit_rhs_one(double delta, double esssup_phi);
double alpha_limit_rhs_infinity(double delta, const DiscreteMeasure& q,
                                const DiscreteMeasure& p, double mean_phi);
double alpha_limit_rhs_infinity(double delta, const IsotropicGaussian& q,
                                const IsotropicGaussian& p, double mean_phi);

}  // namespace pacb
