#pragma once

#include <stdexcept>
#include <vector>

namespace pacb {

// N(mean, variance * I). Prior and posterior always share the variance; only
// equal-variance pairs are accepted by the divergence functions below.
struct IsotropicGaussian {
  std::vector<double> mean;
  double variance = 1.0;
};

// Probability vector over a finite index set. probs >= 0, sums to 1 within
// 1e-12 (enforced by make_discrete / validate).
struct DiscreteMeasure {
  std::vector<double> probs;
};

// Raised when renyi_discrete sees q(h) > 0 where p(h) = 0. The divergence is
// infinite and the bound vacuous there; the caller must know, so this is a
// typed error rather than a +inf return.
class absolute_continuity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

DiscreteMeasure make_discrete(std::vector<double> probs);
void validate(const DiscreteMeasure& d);

// Renyi divergence of order alpha > 1 between equal-variance isotropic
// Gaussians: alpha ||w - v||^2 / (2 sigma^2). At alpha = 2 this is
// ||w - v||^2 / sigma^2. Mismatched dimension or variance is rejected.
double renyi_gaussian(const IsotropicGaussian& q, const IsotropicGaussian& p,
                      double alpha);

// KL between equal-variance isotropic Gaussians: ||w - v||^2 / (2 sigma^2),
// the alpha -> 1 limit of renyi_gaussian.
double kl_gaussian(const IsotropicGaussian& q, const IsotropicGaussian& p);

// Log density ratio ln( N(w + eps; w, s2 I) / N(w + eps; v, s2 I) )
//   = (||w + eps - v||^2 - ||eps||^2) / (2 sigma2)
// evaluated at the sampled weights w + eps. May be negative.
double disintegrated_kl_gaussian(const std::vector<double>& w,
                                 const std::vector<double>& eps,
                                 const std::vector<double>& v, double sigma2);

// (1/(alpha-1)) ln sum_h p(h) (q(h)/p(h))^alpha for alpha > 1.
double renyi_discrete(const DiscreteMeasure& q, const DiscreteMeasure& p,
                      double alpha);

// chi^2 from the order-2 Renyi divergence: exp(d2) - 1. Saturates to
// +infinity for huge d2 instead of raising.
double chi2_from_renyi2(double d2);

}  // namespace pacb
