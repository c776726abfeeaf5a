#pragma once

namespace pacb {

// Result of inverting the binary kl divergence at (q, psi).
// Invariants: p_star >= q, kl(q||p_star) <= psi, and kl(q||p_star + tol) > psi
// whenever p_star + tol is still below the bracket ceiling.
struct KlInverseResult {
  double p_star = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |kl(q||p_star) - psi|
};

struct KlInverseGrad {
  double dq = 0.0;
  double dpsi = 0.0;
};

// Gradient inversion is rejected below this budget: both partial-derivative
// denominators vanish as p* -> q, and a huge finite value would silently
// corrupt gradient descent.
inline constexpr double kKlGradPsiGuard = 1e-12;

// kl(q||p) = q ln(q/p) + (1-q) ln((1-q)/(1-p)), with the 0 ln 0 = 0
// convention. q and p must lie in [0,1]. p in {0,1} with q != p returns
// +infinity; the divergence itself is infinite there, which is
// distinguishable from overflow because the formula is bounded for interior p.
double kl(double q, double p);

// Largest p in [q, 1) with kl(q||p) <= psi, located by bisection on
// [q, 1 - 1e-15] (the ceiling avoids log(0)); at most 200 iterations.
// kl(q||.) is strictly increasing on [q, 1), so bisection is globally
// convergent. Special cases: q = 1 returns 1 for any psi; psi = 0 returns q.
KlInverseResult kl_inverse(double q, double psi, double tol = 1e-12);

// Analytic partials of p* = kl_inverse(q, psi) with respect to q and psi:
//   dp*/dq   = [ln((1-q)/(1-p*)) - ln(q/p*)] / [(1-q)/(1-p*) - q/p*]
//   dp*/dpsi = 1 / [(1-q)/(1-p*) - q/p*]
// Requires q in (0,1) and psi >= kKlGradPsiGuard.
KlInverseGrad kl_inverse_grad(double q, double psi);

// kl(q||p) - 2 (q-p)^2; nonnegative by Pinsker's inequality. p must be
// interior.
double pinsker_gap(double q, double p);

}  // namespace pacb
