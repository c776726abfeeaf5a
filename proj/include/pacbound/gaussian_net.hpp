#pragma once

#include <vector>

#include "pacbound/datasets.hpp"
#include "pacbound/rng.hpp"

namespace pacb {

// Dense feedforward net over a single flat weight vector. Per layer the
// layout is the weight matrix (out x in, row-major) followed by the bias.
struct MlpArchitecture {
  std::vector<int> widths;   // input, hidden..., output classes
  double leaky_slope = 0.01;

  void validate() const;  // needs >= 1 hidden layer and >= 2 classes
  int n_params() const;
  int n_inputs() const { return widths.front(); }
  int n_classes() const { return widths.back(); }
  int n_layers() const { return static_cast<int>(widths.size()) - 1; }
};

struct FlatWeights {
  std::vector<double> v;
  int size() const { return static_cast<int>(v.size()); }
};

inline constexpr double kBoundedCeScale = 4.0;  // the Z in -(1/Z)ln(Phi(h[y]))

// softmax class probabilities for one input
std::vector<double> forward(const MlpArchitecture& arch, const FlatWeights& w,
                            const std::vector<double>& x);

// -(1/Z) ln(e^-Z + (1-2e^-Z) p_y): in [0,1], decreasing in p_y, and bounded
// away from 0 and 1, which keeps downstream kl inversions differentiable
double bounded_ce_loss(const std::vector<double>& probs, int y,
                       double z = kBoundedCeScale);

struct BatchGradient {
  double mean_loss = 0.0;
  FlatWeights grad;  // d(mean loss)/d(weights)
};

// reverse-mode gradient of the mean bounded cross entropy over the batch
BatchGradient backward(const MlpArchitecture& arch, const FlatWeights& w,
                       const LabeledDataset& data,
                       const std::vector<int>& batch);

struct SampledWeights {
  FlatWeights weights;  // mean + eps
  FlatWeights eps;
};

// one draw of eps ~ N(0, sigma2 I); consumes size() values from the stream
SampledWeights sample_weights(const FlatWeights& mean, double sigma2,
                              RngStream& stream);

struct RiskEstimate {
  double zero_one = 0.0;
  double bounded_ce = 0.0;
};

RiskEstimate risks(const MlpArchitecture& arch, const FlatWeights& w,
                   const LabeledDataset& data);

// Gaussian init scaled by 1/sqrt(fan_in), zero biases
FlatWeights init_weights(const MlpArchitecture& arch, RngStream& stream);

}  // namespace pacb
