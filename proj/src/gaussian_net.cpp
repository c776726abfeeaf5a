#include "pacbound/gaussian_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pacb {
namespace {

// forward pass keeping pre-activations and activations for backprop
struct Trace {
  std::vector<std::vector<double>> pre;   // z_l per layer
  std::vector<std::vector<double>> act;   // a_0 = x, then post-activation
  std::vector<double> probs;
};

Trace run_forward(const MlpArchitecture& arch, const FlatWeights& w,
                  const std::vector<double>& x) {
  arch.validate();
  if (static_cast<int>(x.size()) != arch.n_inputs()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  if (w.size() != arch.n_params()) {
    throw std::invalid_argument("weight vector length mismatch");
  }
  Trace t;
  t.act.push_back(x);
  std::size_t off = 0;
  for (int l = 0; l < arch.n_layers(); ++l) {
    const int in = arch.widths[l];
    const int out = arch.widths[l + 1];
    const std::vector<double>& a = t.act.back();
    std::vector<double> z(out);
    for (int i = 0; i < out; ++i) {
      double s = w.v[off + static_cast<std::size_t>(in) * out + i];  // bias
      const double* row = &w.v[off + static_cast<std::size_t>(i) * in];
      for (int j = 0; j < in; ++j) s += row[j] * a[j];
      z[i] = s;
    }
    off += static_cast<std::size_t>(in) * out + out;
    t.pre.push_back(z);
    if (l + 1 < arch.n_layers()) {
      std::vector<double> a_next(out);
      for (int i = 0; i < out; ++i) {
        a_next[i] = z[i] > 0.0 ? z[i] : arch.leaky_slope * z[i];
      }
      t.act.push_back(std::move(a_next));
    } else {
      double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      std::vector<double> p(out);
      for (int i = 0; i < out; ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
      }
      for (int i = 0; i < out; ++i) p[i] /= sum;
      t.probs = std::move(p);
    }
  }
  return t;
}

}  // namespace

void MlpArchitecture::validate() const {
  if (widths.size() < 3) {
    throw std::invalid_argument("architecture needs at least one hidden layer");
  }
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("layer widths must be positive");
  }
  if (widths.back() < 2) {
    throw std::invalid_argument("output width must be >= 2 classes");
  }
  if (!(leaky_slope >= 0.0) || !std::isfinite(leaky_slope)) {
    throw std::invalid_argument("leaky slope must be finite and >= 0");
  }
}

int MlpArchitecture::n_params() const {
  int total = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    total += (widths[l] + 1) * widths[l + 1];
  }
  return total;
}

std::vector<double> forward(const MlpArchitecture& arch, const FlatWeights& w,
                            const std::vector<double>& x) {
  return run_forward(arch, w, x).probs;
}

double bounded_ce_loss(const std::vector<double>& probs, int y, double z) {
  if (y < 1 || y > static_cast<int>(probs.size())) {
    throw std::invalid_argument("label out of range");
  }
  const double p = probs[y - 1];
  const double floor = std::exp(-z);
  return -std::log(floor + (1.0 - 2.0 * floor) * p) / z;
}

BatchGradient backward(const MlpArchitecture& arch, const FlatWeights& w,
                       const LabeledDataset& data,
                       const std::vector<int>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  BatchGradient out;
  out.grad.v.assign(arch.n_params(), 0.0);
  const double floor = std::exp(-kBoundedCeScale);
  const double slope = 1.0 - 2.0 * floor;
  const int layers = arch.n_layers();

  for (int idx : batch) {
    if (idx < 0 || idx >= data.size()) {
      throw std::invalid_argument("batch index out of range");
    }
    const LabeledExample& ex = data.examples[idx];
    Trace t = run_forward(arch, w, ex.x);
    out.mean_loss += bounded_ce_loss(t.probs, ex.y);

    // dL/dp_y for L = -(1/Z) ln(floor + slope * p_y)
    const int y0 = ex.y - 1;
    const double phi = floor + slope * t.probs[y0];
    const double dl_dp = -slope / (kBoundedCeScale * phi);

    // softmax jacobian folded in: dL/dz_j = dL/dp_y * p_y (1[j=y] - p_j)
    std::vector<double> delta(arch.widths.back());
    for (int j = 0; j < arch.widths.back(); ++j) {
      double indicator = j == y0 ? 1.0 : 0.0;
      delta[j] = dl_dp * t.probs[y0] * (indicator - t.probs[j]);
    }

    std::size_t off = w.v.size();
    for (int l = layers - 1; l >= 0; --l) {
      const int in = arch.widths[l];
      const int out_w = arch.widths[l + 1];
      off -= static_cast<std::size_t>(in) * out_w + out_w;
      const std::vector<double>& a = t.act[l];
      for (int i = 0; i < out_w; ++i) {
        double* grow = &out.grad.v[off + static_cast<std::size_t>(i) * in];
        for (int j = 0; j < in; ++j) grow[j] += delta[i] * a[j];
        out.grad.v[off + static_cast<std::size_t>(in) * out_w + i] += delta[i];
      }
      if (l > 0) {
        std::vector<double> prev(in, 0.0);
        for (int i = 0; i < out_w; ++i) {
          const double* row = &w.v[off + static_cast<std::size_t>(i) * in];
          for (int j = 0; j < in; ++j) prev[j] += row[j] * delta[i];
        }
        for (int j = 0; j < in; ++j) {
          double d = t.pre[l - 1][j] > 0.0 ? 1.0 : arch.leaky_slope;
          prev[j] *= d;
        }
        delta = std::move(prev);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  out.mean_loss *= inv;
  for (double& g : out.grad.v) g *= inv;
  return out;
}

SampledWeights sample_weights(const FlatWeights& mean, double sigma2,
                              RngStream& stream) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("sigma2 must be positive");
  }
  const double sd = std::sqrt(sigma2);
  SampledWeights s;
  s.eps.v.resize(mean.v.size());
  s.weights.v.resize(mean.v.size());
  for (std::size_t i = 0; i < mean.v.size(); ++i) {
    s.eps.v[i] = sd * stream.next_gaussian();
    s.weights.v[i] = mean.v[i] + s.eps.v[i];
  }
  return s;
}

RiskEstimate risks(const MlpArchitecture& arch, const FlatWeights& w,
                   const LabeledDataset& data) {
  if (data.examples.empty()) throw std::invalid_argument("empty dataset");
  RiskEstimate r;
  for (const LabeledExample& ex : data.examples) {
    std::vector<double> p = forward(arch, w, ex.x);
    int pred = static_cast<int>(std::max_element(p.begin(), p.end()) -
                                p.begin());
    if (pred + 1 != ex.y) r.zero_one += 1.0;
    r.bounded_ce += bounded_ce_loss(p, ex.y);
  }
  r.zero_one /= data.size();
  r.bounded_ce /= data.size();
  return r;
}

FlatWeights init_weights(const MlpArchitecture& arch, RngStream& stream) {
  arch.validate();
  FlatWeights w;
  w.v.assign(arch.n_params(), 0.0);
  std::size_t off = 0;
  for (int l = 0; l < arch.n_layers(); ++l) {
    const int in = arch.widths[l];
    const int out = arch.widths[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < in * out; ++i) {
      w.v[off + i] = scale * stream.next_gaussian();
    }
    off += static_cast<std::size_t>(in) * out + out;  // biases stay zero
  }
  return w;
}

}  // namespace pacb
