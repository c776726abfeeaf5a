#pragma once

#include <string>
#include <vector>

#include "pacbound/rng.hpp"

namespace pacb {

struct LabeledExample {
  std::vector<double> x;
  int y = 1;  // class label in 1..K
};

enum class SplitTag { prior_split, posterior_split, test_split };

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& s);

struct LabeledDataset {
  std::vector<LabeledExample> examples;
  SplitTag tag = SplitTag::posterior_split;

  int size() const { return static_cast<int>(examples.size()); }
  int n_features() const;
  int n_classes() const;  // max label seen
  void validate() const;
};

// Plain numeric CSV, one row per example: feature columns, then the integer
// label in the last column. No header row.
LabeledDataset load_csv(const std::string& path, SplitTag tag);
void save_csv(const LabeledDataset& data, const std::string& path);

// k Gaussian clusters with centers spaced on a circle of radius 2 in the
// first two coordinates (remaining coordinates zero), per-coordinate
// standard deviation `spread`. Labels cycle 1..k.
LabeledDataset make_blobs(int n, int classes, int dim, double spread,
                          SplitTag tag, RngStream& stream);

// Two interleaved half-circles with additive Gaussian noise; labels 1 and 2.
LabeledDataset make_two_moons(int n, double noise, SplitTag tag,
                              RngStream& stream);

}  // namespace pacb
