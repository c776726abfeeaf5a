#include "pacbound/datasets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pacb {

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::prior_split: return "prior";
    case SplitTag::posterior_split: return "posterior";
    case SplitTag::test_split: return "test";
  }
  return "posterior";
}

SplitTag split_tag_from_string(const std::string& s) {
  if (s == "prior") return SplitTag::prior_split;
  if (s == "posterior") return SplitTag::posterior_split;
  if (s == "test") return SplitTag::test_split;
  throw std::invalid_argument("unknown split tag: " + s);
}

int LabeledDataset::n_features() const {
  if (examples.empty()) return 0;
  return static_cast<int>(examples.front().x.size());
}

int LabeledDataset::n_classes() const {
  int k = 0;
  for (const auto& e : examples) k = std::max(k, e.y);
  return k;
}

void LabeledDataset::validate() const {
  if (examples.empty()) {
    throw std::invalid_argument("dataset has no examples");
  }
  const int d = n_features();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& e = examples[i];
    if (static_cast<int>(e.x.size()) != d) {
      throw std::invalid_argument("example " + std::to_string(i) +
                                  ": inconsistent feature count");
    }
    if (e.y < 1) {
      throw std::invalid_argument("example " + std::to_string(i) +
                                  ": label must be a positive integer");
    }
    for (double v : e.x) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("example " + std::to_string(i) +
                                    ": non-finite feature");
      }
    }
  }
}

LabeledDataset load_csv(const std::string& path, SplitTag tag) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  LabeledDataset data;
  data.tag = tag;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        fields.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": cannot parse '" + cell + "'");
      }
    }
    if (fields.size() < 2) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": need at least one feature and a label");
    }
    double raw_label = fields.back();
    int y = static_cast<int>(std::lround(raw_label));
    if (std::abs(raw_label - y) > 1e-9 || y < 1) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": label column must be a positive integer");
    }
    fields.pop_back();
    data.examples.push_back({std::move(fields), y});
  }
  data.validate();
  return data;
}

void save_csv(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  char buf[64];
  for (const auto& e : data.examples) {
    for (double v : e.x) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    out << e.y << '\n';
  }
}

LabeledDataset make_blobs(int n, int classes, int dim, double spread,
                          SplitTag tag, RngStream& stream) {
  if (n < 1 || classes < 2 || dim < 2) {
    throw std::invalid_argument("blobs need n >= 1, classes >= 2, dim >= 2");
  }
  if (!(spread >= 0.0) || !std::isfinite(spread)) {
    throw std::invalid_argument("blob spread must be finite and >= 0");
  }
  LabeledDataset data;
  data.tag = tag;
  data.examples.reserve(n);
  for (int i = 0; i < n; ++i) {
    int k = i % classes;
    double angle = 2.0 * std::numbers::pi * k / classes;
    std::vector<double> x(dim, 0.0);
    x[0] = 2.0 * std::cos(angle);
    x[1] = 2.0 * std::sin(angle);
    for (int j = 0; j < dim; ++j) x[j] += spread * stream.next_gaussian();
    data.examples.push_back({std::move(x), k + 1});
  }
  return data;
}

LabeledDataset make_two_moons(int n, double noise, SplitTag tag,
                              RngStream& stream) {
  if (n < 1) throw std::invalid_argument("two moons need n >= 1");
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw std::invalid_argument("moon noise must be finite and >= 0");
  }
  LabeledDataset data;
  data.tag = tag;
  data.examples.reserve(n);
  for (int i = 0; i < n; ++i) {
    double t = std::numbers::pi * stream.next_unit();
    std::vector<double> x(2);
    int y;
    if (i % 2 == 0) {
      x[0] = std::cos(t);
      x[1] = std::sin(t);
      y = 1;
    } else {
      x[0] = 1.0 - std::cos(t);
      x[1] = 0.5 - std::sin(t);
      y = 2;
    }
    x[0] += noise * stream.next_gaussian();
    x[1] += noise * stream.next_gaussian();
    data.examples.push_back({std::move(x), y});
  }
  return data;
}

}  // namespace pacb
