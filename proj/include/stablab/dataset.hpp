#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "stablab/errors.hpp"
#include "stablab/linalg.hpp"
#include "stablab/rng.hpp"

namespace stablab {

struct LabeledDataset {
  std::vector<Vec> features;      // n vectors of dimension d
  std::vector<int> labels;        // entries in {-1, +1}
  std::uint64_t seed = 0;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }

  int class_count(int label) const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), label));
  }
};

struct DatasetSpec {
  std::size_t n = 0;
  std::size_t d = 2;
  double center_distance_half = 1.0;  // c: class means sit at +-c*u
  double cluster_radius = 0.0;        // r
  double bound_B = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw ParameterError("DatasetSpec: n must be >= 2");
    if (d < 1) throw ParameterError("DatasetSpec: d must be >= 1");
    if (cluster_radius < 0) throw ParameterError("DatasetSpec: cluster_radius must be >= 0");
    if (cluster_radius >= center_distance_half)
      throw ParameterError("DatasetSpec: cluster_radius must be < center_distance (r < c)");
    if (center_distance_half + cluster_radius > bound_B + 1e-12)
      throw ParameterError("DatasetSpec: c + r must be <= bound_B");
  }
};

class Encoder {
 public:
  enum class Kind { identity, affine };

  Encoder() : kind_(Kind::identity) {}
  Encoder(std::vector<Vec> matrix, Vec offset)
      : kind_(Kind::affine), matrix_(std::move(matrix)), offset_(std::move(offset)) {
    if (matrix_.empty() || matrix_.front().empty())
      throw ShapeError("Encoder: empty affine matrix");
    if (offset_.size() != matrix_.size())
      throw ShapeError("Encoder: offset dimension does not match matrix rows");
  }

  static Encoder identity() { return Encoder(); }

  static Encoder scaled_identity(std::size_t d, double s) {
    std::vector<Vec> m(d, Vec(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) m[i][i] = s;
    return Encoder(std::move(m), Vec(d, 0.0));
  }

  Kind kind() const { return kind_; }
  bool is_affine() const { return kind_ == Kind::affine; }

  std::size_t out_dim(std::size_t in_dim) const {
    return kind_ == Kind::identity ? in_dim : matrix_.size();
  }

  const std::vector<Vec>& matrix() const { return matrix_; }
  const Vec& offset() const { return offset_; }
  std::vector<Vec>& matrix() { return matrix_; }
  Vec& offset() { return offset_; }

  Vec encode(std::span<const double> x) const {
    if (kind_ == Kind::identity) return Vec(x.begin(), x.end());
    if (x.size() != matrix_.front().size())
      throw ShapeError("Encoder: input dimension does not match matrix columns");
    Vec out(matrix_.size());
    for (std::size_t i = 0; i < matrix_.size(); ++i)
      out[i] = dot(matrix_[i], x) + offset_[i];
    return out;
  }

 private:
  Kind kind_;
  std::vector<Vec> matrix_;  // row-major, d_out rows of d entries
  Vec offset_;
};

// Two uniform balls of radius r centered at +-c*u, u a seeded random unit
// direction. Separable by construction with margin >= c - r; labels balanced
// to ceil(n/2) positives, alternating order so every prefix stays balanced.
inline LabeledDataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);

  Vec u(spec.d);
  double un = 0.0;
  while (un == 0.0) {
    for (auto& v : u) v = rng.normal();
    un = norm(u);
  }
  scale(u, 1.0 / un);

  LabeledDataset ds;
  ds.seed = spec.seed;
  ds.features.reserve(spec.n);
  ds.labels.reserve(spec.n);
  double c = spec.center_distance_half;
  double r = spec.cluster_radius;
  for (std::size_t i = 0; i < spec.n; ++i) {
    int label = (i % 2 == 0) ? 1 : -1;
    Vec x = scaled(u, label * c);
    if (r > 0.0) {
      Vec dir(spec.d);
      double dn = 0.0;
      while (dn == 0.0) {
        for (auto& v : dir) v = rng.normal();
        dn = norm(dir);
      }
      double radius = r * std::pow(rng.next_double(), 1.0 / static_cast<double>(spec.d));
      axpy(radius / dn, dir, x);
    }
    ds.features.push_back(std::move(x));
    ds.labels.push_back(label);
  }
  return ds;
}

inline LabeledDataset leave_one_out(const LabeledDataset& ds, std::size_t i) {
  if (i >= ds.size()) throw std::out_of_range("leave_one_out: index out of range");
  if (ds.class_count(ds.labels[i]) <= 1)
    throw DegenerateClassError("leave_one_out: removal empties a class");
  LabeledDataset out;
  out.seed = ds.seed;
  out.features.reserve(ds.size() - 1);
  out.labels.reserve(ds.size() - 1);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    if (j == i) continue;
    out.features.push_back(ds.features[j]);
    out.labels.push_back(ds.labels[j]);
  }
  return out;
}

// Augmented encoded representation: [E(x)^T, -1]^T per sample.
inline std::vector<Vec> augment(const LabeledDataset& ds, const Encoder& enc) {
  std::vector<Vec> out;
  out.reserve(ds.size());
  for (const auto& x : ds.features) {
    Vec e = enc.encode(x);
    e.push_back(-1.0);
    out.push_back(std::move(e));
  }
  return out;
}

inline LabeledDataset subsample(const LabeledDataset& ds, double keep_ratio,
                                std::uint64_t seed) {
  if (keep_ratio <= 0.0 || keep_ratio > 1.0)
    throw ParameterError("subsample: keep_ratio must be in (0, 1]");
  std::size_t keep = static_cast<std::size_t>(
      std::ceil(keep_ratio * static_cast<double>(ds.size())));
  if (keep < 2) throw ParameterError("subsample: fewer than 2 samples would survive");
  if (keep == ds.size()) return ds;

  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = ds.size() - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.below(i + 1)]);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());

  LabeledDataset out;
  out.seed = ds.seed;
  for (std::size_t j : idx) {
    out.features.push_back(ds.features[j]);
    out.labels.push_back(ds.labels[j]);
  }
  if (out.class_count(1) == 0 || out.class_count(-1) == 0)
    throw DegenerateClassError("subsample: a class was emptied");
  return out;
}

// (mu_plus, mu_minus): per-class means of the encoded features.
inline std::pair<Vec, Vec> class_centers(const LabeledDataset& ds, const Encoder& enc) {
  std::size_t d_out = enc.out_dim(ds.dim());
  Vec mp(d_out, 0.0), mm(d_out, 0.0);
  std::size_t np = 0, nm = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Vec e = enc.encode(ds.features[i]);
    if (ds.labels[i] > 0) {
      axpy(1.0, e, mp);
      ++np;
    } else {
      axpy(1.0, e, mm);
      ++nm;
    }
  }
  if (np == 0 || nm == 0) throw DegenerateClassError("class_centers: empty class");
  scale(mp, 1.0 / static_cast<double>(np));
  scale(mm, 1.0 / static_cast<double>(nm));
  return {mp, mm};
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const LabeledDataset& ds, std::ostream& os) {
  std::size_t d = ds.dim();
  for (std::size_t j = 0; j < d; ++j) os << 'f' << j << ',';
  os << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) os << format_g17(ds.features[i][j]) << ',';
    os << ds.labels[i] << '\n';
  }
}

inline void write_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open for writing: " + path);
  write_csv(ds, f);
}

inline LabeledDataset read_csv(std::istream& is) {
  LabeledDataset ds;
  std::string line;
  if (!std::getline(is, line)) throw FormatError("dataset CSV: missing header");
  std::size_t d = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (line.find("label") == std::string::npos)
    throw FormatError("dataset CSV: header must end with 'label'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec x;
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::getline(ss, cell, ',')) throw FormatError("dataset CSV: short row");
      x.push_back(std::stod(cell));
    }
    if (!std::getline(ss, cell, ',')) throw FormatError("dataset CSV: missing label");
    int y = std::stoi(cell);
    if (y != 1 && y != -1) throw FormatError("dataset CSV: label must be -1 or 1");
    ds.features.push_back(std::move(x));
    ds.labels.push_back(y);
  }
  if (ds.size() < 2) throw FormatError("dataset CSV: need at least 2 samples");
  return ds;
}

inline LabeledDataset read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open dataset: " + path);
  return read_csv(f);
}

}  // namespace stablab
