#pragma once

// Dataset ingestion and preprocessing: CSV and IDX image parsing, bilinear
// resizing, PCA via Jacobi eigendecomposition, min-max normalization,
// stratified splits, and synthetic two-blob data.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhe/rng.hpp"

namespace qhe {

struct Dataset {
  std::vector<std::vector<double>> features;  // rows are samples
  std::vector<int> labels;                    // binary
  std::string meta;

  std::size_t size() const { return labels.size(); }
};

struct PcaModel {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // k orthonormal rows
  std::vector<double> variances;                // non-increasing
};

namespace data_detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline double parse_double(const std::string& s, std::size_t row,
                           std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw std::invalid_argument("csv row " + std::to_string(row) + " column " +
                                std::to_string(col) + ": bad number '" + s +
                                "'");
  return v;
}

inline std::uint32_t read_u32_be(std::istream& in, const std::string& what,
                                 std::size_t offset) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::invalid_argument(what + ": truncated at offset " +
                                std::to_string(offset));
  return std::uint32_t{b[0]} << 24 | std::uint32_t{b[1]} << 16 |
         std::uint32_t{b[2]} << 8 | std::uint32_t{b[3]};
}

}  // namespace data_detail

// Expects a header row `label,f0,f1,...` and binary labels.
inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("label,", 0) != 0)
    throw std::invalid_argument("load_csv: missing `label,...` header in " +
                                path);
  const std::size_t n_cols = data_detail::split_fields(line).size();
  if (n_cols < 2)
    throw std::invalid_argument("load_csv: header has no feature columns");

  Dataset ds;
  ds.meta = path;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = data_detail::split_fields(line);
    if (fields.size() != n_cols)
      throw std::invalid_argument(
          "csv row " + std::to_string(row) + ": expected " +
          std::to_string(n_cols) + " fields, got " +
          std::to_string(fields.size()));
    if (fields[0] != "0" && fields[0] != "1")
      throw std::invalid_argument("csv row " + std::to_string(row) +
                                  ": label must be 0 or 1, got '" + fields[0] +
                                  "'");
    std::vector<double> feat(n_cols - 1);
    for (std::size_t c = 1; c < n_cols; ++c)
      feat[c - 1] = data_detail::parse_double(fields[c], row, c);
    ds.features.push_back(std::move(feat));
    ds.labels.push_back(fields[0][0] - '0');
  }
  if (ds.labels.empty())
    throw std::invalid_argument("load_csv: no data rows in " + path);
  return ds;
}

// IDX image/label pair (big-endian, magic-checked); keeps only the two
// requested classes, remapping the first to label 0 and the second to 1.
// Pixels are scaled to [0, 1].
inline Dataset load_idx(const std::string& images_path,
                        const std::string& labels_path,
                        std::array<int, 2> keep = {0, 1}) {
  namespace dd = data_detail;
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw std::runtime_error("load_idx: cannot open " + images_path);
  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw std::runtime_error("load_idx: cannot open " + labels_path);

  const std::uint32_t magic_i = dd::read_u32_be(imgs, images_path, 0);
  if (magic_i != 0x00000803u)
    throw std::invalid_argument(images_path + ": unexpected magic at offset 0");
  const std::uint32_t count = dd::read_u32_be(imgs, images_path, 4);
  const std::uint32_t rows = dd::read_u32_be(imgs, images_path, 8);
  const std::uint32_t cols = dd::read_u32_be(imgs, images_path, 12);

  const std::uint32_t magic_l = dd::read_u32_be(labs, labels_path, 0);
  if (magic_l != 0x00000801u)
    throw std::invalid_argument(labels_path + ": unexpected magic at offset 0");
  const std::uint32_t count_l = dd::read_u32_be(labs, labels_path, 4);
  if (count != count_l)
    throw std::invalid_argument("load_idx: image/label counts differ (" +
                                std::to_string(count) + " vs " +
                                std::to_string(count_l) + ")");

  Dataset ds;
  ds.meta = images_path;
  const std::size_t px = std::size_t{rows} * cols;
  std::vector<unsigned char> buf(px);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!imgs.read(reinterpret_cast<char*>(buf.data()),
                   static_cast<std::streamsize>(px)))
      throw std::invalid_argument(images_path + ": truncated at offset " +
                                  std::to_string(16 + std::size_t{i} * px));
    char lab = 0;
    if (!labs.get(lab))
      throw std::invalid_argument(labels_path + ": truncated at offset " +
                                  std::to_string(8 + i));
    const int y = static_cast<unsigned char>(lab);
    if (y != keep[0] && y != keep[1]) continue;
    std::vector<double> feat(px);
    for (std::size_t p = 0; p < px; ++p) feat[p] = buf[p] / 255.0;
    ds.features.push_back(std::move(feat));
    ds.labels.push_back(y == keep[0] ? 0 : 1);
  }
  return ds;
}

// Bilinear resize with corner alignment, so linear ramps map onto linear
// ramps with matching endpoints.  Values are clamped to [0, 1].
inline std::vector<double> resize_bilinear(const std::vector<double>& img,
                                           int h, int w, int th = 16,
                                           int tw = 16) {
  if (h < 2 || w < 2 || th < 1 || tw < 1 ||
      img.size() != std::size_t(h) * std::size_t(w))
    throw std::invalid_argument("resize_bilinear: degenerate size");
  std::vector<double> out(std::size_t(th) * std::size_t(tw));
  const double sy = th > 1 ? double(h - 1) / (th - 1) : 0.0;
  const double sx = tw > 1 ? double(w - 1) / (tw - 1) : 0.0;
  for (int y = 0; y < th; ++y) {
    const double fy = y * sy;
    const int y0 = std::min(static_cast<int>(fy), h - 2);
    const double wy = fy - y0;
    for (int x = 0; x < tw; ++x) {
      const double fx = x * sx;
      const int x0 = std::min(static_cast<int>(fx), w - 2);
      const double wx = fx - x0;
      const double v =
          (1 - wy) * ((1 - wx) * img[std::size_t(y0) * w + x0] +
                      wx * img[std::size_t(y0) * w + x0 + 1]) +
          wy * ((1 - wx) * img[std::size_t(y0 + 1) * w + x0] +
                wx * img[std::size_t(y0 + 1) * w + x0 + 1]);
      out[std::size_t(y) * tw + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

namespace data_detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix; returns
// eigenvalues in `diag` and eigenvectors as columns of `vecs`.
inline void jacobi_eigen(std::vector<std::vector<double>>& a,
                         std::vector<std::vector<double>>& vecs) {
  const std::size_t d = a.size();
  vecs.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) vecs[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-26) return;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double phi = 0.5 * std::atan2(2 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(phi), s = std::sin(phi);
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = vecs[k][p], vkq = vecs[k][q];
          vecs[k][p] = c * vkp - s * vkq;
          vecs[k][q] = s * vkp + c * vkq;
        }
      }
  }
}

}  // namespace data_detail

inline PcaModel pca_fit(const std::vector<std::vector<double>>& x,
                        std::size_t k) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 samples");
  const std::size_t d = x[0].size();
  if (k < 1 || k > d)
    throw std::invalid_argument("pca_fit: k must be in [1, feature dim]");

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
  for (double& m : model.mean) m /= static_cast<double>(n);

  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& row : x)
    for (std::size_t i = 0; i < d; ++i) {
      const double di = row[i] - model.mean[i];
      for (std::size_t j = i; j < d; ++j)
        cov[i][j] += di * (row[j] - model.mean[j]);
    }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov[i][j] /= static_cast<double>(n - 1);
      cov[j][i] = cov[i][j];
    }

  std::vector<std::vector<double>> vecs;
  data_detail::jacobi_eigen(cov, vecs);

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cov[a][a] > cov[b][b]; });

  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t c = order[r];
    std::vector<double> comp(d);
    for (std::size_t i = 0; i < d; ++i) comp[i] = vecs[i][c];
    // Sign convention: first non-negligible entry positive.
    for (std::size_t i = 0; i < d; ++i)
      if (std::abs(comp[i]) > 1e-12) {
        if (comp[i] < 0)
          for (double& v : comp) v = -v;
        break;
      }
    model.components.push_back(std::move(comp));
    model.variances.push_back(std::max(0.0, cov[c][c]));
  }
  return model;
}

inline std::vector<std::vector<double>> pca_transform(
    const PcaModel& model, const std::vector<std::vector<double>>& x) {
  std::vector<std::vector<double>> out;
  out.reserve(x.size());
  for (const auto& row : x) {
    if (row.size() != model.mean.size())
      throw std::invalid_argument("pca_transform: feature dim mismatch");
    std::vector<double> proj(model.components.size(), 0.0);
    for (std::size_t c = 0; c < model.components.size(); ++c)
      for (std::size_t j = 0; j < row.size(); ++j)
        proj[c] += (row[j] - model.mean[j]) * model.components[c][j];
    out.push_back(std::move(proj));
  }
  return out;
}

// Column-wise affine map onto [lo, hi]; constant columns land on the
// midpoint.
inline std::vector<std::vector<double>> normalize_minmax(
    const std::vector<std::vector<double>>& x, double lo = 0.0,
    double hi = std::numbers::pi) {
  if (x.empty()) return {};
  const std::size_t d = x[0].size();
  std::vector<double> mn(d, std::numeric_limits<double>::infinity());
  std::vector<double> mx(d, -std::numeric_limits<double>::infinity());
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) {
      mn[j] = std::min(mn[j], row[j]);
      mx[j] = std::max(mx[j], row[j]);
    }
  std::vector<std::vector<double>> out = x;
  for (auto& row : out)
    for (std::size_t j = 0; j < d; ++j)
      row[j] = mx[j] == mn[j]
                   ? (lo + hi) / 2
                   : lo + (row[j] - mn[j]) / (mx[j] - mn[j]) * (hi - lo);
  return out;
}

// Label-stratified shuffle split; deterministic under the seed.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double ratio,
                                         std::uint64_t seed) {
  if (!(ratio > 0.0) || ratio >= 1.0)
    throw std::invalid_argument("split: ratio must be in (0, 1)");
  if (ds.size() < 2) throw std::invalid_argument("split: need >= 2 samples");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  if (by_class[0].empty() || by_class[1].empty())
    throw std::invalid_argument("split: a class is absent");

  Rng rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& idx : by_class) {
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.index(i)]);
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(idx.size())));
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + n_train);
    test_idx.insert(test_idx.end(), idx.begin() + n_train, idx.end());
  }
  if (train_idx.empty() || test_idx.empty())
    throw std::invalid_argument("split: a side of the split is empty");
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<std::size_t>& idx, const char* tag) {
    Dataset out;
    out.meta = ds.meta + tag;
    for (std::size_t i : idx) {
      out.features.push_back(ds.features[i]);
      out.labels.push_back(ds.labels[i]);
    }
    return out;
  };
  return {take(train_idx, "/train"), take(test_idx, "/test")};
}

// Two Gaussian blobs in [0, pi]^2, clamped; class 0 around c0, class 1
// around c1.
inline Dataset synth_blobs(std::size_t n_per_class, std::array<double, 2> c0,
                           std::array<double, 2> c1, double sigma,
                           std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("synth_blobs: sigma must be > 0");
  if (n_per_class == 0)
    throw std::invalid_argument("synth_blobs: need samples");
  Rng rng(seed);
  Dataset ds;
  ds.meta = "synth_blobs";
  const std::array<std::array<double, 2>, 2> centers = {c0, c1};
  for (int label = 0; label < 2; ++label)
    for (std::size_t i = 0; i < n_per_class; ++i) {
      std::vector<double> p(2);
      for (int j = 0; j < 2; ++j)
        p[static_cast<std::size_t>(j)] =
            std::clamp(centers[static_cast<std::size_t>(label)]
                              [static_cast<std::size_t>(j)] +
                           sigma * rng.normal(),
                       0.0, std::numbers::pi);
      ds.features.push_back(std::move(p));
      ds.labels.push_back(label);
    }
  return ds;
}

inline Dataset filter_label(const Dataset& ds, int label) {
  Dataset out;
  out.meta = ds.meta + "/label" + std::to_string(label);
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.labels[i] == label) {
      out.features.push_back(ds.features[i]);
      out.labels.push_back(ds.labels[i]);
    }
  return out;
}

}  // namespace qhe
