#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dme/error.hpp"
#include "dme/linalg.hpp"
#include "dme/random.hpp"

namespace dme {

enum class LabelKind { None, Class, Target };

struct Dataset {
  Matrix features;             // m x d, one sample per row
  std::vector<double> labels;  // empty, or length m
  LabelKind label_kind = LabelKind::None;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
  bool has_labels() const noexcept { return label_kind != LabelKind::None; }

  DenseVector sample(std::size_t i) const {
    const auto r = features.row(i);
    return DenseVector(r.begin(), r.end());
  }

  void validate() const {
    if (size() == 0) throw ParameterError("dataset is empty");
    if (has_labels() && labels.size() != size()) throw ParameterError("dataset: label count differs from sample count");
  }
};

// ----------------------------------------------------------------------------
// IDX files

/// Raw unsigned-byte IDX tensor. dims = {count} for labels, {count, rows, cols}
/// for images.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> bytes;

  std::size_t element_count() const {
    std::size_t c = 1;
    for (auto d : dims) c *= d;
    return c;
  }
};

inline IdxTensor read_idx(const std::filesystem::path& path, std::size_t expected_ndims) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open IDX file " + path.string());
  const std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto fail = [&](std::size_t offset, const std::string& what) {
    throw FormatError(path.string() + ": " + what + " at byte offset " + std::to_string(offset));
  };
  if (raw.size() < 4) fail(raw.size(), "truncated header");
  if (raw[0] != 0 || raw[1] != 0 || raw[2] != 0x08 || raw[3] != expected_ndims) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%02x%02x%02x%02x", raw[0], raw[1], raw[2], raw[3]);
    fail(0, std::string("bad magic ") + buf);
  }
  IdxTensor t;
  std::size_t pos = 4;
  for (std::size_t i = 0; i < expected_ndims; ++i) {
    if (pos + 4 > raw.size()) fail(pos, "truncated header");
    t.dims.push_back((std::uint32_t{raw[pos]} << 24) | (std::uint32_t{raw[pos + 1]} << 16) |
                     (std::uint32_t{raw[pos + 2]} << 8) | std::uint32_t{raw[pos + 3]});
    pos += 4;
  }
  const std::size_t need = t.element_count();
  if (raw.size() - pos < need) fail(raw.size(), "truncated data (expected " + std::to_string(need) + " bytes)");
  if (raw.size() - pos > need) fail(pos + need, "trailing bytes");
  t.bytes.assign(raw.begin() + static_cast<std::ptrdiff_t>(pos), raw.end());
  return t;
}

inline void write_idx(const std::filesystem::path& path, const IdxTensor& t) {
  if (t.bytes.size() != t.element_count()) throw ParameterError("write_idx: byte count does not match dims");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write IDX file " + path.string());
  const char magic[4] = {0, 0, 0x08, static_cast<char>(t.dims.size())};
  out.write(magic, 4);
  for (auto d : t.dims) {
    const char be[4] = {static_cast<char>(d >> 24), static_cast<char>(d >> 16), static_cast<char>(d >> 8),
                        static_cast<char>(d)};
    out.write(be, 4);
  }
  out.write(reinterpret_cast<const char*>(t.bytes.data()), static_cast<std::streamsize>(t.bytes.size()));
  if (!out) throw Error("failed writing IDX file " + path.string());
}

/// Bilinear resize on a corner-aligned grid with clamped borders.
inline DenseVector bilinear_resize(std::span<const double> image, std::size_t rows, std::size_t cols,
                                   std::size_t out_rows, std::size_t out_cols) {
  if (image.size() != rows * cols || rows == 0 || cols == 0) throw DimensionError("bilinear_resize: bad image shape");
  if (out_rows == 0 || out_cols == 0) throw ParameterError("bilinear_resize: output size must be positive");
  auto source = [](std::size_t i, std::size_t in, std::size_t out) {
    return out == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
  };
  DenseVector out(out_rows * out_cols);
  for (std::size_t r = 0; r < out_rows; ++r) {
    const double sr = source(r, rows, out_rows);
    const std::size_t r0 = std::min(static_cast<std::size_t>(sr), rows - 1);
    const std::size_t r1 = std::min(r0 + 1, rows - 1);
    const double fr = sr - static_cast<double>(r0);
    for (std::size_t c = 0; c < out_cols; ++c) {
      const double sc = source(c, cols, out_cols);
      const std::size_t c0 = std::min(static_cast<std::size_t>(sc), cols - 1);
      const std::size_t c1 = std::min(c0 + 1, cols - 1);
      const double fc = sc - static_cast<double>(c0);
      const double top = fc == 0.0 ? image[r0 * cols + c0] : (1 - fc) * image[r0 * cols + c0] + fc * image[r0 * cols + c1];
      const double bot = fc == 0.0 ? image[r1 * cols + c0] : (1 - fc) * image[r1 * cols + c0] + fc * image[r1 * cols + c1];
      out[r * out_cols + c] = fr == 0.0 ? top : (1 - fr) * top + fr * bot;
    }
  }
  return out;
}

/// Images from an IDX file, resized to resize_to x resize_to (0 keeps the
/// native size), flattened row-major and scaled to [0, 1].
inline Dataset load_idx_images(const std::filesystem::path& path, std::size_t resize_to = 0) {
  const IdxTensor t = read_idx(path, 3);
  const std::size_t m = t.dims[0], rows = t.dims[1], cols = t.dims[2];
  if (m == 0) throw FormatError(path.string() + ": no images");
  const std::size_t out_r = resize_to ? resize_to : rows;
  const std::size_t out_c = resize_to ? resize_to : cols;
  Dataset ds;
  ds.features = Matrix(m, out_r * out_c);
  DenseVector img(rows * cols);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < rows * cols; ++p) img[p] = t.bytes[i * rows * cols + p] / 255.0;
    const DenseVector resized =
        (out_r == rows && out_c == cols) ? img : bilinear_resize(img, rows, cols, out_r, out_c);
    std::copy(resized.begin(), resized.end(), ds.features.row(i).begin());
  }
  return ds;
}

inline std::vector<double> load_idx_labels(const std::filesystem::path& path) {
  const IdxTensor t = read_idx(path, 1);
  return std::vector<double>(t.bytes.begin(), t.bytes.end());
}

// ----------------------------------------------------------------------------
// Delimited text

/// Target column by header name or zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

inline std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

/// Regression data with a header row: the first feature_count columns are the
/// features and target_column is the target.
inline Dataset load_csv_regression(const std::filesystem::path& path, std::size_t feature_count,
                                   const ColumnRef& target_column, char separator = ',') {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty dataset (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line, separator);
  if (feature_count < 1 || feature_count > header.size()) {
    throw ParameterError(path.string() + ": feature_count " + std::to_string(feature_count) + " exceeds " +
                         std::to_string(header.size()) + " columns");
  }
  std::size_t target = 0;
  if (const auto* name = std::get_if<std::string>(&target_column)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw ParameterError(path.string() + ": no column named '" + *name + "'");
    target = static_cast<std::size_t>(it - header.begin());
  } else {
    target = std::get<std::size_t>(target_column);
    if (target >= header.size()) throw ParameterError(path.string() + ": target column index out of range");
  }

  std::vector<double> values;
  std::vector<double> labels;
  std::size_t row = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line, separator);
    if (cells.size() != header.size()) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " columns, expected " + std::to_string(header.size()));
    }
    auto parse = [&](std::size_t col) {
      const std::string& s = cells[col];
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos) {
        throw FormatError(path.string() + ": non-numeric cell '" + s + "' at row " + std::to_string(row) +
                          ", column " + std::to_string(col + 1));
      }
      return v;
    };
    for (std::size_t c = 0; c < feature_count; ++c) values.push_back(parse(c));
    labels.push_back(parse(target));
  }
  if (labels.empty()) throw FormatError(path.string() + ": empty dataset (header only)");
  Dataset ds;
  ds.features = Matrix(labels.size(), feature_count);
  std::copy(values.begin(), values.end(), ds.features.data().begin());
  ds.labels = std::move(labels);
  ds.label_kind = LabelKind::Target;
  return ds;
}

// ----------------------------------------------------------------------------
// Partitions

enum class SplitMode { Iid, NonIid };

struct ClientPartition {
  std::vector<std::vector<std::size_t>> clients;  // sample indices per client
  SplitMode mode = SplitMode::Iid;

  std::size_t num_clients() const noexcept { return clients.size(); }
};

/// Sizes of `parts` contiguous chunks of `total`; the remainder goes one each
/// to the first chunks.
inline std::vector<std::size_t> chunk_sizes(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> sizes(parts, total / parts);
  for (std::size_t i = 0; i < total % parts; ++i) ++sizes[i];
  return sizes;
}

namespace detail {

inline void seeded_shuffle(std::vector<std::size_t>& v, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(SketchSeed{seed, stream, 0}, StreamDomain::kData);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

inline std::vector<std::vector<std::size_t>> cut(const std::vector<std::size_t>& order, std::size_t parts) {
  std::vector<std::vector<std::size_t>> out;
  std::size_t pos = 0;
  for (std::size_t s : chunk_sizes(order.size(), parts)) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                     order.begin() + static_cast<std::ptrdiff_t>(pos + s));
    pos += s;
  }
  return out;
}

}  // namespace detail

inline ClientPartition split_iid(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("split_iid: n must be >= 1");
  if (n > ds.size()) throw ParameterError("split_iid: more clients than samples");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  detail::seeded_shuffle(order, seed, 0);
  return {detail::cut(order, n), SplitMode::Iid};
}

/// Classification: sort by label, cut 2n shards, deal two shuffled shards per
/// client. Regression: sort by target and cut n contiguous chunks.
inline ClientPartition split_noniid(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (!ds.has_labels()) throw ParameterError("split_noniid: dataset has no labels");
  if (n < 1 || ds.size() < 2 * n) throw ParameterError("split_noniid: need at least 2n samples");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ds.labels[a] < ds.labels[b]; });
  ClientPartition out;
  out.mode = SplitMode::NonIid;
  if (ds.label_kind == LabelKind::Target) {
    out.clients = detail::cut(order, n);
    return out;
  }
  const auto shards = detail::cut(order, 2 * n);
  std::vector<std::size_t> deal(2 * n);
  std::iota(deal.begin(), deal.end(), 0);
  detail::seeded_shuffle(deal, seed, 1);
  out.clients.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s : {deal[2 * i], deal[2 * i + 1]})
      out.clients[i].insert(out.clients[i].end(), shards[s].begin(), shards[s].end());
  }
  return out;
}

/// One line per client, space-separated sample indices.
inline void write_partition(const std::filesystem::path& path, const ClientPartition& p) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write partition file " + path.string());
  for (const auto& client : p.clients) {
    for (std::size_t j = 0; j < client.size(); ++j) out << (j ? " " : "") << client[j];
    out << '\n';
  }
}

inline ClientPartition read_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open partition file " + path.string());
  ClientPartition p;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::stringstream ss(line);
    std::vector<std::size_t> client;
    std::string tok;
    while (ss >> tok) {
      if (tok.find_first_not_of("0123456789") != std::string::npos) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad index '" + tok + "'");
      }
      client.push_back(std::stoull(tok));
    }
    p.clients.push_back(std::move(client));
  }
  return p;
}

/// Rows of ds owned by one client.
inline Matrix client_features(const Dataset& ds, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), ds.dim());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = ds.features.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// ----------------------------------------------------------------------------
// Synthetic data

enum class SyntheticKind { SpikedCovariance, Blobs, Linear };

inline SyntheticKind parse_synthetic_kind(std::string_view s) {
  if (s == "spiked_covariance") return SyntheticKind::SpikedCovariance;
  if (s == "blobs") return SyntheticKind::Blobs;
  if (s == "linear") return SyntheticKind::Linear;
  throw ParameterError("unknown synthetic dataset '" + std::string(s) + "'");
}

struct SyntheticParams {
  std::size_t m = 1000;
  std::size_t d = 64;
  /// spiked_covariance: top over second eigenvalue of the population covariance.
  double spike_ratio = 10.0;
  /// blobs: explicit centers, or num_centers drawn N(0, center_scale^2 I).
  std::vector<DenseVector> centers;
  std::size_t num_centers = 2;
  double center_scale = 5.0;
  /// blobs: per-coordinate noise std; linear: target noise std.
  double noise = 1.0;
  /// linear: explicit weights, or drawn N(0, I/d).
  DenseVector w_star;
};

struct SyntheticDataset {
  Dataset data;
  DenseVector spike;               // spiked_covariance: the unit spike direction
  std::vector<DenseVector> centers;  // blobs
  DenseVector w_star;              // linear
};

inline SyntheticDataset gen_synthetic(SyntheticKind kind, const SyntheticParams& p, std::uint64_t seed) {
  if (p.m < 1 || p.d < 1) throw ParameterError("gen_synthetic: m and d must be positive");
  if (p.noise < 0.0) throw ParameterError("gen_synthetic: noise must be nonnegative");
  CounterRng rng(SketchSeed{seed, 0, 0}, StreamDomain::kData);
  SyntheticDataset out;
  Dataset& ds = out.data;
  ds.features = Matrix(p.m, p.d);
  switch (kind) {
    case SyntheticKind::SpikedCovariance: {
      if (!(p.spike_ratio >= 1.0)) throw ParameterError("gen_synthetic: spike_ratio must be >= 1");
      DenseVector u(p.d);
      for (double& v : u) v = rng.normal();
      const double nu = std::sqrt(squared_norm(u));
      for (double& v : u) v /= nu;
      const double boost = std::sqrt(p.spike_ratio) - 1.0;
      for (std::size_t i = 0; i < p.m; ++i) {
        auto row = ds.features.row(i);
        for (double& v : row) v = rng.normal();
        const double proj = dot(row, u);
        for (std::size_t j = 0; j < p.d; ++j) row[j] += boost * proj * u[j];
      }
      out.spike = std::move(u);
      break;
    }
    case SyntheticKind::Blobs: {
      out.centers = p.centers;
      if (out.centers.empty()) {
        if (p.num_centers < 1) throw ParameterError("gen_synthetic: blobs need at least one center");
        for (std::size_t c = 0; c < p.num_centers; ++c) {
          DenseVector center(p.d);
          for (double& v : center) v = p.center_scale * rng.normal();
          out.centers.push_back(std::move(center));
        }
      }
      for (const auto& c : out.centers)
        if (c.size() != p.d) throw DimensionError("gen_synthetic: center dimension differs from d");
      ds.labels.resize(p.m);
      ds.label_kind = LabelKind::Class;
      for (std::size_t i = 0; i < p.m; ++i) {
        const std::size_t c = i % out.centers.size();
        ds.labels[i] = static_cast<double>(c);
        auto row = ds.features.row(i);
        for (std::size_t j = 0; j < p.d; ++j) row[j] = out.centers[c][j] + (p.noise > 0 ? p.noise * rng.normal() : 0.0);
      }
      break;
    }
    case SyntheticKind::Linear: {
      out.w_star = p.w_star;
      if (out.w_star.empty()) {
        out.w_star.resize(p.d);
        for (double& v : out.w_star) v = rng.normal() / std::sqrt(static_cast<double>(p.d));
      }
      if (out.w_star.size() != p.d) throw DimensionError("gen_synthetic: w_star dimension differs from d");
      ds.labels.resize(p.m);
      ds.label_kind = LabelKind::Target;
      for (std::size_t i = 0; i < p.m; ++i) {
        auto row = ds.features.row(i);
        for (double& v : row) v = rng.normal();
        ds.labels[i] = dot(row, out.w_star) + (p.noise > 0 ? p.noise * rng.normal() : 0.0);
      }
      break;
    }
  }
  return out;
}

}  // namespace dme
