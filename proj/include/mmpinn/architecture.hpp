#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mmpinn/common.hpp"

namespace mmpinn {

enum class Family { Dnn, Mff, Inn };
enum class CombineRule { Concat, CoordinateProduct };
enum class Activation { Tanh, Identity };  // Identity exists for derivative unit tests only.

inline std::string family_name(Family f) {
  switch (f) {
    case Family::Dnn: return "dnn";
    case Family::Mff: return "mff";
    case Family::Inn: return "inn";
  }
  return "?";
}

/// One Fourier feature mapping x -> [sin(Bx); cos(Bx)]. B has `rows` rows and
/// one column per targeted input coordinate; entries are sampled once from
/// N(0, sigma^2) at initialization and held fixed during training.
struct FourierEmbedding {
  double sigma = 1.0;
  int rows = 0;                    // output size is 2*rows
  std::vector<int> target_coords;  // input coordinates this mapping reads
};

struct ArchitectureSpec {
  Family family = Family::Dnn;
  int input_dim = 0;
  int hidden_layers = 0;  // number of hidden states (weights W_1..W_hidden plus final layer)
  int width = 0;
  std::vector<FourierEmbedding> embeddings;  // empty for DNN
  CombineRule combine = CombineRule::Concat;
  Activation activation = Activation::Tanh;
};

/// Named slice of the flat trainable vector.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;  // 0 marks a bias vector
  std::size_t size() const { return static_cast<std::size_t>(rows) * (cols > 0 ? cols : 1); }
};

/// Flat trainable parameters plus the segment table tiling them exactly.
template <class T>
struct ParamVector {
  std::vector<T> data;
  std::vector<Segment> segments;

  std::size_t size() const { return data.size(); }
  const Segment& segment(const std::string& name) const {
    for (const auto& s : segments)
      if (s.name == name) return s;
    throw ConfigError("no parameter segment named '" + name + "'");
  }
  T* at(const Segment& s) { return data.data() + s.offset; }
  const T* at(const Segment& s) const { return data.data() + s.offset; }
};

/// Trainable parameters plus the fixed Fourier matrices (not optimized).
template <class T>
struct NetworkParams {
  ParamVector<T> theta;
  std::vector<std::vector<T>> embeddings;  // per branch, row-major rows x |target_coords|
};

inline void validate_spec(const ArchitectureSpec& spec) {
  if (spec.input_dim < 1) throw ConfigError("architecture: input_dim must be >= 1");
  if (spec.width < 1) throw ConfigError("architecture: width must be >= 1");
  if (spec.hidden_layers < 1) throw ConfigError("architecture: hidden_layers must be >= 1");
  if (spec.family == Family::Dnn) {
    if (!spec.embeddings.empty())
      throw ConfigError("architecture: dnn takes no fourier embeddings");
    return;
  }
  if (spec.embeddings.empty())
    throw ConfigError("architecture: " + family_name(spec.family) +
                      " requires at least one fourier embedding");
  int rows0 = spec.embeddings.front().rows;
  for (const auto& e : spec.embeddings) {
    if (e.sigma <= 0) throw ConfigError("architecture: embedding sigma must be > 0");
    if (e.rows < 1) throw ConfigError("architecture: embedding rows must be >= 1");
    if (e.rows != rows0)
      throw ConfigError("architecture: all embeddings must share the same row count "
                        "(hidden weights are shared across branches)");
    if (e.target_coords.empty())
      throw ConfigError("architecture: embedding targets no coordinates");
    for (int c : e.target_coords)
      if (c < 0 || c >= spec.input_dim)
        throw ConfigError("architecture: embedding target coordinate out of range");
  }
  if (spec.combine == CombineRule::CoordinateProduct) {
    // Branches must partition the input coordinates.
    std::vector<int> seen(spec.input_dim, 0);
    for (const auto& e : spec.embeddings)
      for (int c : e.target_coords) seen[c]++;
    for (int c = 0; c < spec.input_dim; ++c)
      if (seen[c] != 1)
        throw ConfigError("architecture: coordinate-product requires embeddings that "
                          "partition the input coordinates (coordinate " +
                          std::to_string(c) + " covered " + std::to_string(seen[c]) +
                          " times)");
  }
}

inline int branch_count(const ArchitectureSpec& spec) {
  return spec.family == Family::Dnn ? 1 : static_cast<int>(spec.embeddings.size());
}

/// Width of the vector entering the final linear layer.
inline int merged_width(const ArchitectureSpec& spec) {
  if (spec.family == Family::Dnn) return spec.width;
  if (spec.combine == CombineRule::CoordinateProduct) return spec.width;
  return spec.width * branch_count(spec);
}

/// Input size of the first hidden layer.
inline int first_layer_input(const ArchitectureSpec& spec) {
  if (spec.family == Family::Dnn) return spec.input_dim;
  return 2 * spec.embeddings.front().rows;
}

/// Builds the segment table: INN transform pairs per branch first, then the
/// shared hidden stack W1,b1..W<H>,b<H>, then the final layer Wout,bout.
inline std::vector<Segment> param_layout(const ArchitectureSpec& spec) {
  validate_spec(spec);
  std::vector<Segment> segs;
  std::size_t off = 0;
  auto push = [&](const std::string& name, int rows, int cols) {
    Segment s{name, off, rows, cols};
    off += s.size();
    segs.push_back(std::move(s));
  };
  int w = spec.width;
  int e = first_layer_input(spec);
  if (spec.family == Family::Inn) {
    for (int b = 0; b < branch_count(spec); ++b) {
      std::string i = std::to_string(b + 1);
      push("Wu" + i, w, e);
      push("bu" + i, w, 0);
      push("Wv" + i, w, e);
      push("bv" + i, w, 0);
    }
  }
  push("W1", w, e);
  push("b1", w, 0);
  for (int l = 2; l <= spec.hidden_layers; ++l) {
    push("W" + std::to_string(l), w, w);
    push("b" + std::to_string(l), w, 0);
  }
  push("Wout", 1, merged_width(spec));
  push("bout", 1, 0);
  return segs;
}

inline std::size_t param_count(const ArchitectureSpec& spec) {
  auto segs = param_layout(spec);
  return segs.back().offset + segs.back().size();
}

/// Xavier/Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero
/// biases, Fourier matrices from N(0, sigma^2). Fully determined by seed.
template <class T>
NetworkParams<T> init_params(const ArchitectureSpec& spec, std::uint64_t seed) {
  NetworkParams<T> p;
  p.theta.segments = param_layout(spec);
  const auto& back = p.theta.segments.back();
  p.theta.data.assign(back.offset + back.size(), T(0));

  std::mt19937_64 rng(seed);
  for (const auto& emb : spec.embeddings) {
    std::normal_distribution<double> gauss(0.0, emb.sigma);
    std::vector<T> b(static_cast<std::size_t>(emb.rows) * emb.target_coords.size());
    for (auto& x : b) x = static_cast<T>(gauss(rng));
    p.embeddings.push_back(std::move(b));
  }
  for (const auto& s : p.theta.segments) {
    if (s.cols == 0) continue;  // biases stay zero
    // fan_out of the final row-vector layer is 1.
    double bound = std::sqrt(6.0 / (s.cols + s.rows));
    std::uniform_real_distribution<double> uni(-bound, bound);
    T* w = p.theta.at(s);
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = static_cast<T>(uni(rng));
  }
  return p;
}

/// [sin(Bx); cos(Bx)] with x restricted to the embedding's target coordinates.
template <class T>
std::vector<T> fourier_embed(const FourierEmbedding& emb, const std::vector<T>& b_matrix,
                             const T* x) {
  int rows = emb.rows;
  int cols = static_cast<int>(emb.target_coords.size());
  std::vector<T> out(2 * static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    T arg = T(0);
    for (int c = 0; c < cols; ++c) arg += b_matrix[r * cols + c] * x[emb.target_coords[c]];
    out[r] = std::sin(arg);
    out[rows + r] = std::cos(arg);
  }
  return out;
}

}  // namespace mmpinn
