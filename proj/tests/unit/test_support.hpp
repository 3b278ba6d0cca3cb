#pragma once

#include <random>
#include <vector>

#include "mmpinn/architecture.hpp"

namespace testsupport {

using namespace mmpinn;

inline ArchitectureSpec dnn_spec(int dim, int hidden, int width,
                                 Activation act = Activation::Tanh) {
  ArchitectureSpec s;
  s.family = Family::Dnn;
  s.input_dim = dim;
  s.hidden_layers = hidden;
  s.width = width;
  s.activation = act;
  return s;
}

inline ArchitectureSpec mff_spec(int dim, int hidden, int width,
                                 std::vector<double> sigmas,
                                 std::vector<std::vector<int>> targets, int rows,
                                 CombineRule combine = CombineRule::Concat) {
  ArchitectureSpec s;
  s.family = Family::Mff;
  s.input_dim = dim;
  s.hidden_layers = hidden;
  s.width = width;
  s.combine = combine;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    FourierEmbedding e;
    e.sigma = sigmas[i];
    e.rows = rows;
    e.target_coords = targets[i];
    s.embeddings.push_back(std::move(e));
  }
  return s;
}

inline ArchitectureSpec inn_spec(int dim, int hidden, int width, std::vector<double> sigmas,
                                 std::vector<std::vector<int>> targets, int rows,
                                 CombineRule combine = CombineRule::Concat) {
  ArchitectureSpec s = mff_spec(dim, hidden, width, std::move(sigmas), std::move(targets),
                                rows, combine);
  s.family = Family::Inn;
  return s;
}

/// Small representative spec per family and dimension for oracle sweeps.
inline std::vector<ArchitectureSpec> oracle_specs(int dim) {
  std::vector<ArchitectureSpec> specs;
  specs.push_back(dnn_spec(dim, 3, 6));
  if (dim == 1) {
    specs.push_back(mff_spec(1, 2, 6, {1.0, 4.0}, {{0}, {0}}, 3));
    specs.push_back(inn_spec(1, 2, 6, {1.0, 4.0}, {{0}, {0}}, 3));
  } else {
    specs.push_back(mff_spec(2, 2, 6, {1.0, 3.0}, {{0, 1}, {0, 1}}, 3));
    specs.push_back(mff_spec(2, 2, 6, {1.0, 3.0}, {{0}, {1}}, 3,
                             CombineRule::CoordinateProduct));
    specs.push_back(inn_spec(2, 2, 6, {1.0, 3.0}, {{0, 1}, {0, 1}}, 3));
    specs.push_back(inn_spec(2, 2, 6, {1.0, 3.0}, {{0}, {1}}, 3,
                             CombineRule::CoordinateProduct));
  }
  return specs;
}

}  // namespace testsupport
