#include <doctest.h>

#include <vector>

#include "mmpinn/derivative_check.hpp"
#include "mmpinn/evaluator.hpp"
#include "test_support.hpp"

using namespace mmpinn;
using namespace testsupport;

namespace {

// Straight-line reference evaluator built on the scalar jet arithmetic —
// a deliberately different implementation style than the blocked kernels.
template <int D>
Jet<double, D> reference_jet(const ArchitectureSpec& spec, const NetworkParams<double>& p,
                             const double* x) {
  using J = Jet<double, D>;
  auto act = [&](const J& j) { return spec.activation == Activation::Tanh ? tanh(j) : j; };

  std::vector<J> xs(spec.input_dim);
  for (int k = 0; k < spec.input_dim; ++k) xs[k] = seed_jet<double, D>(x[k], k);

  auto affine = [&](const double* W, const double* b, const std::vector<J>& in, int rows) {
    std::vector<J> out(rows);
    for (int i = 0; i < rows; ++i) {
      J acc;
      if (b) acc.v = b[i];
      for (std::size_t j = 0; j < in.size(); ++j) acc = acc + W[i * in.size() + j] * in[j];
      out[i] = acc;
    }
    return out;
  };

  std::vector<std::vector<J>> branch_states;
  const int branches = branch_count(spec);
  for (int br = 0; br < branches; ++br) {
    std::vector<J> in;
    if (spec.family == Family::Dnn) {
      in = xs;
    } else {
      const auto& emb = spec.embeddings[br];
      const auto& B = p.embeddings[br];
      const int cols = static_cast<int>(emb.target_coords.size());
      std::vector<J> args(emb.rows);
      for (int r = 0; r < emb.rows; ++r) {
        J arg;
        for (int c = 0; c < cols; ++c)
          arg = arg + B[r * cols + c] * xs[emb.target_coords[c]];
        args[r] = arg;
      }
      for (int r = 0; r < emb.rows; ++r) in.push_back(sin(args[r]));
      for (int r = 0; r < emb.rows; ++r) in.push_back(cos(args[r]));
    }

    std::vector<J> u, v;
    if (spec.family == Family::Inn) {
      const auto& wu = p.theta.segment("Wu" + std::to_string(br + 1));
      const auto& bu = p.theta.segment("bu" + std::to_string(br + 1));
      const auto& wv = p.theta.segment("Wv" + std::to_string(br + 1));
      const auto& bv = p.theta.segment("bv" + std::to_string(br + 1));
      for (auto& j : affine(p.theta.at(wu), p.theta.at(bu), in, spec.width))
        u.push_back(act(j));
      for (auto& j : affine(p.theta.at(wv), p.theta.at(bv), in, spec.width))
        v.push_back(act(j));
    }

    std::vector<J> state = in;
    for (int l = 1; l <= spec.hidden_layers; ++l) {
      const auto& wl = p.theta.segment("W" + std::to_string(l));
      const auto& bl = p.theta.segment("b" + std::to_string(l));
      auto z = affine(p.theta.at(wl), p.theta.at(bl), state, spec.width);
      for (auto& j : z) j = act(j);
      if (spec.family == Family::Inn) {
        for (int i = 0; i < spec.width; ++i) z[i] = u[i] + z[i] * (v[i] - u[i]);
      }
      state = std::move(z);
    }
    branch_states.push_back(std::move(state));
  }

  std::vector<J> merged;
  if (spec.combine == CombineRule::CoordinateProduct && branches > 1) {
    merged = branch_states[0];
    for (int br = 1; br < branches; ++br)
      for (int i = 0; i < spec.width; ++i) merged[i] = merged[i] * branch_states[br][i];
  } else {
    for (const auto& st : branch_states)
      merged.insert(merged.end(), st.begin(), st.end());
  }

  const auto& wout = p.theta.segment("Wout");
  const auto& bout = p.theta.segment("bout");
  return affine(p.theta.at(wout), p.theta.at(bout), merged, 1)[0];
}

template <int D>
void compare_all(int dim) {
  for (const auto& spec : oracle_specs(dim)) {
    CAPTURE(family_name(spec.family));
    auto params = init_params<double>(spec, 2024 + dim);
    auto points = random_check_points(dim, 12, 31 * dim + 1);
    for (int i = 0; i < 12; ++i) {
      const double* x = points.data() + i * dim;
      auto fast = eval_jet<double, D>(spec, params, x);
      auto ref = reference_jet<D>(spec, params, x);
      CHECK(fast.v == doctest::Approx(ref.v).epsilon(1e-13));
      for (int k = 0; k < D; ++k) {
        CHECK(fast.d1[k] ==
              doctest::Approx(ref.d1[k]).epsilon(1e-12).scale(std::abs(ref.d1[k]) + 1));
        CHECK(fast.d2[k] ==
              doctest::Approx(ref.d2[k]).epsilon(1e-12).scale(std::abs(ref.d2[k]) + 1));
      }
    }
  }
}

}  // namespace

TEST_CASE("blocked evaluator matches a scalar-jet reference implementation") {
  compare_all<1>(1);
  compare_all<2>(2);
}
