#pragma once

#include <cassert>
#include <cmath>
#include <cstring>
#include <vector>

#include "mmpinn/architecture.hpp"
#include "mmpinn/jet.hpp"

namespace mmpinn {

/// Forward and reverse evaluation of a network together with its first and
/// diagonal-second input derivatives.
///
/// JD is the number of jet derivative coordinates: JD == input_dim for full
/// jets, JD == 0 for plain value evaluation (prediction grids). Each neuron
/// carries 1 + 2*JD scalar components; points are processed in blocks of
/// kBlock with the block index innermost, so the hot loops run over
/// contiguous lanes.
///
/// The derivative strategy: jets are propagated forward through closed-form
/// layer rules (affine maps, activation chain rules, Fourier sine/cosine
/// rules, point-wise product rule for the gated layers); parameter gradients
/// come from reverse accumulation over that extended forward pass. All
/// intermediate layer states of the latest forward block are retained in the
/// workspace and consumed by backward_block.
template <class T, int JD>
class Evaluator {
 public:
  static constexpr int kComps = 1 + 2 * JD;
  static constexpr int kBlock = 8;
  static constexpr int kLane = kComps * kBlock;

  explicit Evaluator(const ArchitectureSpec& spec) : spec_(spec) {
    validate_spec(spec);
    if (JD != 0 && JD != spec.input_dim)
      throw ConfigError("evaluator: jet dimension does not match architecture input_dim");
    segments_ = param_layout(spec);
    param_count_ = segments_.back().offset + segments_.back().size();
    build_layout();
  }

  const ArchitectureSpec& spec() const { return spec_; }
  std::size_t param_count() const { return param_count_; }
  const std::vector<Segment>& segments() const { return segments_; }

  struct Workspace {
    std::vector<T> fwd;   // stored layer states (jets, [width][comps][block])
    std::vector<T> adj;   // adjoint twins of fwd
    std::vector<T> xb;    // raw input coordinates, [dim][block]
    int n = 0;            // points in the latest forward block
  };

  Workspace make_workspace() const {
    Workspace ws;
    ws.fwd.assign(arena_size_, T(0));
    ws.adj.assign(arena_size_, T(0));
    ws.xb.assign(static_cast<std::size_t>(spec_.input_dim) * kBlock, T(0));
    return ws;
  }

  /// Evaluates up to kBlock points. xs holds n points row-major [n][dim];
  /// out receives one jet per point. The tape stays in ws for backward_block.
  void forward_block(const NetworkParams<T>& p, const T* xs, int n, Jet<T, JD>* out,
                     Workspace& ws) const {
    assert(n >= 1 && n <= kBlock);
    check_params(p);
    ws.n = n;
    const int dim = spec_.input_dim;
    const T* theta = p.theta.data.data();

    // Input lanes: unused lanes stay zero so full-width reductions are safe.
    std::fill(ws.xb.begin(), ws.xb.end(), T(0));
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < dim; ++k) ws.xb[k * kBlock + b] = xs[b * dim + k];

    T* fwd = ws.fwd.data();
    if (spec_.family == Family::Dnn) {
      // Seed input jets: value x_k, d(x_k)/d(x_k) = 1.
      T* xj = fwd + xj_off_;
      std::memset(xj, 0, sizeof(T) * static_cast<std::size_t>(dim) * kLane);
      for (int k = 0; k < dim; ++k) {
        T* row = xj + k * kLane;
        for (int b = 0; b < n; ++b) {
          row[b] = ws.xb[k * kBlock + b];
          if constexpr (JD > 0) row[(1 + k) * kBlock + b] = T(1);
        }
      }
    }

    const int nb = branch_count(spec_);
    for (int br = 0; br < nb; ++br) {
      const T* in = nullptr;
      if (spec_.family == Family::Dnn) {
        in = fwd + xj_off_;
      } else {
        embed_fwd(br, p, ws);
        in = fwd + f_off_[br];
      }
      if (spec_.family == Family::Inn) {
        affine_fwd(theta + wu_poff_[br], theta + bu_poff_[br], in, embed_out_,
                   fwd + zu_off_[br], spec_.width);
        act_fwd(fwd + zu_off_[br], fwd + u_off_[br], spec_.width);
        affine_fwd(theta + wv_poff_[br], theta + bv_poff_[br], in, embed_out_,
                   fwd + zv_off_[br], spec_.width);
        act_fwd(fwd + zv_off_[br], fwd + v_off_[br], spec_.width);
        sub_fwd(fwd + v_off_[br], fwd + u_off_[br], fwd + d_off_[br], spec_.width);
      }
      const T* prev = in;
      int prev_w = first_layer_input(spec_);
      for (int l = 0; l < spec_.hidden_layers; ++l) {
        affine_fwd(theta + wl_off_[l], theta + bl_off_[l], prev, prev_w,
                   fwd + s_off_[br][l], spec_.width);
        if (spec_.family == Family::Inn) {
          act_fwd(fwd + s_off_[br][l], fwd + z_off_[br][l], spec_.width);
          gate_fwd(fwd + u_off_[br], fwd + z_off_[br][l], fwd + d_off_[br],
                   fwd + h_off_[br][l], spec_.width);
          prev = fwd + h_off_[br][l];
        } else {
          act_fwd(fwd + s_off_[br][l], fwd + z_off_[br][l], spec_.width);
          prev = fwd + z_off_[br][l];
        }
        prev_w = spec_.width;
      }
    }

    merge_fwd(ws);
    affine_fwd(theta + wout_off_, theta + bout_off_, fwd + m_off_, merged_, fwd + out_off_, 1);

    const T* o = fwd + out_off_;
    for (int b = 0; b < n; ++b) {
      out[b].v = o[b];
      for (int k = 0; k < JD; ++k) {
        out[b].d1[k] = o[(1 + k) * kBlock + b];
        out[b].d2[k] = o[(1 + JD + k) * kBlock + b];
      }
    }
  }

  /// Reverse accumulation over the latest forward block: adds
  /// d( sum_b <adj[b], out[b]> ) / d(theta) into grad (length param_count()).
  void backward_block(const NetworkParams<T>& p, const Jet<T, JD>* adj, int n, Workspace& ws,
                      T* grad) const {
    assert(n == ws.n);
    const T* theta = p.theta.data.data();
    const T* fwd = ws.fwd.data();
    T* a = ws.adj.data();
    std::memset(a, 0, sizeof(T) * arena_size_);

    T* ao = a + out_off_;
    for (int b = 0; b < n; ++b) {
      ao[b] = adj[b].v;
      for (int k = 0; k < JD; ++k) {
        ao[(1 + k) * kBlock + b] = adj[b].d1[k];
        ao[(1 + JD + k) * kBlock + b] = adj[b].d2[k];
      }
    }

    affine_bwd(theta + wout_off_, fwd + m_off_, a + out_off_, 1, a + m_off_, merged_,
               grad + wout_off_, grad + bout_off_);
    merge_bwd(ws);

    const int nb = branch_count(spec_);
    for (int br = 0; br < nb; ++br) {
      const T* in = spec_.family == Family::Dnn ? fwd + xj_off_ : fwd + f_off_[br];
      const int in_w = first_layer_input(spec_);
      for (int l = spec_.hidden_layers - 1; l >= 0; --l) {
        if (spec_.family == Family::Inn) {
          gate_bwd(fwd + u_off_[br], fwd + z_off_[br][l], fwd + d_off_[br],
                   a + h_off_[br][l], a + u_off_[br], a + z_off_[br][l], a + d_off_[br],
                   spec_.width);
        }
        act_bwd(fwd + s_off_[br][l], fwd + z_off_[br][l], a + z_off_[br][l],
                a + s_off_[br][l], spec_.width);
        // Inputs and Fourier matrices are not trainable, so no adjoint is
        // needed below the first hidden layer.
        const T* prev = l == 0 ? in : layer_state(fwd, br, l - 1);
        T* prev_adj = l == 0 ? nullptr : (a + (layer_state(fwd, br, l - 1) - fwd));
        const int pw = l == 0 ? in_w : spec_.width;
        affine_bwd(theta + wl_off_[l], prev, a + s_off_[br][l], spec_.width, prev_adj, pw,
                   grad + wl_off_[l], grad + bl_off_[l]);
      }
      if (spec_.family == Family::Inn) {
        // D = V - U feeds every gate; U also enters each gate directly.
        T* au = a + u_off_[br];
        T* av = a + v_off_[br];
        const T* ad = a + d_off_[br];
        for (int i = 0; i < spec_.width * kLane; ++i) {
          av[i] += ad[i];
          au[i] -= ad[i];
        }
        act_bwd(fwd + zu_off_[br], fwd + u_off_[br], au, a + zu_off_[br], spec_.width);
        act_bwd(fwd + zv_off_[br], fwd + v_off_[br], av, a + zv_off_[br], spec_.width);
        affine_bwd(theta + wu_poff_[br], in, a + zu_off_[br], spec_.width, nullptr, in_w,
                   grad + wu_poff_[br], grad + bu_poff_[br]);
        affine_bwd(theta + wv_poff_[br], in, a + zv_off_[br], spec_.width, nullptr, in_w,
                   grad + wv_poff_[br], grad + bv_poff_[br]);
      }
      // The Fourier matrices are fixed: adjoints stop at the embedding.
    }
  }

 private:
  const T* layer_state(const T* fwd, int br, int l) const {
    return spec_.family == Family::Inn ? fwd + h_off_[br][l] : fwd + z_off_[br][l];
  }

  void check_params(const NetworkParams<T>& p) const {
    if (p.theta.size() != param_count_)
      throw ConfigError("evaluator: parameter vector has " + std::to_string(p.theta.size()) +
                        " entries, architecture expects " + std::to_string(param_count_));
    if (spec_.family != Family::Dnn &&
        p.embeddings.size() != spec_.embeddings.size())
      throw ConfigError("evaluator: embedding matrix count does not match architecture");
  }

  std::size_t off_(const char* base, int branch) const {
    const std::string name = std::string(base) + std::to_string(branch + 1);
    for (const auto& s : segments_)
      if (s.name == name) return s.offset;
    throw ConfigError("evaluator: missing segment " + name);
  }

  void build_layout() {
    const int w = spec_.width;
    const int nb = branch_count(spec_);
    embed_out_ = first_layer_input(spec_);
    merged_ = merged_width(spec_);
    std::size_t off = 0;
    auto take = [&](int width) {
      std::size_t o = off;
      off += static_cast<std::size_t>(width) * kLane;
      return o;
    };
    if (spec_.family == Family::Dnn) xj_off_ = take(spec_.input_dim);
    f_off_.assign(nb, 0);
    zu_off_.assign(nb, 0);
    u_off_.assign(nb, 0);
    zv_off_.assign(nb, 0);
    v_off_.assign(nb, 0);
    d_off_.assign(nb, 0);
    s_off_.assign(nb, {});
    z_off_.assign(nb, {});
    h_off_.assign(nb, {});
    for (int br = 0; br < nb; ++br) {
      if (spec_.family != Family::Dnn) f_off_[br] = take(embed_out_);
      if (spec_.family == Family::Inn) {
        zu_off_[br] = take(w);
        u_off_[br] = take(w);
        zv_off_[br] = take(w);
        v_off_[br] = take(w);
        d_off_[br] = take(w);
      }
      for (int l = 0; l < spec_.hidden_layers; ++l) {
        s_off_[br].push_back(take(w));
        z_off_[br].push_back(take(w));
        if (spec_.family == Family::Inn) h_off_[br].push_back(take(w));
      }
    }
    if (spec_.combine == CombineRule::CoordinateProduct && nb > 1) {
      prod_off_.clear();
      for (int i = 0; i < nb; ++i) prod_off_.push_back(take(w));
    }
    m_off_ = take(merged_);
    out_off_ = take(1);
    arena_size_ = off;

    wl_off_.clear();
    bl_off_.clear();
    for (int l = 1; l <= spec_.hidden_layers; ++l) {
      for (const auto& s : segments_) {
        if (s.name == "W" + std::to_string(l)) wl_off_.push_back(s.offset);
        if (s.name == "b" + std::to_string(l)) bl_off_.push_back(s.offset);
      }
    }
    for (const auto& s : segments_) {
      if (s.name == "Wout") wout_off_ = s.offset;
      if (s.name == "bout") bout_off_ = s.offset;
    }
    if (spec_.family == Family::Inn) {
      for (int br = 0; br < nb; ++br) {
        wu_poff_.push_back(off_("Wu", br));
        bu_poff_.push_back(off_("bu", br));
        wv_poff_.push_back(off_("Wv", br));
        bv_poff_.push_back(off_("bv", br));
      }
    }
  }

  // ---- blocked kernels: every buffer is [width][kComps][kBlock] ----

  /// Four output rows per pass with local accumulators: each input-lane load
  /// feeds four FMAs and the accumulators stay in registers across j.
  void affine_fwd(const T* W, const T* bias, const T* in, int in_w, T* out, int out_w) const {
    int i = 0;
    for (; i + 4 <= out_w; i += 4) {
      T acc[4][kLane];
      std::memset(acc, 0, sizeof(acc));
      if (bias)
        for (int k = 0; k < 4; ++k)
          for (int b = 0; b < kBlock; ++b) acc[k][b] = bias[i + k];
      const T* w0 = W + static_cast<std::size_t>(i) * in_w;
      const T* w1 = w0 + in_w;
      const T* w2 = w1 + in_w;
      const T* w3 = w2 + in_w;
      for (int j = 0; j < in_w; ++j) {
        const T a0 = w0[j], a1 = w1[j], a2 = w2[j], a3 = w3[j];
        const T* __restrict__ src = in + static_cast<std::size_t>(j) * kLane;
        for (int cb = 0; cb < kLane; ++cb) {
          const T s = src[cb];
          acc[0][cb] += a0 * s;
          acc[1][cb] += a1 * s;
          acc[2][cb] += a2 * s;
          acc[3][cb] += a3 * s;
        }
      }
      std::memcpy(out + static_cast<std::size_t>(i) * kLane, acc, sizeof(acc));
    }
    for (; i < out_w; ++i) {
      T acc[kLane];
      std::memset(acc, 0, sizeof(acc));
      if (bias)
        for (int b = 0; b < kBlock; ++b) acc[b] = bias[i];
      const T* wrow = W + static_cast<std::size_t>(i) * in_w;
      for (int j = 0; j < in_w; ++j) {
        const T wij = wrow[j];
        const T* __restrict__ src = in + static_cast<std::size_t>(j) * kLane;
        for (int cb = 0; cb < kLane; ++cb) acc[cb] += wij * src[cb];
      }
      std::memcpy(out + static_cast<std::size_t>(i) * kLane, acc, sizeof(acc));
    }
  }

  /// Accumulates the input adjoint (skipped when in_adj is null) and the
  /// weight/bias gradients for one affine layer. Both passes are blocked so
  /// loaded lanes feed several FMAs.
  void affine_bwd(const T* W, const T* in, const T* out_adj, int out_w, T* in_adj, int in_w,
                  T* gW, T* gb) const {
    int i = 0;
    for (; i + 2 <= out_w; i += 2) {
      const T* __restrict__ a0 = out_adj + static_cast<std::size_t>(i) * kLane;
      const T* __restrict__ a1 = a0 + kLane;
      T b0 = T(0), b1 = T(0);
      for (int b = 0; b < kBlock; ++b) {
        b0 += a0[b];
        b1 += a1[b];
      }
      gb[i] += b0;
      gb[i + 1] += b1;
      T* g0 = gW + static_cast<std::size_t>(i) * in_w;
      T* g1 = g0 + in_w;
      for (int j = 0; j < in_w; ++j) {
        const T* __restrict__ src = in + static_cast<std::size_t>(j) * kLane;
        T acc0 = T(0), acc1 = T(0);
        for (int cb = 0; cb < kLane; ++cb) {
          const T s = src[cb];
          acc0 += a0[cb] * s;
          acc1 += a1[cb] * s;
        }
        g0[j] += acc0;
        g1[j] += acc1;
      }
    }
    for (; i < out_w; ++i) {
      const T* __restrict__ ao = out_adj + static_cast<std::size_t>(i) * kLane;
      T acc_b = T(0);
      for (int b = 0; b < kBlock; ++b) acc_b += ao[b];
      gb[i] += acc_b;
      T* grow = gW + static_cast<std::size_t>(i) * in_w;
      for (int j = 0; j < in_w; ++j) {
        const T* __restrict__ src = in + static_cast<std::size_t>(j) * kLane;
        T acc = T(0);
        for (int cb = 0; cb < kLane; ++cb) acc += ao[cb] * src[cb];
        grow[j] += acc;
      }
    }
    if (!in_adj) return;
    int j = 0;
    for (; j + 4 <= in_w; j += 4) {
      T acc[4][kLane];
      std::memset(acc, 0, sizeof(acc));
      for (int r = 0; r < out_w; ++r) {
        const T* wrow = W + static_cast<std::size_t>(r) * in_w + j;
        const T w0 = wrow[0], w1 = wrow[1], w2 = wrow[2], w3 = wrow[3];
        const T* __restrict__ ao = out_adj + static_cast<std::size_t>(r) * kLane;
        for (int cb = 0; cb < kLane; ++cb) {
          const T a = ao[cb];
          acc[0][cb] += w0 * a;
          acc[1][cb] += w1 * a;
          acc[2][cb] += w2 * a;
          acc[3][cb] += w3 * a;
        }
      }
      T* __restrict__ aj = in_adj + static_cast<std::size_t>(j) * kLane;
      for (int k = 0; k < 4; ++k)
        for (int cb = 0; cb < kLane; ++cb) aj[k * kLane + cb] += acc[k][cb];
    }
    for (; j < in_w; ++j) {
      T acc[kLane];
      std::memset(acc, 0, sizeof(acc));
      for (int r = 0; r < out_w; ++r) {
        const T wij = W[static_cast<std::size_t>(r) * in_w + j];
        const T* __restrict__ ao = out_adj + static_cast<std::size_t>(r) * kLane;
        for (int cb = 0; cb < kLane; ++cb) acc[cb] += wij * ao[cb];
      }
      T* __restrict__ aj = in_adj + static_cast<std::size_t>(j) * kLane;
      for (int cb = 0; cb < kLane; ++cb) aj[cb] += acc[cb];
    }
  }

  void act_fwd(const T* z, T* out, int w) const {
    if (spec_.activation == Activation::Identity) {
      std::memcpy(out, z, sizeof(T) * static_cast<std::size_t>(w) * kLane);
      return;
    }
    for (int j = 0; j < w; ++j) {
      const T* __restrict__ zj = z + static_cast<std::size_t>(j) * kLane;
      T* __restrict__ aj = out + static_cast<std::size_t>(j) * kLane;
      T t[kBlock], s[kBlock];
      for (int b = 0; b < kBlock; ++b) {
        t[b] = tanh_activation(zj[b]);
        s[b] = T(1) - t[b] * t[b];
        aj[b] = t[b];
      }
      for (int k = 0; k < JD; ++k) {
        const T* z1 = zj + (1 + k) * kBlock;
        const T* z2 = zj + (1 + JD + k) * kBlock;
        T* a1 = aj + (1 + k) * kBlock;
        T* a2 = aj + (1 + JD + k) * kBlock;
        for (int b = 0; b < kBlock; ++b) {
          a1[b] = s[b] * z1[b];
          a2[b] = s[b] * z2[b] - T(2) * t[b] * s[b] * z1[b] * z1[b];
        }
      }
    }
  }

  /// act_bwd consumes the stored pre-activation z and post-activation a.
  void act_bwd(const T* z, const T* a, const T* a_adj, T* z_adj, int w) const {
    if (spec_.activation == Activation::Identity) {
      for (int i = 0; i < w * kLane; ++i) z_adj[i] += a_adj[i];
      return;
    }
    for (int j = 0; j < w; ++j) {
      const T* __restrict__ zj = z + static_cast<std::size_t>(j) * kLane;
      const T* __restrict__ aj = a + static_cast<std::size_t>(j) * kLane;
      const T* __restrict__ gj = a_adj + static_cast<std::size_t>(j) * kLane;
      T* __restrict__ oj = z_adj + static_cast<std::size_t>(j) * kLane;
      for (int b = 0; b < kBlock; ++b) {
        const T t = aj[b];
        const T s = T(1) - t * t;
        const T ts2 = T(2) * t * s;
        T acc_v = gj[b] * s;
        for (int k = 0; k < JD; ++k) {
          const T z1 = zj[(1 + k) * kBlock + b];
          const T z2 = zj[(1 + JD + k) * kBlock + b];
          const T g1 = gj[(1 + k) * kBlock + b];
          const T g2 = gj[(1 + JD + k) * kBlock + b];
          // d(a.d1)/d(z.v) = -2ts*z1 ; d(a.d2)/d(z.v) = -2ts*z2 - 2(s^2-2t^2 s)*z1^2
          acc_v += g1 * (-ts2 * z1) + g2 * (-ts2 * z2 - T(2) * (s * s - T(2) * t * t * s) * z1 * z1);
          oj[(1 + k) * kBlock + b] += g1 * s - T(2) * ts2 * g2 * z1;
          oj[(1 + JD + k) * kBlock + b] += g2 * s;
        }
        oj[b] += acc_v;
      }
    }
  }

  void sub_fwd(const T* x, const T* y, T* out, int w) const {
    for (int i = 0; i < w * kLane; ++i) out[i] = x[i] - y[i];
  }

  /// Gated state H = U + Z (*) D with (*) the jet point-wise product.
  void gate_fwd(const T* u, const T* z, const T* d, T* h, int w) const {
    for (int j = 0; j < w; ++j) {
      const std::size_t base = static_cast<std::size_t>(j) * kLane;
      const T* __restrict__ uj = u + base;
      const T* __restrict__ zj = z + base;
      const T* __restrict__ dj = d + base;
      T* __restrict__ hj = h + base;
      for (int b = 0; b < kBlock; ++b) hj[b] = uj[b] + zj[b] * dj[b];
      for (int k = 0; k < JD; ++k) {
        const int c1 = (1 + k) * kBlock, c2 = (1 + JD + k) * kBlock;
        for (int b = 0; b < kBlock; ++b) {
          hj[c1 + b] = uj[c1 + b] + zj[c1 + b] * dj[b] + zj[b] * dj[c1 + b];
          hj[c2 + b] = uj[c2 + b] + zj[c2 + b] * dj[b] + T(2) * zj[c1 + b] * dj[c1 + b] +
                       zj[b] * dj[c2 + b];
        }
      }
    }
  }

  void gate_bwd(const T* u, const T* z, const T* d, const T* h_adj, T* u_adj, T* z_adj,
                T* d_adj, int w) const {
    (void)u;
    for (int j = 0; j < w; ++j) {
      const std::size_t base = static_cast<std::size_t>(j) * kLane;
      const T* __restrict__ zj = z + base;
      const T* __restrict__ dj = d + base;
      const T* __restrict__ gj = h_adj + base;
      T* __restrict__ au = u_adj + base;
      T* __restrict__ az = z_adj + base;
      T* __restrict__ ad = d_adj + base;
      for (int cb = 0; cb < kLane; ++cb) au[cb] += gj[cb];
      mul_bwd_lane(zj, dj, gj, az, ad);
    }
  }

  /// Jet product adjoint for one neuron: c = a (*) b, given c-adjoint g.
  static void mul_bwd_lane(const T* __restrict__ a, const T* __restrict__ b,
                           const T* __restrict__ g, T* __restrict__ aa, T* __restrict__ ab) {
    for (int bl = 0; bl < kBlock; ++bl) {
      T acc_a = g[bl] * b[bl];
      T acc_b = g[bl] * a[bl];
      for (int k = 0; k < JD; ++k) {
        const int c1 = (1 + k) * kBlock + bl, c2 = (1 + JD + k) * kBlock + bl;
        acc_a += g[c1] * b[c1] + g[c2] * b[c2];
        acc_b += g[c1] * a[c1] + g[c2] * a[c2];
        aa[c1] += g[c1] * b[bl] + T(2) * g[c2] * b[c1];
        ab[c1] += g[c1] * a[bl] + T(2) * g[c2] * a[c1];
        aa[c2] += g[c2] * b[bl];
        ab[c2] += g[c2] * a[bl];
      }
      aa[bl] += acc_a;
      ab[bl] += acc_b;
    }
  }

  static void mul_fwd_lane(const T* __restrict__ a, const T* __restrict__ b,
                           T* __restrict__ out) {
    for (int bl = 0; bl < kBlock; ++bl) {
      out[bl] = a[bl] * b[bl];
      for (int k = 0; k < JD; ++k) {
        const int c1 = (1 + k) * kBlock + bl, c2 = (1 + JD + k) * kBlock + bl;
        out[c1] = a[c1] * b[bl] + a[bl] * b[c1];
        out[c2] = a[c2] * b[bl] + T(2) * a[c1] * b[c1] + a[bl] * b[c2];
      }
    }
  }

  void embed_fwd(int br, const NetworkParams<T>& p, Workspace& ws) const {
    const auto& emb = spec_.embeddings[br];
    const std::vector<T>& B = p.embeddings[br];
    const int rows = emb.rows;
    const int cols = static_cast<int>(emb.target_coords.size());
    T* f = ws.fwd.data() + f_off_[br];
    std::memset(f, 0, sizeof(T) * static_cast<std::size_t>(2 * rows) * kLane);
    for (int r = 0; r < rows; ++r) {
      T arg[kBlock];
      for (int b = 0; b < kBlock; ++b) arg[b] = T(0);
      for (int c = 0; c < cols; ++c) {
        const T w = B[static_cast<std::size_t>(r) * cols + c];
        const T* x = ws.xb.data() + emb.target_coords[c] * kBlock;
        for (int b = 0; b < kBlock; ++b) arg[b] += w * x[b];
      }
      T* fs = f + static_cast<std::size_t>(r) * kLane;
      T* fc = f + static_cast<std::size_t>(rows + r) * kLane;
      T sn[kBlock], cn[kBlock];
      for (int b = 0; b < kBlock; ++b) {
        sn[b] = std::sin(arg[b]);
        cn[b] = std::cos(arg[b]);
        fs[b] = sn[b];
        fc[b] = cn[b];
      }
      if constexpr (JD > 0) {
        for (int c = 0; c < cols; ++c) {
          const int k = emb.target_coords[c];
          const T w = B[static_cast<std::size_t>(r) * cols + c];
          const T w2 = w * w;
          for (int b = 0; b < kBlock; ++b) {
            fs[(1 + k) * kBlock + b] = w * cn[b];
            fs[(1 + JD + k) * kBlock + b] = -w2 * sn[b];
            fc[(1 + k) * kBlock + b] = -w * sn[b];
            fc[(1 + JD + k) * kBlock + b] = -w2 * cn[b];
          }
        }
      }
    }
  }

  void merge_fwd(Workspace& ws) const {
    T* fwd = ws.fwd.data();
    const int nb = branch_count(spec_);
    const int w = spec_.width;
    if (spec_.family == Family::Dnn || nb == 1) {
      std::memcpy(fwd + m_off_, layer_state(fwd, 0, spec_.hidden_layers - 1),
                  sizeof(T) * static_cast<std::size_t>(w) * kLane);
      return;
    }
    if (spec_.combine == CombineRule::Concat) {
      for (int br = 0; br < nb; ++br)
        std::memcpy(fwd + m_off_ + static_cast<std::size_t>(br) * w * kLane,
                    layer_state(fwd, br, spec_.hidden_layers - 1),
                    sizeof(T) * static_cast<std::size_t>(w) * kLane);
      return;
    }
    // Coordinate-product: fold the branch states point-wise, keeping prefixes.
    std::memcpy(fwd + prod_off_[0], layer_state(fwd, 0, spec_.hidden_layers - 1),
                sizeof(T) * static_cast<std::size_t>(w) * kLane);
    for (int br = 1; br < nb; ++br) {
      const T* prev = fwd + prod_off_[br - 1];
      const T* st = layer_state(fwd, br, spec_.hidden_layers - 1);
      T* out = fwd + prod_off_[br];
      for (int j = 0; j < w; ++j)
        mul_fwd_lane(prev + static_cast<std::size_t>(j) * kLane,
                     st + static_cast<std::size_t>(j) * kLane,
                     out + static_cast<std::size_t>(j) * kLane);
    }
    std::memcpy(fwd + m_off_, fwd + prod_off_[nb - 1],
                sizeof(T) * static_cast<std::size_t>(w) * kLane);
  }

  void merge_bwd(Workspace& ws) const {
    T* a = ws.adj.data();
    const T* fwd = ws.fwd.data();
    const int nb = branch_count(spec_);
    const int w = spec_.width;
    const std::size_t state_bytes = sizeof(T) * static_cast<std::size_t>(w) * kLane;
    auto state_adj = [&](int br) {
      return a + (layer_state(fwd, br, spec_.hidden_layers - 1) - fwd);
    };
    if (spec_.family == Family::Dnn || nb == 1) {
      std::memcpy(state_adj(0), a + m_off_, state_bytes);
      return;
    }
    if (spec_.combine == CombineRule::Concat) {
      for (int br = 0; br < nb; ++br)
        std::memcpy(state_adj(br), a + m_off_ + static_cast<std::size_t>(br) * w * kLane,
                    state_bytes);
      return;
    }
    std::memcpy(a + prod_off_[nb - 1], a + m_off_, state_bytes);
    for (int br = nb - 1; br >= 1; --br) {
      const T* prev = fwd + prod_off_[br - 1];
      const T* st = layer_state(fwd, br, spec_.hidden_layers - 1);
      const T* g = a + prod_off_[br];
      T* aprev = a + prod_off_[br - 1];
      T* ast = state_adj(br);
      for (int j = 0; j < w; ++j)
        mul_bwd_lane(prev + static_cast<std::size_t>(j) * kLane,
                     st + static_cast<std::size_t>(j) * kLane,
                     g + static_cast<std::size_t>(j) * kLane,
                     aprev + static_cast<std::size_t>(j) * kLane,
                     ast + static_cast<std::size_t>(j) * kLane);
    }
    std::memcpy(state_adj(0), a + prod_off_[0], state_bytes);
  }

  ArchitectureSpec spec_;
  std::vector<Segment> segments_;
  std::size_t param_count_ = 0;

  int embed_out_ = 0;
  int merged_ = 0;
  std::size_t arena_size_ = 0;
  std::size_t xj_off_ = 0;
  std::vector<std::size_t> f_off_, zu_off_, u_off_, zv_off_, v_off_, d_off_;
  std::vector<std::vector<std::size_t>> s_off_, z_off_, h_off_;
  std::vector<std::size_t> prod_off_;
  std::size_t m_off_ = 0, out_off_ = 0;
  std::vector<std::size_t> wl_off_, bl_off_;
  std::size_t wout_off_ = 0, bout_off_ = 0;
  std::vector<std::size_t> wu_poff_, bu_poff_, wv_poff_, bv_poff_;
};

/// Evaluates the network and its exact first/diagonal-second derivatives at
/// one point. Convenience wrapper; training paths hold an Evaluator.
template <class T, int D>
Jet<T, D> eval_jet(const ArchitectureSpec& spec, const NetworkParams<T>& params, const T* x) {
  Evaluator<T, D> ev(spec);
  auto ws = ev.make_workspace();
  Jet<T, D> out;
  ev.forward_block(params, x, 1, &out, ws);
  return out;
}

/// Plain forward pass (no derivatives).
template <class T>
T forward(const ArchitectureSpec& spec, const NetworkParams<T>& params, const T* x) {
  Evaluator<T, 0> ev(spec);
  auto ws = ev.make_workspace();
  Jet<T, 0> out;
  ev.forward_block(params, x, 1, &out, ws);
  return out.v;
}

/// Batch prediction over many points (value-only fast path).
template <class T>
void predict_values(const Evaluator<T, 0>& ev, const NetworkParams<T>& params, const T* xs,
                    std::size_t n, T* out) {
  constexpr int B = Evaluator<T, 0>::kBlock;
  auto ws = ev.make_workspace();
  Jet<T, 0> jets[B];
  const int dim = ev.spec().input_dim;
  for (std::size_t i = 0; i < n; i += B) {
    const int nb = static_cast<int>(std::min<std::size_t>(B, n - i));
    ev.forward_block(params, xs + i * dim, nb, jets, ws);
    for (int b = 0; b < nb; ++b) out[i + b] = jets[b].v;
  }
}

}  // namespace mmpinn
