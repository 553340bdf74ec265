#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2025-2026 The transitchoice authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

// Minimal tensor engine: the exact layer set the utility models need, with
// hand-written reverse-mode gradients. Layers keep their forward context in
// member buffers; one forward (with keep_ctx) must be paired with one backward.
// Everything is double precision and single-threaded deterministic.

#include "transitchoice/common.hpp"
#include "transitchoice/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace tc {

struct Param {
  std::string name;
  Mat value;                    // vectors are stored [1 x n]
  Mat grad;
  Mat m, v;                     // Adam moments; stay zero for frozen elements
  std::vector<uint8_t> frozen;  // empty = nothing frozen; else per element, row-major

  void init(const std::string& n, Eigen::Index rows, Eigen::Index cols) {
    name = n;
    value = Mat::Zero(rows, cols);
    grad = Mat::Zero(rows, cols);
    m = Mat::Zero(rows, cols);
    v = Mat::Zero(rows, cols);
    frozen.clear();
  }

  void xavier_init(Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(value.rows() + value.cols()));
    for (Eigen::Index i = 0; i < value.rows(); ++i) {
      for (Eigen::Index j = 0; j < value.cols(); ++j) value(i, j) = rng.uniform(-limit, limit);
    }
  }

  int64_t numel() const { return static_cast<int64_t>(value.size()); }

  void zero_grad() { grad.setZero(); }

  void freeze_element(Eigen::Index r, Eigen::Index c) {
    if (frozen.empty()) frozen.assign(static_cast<size_t>(numel()), 0);
    frozen[static_cast<size_t>(r * value.cols() + c)] = 1;
  }

  void freeze_all() { frozen.assign(static_cast<size_t>(numel()), 1); }

  bool is_frozen(int64_t flat) const {
    return !frozen.empty() && frozen[static_cast<size_t>(flat)] != 0;
  }

  int64_t frozen_count() const {
    int64_t n = 0;
    for (uint8_t f : frozen) n += f != 0;
    return n;
  }
};

// Adam with per-element freeze mask; frozen elements keep zero moments and are
// never written, so they stay bit-identical across any number of steps.
struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;

  void step(const std::vector<Param*>& params, double lr);
};

struct Linear {
  Param W;  // [in x out]
  Param b;  // [1 x out]; unused when has_bias = false
  bool has_bias = true;
  Mat x_ctx;

  void init(const std::string& name, int in, int out, bool bias);
  Mat forward(const Mat& x, bool keep_ctx);
  Mat backward(const Mat& dy);  // accumulates grads, returns dx
  std::vector<Param*> params();
};

struct LayerNorm {
  Param gamma, beta;
  double eps = 1e-5;
  Mat xhat_ctx;
  Vec inv_std_ctx;

  void init(const std::string& name, int dim);
  Mat forward(const Mat& x, bool keep_ctx);
  Mat backward(const Mat& dy);
  std::vector<Param*> params();
};

// Inverted dropout with a counter-based mask keyed by (seed, epoch, layer id,
// global element id); masks are independent of batch partitioning.
struct Dropout {
  double p = 0.0;
  uint64_t seed = 0;
  uint32_t layer_id = 0;
  Mat mask_ctx;

  // rows_per_seq: activation rows per sequence (1 for flat layers); global_seq_ids
  // give each sequence's stable id used in the element key.
  Mat forward(const Mat& x, int rows_per_seq, const std::vector<int64_t>& global_seq_ids,
              int64_t epoch, bool training, bool keep_ctx);
  Mat backward(const Mat& dy);
};

struct FeedForward {
  Linear l1, l2;
  Mat relu_mask_ctx;

  void init(const std::string& name, int d_model, int d_ff);
  Mat forward(const Mat& x, bool keep_ctx);
  Mat backward(const Mat& dy);
  std::vector<Param*> params();
};

struct MultiHeadAttention {
  int d_model = 0, heads = 0, dk = 0;
  Linear wq, wk, wv, wo;
  Mat q_ctx, k_ctx, v_ctx;
  Mat attn_ctx;  // [(B*heads*T) x T]

  void init(const std::string& name, int d_model_, int heads_, int dk_);
  // x: [(B*T) x d_model]; scaled dot-product self-attention per sequence.
  Mat forward(const Mat& x, int B, int T, bool keep_ctx);
  Mat backward(const Mat& dy, int B, int T);
  std::vector<Param*> params();
};

// Post-norm encoder layer: x = LN(x + Drop(MHA(x))); x = LN(x + Drop(FFN(x))).
struct EncoderLayer {
  MultiHeadAttention attn;
  Dropout drop_attn, drop_ffn;
  LayerNorm ln1, ln2;
  FeedForward ffn;

  void init(const std::string& name, int d_model, int heads, int d_ff, double dropout_p,
            uint64_t dropout_seed, uint32_t layer_id_base);
  Mat forward(const Mat& x, int B, int T, const std::vector<int64_t>& gids, int64_t epoch,
              bool training, bool keep_ctx);
  Mat backward(const Mat& dy, int B, int T);
  std::vector<Param*> params();
};

// output[i] = mean of x over [floor(i*L/target), ceil((i+1)*L/target)).
void adaptive_avg_pool_row(const double* x, int L, int target, double* out);
Vec adaptive_avg_pool(const Vec& x, int target);
Mat adaptive_avg_pool_rows(const Mat& x, int target);
// Accumulates the pooled gradient back onto dx (length L).
void adaptive_avg_pool_backward_row(const double* dout, int L, int target, double* dx);

struct SoftmaxXentResult {
  double loss = 0;
  Vec probs;
};

// probs over masked-true entries via max-subtracted softmax; exact zeros at
// masked-false entries; loss = -ln probs[chosen].
SoftmaxXentResult masked_softmax_xent(const Vec& utilities, const std::vector<uint8_t>& mask,
                                      int chosen);

// Batched variant over contiguous groups of utility rows. weights[r] is the
// observation count choosing row r; loss = -sum_r weights[r] * ln p[r].
// If du is non-null it receives the utility gradient; if probs is non-null it
// receives the per-row probabilities.
double grouped_softmax_xent(const Vec& utilities, const std::vector<int64_t>& offsets,
                            const double* weights, Vec* du, Vec* probs);

// Checkpoint I/O: versioned text format, hexfloat payload, bit-exact round-trip.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<Param> tensors;
};

void save_checkpoint(const std::string& path, const std::map<std::string, std::string>& meta,
                     const std::vector<const Param*>& tensors);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tc
