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

#include "transitchoice/engine.hpp"

#include <cmath>

namespace tc {

void Adam::step(const std::vector<Param*>& params, double lr) {
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (Param* p : params) {
    double* x = p->value.data();
    const double* g = p->grad.data();
    double* m = p->m.data();
    double* v = p->v.data();
    const int64_t n = p->numel();
    if (p->frozen.empty()) {
      for (int64_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        x[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      }
    } else {
      for (int64_t i = 0; i < n; ++i) {
        if (p->frozen[static_cast<size_t>(i)]) continue;
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        x[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      }
    }
  }
}

void Linear::init(const std::string& name, int in, int out, bool bias) {
  W.init(name + ".W", in, out);
  has_bias = bias;
  if (bias) b.init(name + ".b", 1, out);
}

Mat Linear::forward(const Mat& x, bool keep_ctx) {
  if (x.cols() != W.value.rows()) {
    throw StructuralError(strf("%s: input width %ld != %ld", W.name.c_str(),
                               static_cast<long>(x.cols()), static_cast<long>(W.value.rows())));
  }
  if (keep_ctx) x_ctx = x;
  Mat y = x * W.value;
  if (has_bias) y.rowwise() += b.value.row(0);
  return y;
}

Mat Linear::backward(const Mat& dy) {
  W.grad.noalias() += x_ctx.transpose() * dy;
  if (has_bias) b.grad.row(0) += dy.colwise().sum();
  return dy * W.value.transpose();
}

std::vector<Param*> Linear::params() {
  std::vector<Param*> out = {&W};
  if (has_bias) out.push_back(&b);
  return out;
}

void LayerNorm::init(const std::string& name, int dim) {
  gamma.init(name + ".gamma", 1, dim);
  gamma.value.setOnes();
  beta.init(name + ".beta", 1, dim);
}

Mat LayerNorm::forward(const Mat& x, bool keep_ctx) {
  const Eigen::Index R = x.rows(), D = x.cols();
  Mat y(R, D);
  Mat xhat(keep_ctx ? R : 0, keep_ctx ? D : 0);
  Vec inv_std(keep_ctx ? R : 0);
  for (Eigen::Index r = 0; r < R; ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    Eigen::RowVectorXd xh = (x.row(r).array() - mu) * is;
    y.row(r) = ((xh.array() * gamma.value.row(0).array()) + beta.value.row(0).array()).matrix();
    if (keep_ctx) {
      xhat.row(r) = xh;
      inv_std(r) = is;
    }
  }
  if (keep_ctx) {
    xhat_ctx = std::move(xhat);
    inv_std_ctx = std::move(inv_std);
  }
  return y;
}

Mat LayerNorm::backward(const Mat& dy) {
  const Eigen::Index R = dy.rows(), D = dy.cols();
  Mat dx(R, D);
  for (Eigen::Index r = 0; r < R; ++r) {
    Eigen::RowVectorXd dxhat =
        dy.row(r).array() * gamma.value.row(0).array();
    gamma.grad.row(0).array() += dy.row(r).array() * xhat_ctx.row(r).array();
    beta.grad.row(0) += dy.row(r);
    const double mean_dxhat = dxhat.mean();
    const double mean_dxhat_xhat = (dxhat.array() * xhat_ctx.row(r).array()).mean();
    dx.row(r) = (inv_std_ctx(r) *
                 (dxhat.array() - mean_dxhat - xhat_ctx.row(r).array() * mean_dxhat_xhat))
                    .matrix();
  }
  (void)D;
  return dx;
}

std::vector<Param*> LayerNorm::params() { return {&gamma, &beta}; }

Mat Dropout::forward(const Mat& x, int rows_per_seq, const std::vector<int64_t>& global_seq_ids,
                     int64_t epoch, bool training, bool keep_ctx) {
  if (!training || p <= 0.0) {
    if (keep_ctx) mask_ctx.resize(0, 0);
    return x;
  }
  const Eigen::Index R = x.rows(), D = x.cols();
  if (R != static_cast<Eigen::Index>(global_seq_ids.size()) * rows_per_seq) {
    throw StructuralError("dropout: global id count does not cover the activation rows");
  }
  const double scale = 1.0 / (1.0 - p);
  Mat mask(R, D);
  for (Eigen::Index r = 0; r < R; ++r) {
    const int64_t gid = global_seq_ids[static_cast<size_t>(r / rows_per_seq)];
    const int64_t row_key = gid * rows_per_seq + (r % rows_per_seq);
    for (Eigen::Index c = 0; c < D; ++c) {
      const double u = counter_uniform(seed, static_cast<uint64_t>(epoch), layer_id,
                                       static_cast<uint64_t>(row_key * D + c));
      mask(r, c) = u < p ? 0.0 : scale;
    }
  }
  Mat y = x.cwiseProduct(mask);
  if (keep_ctx) mask_ctx = std::move(mask);
  return y;
}

Mat Dropout::backward(const Mat& dy) {
  if (mask_ctx.size() == 0) return dy;
  return dy.cwiseProduct(mask_ctx);
}

void FeedForward::init(const std::string& name, int d_model, int d_ff) {
  l1.init(name + ".l1", d_model, d_ff, true);
  l2.init(name + ".l2", d_ff, d_model, true);
}

Mat FeedForward::forward(const Mat& x, bool keep_ctx) {
  Mat h = l1.forward(x, keep_ctx);
  Mat mask = (h.array() > 0.0).cast<double>();
  h = h.cwiseProduct(mask);
  if (keep_ctx) relu_mask_ctx = std::move(mask);
  return l2.forward(h, keep_ctx);
}

Mat FeedForward::backward(const Mat& dy) {
  Mat dh = l2.backward(dy);
  dh = dh.cwiseProduct(relu_mask_ctx);
  return l1.backward(dh);
}

std::vector<Param*> FeedForward::params() {
  return {&l1.W, &l1.b, &l2.W, &l2.b};
}

void MultiHeadAttention::init(const std::string& name, int d_model_, int heads_, int dk_) {
  d_model = d_model_;
  heads = heads_;
  dk = dk_;
  wq.init(name + ".wq", d_model, heads * dk, true);
  wk.init(name + ".wk", d_model, heads * dk, true);
  wv.init(name + ".wv", d_model, heads * dk, true);
  wo.init(name + ".wo", heads * dk, d_model, true);
}

namespace {

// In-place row softmax with max subtraction.
void softmax_rows(Mat& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - mx).exp();
    s.row(r) /= s.row(r).sum();
  }
}

}  // namespace

Mat MultiHeadAttention::forward(const Mat& x, int B, int T, bool keep_ctx) {
  if (x.rows() != static_cast<Eigen::Index>(B) * T || x.cols() != d_model) {
    throw StructuralError("attention: input shape mismatch");
  }
  Mat q = wq.forward(x, keep_ctx);
  Mat k = wk.forward(x, keep_ctx);
  Mat v = wv.forward(x, keep_ctx);
  Mat concat(static_cast<Eigen::Index>(B) * T, heads * dk);
  Mat attn(static_cast<Eigen::Index>(keep_ctx ? B * heads * T : 0), keep_ctx ? T : 0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  for (int b = 0; b < B; ++b) {
    for (int h = 0; h < heads; ++h) {
      auto Qb = q.block(static_cast<Eigen::Index>(b) * T, static_cast<Eigen::Index>(h) * dk, T, dk);
      auto Kb = k.block(static_cast<Eigen::Index>(b) * T, static_cast<Eigen::Index>(h) * dk, T, dk);
      auto Vb = v.block(static_cast<Eigen::Index>(b) * T, static_cast<Eigen::Index>(h) * dk, T, dk);
      Mat s = (Qb * Kb.transpose()) * scale;
      softmax_rows(s);
      concat.block(static_cast<Eigen::Index>(b) * T, static_cast<Eigen::Index>(h) * dk, T, dk)
          .noalias() = s * Vb;
      if (keep_ctx) {
        attn.block(static_cast<Eigen::Index>(b * heads + h) * T, 0, T, T) = s;
      }
    }
  }
  if (keep_ctx) {
    q_ctx = std::move(q);
    k_ctx = std::move(k);
    v_ctx = std::move(v);
    attn_ctx = std::move(attn);
  }
  return wo.forward(concat, keep_ctx);
}

Mat MultiHeadAttention::backward(const Mat& dy, int B, int T) {
  Mat dconcat = wo.backward(dy);
  Mat dq = Mat::Zero(static_cast<Eigen::Index>(B) * T, heads * dk);
  Mat dkm = Mat::Zero(static_cast<Eigen::Index>(B) * T, heads * dk);
  Mat dv = Mat::Zero(static_cast<Eigen::Index>(B) * T, heads * dk);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  for (int b = 0; b < B; ++b) {
    for (int h = 0; h < heads; ++h) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * T;
      const Eigen::Index c0 = static_cast<Eigen::Index>(h) * dk;
      auto S = attn_ctx.block(static_cast<Eigen::Index>(b * heads + h) * T, 0, T, T);
      auto Qb = q_ctx.block(r0, c0, T, dk);
      auto Kb = k_ctx.block(r0, c0, T, dk);
      auto Vb = v_ctx.block(r0, c0, T, dk);
      auto dC = dconcat.block(r0, c0, T, dk);
      Mat ds_out = dC * Vb.transpose();             // [T x T]
      dv.block(r0, c0, T, dk).noalias() = S.transpose() * dC;
      Vec rowsum = (ds_out.array() * S.array()).rowwise().sum();
      Mat ds = (S.array() * (ds_out.array().colwise() - rowsum.array())).matrix();
      dq.block(r0, c0, T, dk).noalias() = ds * Kb * scale;
      dkm.block(r0, c0, T, dk).noalias() = ds.transpose() * Qb * scale;
    }
  }
  Mat dx = wq.backward(dq);
  dx += wk.backward(dkm);
  dx += wv.backward(dv);
  return dx;
}

std::vector<Param*> MultiHeadAttention::params() {
  return {&wq.W, &wq.b, &wk.W, &wk.b, &wv.W, &wv.b, &wo.W, &wo.b};
}

void EncoderLayer::init(const std::string& name, int d_model, int heads, int d_ff,
                        double dropout_p, uint64_t dropout_seed, uint32_t layer_id_base) {
  attn.init(name + ".attn", d_model, heads, d_model / heads);
  ffn.init(name + ".ffn", d_model, d_ff);
  ln1.init(name + ".ln1", d_model);
  ln2.init(name + ".ln2", d_model);
  drop_attn.p = dropout_p;
  drop_attn.seed = dropout_seed;
  drop_attn.layer_id = layer_id_base;
  drop_ffn.p = dropout_p;
  drop_ffn.seed = dropout_seed;
  drop_ffn.layer_id = layer_id_base + 1;
}

Mat EncoderLayer::forward(const Mat& x, int B, int T, const std::vector<int64_t>& gids,
                          int64_t epoch, bool training, bool keep_ctx) {
  Mat a = attn.forward(x, B, T, keep_ctx);
  a = drop_attn.forward(a, T, gids, epoch, training, keep_ctx);
  Mat x1 = ln1.forward(x + a, keep_ctx);
  Mat f = ffn.forward(x1, keep_ctx);
  f = drop_ffn.forward(f, T, gids, epoch, training, keep_ctx);
  return ln2.forward(x1 + f, keep_ctx);
}

Mat EncoderLayer::backward(const Mat& dy, int B, int T) {
  Mat d2 = ln2.backward(dy);
  Mat df = drop_ffn.backward(d2);
  Mat dx1 = ffn.backward(df);
  dx1 += d2;
  Mat d1 = ln1.backward(dx1);
  Mat da = drop_attn.backward(d1);
  Mat dx = attn.backward(da, B, T);
  dx += d1;
  return dx;
}

std::vector<Param*> EncoderLayer::params() {
  std::vector<Param*> out = attn.params();
  for (Param* p : ln1.params()) out.push_back(p);
  for (Param* p : ffn.params()) out.push_back(p);
  for (Param* p : ln2.params()) out.push_back(p);
  return out;
}

void adaptive_avg_pool_row(const double* x, int L, int target, double* out) {
  if (L < 1 || target < 1) throw StructuralError("adaptive pool: lengths must be >= 1");
  for (int i = 0; i < target; ++i) {
    const int64_t beg = (static_cast<int64_t>(i) * L) / target;
    int64_t end = (static_cast<int64_t>(i + 1) * L + target - 1) / target;  // ceil
    double acc = 0;
    for (int64_t k = beg; k < end; ++k) acc += x[k];
    out[i] = acc / static_cast<double>(end - beg);
  }
}

Vec adaptive_avg_pool(const Vec& x, int target) {
  Vec out(target);
  adaptive_avg_pool_row(x.data(), static_cast<int>(x.size()), target, out.data());
  return out;
}

Mat adaptive_avg_pool_rows(const Mat& x, int target) {
  Mat out(x.rows(), target);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    adaptive_avg_pool_row(x.row(r).data(), static_cast<int>(x.cols()), target, out.row(r).data());
  }
  return out;
}

void adaptive_avg_pool_backward_row(const double* dout, int L, int target, double* dx) {
  for (int i = 0; i < target; ++i) {
    const int64_t beg = (static_cast<int64_t>(i) * L) / target;
    int64_t end = (static_cast<int64_t>(i + 1) * L + target - 1) / target;
    const double g = dout[i] / static_cast<double>(end - beg);
    for (int64_t k = beg; k < end; ++k) dx[k] += g;
  }
}

SoftmaxXentResult masked_softmax_xent(const Vec& utilities, const std::vector<uint8_t>& mask,
                                      int chosen) {
  const int n = static_cast<int>(utilities.size());
  if (static_cast<int>(mask.size()) != n) throw StructuralError("mask length mismatch");
  if (chosen < 0 || chosen >= n || !mask[static_cast<size_t>(chosen)]) {
    throw StructuralError(strf("chosen index %d is not a masked-true alternative", chosen));
  }
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (mask[static_cast<size_t>(i)]) {
      any = true;
      mx = std::max(mx, utilities(i));
    }
  }
  if (!any) throw StructuralError("mask has no true entries");
  SoftmaxXentResult out;
  out.probs = Vec::Zero(n);
  double z = 0;
  for (int i = 0; i < n; ++i) {
    if (mask[static_cast<size_t>(i)]) {
      out.probs(i) = std::exp(utilities(i) - mx);
      z += out.probs(i);
    }
  }
  double log_z = std::log(z);
  for (int i = 0; i < n; ++i) {
    if (mask[static_cast<size_t>(i)]) out.probs(i) /= z;
  }
  out.loss = -(utilities(chosen) - mx - log_z);
  return out;
}

double grouped_softmax_xent(const Vec& utilities, const std::vector<int64_t>& offsets,
                            const double* weights, Vec* du, Vec* probs) {
  double loss = 0;
  if (du) du->setZero(utilities.size());
  if (probs) probs->resize(utilities.size());
  for (size_t g = 0; g + 1 < offsets.size(); ++g) {
    const int64_t beg = offsets[g], end = offsets[g + 1];
    if (end <= beg) throw StructuralError("grouped softmax: empty group");
    double mx = utilities(beg);
    for (int64_t r = beg + 1; r < end; ++r) mx = std::max(mx, utilities(r));
    double z = 0;
    for (int64_t r = beg; r < end; ++r) z += std::exp(utilities(r) - mx);
    const double log_z = std::log(z);
    double wsum = 0;
    for (int64_t r = beg; r < end; ++r) {
      const double w = weights[r];
      wsum += w;
      if (w != 0.0) loss -= w * (utilities(r) - mx - log_z);
    }
    if (du || probs) {
      for (int64_t r = beg; r < end; ++r) {
        const double p = std::exp(utilities(r) - mx) / z;
        if (probs) (*probs)(r) = p;
        if (du) (*du)(r) = wsum * p - weights[r];
      }
    }
  }
  return loss;
}

}  // namespace tc
