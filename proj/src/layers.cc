// Copyright 2026 The ctxrepair Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctxrepair/layers.h"

#include <cmath>

namespace ctxrepair {

double leaky_relu(double v, double slope) { return v > 0.0 ? v : slope * v; }

namespace {

// Non-zero entries of a feature map grouped by cell, for the sparse encoder
// input (one-hot planes and mostly-zero overlays).
struct SparseCells {
  std::vector<int> begin;  // h*w + 1 offsets into ch/val
  std::vector<int> ch;
  std::vector<double> val;
};

SparseCells sparsify(const FeatureMap& in) {
  SparseCells s;
  s.begin.reserve(in.h * in.w + 1);
  for (int p = 0; p < in.h * in.w; ++p) {
    s.begin.push_back(static_cast<int>(s.ch.size()));
    for (int c = 0; c < in.c; ++c) {
      const double v = in.data[p * in.c + c];
      if (v != 0.0) {
        s.ch.push_back(c);
        s.val.push_back(v);
      }
    }
  }
  s.begin.push_back(static_cast<int>(s.ch.size()));
  return s;
}

bool mostly_zero(const FeatureMap& in) {
  size_t nz = 0;
  for (double v : in.data) nz += v != 0.0;
  return 3 * nz < in.data.size();
}

FeatureMap conv_layer_sparse(const ConvLayer& layer, const FeatureMap& in) {
  const int kh = layer.k_h(), kw = layer.k_w(), cin = layer.c_in();
  const int cout = layer.c_out();
  const int oh = in.h - kh + 1, ow = in.w - kw + 1;
  // Kernel with the output channel innermost.
  std::vector<double> kt(kh * kw * cin * cout);
  for (int o = 0; o < cout; ++o) {
    for (int t = 0; t < kh * kw * cin; ++t) {
      kt[t * cout + o] = layer.kernel.data[o * kh * kw * cin + t];
    }
  }
  const SparseCells sp = sparsify(in);
  FeatureMap pre(oh, ow, cout);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double* acc = &pre.at(y, x, 0);
      for (int o = 0; o < cout; ++o) acc[o] = layer.bias.data[o];
      for (int i = 0; i < kh; ++i) {
        for (int j = 0; j < kw; ++j) {
          const int cell = (y + i) * in.w + x + j;
          for (int n = sp.begin[cell]; n < sp.begin[cell + 1]; ++n) {
            const double v = sp.val[n];
            const double* k = &kt[((i * kw + j) * cin + sp.ch[n]) * cout];
            for (int o = 0; o < cout; ++o) acc[o] += k[o] * v;
          }
        }
      }
    }
  }
  return pre;
}

FeatureMap conv_layer(const ConvLayer& layer, const FeatureMap& in,
                      FeatureMap* pre_out) {
  const int kh = layer.k_h(), kw = layer.k_w(), cin = layer.c_in();
  const int cout = layer.c_out();
  if (in.c != cin || in.h < kh || in.w < kw) {
    throw ShapeMismatch("conv: input " + std::to_string(in.h) + "x" +
                        std::to_string(in.w) + "x" + std::to_string(in.c) +
                        " does not fit kernel");
  }
  const int oh = in.h - kh + 1, ow = in.w - kw + 1;
  FeatureMap pre;
  if (mostly_zero(in)) {
    pre = conv_layer_sparse(layer, in);
  } else {
    pre = FeatureMap(oh, ow, cout);
    const double* K = layer.kernel.data.data();
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        for (int o = 0; o < cout; ++o) {
          double acc = layer.bias.data[o];
          const double* ko = K + o * kh * kw * cin;
          for (int i = 0; i < kh; ++i) {
            const double* row = in.data.data() + ((y + i) * in.w + x) * cin;
            const double* krow = ko + i * kw * cin;
            for (int j = 0; j < kw * cin; ++j) acc += krow[j] * row[j];
          }
          pre.at(y, x, o) = acc;
        }
      }
    }
  }
  FeatureMap out = pre;
  if (layer.activation == Activation::kRelu) {
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  }
  if (pre_out) *pre_out = std::move(pre);
  return out;
}

}  // namespace

std::vector<double> conv_forward(const std::vector<ConvLayer>& stack,
                                 const FeatureMap& input, ConvCache* cache) {
  if (stack.empty()) throw ShapeMismatch("conv: empty stack");
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  FeatureMap cur = input;
  for (const ConvLayer& layer : stack) {
    FeatureMap pre;
    FeatureMap next = conv_layer(layer, cur, cache ? &pre : nullptr);
    if (cache) {
      cache->inputs.push_back(std::move(cur));
      cache->pre.push_back(std::move(pre));
    }
    cur = std::move(next);
  }
  std::vector<double> pooled(cur.c, 0.0);
  const int cells = cur.h * cur.w;
  for (int p = 0; p < cells; ++p) {
    for (int o = 0; o < cur.c; ++o) pooled[o] += cur.data[p * cur.c + o];
  }
  for (double& v : pooled) v /= cells;
  return pooled;
}

void conv_backward(const std::vector<ConvLayer>& stack, const ConvCache& cache,
                   std::span<const double> d_pooled,
                   std::vector<ConvLayer>& grads, FeatureMap* d_input) {
  const int L = static_cast<int>(stack.size());
  const FeatureMap& last = cache.pre.back();
  // Gradient w.r.t. the output of the current layer.
  FeatureMap d_out(last.h, last.w, last.c);
  const double inv = 1.0 / (last.h * last.w);
  for (int p = 0; p < last.h * last.w; ++p) {
    for (int o = 0; o < last.c; ++o) d_out.data[p * last.c + o] = d_pooled[o] * inv;
  }
  for (int l = L - 1; l >= 0; --l) {
    const ConvLayer& layer = stack[l];
    ConvLayer& g = grads[l];
    const FeatureMap& in = cache.inputs[l];
    const FeatureMap& pre = cache.pre[l];
    const int kh = layer.k_h(), kw = layer.k_w(), cin = layer.c_in();
    const int cout = layer.c_out();
    FeatureMap d_pre = d_out;
    if (layer.activation == Activation::kRelu) {
      for (size_t i = 0; i < d_pre.data.size(); ++i) {
        if (pre.data[i] <= 0.0) d_pre.data[i] = 0.0;
      }
    }
    const bool need_input = l > 0 || d_input != nullptr;
    FeatureMap d_in;
    if (need_input) d_in = FeatureMap(in.h, in.w, in.c);
    const double* K = layer.kernel.data.data();
    double* dK = g.kernel.data.data();
    if (!need_input && mostly_zero(in)) {
      const SparseCells sp = sparsify(in);
      for (int y = 0; y < pre.h; ++y) {
        for (int x = 0; x < pre.w; ++x) {
          for (int o = 0; o < cout; ++o) {
            const double dz = d_pre.at(y, x, o);
            if (dz == 0.0) continue;
            g.bias.data[o] += dz;
            for (int i = 0; i < kh; ++i) {
              for (int j = 0; j < kw; ++j) {
                const int cell = (y + i) * in.w + x + j;
                double* dk = dK + ((o * kh + i) * kw + j) * cin;
                for (int n = sp.begin[cell]; n < sp.begin[cell + 1]; ++n) {
                  dk[sp.ch[n]] += dz * sp.val[n];
                }
              }
            }
          }
        }
      }
      continue;
    }
    for (int y = 0; y < pre.h; ++y) {
      for (int x = 0; x < pre.w; ++x) {
        for (int o = 0; o < cout; ++o) {
          const double dz = d_pre.at(y, x, o);
          if (dz == 0.0) continue;
          g.bias.data[o] += dz;
          const int ko = o * kh * kw * cin;
          for (int i = 0; i < kh; ++i) {
            const int base = ((y + i) * in.w + x) * cin;
            const int krow = ko + i * kw * cin;
            for (int j = 0; j < kw * cin; ++j) {
              dK[krow + j] += dz * in.data[base + j];
              if (need_input) d_in.data[base + j] += dz * K[krow + j];
            }
          }
        }
      }
    }
    if (l == 0) {
      if (d_input) {
        if (d_input->data.size() != d_in.data.size()) *d_input = FeatureMap(in.h, in.w, in.c);
        for (size_t i = 0; i < d_in.data.size(); ++i) d_input->data[i] += d_in.data[i];
      }
    } else {
      d_out = std::move(d_in);
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

void check_width(std::span<const double> v, int d) {
  if (static_cast<int>(v.size()) != d) {
    throw ShapeMismatch("gat: feature width " + std::to_string(v.size()) +
                        " != " + std::to_string(d));
  }
}

}  // namespace

std::vector<double> gat_node_forward(
    std::span<const double> h_i,
    const std::vector<std::span<const double>>& nbrs, const GatParams& p,
    GatNodeCache* cache) {
  const int d = p.d();
  check_width(h_i, d);
  const int k = static_cast<int>(nbrs.size()) + 1;
  std::vector<double> self_part(d);
  matvec(p.w, h_i, self_part, 0);
  std::vector<std::vector<double>> msg(k, std::vector<double>(d));
  std::vector<std::vector<double>> u(k, std::vector<double>(d));
  std::vector<double> e(k);
  for (int j = 0; j < k; ++j) {
    std::span<const double> hk = j == 0 ? h_i : nbrs[j - 1];
    check_width(hk, d);
    matvec(p.w, hk, msg[j], d);
    double s = 0.0;
    for (int r = 0; r < d; ++r) {
      u[j][r] = self_part[r] + msg[j][r];
      s += p.a.data[r] * leaky_relu(u[j][r], p.slope);
    }
    e[j] = s;
  }
  std::vector<double> alpha = softmax(e);
  std::vector<double> out(d, 0.0);
  for (int j = 0; j < k; ++j) {
    for (int r = 0; r < d; ++r) out[r] += alpha[j] * msg[j][r];
  }
  if (cache) {
    cache->u = std::move(u);
    cache->msg = std::move(msg);
    cache->alpha = std::move(alpha);
  }
  return out;
}

std::vector<double> gat_scores(std::span<const double> h_i,
                               const std::vector<std::span<const double>>& nbrs,
                               const GatParams& p) {
  GatNodeCache cache;
  gat_node_forward(h_i, nbrs, p, &cache);
  return cache.alpha;
}

void gat_node_backward(std::span<const double> h_i,
                       const std::vector<std::span<const double>>& nbrs,
                       const GatParams& p, const GatNodeCache& cache,
                       std::span<const double> d_out, GatParams& grads,
                       std::span<double> d_h_i,
                       const std::vector<std::span<double>>& d_nbrs) {
  const int d = p.d();
  const int k = static_cast<int>(cache.alpha.size());
  std::vector<double> d_alpha(k);
  double weighted = 0.0;
  for (int j = 0; j < k; ++j) {
    d_alpha[j] = dot(d_out, cache.msg[j]);
    weighted += cache.alpha[j] * d_alpha[j];
  }
  std::vector<double> du_sum(d, 0.0);  // sum over k of du_k, for W_self
  std::vector<double> r(d);
  for (int j = 0; j < k; ++j) {
    const double de = cache.alpha[j] * (d_alpha[j] - weighted);
    for (int q = 0; q < d; ++q) {
      const double uq = cache.u[j][q];
      const double z = leaky_relu(uq, p.slope);
      grads.a.data[q] += de * z;
      const double du = de * p.a.data[q] * (uq > 0.0 ? 1.0 : p.slope);
      du_sum[q] += du;
      // Both the score and the message read W_nbr h_k.
      r[q] = du + cache.alpha[j] * d_out[q];
    }
    std::span<const double> hk = j == 0 ? h_i : nbrs[j - 1];
    outer_add(grads.w, r, hk, d);
    if (j == 0) {
      matvec_t_add(p.w, r, d_h_i, d);
    } else if (!d_nbrs.empty()) {
      matvec_t_add(p.w, r, d_nbrs[j - 1], d);
    }
  }
  outer_add(grads.w, du_sum, h_i, 0);
  matvec_t_add(p.w, du_sum, d_h_i, 0);
}

Tensor gat_forward(const std::vector<std::vector<int>>& neighbors,
                   const Tensor& H, const GatParams& p) {
  const int n = H.dim(0);
  if (static_cast<int>(neighbors.size()) != n) {
    throw ShapeMismatch("gat_forward: neighbourhood count != rows of H");
  }
  Tensor out({n, p.d()});
  for (int i = 0; i < n; ++i) {
    std::vector<std::span<const double>> nbrs;
    for (int j : neighbors[i]) {
      if (j < 0 || j >= n) throw ShapeMismatch("gat_forward: bad neighbour");
      nbrs.push_back(H.row(j));
    }
    auto h = gat_node_forward(H.row(i), nbrs, p);
    std::copy(h.begin(), h.end(), out.row(i).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> predict_token(std::span<const double> x, const Tensor& c,
                                  const Tensor& b) {
  if (static_cast<int>(x.size()) != c.dim(1)) {
    throw ShapeMismatch("predict_token: input width mismatch");
  }
  std::vector<double> logits(c.dim(0));
  matvec(c, x, logits);
  for (size_t v = 0; v < logits.size(); ++v) logits[v] += b.data[v];
  return softmax(logits);
}

void classifier_backward(std::span<const double> x, const Tensor& c,
                         std::span<const double> d_logits, Tensor& d_c,
                         Tensor& d_b, std::span<double> d_x) {
  outer_add(d_c, d_logits, x);
  for (size_t v = 0; v < d_logits.size(); ++v) d_b.data[v] += d_logits[v];
  if (!d_x.empty()) matvec_t_add(c, d_logits, d_x);
}

}  // namespace ctxrepair
