// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "error.hpp"

namespace adgate::models {

namespace {

// Parameter slots. The CNN contributes two slots per layer starting at kConv0.
enum Slot : std::size_t {
  kGruWz, kGruUz, kGruBz,
  kGruWr, kGruUr, kGruBr,
  kGruWh, kGruUh, kGruBh,
  kWordW, kWordB, kWordU,
  kFieldW, kFieldB, kFieldU,
  kConv0,
};

struct TailSlots {
  std::size_t img_w, img_b, num_w, num_b, merge_w, merge_b, out_w, out_b;
};

TailSlots tail_slots(const EnsembleConfig &c) {
  const std::size_t t = kConv0 + 2 * c.cnn_filters.size();
  return {t, t + 1, t + 2, t + 3, t + 4, t + 5, t + 6, t + 7};
}

std::size_t conv_kernel_slot(std::size_t layer) { return kConv0 + 2 * layer; }
std::size_t conv_bias_slot(std::size_t layer) { return kConv0 + 2 * layer + 1; }

std::vector<Parameter> make_parameters(const EnsembleConfig &c) {
  const auto H = c.gru_hidden, D = c.embed_dim, A = c.attention_dim;
  std::vector<Parameter> p;
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    p.push_back({std::move(name), Tensor(std::move(shape))});
  };
  for (const char *gate : {"z", "r", "h"}) {
    add(std::string("gru.W_") + gate, {H, D});
    add(std::string("gru.U_") + gate, {H, H});
    add(std::string("gru.b_") + gate, {H});
  }
  add("word_attention.W", {A, H});
  add("word_attention.b", {A});
  add("word_attention.u", {A});
  add("field_attention.W", {A, H});
  add("field_attention.b", {A});
  add("field_attention.u", {A});
  std::size_t in_c = 1;
  for (std::size_t l = 0; l < c.cnn_filters.size(); ++l) {
    const auto name = "conv" + std::to_string(l + 1);
    add(name + ".kernel", {c.cnn_filters[l], in_c, c.cnn_kernel, c.cnn_kernel});
    add(name + ".bias", {c.cnn_filters[l]});
    in_c = c.cnn_filters[l];
  }
  add("image_dense.W", {c.image_hidden, c.cnn_flat_size()});
  add("image_dense.b", {c.image_hidden});
  add("numeric.W", {c.numeric_hidden, c.numeric_dim});
  add("numeric.b", {c.numeric_hidden});
  add("merge.W", {c.merge_hidden, H + c.image_hidden + c.numeric_hidden});
  add("merge.b", {c.merge_hidden});
  add("output.W", {kClassCount, c.merge_hidden});
  add("output.b", {kClassCount});
  return p;
}

bool is_bias(const Parameter &p) {
  const auto &n = p.name;
  return n.ends_with(".b") || n.ends_with(".bias") || n.find(".b_") != std::string::npos;
}

// -- small dense kernels ----------------------------------------------------

// y += W x, W is rows x cols
void add_matvec(const double *W, const double *x, std::size_t rows, std::size_t cols, double *y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double *w = W + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += w[j] * x[j];
    y[i] += s;
  }
}

// dx += W^T dy
void add_matTvec(const double *W, const double *dy, std::size_t rows, std::size_t cols, double *dx) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double *w = W + i * cols;
    const double g = dy[i];
    if (g == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) dx[j] += w[j] * g;
  }
}

// dW += dy x^T
void add_outer(double *dW, const double *dy, const double *x, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double g = dy[i];
    if (g == 0.0) continue;
    double *w = dW + i * cols;
    for (std::size_t j = 0; j < cols; ++j) w[j] += g * x[j];
  }
}

void add_vec(double *y, const double *x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

double dot(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Softmax restricted to entries with mask set; others receive exactly 0.
void masked_softmax(const double *logits, const std::uint8_t *mask, std::size_t n, double *out) {
  double top = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) top = std::max(top, logits[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = mask[i] ? std::exp(logits[i] - top) : 0.0;
    sum += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
}

// -- forward caches ---------------------------------------------------------

struct FieldCache {
  std::size_t n = 0;
  std::vector<double> h;  // (n + 1) x H, row 0 is the zero initial state
  std::vector<double> z, r, c, rh;  // n x H
  std::vector<double> u;            // n x A
  std::vector<double> alpha;        // n
  std::vector<double> s;            // H
};

struct ConvCache {
  std::size_t in_c = 0, in_h = 0, in_w = 0;
  std::size_t out_c = 0, conv_h = 0, conv_w = 0, pool_h = 0, pool_w = 0;
  const double *input = nullptr;
  std::vector<double> pre;      // out_c x conv_h x conv_w
  std::vector<std::size_t> argmax;  // per pooled cell, index into pre
  std::vector<double> output;   // out_c x pool_h x pool_w
};

struct Cache {
  std::array<FieldCache, textprep::kFieldCount> fields;
  std::array<std::uint8_t, textprep::kFieldCount> field_mask{};
  std::array<double, textprep::kFieldCount> beta{};
  std::vector<double> g;  // kFieldCount x A
  std::vector<double> v;  // H
  std::vector<ConvCache> convs;
  std::vector<double> img_pre, img;
  std::vector<double> num_pre, num;
  std::vector<double> concat, merge_pre, merge;
  std::array<double, kClassCount> logits{}, probs{};
};

class Network {
 public:
  explicit Network(const EnsembleModel &m)
      : cfg_(m.config()), p_(m.parameters()), tail_(tail_slots(cfg_)) {}

  void forward(const FeatureBundle &b, Cache &cache) const {
    const auto H = cfg_.gru_hidden, A = cfg_.attention_dim;

    // Text branch.
    std::array<double, textprep::kFieldCount> field_logits{};
    cache.g.assign(textprep::kFieldCount * A, 0.0);
    cache.v.assign(H, 0.0);
    bool any_field = false;
    for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
      auto &fc = cache.fields[f];
      run_field(b.fields[f], fc);
      cache.field_mask[f] = fc.n > 0 ? 1 : 0;
      if (fc.n == 0) continue;
      any_field = true;
      double *g = cache.g.data() + f * A;
      std::copy_n(data(kFieldB), A, g);
      add_matvec(data(kFieldW), fc.s.data(), A, H, g);
      for (std::size_t i = 0; i < A; ++i) g[i] = std::tanh(g[i]);
      field_logits[f] = dot(g, data(kFieldU), A);
    }
    cache.beta.fill(0.0);
    if (any_field) {
      masked_softmax(field_logits.data(), cache.field_mask.data(), textprep::kFieldCount, cache.beta.data());
      for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
        if (!cache.field_mask[f]) continue;
        for (std::size_t i = 0; i < H; ++i) cache.v[i] += cache.beta[f] * cache.fields[f].s[i];
      }
    }

    // Image branch.
    cache.convs.resize(cfg_.cnn_filters.size());
    const double *in = b.image.data();
    std::size_t in_c = 1, in_h = cfg_.image_side, in_w = cfg_.image_side;
    for (std::size_t l = 0; l < cfg_.cnn_filters.size(); ++l) {
      auto &cc = cache.convs[l];
      conv_forward(l, in, in_c, in_h, in_w, cc);
      in = cc.output.data();
      in_c = cc.out_c;
      in_h = cc.pool_h;
      in_w = cc.pool_w;
    }
    const std::size_t flat = cfg_.cnn_flat_size();
    cache.img_pre.assign(data(tail_.img_b), data(tail_.img_b) + cfg_.image_hidden);
    add_matvec(data(tail_.img_w), in, cfg_.image_hidden, flat, cache.img_pre.data());
    cache.img.resize(cfg_.image_hidden);
    for (std::size_t i = 0; i < cfg_.image_hidden; ++i) cache.img[i] = std::max(0.0, cache.img_pre[i]);

    // Numeric branch.
    cache.num_pre.assign(data(tail_.num_b), data(tail_.num_b) + cfg_.numeric_hidden);
    add_matvec(data(tail_.num_w), b.numeric.data(), cfg_.numeric_hidden, cfg_.numeric_dim, cache.num_pre.data());
    cache.num.resize(cfg_.numeric_hidden);
    for (std::size_t i = 0; i < cfg_.numeric_hidden; ++i) cache.num[i] = std::max(0.0, cache.num_pre[i]);

    // Head.
    cache.concat.clear();
    cache.concat.insert(cache.concat.end(), cache.v.begin(), cache.v.end());
    cache.concat.insert(cache.concat.end(), cache.img.begin(), cache.img.end());
    cache.concat.insert(cache.concat.end(), cache.num.begin(), cache.num.end());
    cache.merge_pre.assign(data(tail_.merge_b), data(tail_.merge_b) + cfg_.merge_hidden);
    add_matvec(data(tail_.merge_w), cache.concat.data(), cfg_.merge_hidden, cache.concat.size(), cache.merge_pre.data());
    cache.merge.resize(cfg_.merge_hidden);
    for (std::size_t i = 0; i < cfg_.merge_hidden; ++i) cache.merge[i] = std::max(0.0, cache.merge_pre[i]);
    std::copy_n(data(tail_.out_b), kClassCount, cache.logits.begin());
    add_matvec(data(tail_.out_w), cache.merge.data(), kClassCount, cfg_.merge_hidden, cache.logits.data());
    const std::array<std::uint8_t, kClassCount> all{1, 1};
    masked_softmax(cache.logits.data(), all.data(), kClassCount, cache.probs.data());
  }

  // Accumulates scale * d(-log p[label]) into grads.
  void backward(const FeatureBundle &b, const Cache &cache, int label, double scale,
                std::vector<Tensor> &grads) const {
    const auto H = cfg_.gru_hidden, A = cfg_.attention_dim;
    auto G = [&](std::size_t slot) { return grads[slot].data.data(); };

    std::array<double, kClassCount> dlogits{};
    for (std::size_t k = 0; k < kClassCount; ++k) {
      dlogits[k] = scale * (cache.probs[k] - (static_cast<int>(k) == label ? 1.0 : 0.0));
    }
    add_outer(G(tail_.out_w), dlogits.data(), cache.merge.data(), kClassCount, cfg_.merge_hidden);
    add_vec(G(tail_.out_b), dlogits.data(), kClassCount);
    std::vector<double> dmerge(cfg_.merge_hidden, 0.0);
    add_matTvec(data(tail_.out_w), dlogits.data(), kClassCount, cfg_.merge_hidden, dmerge.data());
    for (std::size_t i = 0; i < cfg_.merge_hidden; ++i) {
      if (!(cache.merge_pre[i] > 0.0)) dmerge[i] = 0.0;
    }
    add_outer(G(tail_.merge_w), dmerge.data(), cache.concat.data(), cfg_.merge_hidden, cache.concat.size());
    add_vec(G(tail_.merge_b), dmerge.data(), cfg_.merge_hidden);
    std::vector<double> dconcat(cache.concat.size(), 0.0);
    add_matTvec(data(tail_.merge_w), dmerge.data(), cfg_.merge_hidden, cache.concat.size(), dconcat.data());
    const double *dv = dconcat.data();
    const double *dimg = dconcat.data() + H;
    const double *dnum = dconcat.data() + H + cfg_.image_hidden;

    // Numeric branch.
    std::vector<double> dnum_pre(cfg_.numeric_hidden);
    for (std::size_t i = 0; i < cfg_.numeric_hidden; ++i) dnum_pre[i] = cache.num_pre[i] > 0.0 ? dnum[i] : 0.0;
    add_outer(G(tail_.num_w), dnum_pre.data(), b.numeric.data(), cfg_.numeric_hidden, cfg_.numeric_dim);
    add_vec(G(tail_.num_b), dnum_pre.data(), cfg_.numeric_hidden);

    // Image branch.
    std::vector<double> dimg_pre(cfg_.image_hidden);
    for (std::size_t i = 0; i < cfg_.image_hidden; ++i) dimg_pre[i] = cache.img_pre[i] > 0.0 ? dimg[i] : 0.0;
    const std::size_t flat = cfg_.cnn_flat_size();
    const double *flat_in = cache.convs.empty() ? b.image.data() : cache.convs.back().output.data();
    add_outer(G(tail_.img_w), dimg_pre.data(), flat_in, cfg_.image_hidden, flat);
    add_vec(G(tail_.img_b), dimg_pre.data(), cfg_.image_hidden);
    std::vector<double> dout(flat, 0.0);
    add_matTvec(data(tail_.img_w), dimg_pre.data(), cfg_.image_hidden, flat, dout.data());
    for (std::size_t l = cache.convs.size(); l-- > 0;) {
      dout = conv_backward(l, cache.convs[l], dout, grads, l > 0);
    }

    // Field attention.
    std::array<std::vector<double>, textprep::kFieldCount> ds;
    for (auto &d : ds) d.assign(H, 0.0);
    double weighted = 0.0;
    std::array<double, textprep::kFieldCount> dbeta{};
    for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
      if (!cache.field_mask[f]) continue;
      dbeta[f] = dot(dv, cache.fields[f].s.data(), H);
      weighted += cache.beta[f] * dbeta[f];
      for (std::size_t i = 0; i < H; ++i) ds[f][i] += cache.beta[f] * dv[i];
    }
    std::vector<double> dpre(A);
    for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
      if (!cache.field_mask[f]) continue;
      const double de = cache.beta[f] * (dbeta[f] - weighted);
      const double *g = cache.g.data() + f * A;
      for (std::size_t i = 0; i < A; ++i) {
        G(kFieldU)[i] += de * g[i];
        dpre[i] = de * data(kFieldU)[i] * (1.0 - g[i] * g[i]);
      }
      add_outer(G(kFieldW), dpre.data(), cache.fields[f].s.data(), A, H);
      add_vec(G(kFieldB), dpre.data(), A);
      add_matTvec(data(kFieldW), dpre.data(), A, H, ds[f].data());
    }

    for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
      if (!cache.field_mask[f]) continue;
      field_backward(b.fields[f], cache.fields[f], ds[f], grads);
    }
  }

 private:
  const double *data(std::size_t slot) const { return p_[slot].value.data.data(); }

  void run_field(const vectorize::DocMatrix &m, FieldCache &fc) const {
    const auto H = cfg_.gru_hidden, D = cfg_.embed_dim, A = cfg_.attention_dim;
    const auto n = m.valid_len;
    fc.n = n;
    fc.h.assign((n + 1) * H, 0.0);
    fc.z.resize(n * H);
    fc.r.resize(n * H);
    fc.c.resize(n * H);
    fc.rh.resize(n * H);
    fc.u.resize(n * A);
    fc.alpha.assign(n, 0.0);
    fc.s.assign(H, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double *x = m.data.data() + t * m.cols;
      const double *hp = fc.h.data() + t * H;
      double *hn = fc.h.data() + (t + 1) * H;
      double *z = fc.z.data() + t * H;
      double *r = fc.r.data() + t * H;
      double *c = fc.c.data() + t * H;
      double *rh = fc.rh.data() + t * H;
      std::copy_n(data(kGruBz), H, z);
      add_matvec(data(kGruWz), x, H, D, z);
      add_matvec(data(kGruUz), hp, H, H, z);
      std::copy_n(data(kGruBr), H, r);
      add_matvec(data(kGruWr), x, H, D, r);
      add_matvec(data(kGruUr), hp, H, H, r);
      for (std::size_t i = 0; i < H; ++i) {
        z[i] = sigmoid(z[i]);
        r[i] = sigmoid(r[i]);
        rh[i] = r[i] * hp[i];
      }
      std::copy_n(data(kGruBh), H, c);
      add_matvec(data(kGruWh), x, H, D, c);
      add_matvec(data(kGruUh), rh, H, H, c);
      for (std::size_t i = 0; i < H; ++i) {
        c[i] = std::tanh(c[i]);
        hn[i] = (1.0 - z[i]) * hp[i] + z[i] * c[i];
      }
    }
    if (n == 0) return;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> mask(n, 1);
    for (std::size_t t = 0; t < n; ++t) {
      double *u = fc.u.data() + t * A;
      std::copy_n(data(kWordB), A, u);
      add_matvec(data(kWordW), fc.h.data() + (t + 1) * H, A, H, u);
      for (std::size_t i = 0; i < A; ++i) u[i] = std::tanh(u[i]);
      scores[t] = dot(u, data(kWordU), A);
    }
    masked_softmax(scores.data(), mask.data(), n, fc.alpha.data());
    for (std::size_t t = 0; t < n; ++t) {
      const double *h = fc.h.data() + (t + 1) * H;
      for (std::size_t i = 0; i < H; ++i) fc.s[i] += fc.alpha[t] * h[i];
    }
  }

  void field_backward(const vectorize::DocMatrix &m, const FieldCache &fc, const std::vector<double> &ds,
                      std::vector<Tensor> &grads) const {
    const auto H = cfg_.gru_hidden, D = cfg_.embed_dim, A = cfg_.attention_dim;
    const auto n = fc.n;
    auto G = [&](std::size_t slot) { return grads[slot].data.data(); };

    // Word attention.
    std::vector<double> dh(n * H, 0.0);  // gradient w.r.t. h_t (t = 1..n) from attention
    std::vector<double> dalpha(n);
    double weighted = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double *h = fc.h.data() + (t + 1) * H;
      dalpha[t] = dot(ds.data(), h, H);
      weighted += fc.alpha[t] * dalpha[t];
      for (std::size_t i = 0; i < H; ++i) dh[t * H + i] += fc.alpha[t] * ds[i];
    }
    std::vector<double> dpre(A);
    for (std::size_t t = 0; t < n; ++t) {
      const double de = fc.alpha[t] * (dalpha[t] - weighted);
      const double *u = fc.u.data() + t * A;
      for (std::size_t i = 0; i < A; ++i) {
        G(kWordU)[i] += de * u[i];
        dpre[i] = de * data(kWordU)[i] * (1.0 - u[i] * u[i]);
      }
      const double *h = fc.h.data() + (t + 1) * H;
      add_outer(G(kWordW), dpre.data(), h, A, H);
      add_vec(G(kWordB), dpre.data(), A);
      add_matTvec(data(kWordW), dpre.data(), A, H, dh.data() + t * H);
    }

    // GRU, back through time.
    std::vector<double> carry(H, 0.0), dhv(H), dhp(H), daz(H), dar(H), dah(H), drh(H);
    for (std::size_t t = n; t-- > 0;) {
      const double *x = m.data.data() + t * m.cols;
      const double *hp = fc.h.data() + t * H;
      const double *z = fc.z.data() + t * H;
      const double *r = fc.r.data() + t * H;
      const double *c = fc.c.data() + t * H;
      const double *rh = fc.rh.data() + t * H;
      for (std::size_t i = 0; i < H; ++i) {
        dhv[i] = dh[t * H + i] + carry[i];
        const double dz = dhv[i] * (c[i] - hp[i]);
        const double dc = dhv[i] * z[i];
        dhp[i] = dhv[i] * (1.0 - z[i]);
        dah[i] = dc * (1.0 - c[i] * c[i]);
        daz[i] = dz * z[i] * (1.0 - z[i]);
      }
      add_outer(G(kGruWh), dah.data(), x, H, D);
      add_outer(G(kGruUh), dah.data(), rh, H, H);
      add_vec(G(kGruBh), dah.data(), H);
      std::fill(drh.begin(), drh.end(), 0.0);
      add_matTvec(data(kGruUh), dah.data(), H, H, drh.data());
      for (std::size_t i = 0; i < H; ++i) {
        dhp[i] += drh[i] * r[i];
        dar[i] = drh[i] * hp[i] * r[i] * (1.0 - r[i]);
      }
      add_outer(G(kGruWr), dar.data(), x, H, D);
      add_outer(G(kGruUr), dar.data(), hp, H, H);
      add_vec(G(kGruBr), dar.data(), H);
      add_matTvec(data(kGruUr), dar.data(), H, H, dhp.data());
      add_outer(G(kGruWz), daz.data(), x, H, D);
      add_outer(G(kGruUz), daz.data(), hp, H, H);
      add_vec(G(kGruBz), daz.data(), H);
      add_matTvec(data(kGruUz), daz.data(), H, H, dhp.data());
      carry = dhp;
    }
  }

  void conv_forward(std::size_t layer, const double *in, std::size_t in_c, std::size_t in_h, std::size_t in_w,
                    ConvCache &cc) const {
    const auto K = cfg_.cnn_kernel, P = cfg_.cnn_pool;
    cc.in_c = in_c;
    cc.in_h = in_h;
    cc.in_w = in_w;
    cc.input = in;
    cc.out_c = cfg_.cnn_filters[layer];
    cc.conv_h = in_h - K + 1;
    cc.conv_w = in_w - K + 1;
    cc.pool_h = cc.conv_h / P;
    cc.pool_w = cc.conv_w / P;
    const double *kernel = data(conv_kernel_slot(layer));
    const double *bias = data(conv_bias_slot(layer));
    cc.pre.assign(cc.out_c * cc.conv_h * cc.conv_w, 0.0);
    for (std::size_t o = 0; o < cc.out_c; ++o) {
      double *out = cc.pre.data() + o * cc.conv_h * cc.conv_w;
      for (std::size_t i = 0; i < in_c; ++i) {
        const double *src = in + i * in_h * in_w;
        const double *k = kernel + (o * in_c + i) * K * K;
        for (std::size_t y = 0; y < cc.conv_h; ++y) {
          for (std::size_t x = 0; x < cc.conv_w; ++x) {
            double s = 0.0;
            for (std::size_t u = 0; u < K; ++u) {
              const double *row = src + (y + u) * in_w + x;
              for (std::size_t v = 0; v < K; ++v) s += k[u * K + v] * row[v];
            }
            out[y * cc.conv_w + x] += s;
          }
        }
      }
      for (std::size_t j = 0; j < cc.conv_h * cc.conv_w; ++j) out[j] += bias[o];
    }
    cc.output.assign(cc.out_c * cc.pool_h * cc.pool_w, 0.0);
    cc.argmax.assign(cc.output.size(), 0);
    for (std::size_t o = 0; o < cc.out_c; ++o) {
      for (std::size_t py = 0; py < cc.pool_h; ++py) {
        for (std::size_t px = 0; px < cc.pool_w; ++px) {
          double best = -INFINITY;
          std::size_t arg = 0;
          for (std::size_t u = 0; u < P; ++u) {
            for (std::size_t v = 0; v < P; ++v) {
              const std::size_t idx = (o * cc.conv_h + py * P + u) * cc.conv_w + px * P + v;
              const double val = std::max(0.0, cc.pre[idx]);
              if (val > best) {
                best = val;
                arg = idx;
              }
            }
          }
          const std::size_t cell = (o * cc.pool_h + py) * cc.pool_w + px;
          cc.output[cell] = best;
          cc.argmax[cell] = arg;
        }
      }
    }
  }

  std::vector<double> conv_backward(std::size_t layer, const ConvCache &cc, const std::vector<double> &dout,
                                    std::vector<Tensor> &grads, bool need_input_grad) const {
    const auto K = cfg_.cnn_kernel;
    std::vector<double> dpre(cc.pre.size(), 0.0);
    for (std::size_t cell = 0; cell < dout.size(); ++cell) {
      const auto idx = cc.argmax[cell];
      if (cc.pre[idx] > 0.0) dpre[idx] += dout[cell];
    }
    double *dk = grads[conv_kernel_slot(layer)].data.data();
    double *db = grads[conv_bias_slot(layer)].data.data();
    const double *kernel = data(conv_kernel_slot(layer));
    std::vector<double> din(need_input_grad ? cc.in_c * cc.in_h * cc.in_w : 0, 0.0);
    for (std::size_t o = 0; o < cc.out_c; ++o) {
      const double *g = dpre.data() + o * cc.conv_h * cc.conv_w;
      for (std::size_t j = 0; j < cc.conv_h * cc.conv_w; ++j) db[o] += g[j];
      for (std::size_t i = 0; i < cc.in_c; ++i) {
        const double *src = cc.input + i * cc.in_h * cc.in_w;
        double *dki = dk + (o * cc.in_c + i) * K * K;
        const double *k = kernel + (o * cc.in_c + i) * K * K;
        double *dsrc = need_input_grad ? din.data() + i * cc.in_h * cc.in_w : nullptr;
        for (std::size_t y = 0; y < cc.conv_h; ++y) {
          for (std::size_t x = 0; x < cc.conv_w; ++x) {
            const double gv = g[y * cc.conv_w + x];
            if (gv == 0.0) continue;
            for (std::size_t u = 0; u < K; ++u) {
              const double *row = src + (y + u) * cc.in_w + x;
              for (std::size_t v = 0; v < K; ++v) dki[u * K + v] += gv * row[v];
              if (dsrc) {
                double *drow = dsrc + (y + u) * cc.in_w + x;
                for (std::size_t v = 0; v < K; ++v) drow[v] += gv * k[u * K + v];
              }
            }
          }
        }
      }
    }
    return din;
  }

  const EnsembleConfig &cfg_;
  const std::vector<Parameter> &p_;
  TailSlots tail_;
};

std::vector<Tensor> zero_like(const std::vector<Parameter> &params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto &p : params) out.emplace_back(p.value.shape);
  return out;
}

double sample_loss(const Cache &cache, int label) {
  const double top = std::max(cache.logits[0], cache.logits[1]);
  const double lse = top + std::log(std::exp(cache.logits[0] - top) + std::exp(cache.logits[1] - top));
  return lse - cache.logits[static_cast<std::size_t>(label)];
}

std::uint64_t fnv1a(const void *bytes, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto *p = static_cast<const unsigned char *>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t sample_hash(const FeatureBundle &b, int label) {
  std::uint64_t h = fnv1a(&label, sizeof label);
  for (const auto &f : b.fields) {
    h = fnv1a(&f.valid_len, sizeof f.valid_len, h);
    h = fnv1a(f.data.data(), f.data.size() * sizeof(double), h);
  }
  h = fnv1a(b.numeric.data(), b.numeric.size() * sizeof(double), h);
  return fnv1a(b.image.data(), b.image.size() * sizeof(double), h);
}

// Total order on samples used to canonicalize training order.
bool sample_less(const FeatureBundle &a, int la, const FeatureBundle &b, int lb) {
  if (la != lb) return la < lb;
  for (std::size_t f = 0; f < a.fields.size(); ++f) {
    if (a.fields[f].valid_len != b.fields[f].valid_len) return a.fields[f].valid_len < b.fields[f].valid_len;
    if (a.fields[f].data != b.fields[f].data) return a.fields[f].data < b.fields[f].data;
  }
  if (a.numeric != b.numeric) return a.numeric < b.numeric;
  return a.image < b.image;
}

}  // namespace

// ---------------------------------------------------------------------------

void EnsembleConfig::validate() const {
  auto positive = [](std::size_t v, const char *what) {
    if (v == 0) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be >= 1");
  };
  positive(embed_dim, "embed_dim");
  positive(gru_hidden, "gru_hidden");
  positive(attention_dim, "attention_dim");
  for (auto l : field_lengths) positive(l, "field length");
  positive(image_side, "image_side");
  positive(cnn_kernel, "cnn_kernel");
  positive(cnn_pool, "cnn_pool");
  positive(image_hidden, "image_hidden");
  positive(numeric_dim, "numeric_dim");
  positive(numeric_hidden, "numeric_hidden");
  positive(merge_hidden, "merge_hidden");
  for (auto f : cnn_filters) positive(f, "cnn filter count");
  std::size_t side = image_side;
  for (std::size_t l = 0; l < cnn_filters.size(); ++l) {
    if (side < cnn_kernel || (side - cnn_kernel + 1) / cnn_pool == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "CNN layer " + std::to_string(l + 1) + " shrinks the image below one pixel");
    }
    side = (side - cnn_kernel + 1) / cnn_pool;
  }
}

std::size_t EnsembleConfig::cnn_flat_size() const {
  std::size_t side = image_side;
  std::size_t channels = 1;
  for (auto f : cnn_filters) {
    side = side >= cnn_kernel ? (side - cnn_kernel + 1) / cnn_pool : 0;
    channels = f;
  }
  return channels * side * side;
}

void check_bundle(const FeatureBundle &b, const EnsembleConfig &c) {
  for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
    const auto &m = b.fields[f];
    if (m.cols != c.embed_dim || m.rows != c.field_lengths[f] || m.valid_len > m.rows ||
        m.data.size() != m.rows * m.cols) {
      throw Error(ErrorCode::ShapeMismatch, "text field " + std::to_string(f) + " is " + std::to_string(m.rows) +
                                                "x" + std::to_string(m.cols) + ", model expects " +
                                                std::to_string(c.field_lengths[f]) + "x" +
                                                std::to_string(c.embed_dim));
    }
  }
  if (b.numeric.size() != c.numeric_dim) {
    throw Error(ErrorCode::ShapeMismatch, "numeric vector has " + std::to_string(b.numeric.size()) +
                                              " entries, model expects " + std::to_string(c.numeric_dim));
  }
  if (b.image.size() != c.image_side * c.image_side) {
    throw Error(ErrorCode::ShapeMismatch, "image vector has " + std::to_string(b.image.size()) +
                                              " entries, model expects " +
                                              std::to_string(c.image_side * c.image_side));
  }
}

EnsembleModel EnsembleModel::zeros(const EnsembleConfig &config) {
  config.validate();
  EnsembleModel m;
  m.config_ = config;
  m.params_ = make_parameters(config);
  return m;
}

EnsembleModel EnsembleModel::initialize(const EnsembleConfig &config, std::uint64_t seed) {
  auto m = zeros(config);
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  for (auto &p : m.params_) {
    if (is_bias(p)) continue;
    const auto &s = p.value.shape;
    double fan_in = 0, fan_out = 0;
    if (s.size() == 1) {
      fan_in = static_cast<double>(s[0]);
      fan_out = 1;
    } else if (s.size() == 2) {
      fan_in = static_cast<double>(s[1]);
      fan_out = static_cast<double>(s[0]);
    } else {
      const double receptive = static_cast<double>(s[2] * s[3]);
      fan_in = static_cast<double>(s[1]) * receptive;
      fan_out = static_cast<double>(s[0]) * receptive;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto &v : p.value.data) v = (2.0 * uniform() - 1.0) * limit;
  }
  return m;
}

Tensor &EnsembleModel::param(std::string_view name) {
  for (auto &p : params_) {
    if (p.name == name) return p.value;
  }
  throw Error(ErrorCode::NotFound, "no parameter named '" + std::string(name) + "'");
}

const Tensor &EnsembleModel::param(std::string_view name) const {
  return const_cast<EnsembleModel *>(this)->param(name);
}

bool EnsembleModel::all_finite() const {
  for (const auto &p : params_) {
    for (double v : p.value.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

ForwardResult ensemble_forward(const FeatureBundle &bundle, const EnsembleModel &model) {
  check_bundle(bundle, model.config());
  Cache cache;
  Network(model).forward(bundle, cache);
  ForwardResult r;
  r.probabilities = cache.probs;
  for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
    r.word_attention[f].assign(bundle.fields[f].rows, 0.0);
    std::copy(cache.fields[f].alpha.begin(), cache.fields[f].alpha.end(), r.word_attention[f].begin());
  }
  r.field_attention = cache.beta;
  return r;
}

int predicted_class(const ForwardResult &result) {
  return result.probabilities[1] > result.probabilities[0] ? 1 : 0;
}

LossGrad ensemble_loss_grad(std::span<const FeatureBundle> batch, std::span<const int> labels,
                            const EnsembleModel &model) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "loss over an empty batch");
  if (batch.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "batch and label counts differ");
  LossGrad out;
  out.gradients = zero_like(model.parameters());
  const Network net(model);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Cache cache;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    check_bundle(batch[i], model.config());
    net.forward(batch[i], cache);
    out.loss += sample_loss(cache, labels[i]) * scale;
    net.backward(batch[i], cache, labels[i], scale, out.gradients);
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
  if (!(clip_norm > 0.0)) throw Error(ErrorCode::InvalidArgument, "clip norm must be > 0");
}

TrainResult train_ensemble(std::span<const FeatureBundle> samples, std::span<const int> labels,
                           const EnsembleConfig &config, const TrainConfig &train, const EpochCallback &on_epoch) {
  train.validate();
  if (samples.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "sample and label counts differ");
  if (samples.size() < 2) throw Error(ErrorCode::InvalidArgument, "training needs at least 2 samples");
  const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
  const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (!has0 || !has1) throw Error(ErrorCode::SingleClass, "training labels contain a single class");
  for (const auto &s : samples) check_bundle(s, config);

  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> hashes(n);
  for (std::size_t i = 0; i < n; ++i) hashes[i] = sample_hash(samples[i], labels[i]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    return sample_less(samples[a], labels[a], samples[b], labels[b]);
  });

  TrainResult result{EnsembleModel::initialize(config, train.seed), {}};
  auto &model = result.model;
  std::mt19937_64 shuffler(train.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t batch = std::min(train.batch_size, n);

  std::vector<FeatureBundle> batch_x;
  std::vector<int> batch_y;
  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    if (batch < n) {
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffler() % (i + 1)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_x.push_back(samples[order[i]]);
        batch_y.push_back(labels[order[i]]);
      }
      auto lg = ensemble_loss_grad(batch_x, batch_y, model);
      epoch_loss += lg.loss * static_cast<double>(end - start);
      double sq = 0.0;
      for (const auto &g : lg.gradients) {
        for (double v : g.data) sq += v * v;
      }
      const double norm = std::sqrt(sq);
      const double factor = norm > train.clip_norm ? train.clip_norm / norm : 1.0;
      auto &params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto &w = params[p].value.data;
        const auto &g = lg.gradients[p].data;
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= train.learning_rate * factor * g[j];
      }
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    if (on_epoch && !on_epoch(epoch + 1, result.loss_trace.back(), model)) break;
  }
  return result;
}

double evaluate(std::span<const FeatureBundle> samples, std::span<const int> labels, const EnsembleModel &model) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "evaluation needs at least one sample");
  if (samples.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "sample and label counts differ");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (predicted_class(ensemble_forward(samples[i], model)) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace adgate::models
