// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/model/model.hpp"

#include <cmath>
#include <stdexcept>

#include "geolid/autodiff/gradcheck.hpp"
#include "geolid/errors.hpp"
#include "geolid/util/seed.hpp"

namespace geolid::model {

using ad::Shape;
using ad::shape_str;

namespace {

constexpr std::size_t kEcapaBlocks = 3;
constexpr std::size_t kRes2Split = 4;
constexpr std::size_t kSeReduction = 4;
constexpr std::size_t kEcapaKernel = 5;
constexpr double kPoolEps = 1e-8;

template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  return ad::broadcast_add(ad::matmul(x, w), b);
}

template <class T>
Tensor<T> conv(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, ad::Conv1dAttrs a) {
  return ad::broadcast_add(ad::conv1d(x, w, a), b);
}

template <class T>
const Tensor<T>& get(const Bound<T>& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw NotFoundError("model parameter '" + name + "' missing");
  return it->second;
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace

template <class T>
Tensor<T> loss_l1(const Tensor<T>& loss_class, const Tensor<T>& loss_geo, double lambda) {
  check_unit(lambda, "lambda");
  return ad::add(ad::scale(loss_class, T(1.0 - lambda)), ad::scale(loss_geo, T(lambda)));
}

template <class T>
Tensor<T> loss_l2(const Tensor<T>& loss_class, const Tensor<T>& loss_geo,
                  const std::map<std::size_t, Tensor<T>>& inter,
                  const std::set<std::size_t>& layers, double lambda, double gamma) {
  check_unit(lambda, "lambda");
  check_unit(gamma, "gamma");
  if (layers.empty()) return loss_l1(loss_class, loss_geo, lambda);
  std::optional<Tensor<T>> total;
  for (std::size_t n : layers) {
    auto it = inter.find(n);
    if (it == inter.end()) {
      throw std::invalid_argument("loss_l2: missing intermediate loss for layer " +
                                  std::to_string(n));
    }
    total = total ? ad::add(*total, it->second) : it->second;
  }
  const Tensor<T> mean_inter = ad::scale(*total, T(1.0 / static_cast<double>(layers.size())));
  const Tensor<T> geo =
      ad::add(ad::scale(loss_geo, T(1.0 - gamma)), ad::scale(mean_inter, T(gamma)));
  return ad::add(ad::scale(loss_class, T(1.0 - lambda)), ad::scale(geo, T(lambda)));
}

template <class T>
AamOutput<T> aam_subcenter_loss(const Tensor<T>& embedding, const Tensor<T>& weights,
                                std::span<const int> labels, std::size_t subcenters,
                                double margin, double scale) {
  if (subcenters == 0 || weights.rank() != 2 || weights.dim(0) % subcenters != 0) {
    throw ShapeError("aam: weight rows " + shape_str(weights.shape()) +
                     " not a multiple of the sub-center count");
  }
  const std::size_t classes = weights.dim(0) / subcenters;
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw std::invalid_argument("aam: label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(classes) + ")");
    }
  }
  AamOutput<T> out;
  const Tensor<T> en = ad::l2_normalize(embedding);
  const Tensor<T> wn = ad::l2_normalize(weights);
  const Tensor<T> cos = ad::matmul(en, ad::transpose(wn));
  out.cosines = ad::group_max(cos, subcenters);
  if (!labels.empty()) {
    out.logits = ad::scale(ad::angular_margin(out.cosines, labels, T(margin)), T(scale));
    out.loss = ad::cross_entropy(out.logits, labels);
  }
  return out;
}

template <class T>
std::vector<int> argmax_rows(const Tensor<T>& scores) {
  if (scores.rank() != 2) throw ShapeError("argmax_rows: expected a matrix, got " +
                                           shape_str(scores.shape()));
  const std::size_t rows = scores.dim(0), cols = scores.dim(1);
  std::vector<int> out(rows);
  const auto d = scores.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c) {
      if (d[r * cols + c] > d[r * cols + best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Construction

template <class T>
LIDModel<T>::LIDModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  layers_ = config_.effective_layers();
  init(seed);
}

template <class T>
LIDModel<T>::LIDModel(ModelConfig config, ad::ParameterSet<T> params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  layers_ = config_.effective_layers();
  LIDModel<T> reference(config_, 0);
  for (const auto& [name, p] : reference.params()) {
    if (!params_.contains(name)) throw NotFoundError("parameter '" + name + "' missing");
    if (params_.value(name).shape() != p.value.shape()) {
      throw ShapeError("parameter '" + name + "': " + shape_str(params_.value(name).shape()) +
                       " expected " + shape_str(p.value.shape()));
    }
    params_.at(name).trainable = p.trainable;
    params_.at(name).kind = p.kind;
  }
  if (params_.size() != reference.params().size()) {
    throw ConfigError("parameter set does not match the model configuration");
  }
}

template <class T>
void LIDModel<T>::add_weight(const std::string& name, Shape shape, std::size_t fan_in,
                             std::uint64_t seed, bool trainable) {
  SplitMix rng(derive_seed(seed, name));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor<T> t(std::move(shape));
  for (auto& v : t.mutable_data()) v = T(rng.uniform(-bound, bound));
  params_.add(name, std::move(t), trainable);
}

template <class T>
void LIDModel<T>::add_const(const std::string& name, Shape shape, T value, ad::ParamKind kind) {
  params_.add(name, Tensor<T>(std::move(shape), value), true, kind);
}

template <class T>
void LIDModel<T>::add_pool(const std::string& prefix, std::size_t channels, std::uint64_t seed) {
  const std::size_t a = config_.head.pool_hidden;
  add_weight(prefix + ".att1.w", {channels, a}, channels, seed);
  add_weight(prefix + ".att1.b", {a}, channels, seed);
  add_weight(prefix + ".att2.w", {a, channels}, a, seed);
  add_weight(prefix + ".att2.b", {channels}, a, seed);
}

template <class T>
void LIDModel<T>::add_projector(const std::string& prefix, std::size_t in, std::uint64_t seed) {
  const std::size_t e = config_.head.embedding;
  add_const(prefix + ".bn.g", {in}, T(1), ad::ParamKind::weight);
  add_const(prefix + ".bn.b", {in}, T(0), ad::ParamKind::weight);
  add_const(prefix + ".bn.mean", {in}, T(0), ad::ParamKind::buffer);
  add_const(prefix + ".bn.var", {in}, T(1), ad::ParamKind::buffer);
  add_weight(prefix + ".w", {in, e}, in, seed);
  add_weight(prefix + ".b", {e}, in, seed);
}

template <class T>
void LIDModel<T>::init(std::uint64_t seed) {
  const auto& enc = config_.encoder;
  const auto& head = config_.head;
  const std::size_t d = enc.dim, c = head.channels, g = head.geo_dim, e = head.embedding;

  std::size_t in = 1;
  for (std::size_t i = 0; i < enc.frontend.size(); ++i) {
    const auto& spec = enc.frontend[i];
    const std::string p = "fe." + std::to_string(i);
    add_weight(p + ".w", {spec.kernel, in, spec.channels}, spec.kernel * in, seed);
    add_weight(p + ".b", {spec.channels}, spec.kernel * in, seed);
    in = spec.channels;
  }
  add_const("fe.ln.g", {in}, T(1), ad::ParamKind::weight);
  add_const("fe.ln.b", {in}, T(0), ad::ParamKind::weight);
  add_weight("fe.proj.w", {in, d}, in, seed);
  add_weight("fe.proj.b", {d}, in, seed);

  for (std::size_t n = 1; n <= enc.layers; ++n) {
    const std::string p = "enc." + std::to_string(n);
    add_const(p + ".ln1.g", {d}, T(1), ad::ParamKind::weight);
    add_const(p + ".ln1.b", {d}, T(0), ad::ParamKind::weight);
    add_weight(p + ".qkv.w", {d, 3 * d}, d, seed);
    add_weight(p + ".qkv.b", {3 * d}, d, seed);
    add_weight(p + ".out.w", {d, d}, d, seed);
    add_weight(p + ".out.b", {d}, d, seed);
    add_const(p + ".ln2.g", {d}, T(1), ad::ParamKind::weight);
    add_const(p + ".ln2.b", {d}, T(0), ad::ParamKind::weight);
    add_weight(p + ".ff1.w", {d, enc.ffn}, d, seed);
    add_weight(p + ".ff1.b", {enc.ffn}, d, seed);
    add_weight(p + ".ff2.w", {enc.ffn, d}, enc.ffn, seed);
    add_weight(p + ".ff2.b", {d}, enc.ffn, seed);
  }
  add_const("agg.logits", {enc.layers + 1}, T(0), ad::ParamKind::weight);

  add_weight("ecapa.in.w", {kEcapaKernel, d, c}, kEcapaKernel * d, seed);
  add_weight("ecapa.in.b", {c}, kEcapaKernel * d, seed);
  const std::size_t part = c / kRes2Split, se = std::max<std::size_t>(1, c / kSeReduction);
  for (std::size_t b = 0; b < kEcapaBlocks; ++b) {
    const std::string p = "ecapa." + std::to_string(b);
    add_weight(p + ".c1.w", {1, c, c}, c, seed);
    add_weight(p + ".c1.b", {c}, c, seed);
    for (std::size_t i = 1; i < kRes2Split; ++i) {
      const std::string r = p + ".res" + std::to_string(i);
      add_weight(r + ".w", {3, part, part}, 3 * part, seed);
      add_weight(r + ".b", {part}, 3 * part, seed);
    }
    add_weight(p + ".c2.w", {1, c, c}, c, seed);
    add_weight(p + ".c2.b", {c}, c, seed);
    add_weight(p + ".se1.w", {c, se}, c, seed);
    add_weight(p + ".se1.b", {se}, c, seed);
    add_weight(p + ".se2.w", {se, c}, se, seed);
    add_weight(p + ".se2.b", {c}, se, seed);
  }
  add_weight("ecapa.mfa.w", {1, kEcapaBlocks * c, c}, kEcapaBlocks * c, seed);
  add_weight("ecapa.mfa.b", {c}, kEcapaBlocks * c, seed);

  add_pool("pool", c, seed);
  add_projector("proj", 2 * c, seed);
  add_weight("cls.w", {head.classes * head.subcenters, e}, e, seed);
  add_weight("geo.w", {e, g}, e, seed);
  add_weight("geo.b", {g}, e, seed);

  const bool trainable = config_.cond.freeze == CondFreeze::trainable;
  for (std::size_t n : layers_) {
    const std::string p = "inter." + std::to_string(n);
    add_pool(p + ".pool", d, seed);
    add_projector(p + ".proj", 2 * d, seed);
    add_weight(p + ".geo.w", {e, g}, e, seed);
    add_weight(p + ".geo.b", {g}, e, seed);
    const std::string cp = cond_prefix(n);
    if (!params_.contains(cp + ".w")) {
      add_weight(cp + ".w", {g, d}, g, seed, trainable);
      add_weight(cp + ".b", {d}, g, seed, trainable);
    }
  }
}

template <class T>
std::string LIDModel<T>::cond_prefix(std::size_t n) const {
  return config_.cond.share == CondShare::shared ? "cond" : "cond." + std::to_string(n);
}

template <class T>
void LIDModel<T>::check_layer(std::size_t n, const char* what) const {
  if (!layers_.count(n)) {
    throw std::invalid_argument(std::string(what) + ": layer " + std::to_string(n) +
                                " is not conditioned (M = {" + layers_str(layers_) + "})");
  }
}

// ---------------------------------------------------------------------------
// Components

template <class T>
Tensor<T> LIDModel<T>::frontend(const Bound<T>& p, const Tensor<T>& waves) const {
  const auto& enc = config_.encoder;
  if (waves.rank() != 2) throw ShapeError("frontend: expected (batch, samples), got " +
                                          shape_str(waves.shape()));
  const std::size_t need = min_samples(enc);
  if (waves.dim(1) < need) {
    throw std::invalid_argument("frontend: signal of " + std::to_string(waves.dim(1)) +
                                " samples is shorter than the minimum " + std::to_string(need));
  }
  Tensor<T> x = ad::reshape(waves, {waves.dim(0), waves.dim(1), 1});
  for (std::size_t i = 0; i < enc.frontend.size(); ++i) {
    const std::string n = "fe." + std::to_string(i);
    x = ad::gelu(conv(x, get(p, n + ".w"), get(p, n + ".b"), {enc.frontend[i].stride, 1, 0}));
  }
  return ad::layernorm(x, get(p, "fe.ln.g"), get(p, "fe.ln.b"));
}

template <class T>
Tensor<T> LIDModel<T>::input_projection(const Bound<T>& p, const Tensor<T>& x) const {
  return linear(x, get(p, "fe.proj.w"), get(p, "fe.proj.b"));
}

template <class T>
Tensor<T> LIDModel<T>::encoder_layer(const Bound<T>& p, const Tensor<T>& z, std::size_t n) const {
  const auto& enc = config_.encoder;
  const std::string pre = "enc." + std::to_string(n);
  const std::size_t d = enc.dim, dh = d / enc.heads;
  const T inv = T(1.0 / std::sqrt(static_cast<double>(dh)));

  const Tensor<T> h = ad::layernorm(z, get(p, pre + ".ln1.g"), get(p, pre + ".ln1.b"));
  const Tensor<T> qkv = linear(h, get(p, pre + ".qkv.w"), get(p, pre + ".qkv.b"));
  std::vector<Tensor<T>> heads;
  heads.reserve(enc.heads);
  for (std::size_t i = 0; i < enc.heads; ++i) {
    const Tensor<T> q = ad::slice(qkv, -1, i * dh, (i + 1) * dh);
    const Tensor<T> k = ad::slice(qkv, -1, d + i * dh, d + (i + 1) * dh);
    const Tensor<T> v = ad::slice(qkv, -1, 2 * d + i * dh, 2 * d + (i + 1) * dh);
    const Tensor<T> att = ad::softmax(ad::scale(ad::matmul(q, ad::transpose(k)), inv), -1);
    heads.push_back(ad::matmul(att, v));
  }
  const Tensor<T> ctx = heads.size() == 1 ? heads[0] : ad::concat<T>(heads, -1);
  const Tensor<T> r1 = ad::add(z, linear(ctx, get(p, pre + ".out.w"), get(p, pre + ".out.b")));

  const Tensor<T> h2 = ad::layernorm(r1, get(p, pre + ".ln2.g"), get(p, pre + ".ln2.b"));
  const Tensor<T> ff = linear(ad::gelu(linear(h2, get(p, pre + ".ff1.w"), get(p, pre + ".ff1.b"))),
                              get(p, pre + ".ff2.w"), get(p, pre + ".ff2.b"));
  return ad::add(r1, ff);
}

template <class T>
std::vector<Tensor<T>> LIDModel<T>::encoder_forward(
    const Bound<T>& p, const Tensor<T>& x, const std::map<std::size_t, Tensor<T>>& cond) const {
  for (const auto& [n, c] : cond) {
    check_layer(n, "encoder_forward");
    if (c.shape().back() != config_.encoder.dim) {
      throw ShapeError("encoder_forward: signal for layer " + std::to_string(n) + " has shape " +
                       shape_str(c.shape()) + ", hidden size is " +
                       std::to_string(config_.encoder.dim));
    }
  }
  std::vector<Tensor<T>> out;
  Tensor<T> z = input_projection(p, x);
  for (std::size_t n = 0; n <= config_.encoder.layers; ++n) {
    if (n > 0) z = encoder_layer(p, z, n);
    if (auto it = cond.find(n); it != cond.end()) z = ad::broadcast_add(z, it->second);
    out.push_back(z);
  }
  return out;
}

template <class T>
Tensor<T> LIDModel<T>::aggregate(const Bound<T>& p, std::span<const Tensor<T>> hidden) const {
  if (hidden.size() != config_.encoder.layers + 1) {
    throw ShapeError("aggregate: expected " + std::to_string(config_.encoder.layers + 1) +
                     " hidden states, got " + std::to_string(hidden.size()));
  }
  return ad::weighted_sum(ad::softmax(get(p, "agg.logits"), -1), hidden);
}

template <class T>
Tensor<T> LIDModel<T>::se_gate(const Bound<T>& p, const std::string& prefix,
                               const Tensor<T>& x) const {
  const Tensor<T> s = ad::mean(x, 1);
  const Tensor<T> h = ad::relu(linear(s, get(p, prefix + ".se1.w"), get(p, prefix + ".se1.b")));
  return ad::sigmoid(linear(h, get(p, prefix + ".se2.w"), get(p, prefix + ".se2.b")));
}

template <class T>
Tensor<T> LIDModel<T>::ecapa(const Bound<T>& p, const Tensor<T>& z) const {
  const std::size_t c = config_.head.channels, part = c / kRes2Split;
  Tensor<T> x = ad::relu(conv(z, get(p, "ecapa.in.w"), get(p, "ecapa.in.b"),
                              {1, 1, kEcapaKernel / 2}));
  std::vector<Tensor<T>> outs;
  for (std::size_t b = 0; b < kEcapaBlocks; ++b) {
    const std::string pre = "ecapa." + std::to_string(b);
    const std::size_t dil = b + 1;
    const Tensor<T> u = ad::relu(conv(x, get(p, pre + ".c1.w"), get(p, pre + ".c1.b"), {}));
    std::vector<Tensor<T>> parts;
    parts.push_back(ad::slice(u, -1, 0, part));
    for (std::size_t i = 1; i < kRes2Split; ++i) {
      Tensor<T> xi = ad::slice(u, -1, i * part, (i + 1) * part);
      if (i > 1) xi = ad::add(xi, parts.back());
      const std::string r = pre + ".res" + std::to_string(i);
      parts.push_back(ad::relu(conv(xi, get(p, r + ".w"), get(p, r + ".b"), {1, dil, dil})));
    }
    const Tensor<T> y = ad::relu(
        conv(ad::concat<T>(parts, -1), get(p, pre + ".c2.w"), get(p, pre + ".c2.b"), {}));
    x = ad::add(x, ad::broadcast_mul(y, se_gate(p, pre, y)));
    outs.push_back(x);
  }
  return ad::relu(conv(ad::concat<T>(outs, -1), get(p, "ecapa.mfa.w"), get(p, "ecapa.mfa.b"), {}));
}

template <class T>
Tensor<T> LIDModel<T>::pool(const Bound<T>& p, const std::string& prefix, const Tensor<T>& h) const {
  const Tensor<T> a = ad::tanh(linear(h, get(p, prefix + ".att1.w"), get(p, prefix + ".att1.b")));
  const Tensor<T> w = ad::softmax(linear(a, get(p, prefix + ".att2.w"), get(p, prefix + ".att2.b")), 1);
  const Tensor<T> mu = ad::sum(ad::mul(w, h), 1);
  const Tensor<T> m2 = ad::sum(ad::mul(w, ad::mul(h, h)), 1);
  const Tensor<T> var = ad::relu(ad::sub(m2, ad::mul(mu, mu)));
  const Tensor<T> sigma = ad::sqrt(ad::add_scalar(var, T(kPoolEps)));
  const std::vector<Tensor<T>> parts{mu, sigma};
  return ad::concat<T>(parts, -1);
}

template <class T>
Tensor<T> LIDModel<T>::project(const Bound<T>& p, const std::string& prefix, const Tensor<T>& s,
                               bool training) {
  auto& mean = params_.at(prefix + ".bn.mean").value;
  auto& var = params_.at(prefix + ".bn.var").value;
  ad::BatchNormStats<T> stats{mean.mutable_data(), var.mutable_data()};
  ad::BatchNormAttrs attrs;
  attrs.training = training;
  const Tensor<T> n = ad::batchnorm(s, get(p, prefix + ".bn.g"), get(p, prefix + ".bn.b"), stats, attrs);
  return linear(n, get(p, prefix + ".w"), get(p, prefix + ".b"));
}

template <class T>
Tensor<T> LIDModel<T>::geo_head(const Bound<T>& p, const std::string& prefix,
                                const Tensor<T>& e) const {
  return linear(e, get(p, prefix + ".w"), get(p, prefix + ".b"));
}

template <class T>
AamOutput<T> LIDModel<T>::classifier(const Bound<T>& p, const Tensor<T>& e,
                                     std::span<const int> labels) const {
  const auto& h = config_.head;
  return aam_subcenter_loss(e, get(p, "cls.w"), labels, h.subcenters, h.margin, h.scale);
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> LIDModel<T>::intermediate_head(const Bound<T>& p,
                                                               const Tensor<T>& z, std::size_t n,
                                                               bool training) {
  check_layer(n, "intermediate_head");
  const std::string pre = "inter." + std::to_string(n);
  const Tensor<T> e = project(p, pre + ".proj", pool(p, pre + ".pool", z), training);
  return {e, geo_head(p, pre + ".geo", e)};
}

template <class T>
Tensor<T> LIDModel<T>::cond_proj(const Bound<T>& p, const Tensor<T>& v, std::size_t n) const {
  check_layer(n, "cond_proj");
  const std::string pre = cond_prefix(n);
  return linear(v, get(p, pre + ".w"), get(p, pre + ".b"));
}

// ---------------------------------------------------------------------------
// Full pass

template <class T>
ForwardTrace<T> LIDModel<T>::forward(const Batch<T>& batch, ad::Tape<T>* tape, bool training,
                                     const std::map<std::size_t, Tensor<T>>* pinned) {
  const Mode mode = config_.mode;
  const bool with_loss = !batch.labels.empty();
  if (with_loss && batch.labels.size() != batch.waves.dim(0)) {
    throw ShapeError("forward: " + std::to_string(batch.labels.size()) + " labels for batch " +
                     shape_str(batch.waves.shape()));
  }
  const bool geo = mode != Mode::baseline;
  if (with_loss && geo &&
      (batch.geo.rank() != 2 || batch.geo.dim(0) != batch.waves.dim(0) ||
       batch.geo.dim(1) != config_.head.geo_dim)) {
    throw ShapeError("forward: geolocation targets " + shape_str(batch.geo.shape()));
  }

  const Bound<T> p = bind(tape);
  ForwardTrace<T> tr;
  Tensor<T> z = input_projection(p, frontend(p, batch.waves));
  std::vector<Tensor<T>> stream;
  for (std::size_t n = 0; n <= config_.encoder.layers; ++n) {
    if (n > 0) z = encoder_layer(p, z, n);
    tr.hidden.push_back(z);
    if (layers_.count(n)) {
      auto [e_n, v_n] = intermediate_head(p, z, n, training);
      Tensor<T> v_bar = config_.detach ? ad::detach(v_n) : v_n;
      if (config_.detach && pinned != nullptr) {
        if (auto it = pinned->find(n); it != pinned->end()) v_bar = it->second.detach();
      }
      const Tensor<T> c_n = cond_proj(p, v_bar, n);
      z = ad::broadcast_add(z, c_n);
      tr.inter_embedding.emplace(n, e_n);
      tr.inter_pred.emplace(n, v_n);
      tr.cond.emplace(n, c_n);
      tr.conditioned.emplace(n, z);
      if (with_loss) tr.loss_geo_layer.emplace(n, ad::mse(v_n, batch.geo));
    }
    stream.push_back(z);
  }
  tr.alpha = ad::softmax(get(p, "agg.logits"), -1);
  tr.z_out = aggregate(p, stream);
  tr.embedding = project(p, "proj", pool(p, "pool", ecapa(p, tr.z_out)), training);
  AamOutput<T> cls = classifier(p, tr.embedding, batch.labels);
  tr.cosines = cls.cosines;
  if (geo) tr.geo_pred = geo_head(p, "geo", tr.embedding);
  if (!with_loss) return tr;

  tr.logits = cls.logits;
  tr.loss_class = cls.loss;
  const double lambda = config_.loss.lambda, gamma = config_.loss.gamma;
  if (mode == Mode::baseline) {
    tr.loss_total = cls.loss;
    return tr;
  }
  tr.loss_geo = ad::mse(*tr.geo_pred, batch.geo);
  if (mode == Mode::geo_pred || layers_.empty()) {
    tr.loss_total = loss_l1(cls.loss, *tr.loss_geo, lambda);
    return tr;
  }
  Tensor<T> sum_inter = tr.loss_geo_layer.begin()->second;
  for (auto it = std::next(tr.loss_geo_layer.begin()); it != tr.loss_geo_layer.end(); ++it) {
    sum_inter = ad::add(sum_inter, it->second);
  }
  tr.loss_geo_inter = ad::scale(sum_inter, T(1.0 / static_cast<double>(layers_.size())));
  tr.loss_total = loss_l2(cls.loss, *tr.loss_geo, tr.loss_geo_layer, layers_, lambda, gamma);
  return tr;
}

template <class T>
std::vector<int> LIDModel<T>::classify(const Tensor<T>& waves) {
  Batch<T> b;
  b.waves = waves;
  return argmax_rows(forward(b, nullptr, false).cosines);
}

#define GEOLID_INSTANTIATE(T)                                                                  \
  template class LIDModel<T>;                                                                  \
  template Tensor<T> loss_l1(const Tensor<T>&, const Tensor<T>&, double);                      \
  template Tensor<T> loss_l2(const Tensor<T>&, const Tensor<T>&,                               \
                             const std::map<std::size_t, Tensor<T>>&,                          \
                             const std::set<std::size_t>&, double, double);                    \
  template AamOutput<T> aam_subcenter_loss(const Tensor<T>&, const Tensor<T>&,                 \
                                           std::span<const int>, std::size_t, double, double); \
  template std::vector<int> argmax_rows(const Tensor<T>&);

GEOLID_INSTANTIATE(float)
GEOLID_INSTANTIATE(double)

}  // namespace geolid::model
