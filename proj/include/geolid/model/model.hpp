// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The language identification network.
//
//   waveform -> conv frontend -> Z^0 -> encoder layers 1..N -> Z^1..Z^N
//   Z_out = sum_n alpha^n Z^n           alpha = softmax(aggregation logits)
//   Z_out -> ECAPA-lite -> attentive stats pooling -> projector -> e
//   e -> sub-center angular-margin classifier, e -> geolocation head
//
// In geo-cond mode, for each n in M (ascending) a layer-specific head predicts
// the geolocation vector from Z^n; the prediction passes through detach and a
// linear CondProj, and the result is added to every frame of Z^n before layer
// n+1 reads it.
//
// Tensors are channels-last: (batch, time, features).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "geolid/autodiff/gradcheck.hpp"
#include "geolid/autodiff/ops.hpp"
#include "geolid/autodiff/params.hpp"
#include "geolid/model/config.hpp"

namespace geolid::model {

using ad::Tensor;

template <class T>
using Bound = std::map<std::string, Tensor<T>>;

template <class T>
struct Batch {
  Tensor<T> waves;          // (B, samples)
  std::vector<int> labels;  // empty: inference, no losses
  Tensor<T> geo;            // (B, geo_dim) targets; unused in baseline mode
};

template <class T>
struct AamOutput {
  Tensor<T> cosines;  // (B, classes): best sub-center cosine per class
  Tensor<T> logits;   // margin applied to the target class, then scaled
  Tensor<T> loss;
};

template <class T>
struct ForwardTrace {
  std::vector<Tensor<T>> hidden;                     // Z^0..Z^N before injection
  std::map<std::size_t, Tensor<T>> conditioned;      // Z~^n, n in M
  std::map<std::size_t, Tensor<T>> cond;             // c^n
  std::map<std::size_t, Tensor<T>> inter_embedding;  // e^n
  std::map<std::size_t, Tensor<T>> inter_pred;       // v^n
  Tensor<T> alpha;
  Tensor<T> z_out;
  Tensor<T> embedding;  // e
  std::optional<Tensor<T>> geo_pred;
  Tensor<T> cosines;

  // Present when labels were given.
  std::optional<Tensor<T>> logits;
  std::optional<Tensor<T>> loss_class;
  std::optional<Tensor<T>> loss_geo;
  std::map<std::size_t, Tensor<T>> loss_geo_layer;  // L_geo^n
  std::optional<Tensor<T>> loss_geo_inter;          // mean over M
  std::optional<Tensor<T>> loss_total;
};

// (1 - lambda) * class + lambda * geo.
template <class T>
Tensor<T> loss_l1(const Tensor<T>& loss_class, const Tensor<T>& loss_geo, double lambda);

// (1 - lambda) * class + lambda * ((1 - gamma) * geo + gamma * mean_n geo^n).
// Every n in `layers` needs an entry in `inter`. With no layers it is loss_l1.
template <class T>
Tensor<T> loss_l2(const Tensor<T>& loss_class, const Tensor<T>& loss_geo,
                  const std::map<std::size_t, Tensor<T>>& inter,
                  const std::set<std::size_t>& layers, double lambda, double gamma);

// Sub-center angular-margin softmax. `weights` holds classes * subcenters rows;
// rows j*K .. j*K+K-1 belong to class j.
template <class T>
AamOutput<T> aam_subcenter_loss(const Tensor<T>& embedding, const Tensor<T>& weights,
                                std::span<const int> labels, std::size_t subcenters,
                                double margin, double scale);

template <class T>
class LIDModel {
 public:
  // Parameters initialized from `seed`; each tensor draws from its own stream
  // keyed by name, so shared components start identical across modes.
  LIDModel(ModelConfig config, std::uint64_t seed);
  LIDModel(ModelConfig config, ad::ParameterSet<T> params);

  const ModelConfig& config() const noexcept { return config_; }
  ad::ParameterSet<T>& params() noexcept { return params_; }
  const ad::ParameterSet<T>& params() const noexcept { return params_; }

  // Binds weights to `tape` (or as constants when null).
  Bound<T> bind(ad::Tape<T>* tape) const { return ad::bind(params_, tape); }

  // Full pass. `training` selects batch statistics in batch norm (and updates
  // running statistics). `pinned` replaces the detached prediction of layer n
  // with a fixed value; finite-difference checks use it to hold the
  // non-differentiable path at its unperturbed value.
  ForwardTrace<T> forward(const Batch<T>& batch, ad::Tape<T>* tape, bool training,
                          const std::map<std::size_t, Tensor<T>>* pinned = nullptr);

  // Argmax over classes of the margin-free cosine; inference mode.
  std::vector<int> classify(const Tensor<T>& waves);

  // Components, exposed for testing.
  Tensor<T> frontend(const Bound<T>& p, const Tensor<T>& waves) const;      // (B,T,Din)
  Tensor<T> input_projection(const Bound<T>& p, const Tensor<T>& x) const;  // Z^0
  Tensor<T> encoder_layer(const Bound<T>& p, const Tensor<T>& z, std::size_t n) const;
  // Z^0..Z^N; where a signal is given for n the entry is Z~^n and layer n+1
  // reads it.
  std::vector<Tensor<T>> encoder_forward(const Bound<T>& p, const Tensor<T>& x,
                                         const std::map<std::size_t, Tensor<T>>& cond) const;
  Tensor<T> aggregate(const Bound<T>& p, std::span<const Tensor<T>> hidden) const;
  Tensor<T> ecapa(const Bound<T>& p, const Tensor<T>& z) const;  // (B,T,C)
  Tensor<T> se_gate(const Bound<T>& p, const std::string& prefix, const Tensor<T>& x) const;
  Tensor<T> pool(const Bound<T>& p, const std::string& prefix, const Tensor<T>& h) const;
  Tensor<T> project(const Bound<T>& p, const std::string& prefix, const Tensor<T>& s,
                    bool training);
  Tensor<T> geo_head(const Bound<T>& p, const std::string& prefix, const Tensor<T>& e) const;
  AamOutput<T> classifier(const Bound<T>& p, const Tensor<T>& e,
                          std::span<const int> labels) const;
  // (e^n, v^n). Throws std::invalid_argument when n is not conditioned.
  std::pair<Tensor<T>, Tensor<T>> intermediate_head(const Bound<T>& p, const Tensor<T>& z,
                                                    std::size_t n, bool training);
  Tensor<T> cond_proj(const Bound<T>& p, const Tensor<T>& v, std::size_t n) const;

  // Parameter name prefix of CondProj for layer n.
  std::string cond_prefix(std::size_t n) const;

 private:
  void init(std::uint64_t seed);
  void add_weight(const std::string& name, ad::Shape shape, std::size_t fan_in,
                  std::uint64_t seed, bool trainable = true);
  void add_const(const std::string& name, ad::Shape shape, T value, ad::ParamKind kind);
  void add_pool(const std::string& prefix, std::size_t channels, std::uint64_t seed);
  void add_projector(const std::string& prefix, std::size_t in, std::uint64_t seed);
  void check_layer(std::size_t n, const char* what) const;

  ModelConfig config_;
  std::set<std::size_t> layers_;  // effective M
  ad::ParameterSet<T> params_;
};

// Index of the largest entry in each row; first index wins ties.
template <class T>
std::vector<int> argmax_rows(const Tensor<T>& scores);

}  // namespace geolid::model
