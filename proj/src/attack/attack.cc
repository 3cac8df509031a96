//
// Copyright 2026 The BVFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#include "bvfl/attack/attack.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "bvfl/autodiff/adamw.h"
#include "bvfl/autodiff/ops.h"
#include "bvfl/common/error.h"
#include "bvfl/common/rng.h"
#include "bvfl/model/layers.h"
#include "bvfl/privacy/privacy.h"

namespace bvfl {
namespace {

constexpr std::string_view kStreamPublic = "attack-public";
constexpr std::string_view kStreamDecoderInit = "attack-decoder";
constexpr std::string_view kStreamDecoderBatch = "attack-batch";
constexpr std::string_view kStreamDecoderNoise = "attack-noise";
constexpr std::string_view kStreamCloudWeights = "attack-weights";
constexpr std::string_view kStreamCloudNoise = "attack-release";
constexpr std::string_view kStreamProjection = "attack-projection";
constexpr std::uint32_t kCaptureRound = 0xfffffff1u;

bool Noisy(const EvalOptions& r) {
  return (r.release == Release::kClipNoise || r.release == Release::kNoise) &&
         r.sigma > 0.0;
}

Tensor ApplyRelease(const Tensor& e, const EvalOptions& r, CounterRng& rng) {
  switch (r.release) {
    case Release::kRaw:
      return e;
    case Release::kClip:
      return ClipL2(e, r.clip);
    case Release::kClipNoise:
      return r.sigma > 0 ? Perturb(ClipL2(e, r.clip), r.sigma, r.clip, rng)
                         : ClipL2(e, r.clip);
    case Release::kNoise:
      return r.sigma > 0 ? Perturb(e, r.sigma, r.clip, rng) : e;
  }
  return e;
}

std::vector<std::size_t> PresentRows(const Dataset& d, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.modalities[k].present[i]) out.push_back(i);
  }
  return out;
}

std::vector<double> ColumnMeans(const Tensor& m) {
  std::vector<double> mu(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) mu[j] += m.at(i, j);
  }
  for (double& v : mu) v /= static_cast<double>(m.rows());
  return mu;
}

std::vector<double> ColumnVariances(const Tensor& m, std::span<const double> mu) {
  std::vector<double> var(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double d = m.at(i, j) - mu[j];
      var[j] += d * d;
    }
  }
  for (double& v : var) v /= static_cast<double>(m.rows());
  return var;
}

Tensor GatherRows(const Tensor& m, std::span<const std::size_t> rows) {
  Tensor out({rows.size(), m.cols()});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = m.row(rows[r]);
    std::copy(src.begin(), src.end(), out.mutable_row(r).begin());
  }
  return out;
}

std::vector<std::size_t> Permutation(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.UniformIndex(i)]);
  return p;
}

}  // namespace

void AttackConfig::Validate() const {
  if (!(public_fraction > 0.0 && public_fraction < 1.0)) {
    throw PreconditionError("public fraction must be in (0, 1)");
  }
  if (!(decoder_holdout >= 0.0 && decoder_holdout < 1.0)) {
    throw PreconditionError("decoder holdout must be in [0, 1)");
  }
  if (decoder_epochs == 0 || decoder_batch == 0) {
    throw PreconditionError("decoder epochs and batch size must be positive");
  }
  if (!(decoder_learning_rate > 0)) {
    throw PreconditionError("decoder learning rate must be positive");
  }
  if (projection_subjects < 2 || projection_draws < 2) {
    throw PreconditionError("projection needs two subjects and two draws each");
  }
}

CohortPartition SplitPublic(const Dataset& data, double public_fraction,
                            std::uint64_t seed) {
  if (!(public_fraction > 0.0 && public_fraction < 1.0)) {
    throw PreconditionError("public fraction must be in (0, 1)");
  }
  CounterRng rng(DeriveKey(seed, kStreamPublic, 0, 0));
  std::vector<std::size_t> perm = Permutation(data.size(), rng);
  const auto n_pub = static_cast<std::size_t>(
      std::llround(public_fraction * static_cast<double>(data.size())));
  if (n_pub == 0 || n_pub >= data.size()) {
    throw PreconditionError("public/private split leaves an empty side");
  }
  std::vector<std::size_t> pub(perm.begin(), perm.begin() + n_pub);
  std::vector<std::size_t> priv(perm.begin() + n_pub, perm.end());
  std::sort(pub.begin(), pub.end());
  std::sort(priv.begin(), priv.end());
  CohortPartition out{data.Subset(pub), data.Subset(priv)};
  if (out.public_data.Indices(Split::kTrain).empty() ||
      out.private_data.Indices(Split::kTrain).empty()) {
    throw PreconditionError("public or private cohort has no training subjects");
  }
  return out;
}

ShadowExtractor::ShadowExtractor(std::unique_ptr<ModelBundle> bundle,
                                 std::size_t target)
    : bundle_(std::move(bundle)), target_(target) {
  if (!bundle_ || target_ >= bundle_->modalities()) {
    throw PreconditionError("shadow target out of range");
  }
  scale_.assign(width(), 1.0);
  shift_.assign(width(), 0.0);
}

std::size_t ShadowExtractor::width() const { return bundle_->config().embedding_width; }

void ShadowExtractor::Calibrate(const Tensor& public_inputs,
                                const ObservedEmbeddings& observed) {
  if (public_inputs.rows() < 2 || observed.embeddings.rows() < 2) {
    throw PreconditionError("calibration needs at least two rows on each side");
  }
  if (observed.embeddings.cols() != width()) {
    throw DimensionError("observed embedding width differs from the shadow");
  }
  const Tensor s = ClientEvaluate(extractor(), public_inputs, Release::kRaw, 0, 1, nullptr);
  const std::vector<double> ms = ColumnMeans(s);
  const std::vector<double> vs = ColumnVariances(s, ms);
  const std::vector<double> mo = ColumnMeans(observed.embeddings);
  const std::vector<double> vo = ColumnVariances(observed.embeddings, mo);
  const double noise_var =
      Noisy(observed.release)
          ? std::pow(observed.release.sigma * observed.release.clip, 2)
          : 0.0;
  for (std::size_t j = 0; j < width(); ++j) {
    const double signal = std::max(0.0, vo[j] - noise_var);
    scale_[j] = vs[j] > 1e-24 ? std::sqrt(signal / vs[j]) : 0.0;
    shift_[j] = mo[j] - scale_[j] * ms[j];
  }
}

Tensor ShadowExtractor::Embed(const Tensor& inputs) const {
  Tensor e = ClientEvaluate(extractor(), inputs, Release::kRaw, 0, 1, nullptr);
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t j = 0; j < e.cols(); ++j) {
      e.at(i, j) = scale_[j] * e.at(i, j) + shift_[j];
    }
  }
  return e;
}

ShadowExtractor TrainShadow(const Dataset& public_data, const ModelConfig& config,
                            const TrainOptions& options, std::size_t target) {
  if (public_data.size() == 0) throw PreconditionError("empty public cohort");
  TrainOptions o = options;
  o.on_epoch = nullptr;
  TrainResult r = RunVflTraining(public_data, config, o);
  return ShadowExtractor(std::move(r.bundle), target);
}

std::vector<std::size_t> MirrorWidths(const ModalitySpec& spec,
                                      const ModelConfig& config) {
  if (spec.kind == ModalityKind::kClinical) return {config.clinical_hidden_width};
  const std::size_t h = config.hidden_width_override
                            ? config.hidden_width_override
                            : SelectHiddenWidth(spec.width, spec.scale);
  return std::vector<std::size_t>(spec.hidden_layers, h);
}

Decoder::Decoder(std::size_t embedding_width, std::vector<std::size_t> hidden,
                 std::size_t output_width, std::uint64_t seed) {
  if (embedding_width == 0 || output_width == 0) {
    throw DimensionError("decoder widths must be positive");
  }
  widths_.push_back(embedding_width);
  for (std::size_t h : hidden) {
    if (h == 0) throw DimensionError("decoder widths must be positive");
    widths_.push_back(h);
  }
  widths_.push_back(output_width);
  CounterRng rng(DeriveKey(seed, kStreamDecoderInit, 0, 0));
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    Tensor w({widths_[l], widths_[l + 1]});
    for (double& v : w.mutable_data()) v = sd * rng.Normal();
    weights_.emplace_back("decoder.l" + std::to_string(l) + ".weight", std::move(w));
    biases_.emplace_back("decoder.l" + std::to_string(l) + ".bias",
                         Tensor::Zeros({widths_[l + 1]}));
  }
}

ParamList Decoder::parameters() {
  ParamList out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

Var Decoder::Forward(Tape& tape, Var x) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    x = ops::AddRow(ops::MatMul(x, tape.Bind(weights_[l])), tape.Bind(biases_[l]));
    if (l + 1 < weights_.size()) x = ops::Relu(x);
  }
  return x;
}

void Decoder::Train(const Tensor& shadow_embeddings, const Tensor& targets,
                    const EvalOptions& release, const AttackConfig& config) {
  config.Validate();
  if (frozen_) throw ContractError("decoder parameters are fixed after training");
  if (shadow_embeddings.ndim() != 2 || shadow_embeddings.cols() != input_width() ||
      targets.ndim() != 2 || targets.cols() != output_width() ||
      targets.rows() != shadow_embeddings.rows()) {
    throw DimensionError("decoder training pairs have mismatched shapes");
  }
  if (targets.rows() == 0) throw PreconditionError("no public pairs to train the decoder");
  // Held-out slice of the public pairs picks the stopping epoch.
  std::vector<std::size_t> fit, held;
  {
    CounterRng split(DeriveKey(config.seed, kStreamDecoderBatch, 1, 0));
    const std::vector<std::size_t> perm = Permutation(targets.rows(), split);
    const auto n_held = static_cast<std::size_t>(
        config.decoder_holdout * static_cast<double>(targets.rows()));
    held.assign(perm.begin(), perm.begin() + n_held);
    fit.assign(perm.begin() + n_held, perm.end());
  }
  if (fit.empty()) throw PreconditionError("no public pairs left to fit the decoder");
  const Tensor fit_e = GatherRows(shadow_embeddings, fit);
  const Tensor fit_x = GatherRows(targets, fit);
  const std::size_t n = fit.size();
  {
    CounterRng noise(DeriveKey(config.seed, kStreamDecoderNoise, 1, 0));
    const Tensor first = ApplyRelease(fit_e, release, noise);
    const std::vector<double> mu = ColumnMeans(first);
    const std::vector<double> var = ColumnVariances(first, mu);
    input_mean_ = mu;
    input_inv_sd_.clear();
    for (double v : var) input_inv_sd_.push_back(v > 1e-24 ? 1.0 / std::sqrt(v) : 1.0);
  }
  Tensor held_in, held_x;
  if (!held.empty()) {
    CounterRng noise(DeriveKey(config.seed, kStreamDecoderNoise, 2, 0));
    held_in = Standardize(ApplyRelease(GatherRows(shadow_embeddings, held), release, noise));
    held_x = GatherRows(targets, held);
  }
  auto held_mse = [&]() {
    Tape tape(false);
    const Tensor y = Forward(tape, tape.Constant(held_in)).value();
    double s2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s2 += (y[i] - held_x[i]) * (y[i] - held_x[i]);
    return s2 / static_cast<double>(y.size());
  };
  double best = held.empty() ? 0.0 : held_mse();
  std::vector<Tensor> best_w, best_b;
  auto keep = [&]() {
    best_w.clear();
    best_b.clear();
    for (const Parameter& p : weights_) best_w.push_back(p.value);
    for (const Parameter& p : biases_) best_b.push_back(p.value);
  };
  keep();
  AdamWConfig adam;
  adam.learning_rate = config.decoder_learning_rate;
  adam.weight_decay = config.decoder_weight_decay;
  for (std::size_t e = 0; e < config.decoder_epochs; ++e) {
    CounterRng noise(DeriveKey(config.seed, kStreamDecoderNoise, 0, e));
    CounterRng order(DeriveKey(config.seed, kStreamDecoderBatch, 0, e));
    const Tensor inputs = Standardize(ApplyRelease(fit_e, release, noise));
    const std::vector<std::size_t> perm = Permutation(n, order);
    for (std::size_t b = 0; b < n; b += config.decoder_batch) {
      const std::size_t end = std::min(n, b + config.decoder_batch);
      Tensor xb({end - b, input_width()});
      Tensor yb({end - b, output_width()});
      for (std::size_t i = b; i < end; ++i) {
        const auto src = inputs.row(perm[i]);
        std::copy(src.begin(), src.end(), xb.mutable_row(i - b).begin());
        const auto tgt = fit_x.row(perm[i]);
        std::copy(tgt.begin(), tgt.end(), yb.mutable_row(i - b).begin());
      }
      Tape tape;
      Var diff = ops::Sub(Forward(tape, tape.Constant(std::move(xb))),
                          tape.Constant(std::move(yb)));
      Var loss = ops::Mean(ops::Mul(diff, diff));
      const Gradients g = tape.Backward(loss);
      ApplyAdamW(parameters(), tape, g, adam);
    }
    if (held.empty()) {
      keep();
    } else if (const double m = held_mse(); m < best) {
      best = m;
      keep();
    }
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].value = best_w[l];
    biases_[l].value = best_b[l];
  }
  frozen_ = true;
}

Tensor Decoder::Reconstruct(const Tensor& embeddings) const {
  if (embeddings.ndim() != 2 || embeddings.cols() != input_width()) {
    throw DimensionError("decoder expects " + std::to_string(input_width()) +
                         " columns, got shape " + ShapeToString(embeddings.shape()));
  }
  Tape tape(false);
  return const_cast<Decoder*>(this)
      ->Forward(tape, tape.Constant(Standardize(embeddings)))
      .value();
}

Tensor Decoder::Standardize(Tensor x) const {
  if (input_mean_.empty()) return x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      x.at(i, j) = (x.at(i, j) - input_mean_[j]) * input_inv_sd_[j];
    }
  }
  return x;
}

AttackReport ScoreReconstruction(const Tensor& reconstruction, const Tensor& truth,
                                 const Tensor& public_features) {
  if (!reconstruction.SameShape(truth) || truth.ndim() != 2 ||
      public_features.ndim() != 2 || public_features.cols() != truth.cols()) {
    throw DimensionError("reconstruction, truth and public features disagree in shape");
  }
  if (truth.rows() == 0) throw PreconditionError("nothing to score");
  const std::vector<double> mu = ColumnMeans(public_features);
  AttackReport r;
  r.per_feature_mse.assign(truth.cols(), 0.0);
  double base = 0.0;
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    for (std::size_t j = 0; j < truth.cols(); ++j) {
      const double d = reconstruction.at(i, j) - truth.at(i, j);
      const double m = mu[j] - truth.at(i, j);
      r.per_feature_mse[j] += d * d;
      base += m * m;
    }
  }
  const auto rows = static_cast<double>(truth.rows());
  for (double& v : r.per_feature_mse) v /= rows;
  r.mse = std::accumulate(r.per_feature_mse.begin(), r.per_feature_mse.end(), 0.0) /
          static_cast<double>(truth.cols());
  r.mean_baseline_mse = base / (rows * static_cast<double>(truth.cols()));
  return r;
}

std::string AttackReport::ToText() const {
  std::ostringstream os;
  os.precision(8);
  os << "mse=" << mse << "\nmean_baseline_mse=" << mean_baseline_mse << "\n";
  os << "feature\tmse\n";
  for (std::size_t j = 0; j < per_feature_mse.size(); ++j) {
    os << j << '\t' << per_feature_mse[j] << '\n';
  }
  return os.str();
}

Tensor PrincipalProjection(const Tensor& points, std::size_t components) {
  if (points.ndim() != 2 || points.rows() < 2) {
    throw PreconditionError("projection needs at least two points");
  }
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (components == 0 || components > d) {
    throw PreconditionError("component count must be in [1, width]");
  }
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = points.at(i, j);
  }
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  Eigen::MatrixXd basis(d, components);
  for (std::size_t c = 0; c < components; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(static_cast<Eigen::Index>(d - 1 - c));
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0) v = -v;
    basis.col(static_cast<Eigen::Index>(c)) = v;
  }
  const Eigen::MatrixXd proj = x * basis;
  Tensor out({n, components});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < components; ++c) out.at(i, c) = proj(i, c);
  }
  return out;
}

double Silhouette(const Tensor& points, std::span<const std::size_t> labels) {
  const std::size_t n = points.rows();
  if (points.ndim() != 2 || labels.size() != n) {
    throw DimensionError("one label per point required");
  }
  const std::size_t k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> count(k, 0);
  for (std::size_t l : labels) ++count[l];
  std::size_t used = 0;
  for (std::size_t c : count) used += c > 0;
  if (used < 2) throw PreconditionError("silhouette needs at least two clusters");
  double total = 0.0;
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < points.cols(); ++c) {
        const double t = points.at(i, c) - points.at(j, c);
        d2 += t * t;
      }
      sum[labels[j]] += std::sqrt(d2);
    }
    const std::size_t own = labels[i];
    if (count[own] < 2) continue;  // singleton: s = 0
    const double a = sum[own] / static_cast<double>(count[own] - 1);
    double b = INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && count[c] > 0) b = std::min(b, sum[c] / static_cast<double>(count[c]));
    }
    const double m = std::max(a, b);
    total += m > 0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

ReleaseCloud SampleReleases(Extractor& extractor, const Tensor& inputs,
                            const EvalOptions& release, std::size_t draws,
                            std::uint64_t seed) {
  if (draws == 0 || inputs.rows() == 0) throw PreconditionError("empty release cloud");
  const std::size_t n = inputs.rows();
  std::vector<Tensor> per_draw;
  for (std::size_t r = 0; r < draws; ++r) {
    CounterRng weights(DeriveKey(seed, kStreamCloudWeights, 0, r));
    CounterRng noise(DeriveKey(seed, kStreamCloudNoise, 0, r));
    Tape tape(false);
    ForwardContext ctx{&tape, WeightMode::kSample, false, &weights, nullptr, nullptr};
    Var raw = extractor.Forward(ctx, inputs);
    per_draw.push_back(ReleaseEmbedding(raw, release.release, release.sigma,
                                        release.clip, &noise)
                           .value());
  }
  const std::size_t d = per_draw[0].cols();
  ReleaseCloud cloud{Tensor({n * draws, d}), {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < draws; ++r) {
      const auto src = per_draw[r].row(i);
      std::copy(src.begin(), src.end(), cloud.points.mutable_row(i * draws + r).begin());
      cloud.labels.push_back(i);
    }
  }
  return cloud;
}

AttackOutcome RunAttack(const Dataset& cohort, const ModelConfig& config,
                        const TrainOptions& options, const AttackConfig& attack) {
  attack.Validate();
  const ModelConfig cfg = ConfigForDataset(cohort, config);
  if (attack.target >= cfg.modalities.size()) {
    throw PreconditionError("attack target is not a modality of the cohort");
  }
  const std::size_t k = attack.target;
  const CohortPartition part = SplitPublic(cohort, attack.public_fraction, attack.seed);

  // The real run on the private cohort.
  TrainOptions o = options;
  o.on_epoch = nullptr;
  TrainResult real = RunVflTraining(part.private_data, cfg, o);
  AttackOutcome out;
  out.test_cindex =
      EvaluateSplit(*real.bundle, part.private_data, Split::kTest, real.t_max, real.eval)
          .cindex;
  Extractor& client = real.bundle->extractor(k);
  const std::vector<std::size_t> priv_rows = PresentRows(part.private_data, k);
  const Tensor private_truth = part.private_data.Rows(k, priv_rows);
  ObservedEmbeddings observed;
  observed.release = real.eval;
  {
    CounterRng noise(DeriveKey(o.seed, kStreamDpEval, k, kCaptureRound));
    observed.embeddings = ClientEvaluate(client, private_truth, real.eval.release,
                                         real.eval.sigma, real.eval.clip, &noise);
  }

  // Attacker path: public cohort and observed embeddings only.
  const std::vector<std::size_t> pub_rows = PresentRows(part.public_data, k);
  const Tensor public_x = part.public_data.Rows(k, pub_rows);
  ShadowExtractor shadow = TrainShadow(part.public_data, cfg, o, k);
  shadow.Calibrate(public_x, observed);
  Decoder decoder(shadow.width(), MirrorWidths(cfg.modalities[k], cfg), public_x.cols(),
                  attack.seed);
  decoder.Train(shadow.Embed(public_x), public_x, observed.release, attack);
  const Tensor recon = decoder.Reconstruct(observed.embeddings);
  out.report = ScoreReconstruction(recon, private_truth, public_x);

  // Distinguishability of repeated releases.
  CounterRng pick(DeriveKey(attack.seed, kStreamProjection, 0, 0));
  std::vector<std::size_t> perm = Permutation(priv_rows.size(), pick);
  const std::size_t p = std::min(attack.projection_subjects, priv_rows.size());
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < p; ++i) chosen.push_back(priv_rows[perm[i]]);
  const ReleaseCloud cloud =
      SampleReleases(client, part.private_data.Rows(k, chosen), real.eval,
                     attack.projection_draws, attack.seed);
  out.projection = PrincipalProjection(cloud.points, 2);
  out.projection_labels = cloud.labels;
  out.silhouette = Silhouette(out.projection, out.projection_labels);
  return out;
}

void WriteProjection(const std::string& path, const Tensor& points) {
  if (points.ndim() != 2 || points.cols() != 2) {
    throw DimensionError("projection file needs two columns");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(10);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    out << points.at(i, 0) << ' ' << points.at(i, 1) << '\n';
  }
}

}  // namespace bvfl
