#pragma once

// Adversarial training: non-saturating logistic loss, lazy R1 on real inputs,
// Adam for both networks, an EMA copy of the generator, checkpoints, and the
// ablation runner over a list of configurations.

#include "scenegan/archive.hpp"
#include "scenegan/dataset.hpp"
#include "scenegan/discriminator.hpp"
#include "scenegan/evaluation.hpp"
#include "scenegan/generator.hpp"
#include "scenegan/random.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scenegan {

struct TrainConfig {
  int batch_size = 16;
  int total_steps = 2000;
  double lr_generator = 2e-3;
  double lr_discriminator = 2e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double adam_epsilon = 1e-8;
  double r1_gamma = 10.0;
  int r1_interval = 16;
  double ema_decay = 0.999;
  std::uint64_t seed = 0;
  int num_super_classes = 16;
  bool spectral_norm = true;
  /// Uniform noise added to real one-hot masks before renormalizing (0 disables).
  double mask_noise = 0.05;
  int checkpoint_interval = 500;
  int sample_interval = 500;
  int eval_interval = 250;
  int eval_samples = 2000;

  void validate() const;
};

struct AdamState {
  std::vector<Vector<double>> m;
  std::vector<Vector<double>> v;
  std::int64_t steps = 0;
};

/// One Adam update over every parameter of `params`, using their current gradients.
template <typename Scalar>
void adam_step(nn::ParameterSet<Scalar>& params, AdamState& state, double lr, double beta1, double beta2, double eps) {
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& p : params) {
      state.m.push_back(Vector<double>::Zero(p.value.size()));
      state.v.push_back(Vector<double>::Zero(p.value.size()));
    }
  }
  ++state.steps;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const Vector<double> g = p.grad.template cast<double>();
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g.cwiseProduct(g);
    const Vector<double> update = (state.m[i] / c1).array() / ((state.v[i] / c2).array().sqrt() + eps);
    p.value -= (lr * update).template cast<Scalar>();
  }
}

/// ema <- decay * ema + (1 - decay) * current, parameter by parameter.
template <typename Scalar>
void ema_update(nn::ParameterSet<Scalar>& ema, const nn::ParameterSet<Scalar>& current, double decay) {
  require(ema.size() == current.size(), "ema_update: parameter sets differ");
  const auto d = static_cast<Scalar>(decay);
  for (std::size_t i = 0; i < ema.size(); ++i) ema[i].value = d * ema[i].value + (Scalar(1) - d) * current[i].value;
}

/// Dataset indices for a step: sample k of the run comes from a per-epoch
/// permutation seeded by (seed, epoch), so any step can be recomputed alone.
std::vector<std::size_t> batch_indices(std::size_t dataset_size, int batch_size, std::int64_t step, std::uint64_t seed);

struct TrainReport {
  std::int64_t step = 0;
  double d_loss = 0;
  double g_loss = 0;
  double r1 = 0;
  bool r1_applied = false;
  double real_score = 0;
  double fake_score = 0;
  std::vector<double> mask_coverage;  // mean fake m-hat per class
  bool finite = true;
};

template <typename Scalar>
class Trainer {
 public:
  Trainer(const GeneratorConfig& g, const DiscriminatorConfig& d, const TrainConfig& t);

  /// One discriminator update then one generator update on `batch` (labels must be < C).
  TrainReport train_step(const std::vector<const LabeledImage*>& batch);
  TrainReport train_step(const Dataset& data);

  std::int64_t step() const { return step_; }
  const TrainConfig& config() const { return train_; }
  Generator<Scalar>& generator() { return g_; }
  Generator<Scalar>& ema() { return g_ema_; }
  const Generator<Scalar>& ema() const { return g_ema_; }
  Discriminator<Scalar>& discriminator() { return d_; }
  Rng& rng() { return rng_; }

  Archive to_archive() const;
  void save(const std::filesystem::path& path) const;
  static Trainer load(const std::filesystem::path& path);

  FeatureMap<Scalar> real_mask(const LabelMap& labels);

 private:
  GeneratorConfig gen_config_;
  DiscriminatorConfig disc_config_;
  TrainConfig train_;
  Generator<Scalar> g_;
  Generator<Scalar> g_ema_;
  Discriminator<Scalar> d_;
  AdamState adam_g_;
  AdamState adam_d_;
  Rng rng_;
  std::int64_t step_ = 0;
};

/// gamma/2 * ||grad_x D(x)||^2 over the joint (image, mask) input, D = mean patch score.
template <typename Scalar>
double r1_penalty(Discriminator<Scalar>& d, const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask, double gamma);

/// Stages the parameter gradient of coef/2 * ||grad_x D||^2 into `d` (flush_gradients to apply)
/// and returns ||grad_x D||^2.
template <typename Scalar>
double accumulate_r1_gradient(Discriminator<Scalar>& d, const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask,
                              double coef);

extern template class Trainer<float>;
extern template class Trainer<double>;

/// Copies the parameters (and spectral-norm vectors) stored in a checkpoint.
template <typename Scalar>
void load_parameters(const Archive& archive, const std::string& prefix, nn::ParameterSet<Scalar>& params);

/// The generator stored in a checkpoint (EMA weights by default).
Generator<float> load_generator(const std::filesystem::path& checkpoint, bool use_ema = true);
Generator<float> load_generator(const Archive& archive, bool use_ema = true);

/// Fixed evaluation set for proxy-FID during training.
struct ProxyFidProbe {
  FeatureStats real;
  std::vector<Vector<float>> latents;
  std::shared_ptr<const FeatureExtractor> extractor;

  static ProxyFidProbe make(const Dataset& data, int samples, int latent_dim, std::uint64_t seed,
                            std::shared_ptr<const FeatureExtractor> extractor = nullptr);
  double operator()(const Generator<float>& g) const;
};

struct TrainOutcome {
  std::vector<TrainReport> reports;
  std::vector<std::pair<std::int64_t, double>> proxy_fid;  // (step, value), includes step 0
  bool diverged = false;
  std::int64_t steps_run = 0;
};

struct TrainOptions {
  std::optional<std::filesystem::path> out_dir;  // checkpoints, samples, metrics.jsonl
  std::function<void(const TrainReport&)> on_step;
  bool keep_reports = true;
};

/// Trains from scratch for train.total_steps, evaluating proxy-FID of the EMA
/// generator every eval_interval steps (and at step 0 and the end). Stops early,
/// recording divergence, if a loss or weight turns non-finite.
TrainOutcome train(const GeneratorConfig& g, const DiscriminatorConfig& d, const TrainConfig& t, const Dataset& data,
                   const TrainOptions& options = {});

struct AblationRow {
  std::string name;
  int num_classes = 0;
  bool spectral_norm = true;
  int batch_size = 0;
  std::int64_t steps = 0;
  bool diverged = false;
  double proxy_fid = 0;  // NaN when diverged
  std::vector<std::pair<std::int64_t, double>> trajectory;
};

struct AblationConfig {
  std::string name;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  TrainConfig train;
  /// Fine -> super-class table applied to the corpus; identity when empty.
  std::optional<RemapTable> grouping;
};

/// Trains each configuration on the same fine-labeled corpus with the same step
/// budget and reports the final proxy-FID per configuration.
std::vector<AblationRow> run_ablation(const std::vector<AblationConfig>& matrix, const Dataset& fine_corpus,
                                      const TrainOptions& options = {});
std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace scenegan
