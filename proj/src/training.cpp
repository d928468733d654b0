#include "scenegan/training.hpp"

#include "scenegan/class_grouping.hpp"
#include "scenegan/config.hpp"
#include "scenegan/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace scenegan {

void TrainConfig::validate() const {
  require(batch_size >= 1, "train: batch_size must be >= 1");
  require(total_steps >= 0, "train: total_steps must be >= 0");
  require(lr_generator > 0 && lr_discriminator > 0, "train: learning rates must be positive");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "train: Adam betas must lie in [0, 1)");
  require(adam_epsilon > 0, "train: adam_epsilon must be positive");
  require(r1_gamma >= 0 && r1_interval >= 1, "train: r1_gamma must be >= 0 and r1_interval >= 1");
  require(ema_decay >= 0 && ema_decay < 1, "train: ema_decay must lie in [0, 1)");
  require(num_super_classes >= 2, "train: num_super_classes must be >= 2");
  require(mask_noise >= 0, "train: mask_noise must be non-negative");
  require(checkpoint_interval >= 1 && sample_interval >= 1 && eval_interval >= 1, "train: intervals must be >= 1");
  require(eval_samples >= 2, "train: eval_samples must be >= 2");
}

std::vector<std::size_t> batch_indices(std::size_t dataset_size, int batch_size, std::int64_t step, std::uint64_t seed) {
  require(dataset_size > 0, "batch_indices: empty dataset");
  std::vector<std::size_t> out;
  std::int64_t cached_epoch = -1;
  std::vector<std::size_t> perm(dataset_size);
  const auto n = static_cast<std::int64_t>(dataset_size);
  for (int j = 0; j < batch_size; ++j) {
    const std::int64_t k = step * batch_size + j;
    const std::int64_t epoch = k / n;
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::mt19937_64 engine(derive_seed(seed, 0x5u + static_cast<std::uint64_t>(epoch)));
      // Fisher-Yates on raw engine output keeps the order identical across standard libraries.
      for (std::size_t i = dataset_size - 1; i > 0; --i) std::swap(perm[i], perm[engine() % (i + 1)]);
      cached_epoch = epoch;
    }
    out.push_back(perm[static_cast<std::size_t>(k % n)]);
  }
  return out;
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

template <typename Scalar>
bool all_finite(const nn::ParameterSet<Scalar>& params) {
  for (const auto& p : params)
    if (!p.value.allFinite()) return false;
  return true;
}

template <typename Scalar>
FeatureMap<Scalar> constant_map(int h, int w, double value) {
  return FeatureMap<Scalar>(Matrix<Scalar>::Constant(1, h * w, static_cast<Scalar>(value)), h, w);
}

template <typename Scalar>
FeatureMap<Scalar> shifted(const FeatureMap<Scalar>& x, const FeatureMap<Scalar>& dir, Scalar eps) {
  return FeatureMap<Scalar>(x.values + eps * dir.values, x.height, x.width);
}

}  // namespace

template <typename Scalar>
double r1_penalty(Discriminator<Scalar>& d, const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask, double gamma) {
  DiscriminatorTrace<Scalar> trace;
  const auto score = d.forward(image, mask, trace);
  const auto [gi, gm] = d.backward(trace, constant_map<Scalar>(score.height, score.width, 1.0 / score.pixels()), false, true);
  return 0.5 * gamma * (static_cast<double>(gi.values.squaredNorm()) + static_cast<double>(gm.values.squaredNorm()));
}

template double r1_penalty<float>(Discriminator<float>&, const FeatureMap<float>&, const FeatureMap<float>&, double);
template double r1_penalty<double>(Discriminator<double>&, const FeatureMap<double>&, const FeatureMap<double>&, double);

namespace {
// input-space length of the difference probe; small enough to rarely cross an activation kink
template <typename Scalar>
constexpr double r1_probe_step() {
  return std::is_same_v<Scalar, double> ? 1e-6 : 1e-3;
}
}  // namespace

template <typename Scalar>
double accumulate_r1_gradient(Discriminator<Scalar>& d, const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask,
                              double coef) {
  DiscriminatorTrace<Scalar> trace;
  const auto score = d.forward(image, mask, trace);
  const int sr = score.height;
  const double pixels = score.pixels();
  const auto [gi, gm] = d.backward(trace, constant_map<Scalar>(sr, sr, 1.0 / pixels), false, true);
  const double norm2 = static_cast<double>(gi.values.squaredNorm()) + static_cast<double>(gm.values.squaredNorm());
  if (!(norm2 > 0) || !std::isfinite(norm2) || coef == 0.0) return norm2;
  // d/dtheta (1/2 ||g||^2) = H_{theta x} g, a central difference of parameter gradients along g
  const double eps = r1_probe_step<Scalar>() / std::sqrt(norm2);
  for (int sign : {1, -1}) {
    const auto e = static_cast<Scalar>(sign * eps);
    d.forward(shifted(image, gi, e), shifted(mask, gm, e), trace);
    d.backward(trace, constant_map<Scalar>(sr, sr, sign * coef / (2.0 * eps * pixels)), true, false);
  }
  return norm2;
}

template double accumulate_r1_gradient<float>(Discriminator<float>&, const FeatureMap<float>&, const FeatureMap<float>&, double);
template double accumulate_r1_gradient<double>(Discriminator<double>&, const FeatureMap<double>&, const FeatureMap<double>&, double);

namespace {
DiscriminatorConfig bind_discriminator(DiscriminatorConfig d, const GeneratorConfig& g, const TrainConfig& t) {
  require(t.num_super_classes == g.num_classes, "train: num_super_classes (" + std::to_string(t.num_super_classes) +
                                                    ") must equal generator.num_classes (" + std::to_string(g.num_classes) + ")");
  d.mask_channels = g.num_classes;
  d.resolution = g.output_resolution;
  d.spectral_norm = t.spectral_norm;
  return d;
}
}  // namespace

template <typename Scalar>
Trainer<Scalar>::Trainer(const GeneratorConfig& g, const DiscriminatorConfig& d, const TrainConfig& t)
    : gen_config_(g),
      disc_config_(bind_discriminator(d, g, t)),
      train_(t),
      g_(g, derive_seed(t.seed, 11)),
      g_ema_(g_),
      d_(disc_config_, derive_seed(t.seed, 12)),
      rng_(derive_seed(t.seed, 13)) {
  train_.validate();
}

template <typename Scalar>
FeatureMap<Scalar> Trainer<Scalar>::real_mask(const LabelMap& labels) {
  const int classes = gen_config_.num_classes;
  const int top = labels.values.size() ? static_cast<int>(labels.values.maxCoeff()) : 0;
  require(top < classes, "train: label value " + std::to_string(top) + " is not a super-class index (C = " +
                             std::to_string(classes) + "); remap the dataset first");
  require(labels.values.minCoeff() >= 0, "train: negative label value");
  LabelMap bound = labels;
  bound.num_classes = classes;
  FeatureMap<Scalar> mask = one_hot<Scalar>(bound);
  if (train_.mask_noise > 0) {
    for (Eigen::Index i = 0; i < mask.values.size(); ++i)
      mask.values.data()[i] += static_cast<Scalar>(train_.mask_noise * rng_.uniform());
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> sums = mask.values.colwise().sum();
    mask.values.array().rowwise() /= sums.array();
  }
  return mask;
}

template <typename Scalar>
TrainReport Trainer<Scalar>::train_step(const Dataset& data) {
  const auto idx = batch_indices(data.size(), train_.batch_size, step_, train_.seed);
  std::vector<const LabeledImage*> batch;
  for (auto i : idx) batch.push_back(&data[i]);
  return train_step(batch);
}

template <typename Scalar>
TrainReport Trainer<Scalar>::train_step(const std::vector<const LabeledImage*>& batch) {
  require(!batch.empty(), "train_step: empty batch");
  const int n = static_cast<int>(batch.size());
  const int classes = gen_config_.num_classes;
  TrainReport report;
  report.step = step_;

  std::vector<FeatureMap<Scalar>> real_images, real_masks;
  for (const auto* sample : batch) {
    real_images.push_back(sample->image.template cast<Scalar>());
    real_masks.push_back(real_mask(sample->labels));
  }

  std::vector<GeneratorTrace<Scalar>> fakes(static_cast<std::size_t>(n));
  for (auto& trace : fakes) g_.forward(nn::normal_vector<Scalar>(rng_, gen_config_.latent_dim, 1.0), trace);

  // Discriminator update.
  d_.parameters().zero_grad();
  d_.discard_gradients();
  const int sr = disc_config_.score_resolution();
  const double pixels = static_cast<double>(sr * sr);
  double d_loss = 0;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    DiscriminatorTrace<Scalar> trace;
    const double real = d_.forward(real_images[ui], real_masks[ui], trace).values.template cast<double>().mean();
    d_loss += softplus(-real);
    report.real_score += real / n;
    d_.backward(trace, constant_map<Scalar>(sr, sr, -sigmoid(-real) / (pixels * n)), true, false);

    const auto& fake = fakes[ui].result;
    const double score = d_.forward(fake.image, fake.final_mask, trace).values.template cast<double>().mean();
    d_loss += softplus(score);
    report.fake_score += score / n;
    d_.backward(trace, constant_map<Scalar>(sr, sr, sigmoid(score) / (pixels * n)), true, false);
  }
  report.d_loss = d_loss / n;

  if (train_.r1_gamma > 0 && step_ % train_.r1_interval == 0) {
    // Lazy R1: gamma/2 * interval * mean ||g_i||^2 with g_i = grad_x D(x_i).
    report.r1_applied = true;
    const double coef = train_.r1_gamma * train_.r1_interval / n;
    double r1 = 0;
    for (std::size_t i = 0; i < real_images.size(); ++i) r1 += accumulate_r1_gradient(d_, real_images[i], real_masks[i], coef);
    report.r1 = 0.5 * train_.r1_gamma * r1 / n;
  }
  d_.flush_gradients();
  adam_step(d_.parameters(), adam_d_, train_.lr_discriminator, train_.beta1, train_.beta2, train_.adam_epsilon);
  d_.refresh(disc_config_.power_iterations);

  // Generator update on the same fakes.
  g_.parameters().zero_grad();
  double g_loss = 0;
  report.mask_coverage.assign(static_cast<std::size_t>(classes), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto& fake = fakes[static_cast<std::size_t>(i)].result;
    DiscriminatorTrace<Scalar> trace;
    const double score = d_.forward(fake.image, fake.final_mask, trace).values.template cast<double>().mean();
    g_loss += softplus(-score);
    const auto [gi, gm] = d_.backward(trace, constant_map<Scalar>(sr, sr, -sigmoid(-score) / (pixels * n)), false, true);
    g_.backward(fakes[static_cast<std::size_t>(i)], gi, gm);
    const Vector<Scalar> coverage = fake.final_mask.values.rowwise().mean();
    for (int c = 0; c < classes; ++c) report.mask_coverage[static_cast<std::size_t>(c)] += static_cast<double>(coverage[c]) / n;
  }
  report.g_loss = g_loss / n;
  adam_step(g_.parameters(), adam_g_, train_.lr_generator, train_.beta1, train_.beta2, train_.adam_epsilon);
  ema_update(g_ema_.parameters(), g_.parameters(), train_.ema_decay);

  report.finite = std::isfinite(report.d_loss) && std::isfinite(report.g_loss) && std::isfinite(report.r1) &&
                  all_finite(g_.parameters()) && all_finite(d_.parameters()) && all_finite(g_ema_.parameters());
  ++step_;
  return report;
}

namespace {

template <typename Scalar>
void put_parameters(Archive& archive, const std::string& prefix, const nn::ParameterSet<Scalar>& params) {
  for (const auto& p : params) {
    std::vector<std::int64_t> shape(p.shape.begin(), p.shape.end());
    archive.put<Scalar>(prefix + p.name, shape, p.value.data(), static_cast<std::size_t>(p.value.size()));
  }
}

template <typename Scalar>
void put_adam(Archive& archive, const std::string& prefix, const AdamState& state, const nn::ParameterSet<Scalar>& params) {
  for (std::size_t i = 0; i < state.m.size(); ++i) {
    archive.put_vector<double>(prefix + ".m/" + params[i].name, state.m[i]);
    archive.put_vector<double>(prefix + ".v/" + params[i].name, state.v[i]);
  }
}

template <typename Scalar>
AdamState get_adam(const Archive& archive, const std::string& prefix, const nn::ParameterSet<Scalar>& params,
                   std::int64_t steps) {
  AdamState state;
  state.steps = steps;
  if (steps == 0) return state;
  for (const auto& p : params) {
    state.m.push_back(archive.get<double>(prefix + ".m/" + p.name));
    state.v.push_back(archive.get<double>(prefix + ".v/" + p.name));
  }
  return state;
}

}  // namespace

template <typename Scalar>
void load_parameters(const Archive& archive, const std::string& prefix, nn::ParameterSet<Scalar>& params) {
  for (auto& p : params) {
    Vector<Scalar> value = archive.get<Scalar>(prefix + p.name);
    require(value.size() == p.value.size(), "checkpoint: array '" + prefix + p.name + "' has the wrong size");
    p.value = std::move(value);
  }
}

template void load_parameters<float>(const Archive&, const std::string&, nn::ParameterSet<float>&);
template void load_parameters<double>(const Archive&, const std::string&, nn::ParameterSet<double>&);

template <typename Scalar>
Archive Trainer<Scalar>::to_archive() const {
  Archive archive;
  archive.meta["kind"] = "checkpoint";
  archive.meta["generator"] = gen_config_;
  archive.meta["discriminator"] = disc_config_;
  archive.meta["train"] = train_;
  archive.meta["step"] = step_;
  archive.meta["rng"] = rng_.state();
  archive.meta["adam_generator_steps"] = adam_g_.steps;
  archive.meta["adam_discriminator_steps"] = adam_d_.steps;
  put_parameters(archive, "generator/", g_.parameters());
  put_parameters(archive, "generator_ema/", g_ema_.parameters());
  put_parameters(archive, "discriminator/", d_.parameters());
  const auto& power = d_.power_states();
  for (std::size_t i = 0; i < power.size(); ++i) {
    const std::string key = "discriminator.power/" + std::to_string(i);
    archive.put_vector<Scalar>(key + "/u", power[i].u);
    archive.put_vector<Scalar>(key + "/v", power[i].v);
    archive.put<Scalar>(key + "/sigma", {1}, &power[i].sigma, 1);
  }
  put_adam(archive, "adam.generator", adam_g_, g_.parameters());
  put_adam(archive, "adam.discriminator", adam_d_, d_.parameters());
  return archive;
}

template <typename Scalar>
void Trainer<Scalar>::save(const std::filesystem::path& path) const {
  to_archive().save(path);
}

template <typename Scalar>
Trainer<Scalar> Trainer<Scalar>::load(const std::filesystem::path& path) {
  const Archive archive = Archive::load(path);
  require(archive.meta.value("kind", "") == "checkpoint", "checkpoint: " + path.string() + " is not a training checkpoint");
  Trainer trainer(archive.meta.at("generator").get<GeneratorConfig>(), archive.meta.at("discriminator").get<DiscriminatorConfig>(),
                  archive.meta.at("train").get<TrainConfig>());
  load_parameters(archive, "generator/", trainer.g_.parameters());
  load_parameters(archive, "generator_ema/", trainer.g_ema_.parameters());
  load_parameters(archive, "discriminator/", trainer.d_.parameters());
  auto& power = trainer.d_.power_states();
  for (std::size_t i = 0; i < power.size(); ++i) {
    const std::string key = "discriminator.power/" + std::to_string(i);
    power[i].u = archive.get<Scalar>(key + "/u");
    power[i].v = archive.get<Scalar>(key + "/v");
    power[i].sigma = archive.get<Scalar>(key + "/sigma")[0];
  }
  trainer.d_.refresh(0);
  trainer.step_ = archive.meta.at("step").get<std::int64_t>();
  trainer.rng_.restore(archive.meta.at("rng").get<std::string>());
  trainer.adam_g_ = get_adam(archive, "adam.generator", trainer.g_.parameters(), archive.meta.at("adam_generator_steps").get<std::int64_t>());
  trainer.adam_d_ =
      get_adam(archive, "adam.discriminator", trainer.d_.parameters(), archive.meta.at("adam_discriminator_steps").get<std::int64_t>());
  return trainer;
}

template class Trainer<float>;
template class Trainer<double>;

Generator<float> load_generator(const Archive& archive, bool use_ema) {
  require(archive.meta.contains("generator"), "checkpoint: no generator configuration in archive");
  Generator<float> g(archive.meta.at("generator").get<GeneratorConfig>(), 0);
  load_parameters(archive, use_ema ? "generator_ema/" : "generator/", g.parameters());
  return g;
}

Generator<float> load_generator(const std::filesystem::path& checkpoint, bool use_ema) {
  return load_generator(Archive::load(checkpoint), use_ema);
}

ProxyFidProbe ProxyFidProbe::make(const Dataset& data, int samples, int latent_dim, std::uint64_t seed,
                                  std::shared_ptr<const FeatureExtractor> extractor) {
  ProxyFidProbe probe;
  probe.extractor = extractor ? std::move(extractor) : std::make_shared<ProxyExtractor>();
  const auto count = std::min<std::size_t>(data.size(), static_cast<std::size_t>(samples));
  std::vector<Image> images;
  for (std::size_t i = 0; i < count; ++i) images.push_back(data[i].image);
  probe.real = feature_stats(images, *probe.extractor);
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) probe.latents.push_back(nn::normal_vector<float>(rng, latent_dim, 1.0));
  return probe;
}

double ProxyFidProbe::operator()(const Generator<float>& g) const {
  std::vector<Image> images;
  images.reserve(latents.size());
  for (const auto& z : latents) {
    auto result = g.generate(g.map_latent(z));
    if (!result.image.values.allFinite()) return std::numeric_limits<double>::quiet_NaN();
    images.push_back(std::move(result.image));
  }
  return frechet_distance(real, feature_stats(images, *extractor));
}

namespace {

std::string step_name(const char* prefix, std::int64_t step, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%06lld%s", prefix, static_cast<long long>(step), ext);
  return buf;
}

void write_samples(const std::filesystem::path& path, const Generator<float>& g, const std::vector<Vector<float>>& zs) {
  std::vector<Bitmap> tiles;
  const auto palette = default_palette(g.config().num_classes);
  for (const auto& z : zs) {
    const auto r = g.generate(g.map_latent(z));
    tiles.push_back(to_bitmap(r.image));
    tiles.push_back(colorize(argmax_labels(r.final_mask), palette));
  }
  write_png(path, tile(tiles, 8));
}

}  // namespace

TrainOutcome train(const GeneratorConfig& g, const DiscriminatorConfig& d, const TrainConfig& t, const Dataset& data,
                   const TrainOptions& options) {
  require(!data.empty(), "train: empty dataset");
  Trainer<float> trainer(g, d, t);
  const auto probe = ProxyFidProbe::make(data, t.eval_samples, g.latent_dim, derive_seed(t.seed, 99));
  std::vector<Vector<float>> sample_z(probe.latents.begin(), probe.latents.begin() + std::min<std::size_t>(16, probe.latents.size()));

  std::ofstream log;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir / "checkpoints");
    std::filesystem::create_directories(*options.out_dir / "samples");
    log.open(*options.out_dir / "metrics.jsonl", std::ios::trunc);
  }
  auto write_record = [&](const TrainReport* r, std::int64_t step, std::optional<double> fid) {
    if (!log) return;
    nlohmann::json rec{{"step", step}, {"d_loss", nullptr}, {"g_loss", nullptr}, {"r1", nullptr},
                       {"real_score", nullptr}, {"fake_score", nullptr}, {"proxy_fid", nullptr}};
    if (r) {
      rec["d_loss"] = r->d_loss;
      rec["g_loss"] = r->g_loss;
      rec["r1"] = r->r1_applied ? nlohmann::json(r->r1) : nlohmann::json(nullptr);
      rec["real_score"] = r->real_score;
      rec["fake_score"] = r->fake_score;
    }
    if (fid && std::isfinite(*fid)) rec["proxy_fid"] = *fid;
    log << rec.dump() << '\n';
    log.flush();
  };

  TrainOutcome outcome;
  const double fid0 = probe(trainer.ema());
  outcome.proxy_fid.emplace_back(0, fid0);
  write_record(nullptr, 0, fid0);
  if (options.out_dir) write_samples(*options.out_dir / "samples" / step_name("step_", 0, ".png"), trainer.ema(), sample_z);

  for (int s = 0; s < t.total_steps; ++s) {
    TrainReport report = trainer.train_step(data);
    const std::int64_t step = trainer.step();
    outcome.steps_run = step;
    if (options.on_step) options.on_step(report);
    std::optional<double> fid;
    if (!report.finite) {
      outcome.diverged = true;
      fid = std::numeric_limits<double>::quiet_NaN();
    } else if (step % t.eval_interval == 0 || step == t.total_steps) {
      fid = probe(trainer.ema());
    }
    if (fid) outcome.proxy_fid.emplace_back(step, *fid);
    write_record(&report, step, fid);
    if (options.keep_reports) outcome.reports.push_back(std::move(report));
    if (outcome.diverged) break;
    if (options.out_dir) {
      if (step % t.checkpoint_interval == 0 || step == t.total_steps) {
        trainer.save(*options.out_dir / "checkpoints" / step_name("step_", step, ".scng"));
        trainer.save(*options.out_dir / "checkpoint.scng");
      }
      if (step % t.sample_interval == 0 || step == t.total_steps)
        write_samples(*options.out_dir / "samples" / step_name("step_", step, ".png"), trainer.ema(), sample_z);
    }
  }
  return outcome;
}

std::vector<AblationRow> run_ablation(const std::vector<AblationConfig>& matrix, const Dataset& fine_corpus,
                                      const TrainOptions& options) {
  std::vector<AblationRow> rows;
  for (const auto& entry : matrix) {
    const Dataset data = entry.grouping ? remap_dataset(fine_corpus, *entry.grouping) : fine_corpus;
    const int classes = entry.grouping ? entry.grouping->num_super_classes() : (data.empty() ? 0 : data.front().labels.num_classes);
    GeneratorConfig g = entry.generator;
    TrainConfig t = entry.train;
    g.num_classes = classes;
    t.num_super_classes = classes;

    TrainOptions run_options = options;
    if (options.out_dir) run_options.out_dir = *options.out_dir / entry.name;
    const auto outcome = train(g, entry.discriminator, t, data, run_options);

    AblationRow row;
    row.name = entry.name;
    row.num_classes = classes;
    row.spectral_norm = t.spectral_norm;
    row.batch_size = t.batch_size;
    row.steps = outcome.steps_run;
    row.diverged = outcome.diverged;
    row.trajectory = outcome.proxy_fid;
    row.proxy_fid = outcome.diverged || outcome.proxy_fid.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                                   : outcome.proxy_fid.back().second;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "| config | super-classes | SpectralNorm | Batchsize | steps | proxy-FID |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    char fid[32];
    if (std::isfinite(r.proxy_fid))
      std::snprintf(fid, sizeof(fid), "%.3f", r.proxy_fid);
    else
      std::snprintf(fid, sizeof(fid), "NaN (diverged)");
    out << "| " << r.name << " | " << r.num_classes << " | " << (r.spectral_norm ? "yes" : "no") << " | " << r.batch_size
        << " | " << r.steps << " | " << fid << " |\n";
  }
  return out.str();
}

}  // namespace scenegan
