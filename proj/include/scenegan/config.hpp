#pragma once

// JSON (de)serialization of every configuration record. Missing fields keep
// their defaults, so partial documents are valid.

#include "scenegan/discriminator.hpp"
#include "scenegan/generator.hpp"
#include "scenegan/toy_scenes.hpp"
#include "scenegan/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scenegan {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GeneratorConfig, num_classes, latent_dim, style_dim, coarse_resolution,
                                                output_resolution, fourier_features, local_channels, feature_channels,
                                                render_channels, mapping_layers, mapping_lr_multiplier)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DiscriminatorConfig, resolution, mask_channels, image_channels, channels,
                                                fusion_stage, spectral_norm, power_iterations)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, batch_size, total_steps, lr_generator, lr_discriminator,
                                                beta1, beta2, adam_epsilon, r1_gamma, r1_interval, ema_decay, seed,
                                                num_super_classes, spectral_norm, mask_noise, checkpoint_interval,
                                                sample_interval, eval_interval, eval_samples)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BandRange, min_fraction, max_fraction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CountRange, min, max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ToySceneSpec, resolution, sky_band, road_band, buildings,
                                                trees, cars, people, poles, color_jitter)

/// Every module's configuration, one section each.
struct RunConfig {
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  TrainConfig train;
  ToySceneSpec toy;
  std::uint64_t seed = 0;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, generator, discriminator, train, toy, seed)

/// Sets a field addressed by a dotted path ("train.batch_size") from a textual value,
/// parsed as JSON when possible and as a string otherwise.
void apply_override(nlohmann::json& document, const std::string& dotted_path, const std::string& value);

/// Defaults, then the optional file, then "a.b=value" overrides; the class count is
/// propagated from train.num_super_classes to the generator and discriminator.
RunConfig resolve_run_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides);
RunConfig resolve_run_config_json(const nlohmann::json& user, const std::vector<std::string>& overrides);
void finalize(RunConfig& config);

}  // namespace scenegan
