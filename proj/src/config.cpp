#include "scenegan/config.hpp"

#include <fstream>
#include <sstream>

namespace scenegan {

void apply_override(nlohmann::json& document, const std::string& dotted_path, const std::string& value) {
  require(!dotted_path.empty(), "override: empty key");
  nlohmann::json* node = &document;
  std::stringstream path(dotted_path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(path, key, '.')) {
    require(!key.empty(), "override: malformed key '" + dotted_path + "'");
    keys.push_back(key);
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    require(node->is_object() && node->contains(keys[i]), "override: unknown section '" + keys[i] + "' in '" + dotted_path + "'");
    node = &(*node)[keys[i]];
  }
  require(node->is_object() && node->contains(keys.back()), "override: unknown field '" + dotted_path + "'");
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  (*node)[keys.back()] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
}

namespace {
void check_known(const nlohmann::json& user, const nlohmann::json& known, const std::string& where) {
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    require(known.contains(key), "config: unknown field '" + path + "'");
    if (value.is_object() && known[key].is_object()) check_known(value, known[key], path);
  }
}
}  // namespace

void finalize(RunConfig& config) {
  config.generator.num_classes = config.train.num_super_classes;
  config.discriminator.mask_channels = config.train.num_super_classes;
  config.discriminator.resolution = config.generator.output_resolution;
  config.discriminator.spectral_norm = config.train.spectral_norm;
  config.train.seed = config.seed;
  config.toy.resolution = config.generator.output_resolution;
  config.generator.validate();
  config.discriminator.validate();
  config.train.validate();
  config.toy.validate();
}

RunConfig resolve_run_config_json(const nlohmann::json& user, const std::vector<std::string>& overrides) {
  nlohmann::json doc = RunConfig{};
  require(user.is_null() || user.is_object(), "config: top level must be an object");
  if (user.is_object()) {
    check_known(user, doc, "");
    doc.merge_patch(user);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    require(eq != std::string::npos, "override '" + o + "' must look like section.field=value");
    apply_override(doc, o.substr(0, eq), o.substr(eq + 1));
  }
  RunConfig config = doc.get<RunConfig>();
  finalize(config);
  return config;
}

RunConfig resolve_run_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  if (!file) return resolve_run_config_json(nlohmann::json(), overrides);
  std::ifstream in(*file);
  if (!in) throw std::runtime_error("cannot open config " + file->string());
  const auto user = nlohmann::json::parse(in, nullptr, false);
  require(!user.is_discarded(), "config: " + file->string() + " is not valid JSON");
  return resolve_run_config_json(user, overrides);
}

}  // namespace scenegan
