#include "scenegan/latent_explorer.hpp"

#include "scenegan/archive.hpp"
#include "scenegan/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <thread>

namespace scenegan {

std::string to_string(HarvestTarget target) {
  switch (target) {
    case HarvestTarget::Style: return "style";
    case HarvestTarget::WPlus: return "wplus";
    case HarvestTarget::GlobalW: return "global_w";
  }
  return "style";
}

HarvestTarget parse_harvest_target(const std::string& name) {
  if (name == "style") return HarvestTarget::Style;
  if (name == "wplus") return HarvestTarget::WPlus;
  if (name == "global_w") return HarvestTarget::GlobalW;
  throw std::invalid_argument("unknown harvest target '" + name + "' (style, wplus, global_w)");
}

namespace {

template <typename Scalar>
Vector<double> harvest_one(const Generator<Scalar>& g, const Vector<Scalar>& z, int cls, int layer, HarvestTarget target) {
  const auto triple = g.map_latent(z);
  switch (target) {
    case HarvestTarget::Style: return g.style_vector(triple, cls, layer).template cast<double>();
    case HarvestTarget::WPlus: return triple.component(layer_group(layer)).template cast<double>();
    case HarvestTarget::GlobalW: {
      const auto d = triple.base.size();
      Vector<double> out(3 * d);
      out << triple.base.template cast<double>(), triple.shape.template cast<double>(), triple.texture.template cast<double>();
      return out;
    }
  }
  return {};
}

}  // namespace

template <typename Scalar>
StyleSampleMatrix collect_styles(const Generator<Scalar>& g, int n, int cls, int layer, std::uint64_t seed, HarvestTarget target) {
  const auto& cfg = g.config();
  require(cls >= 0 && cls < cfg.num_classes, "collect_styles: class " + std::to_string(cls) + " out of range");
  require(layer >= 0 && layer < GeneratorConfig::kLayers, "collect_styles: layer out of range");
  const int dim = target == HarvestTarget::Style ? cfg.style_dim : (target == HarvestTarget::WPlus ? cfg.latent_dim : 3 * cfg.latent_dim);
  require(n >= dim, "collect_styles: N = " + std::to_string(n) + " is below the sample dimension " + std::to_string(dim) +
                        "; PCA would be ill-posed");

  StyleSampleMatrix out{cls, layer, target, Matrix<double>(n, dim)};
  const int workers = std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), n / 256));
  auto run = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      const auto z = nn::normal_vector<Scalar>(rng, cfg.latent_dim, 1.0);
      out.samples.row(i) = harvest_one(g, z, cls, layer, target).transpose();
    }
  };
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, n * w / workers, n * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }
  return out;
}

template StyleSampleMatrix collect_styles<float>(const Generator<float>&, int, int, int, std::uint64_t, HarvestTarget);
template StyleSampleMatrix collect_styles<double>(const Generator<double>&, int, int, int, std::uint64_t, HarvestTarget);

DirectionEntry pca(const Matrix<double>& samples, int k) {
  const auto n = samples.rows(), dim = samples.cols();
  require(n >= 2, "pca: need at least two samples");
  require(k >= 1 && k <= dim, "pca: k = " + std::to_string(k) + " must lie in [1, " + std::to_string(dim) + "]");
  DirectionEntry entry;
  entry.mean = samples.colwise().mean().transpose();
  const Matrix<double> centered = samples.rowwise() - entry.mean.transpose();
  const Matrix<double> cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix<double>> solver(cov);
  require(solver.info() == Eigen::Success, "pca: eigendecomposition failed");

  entry.basis.resize(k, dim);
  entry.variances.resize(k);
  const double top = std::max(solver.eigenvalues()[dim - 1], 0.0);
  for (int i = 0; i < k; ++i) {
    const Eigen::Index src = dim - 1 - i;
    Vector<double> v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    entry.basis.row(i) = v.transpose();
    entry.variances[i] = std::max(solver.eigenvalues()[src], 0.0);
    if (entry.variances[i] <= 1e-12 * std::max(top, 1e-300) || top == 0.0) ++entry.degenerate;
  }
  return entry;
}

DirectionEntry pca(const StyleSampleMatrix& samples, int k) {
  DirectionEntry entry = pca(samples.samples, k);
  entry.cls = samples.cls;
  entry.layer = samples.layer;
  entry.target = samples.target;
  return entry;
}

Vector<double> edit(const Vector<double>& style, const DirectionEntry& entry, const Vector<double>& y) {
  require(y.size() == entry.k(), "edit: y has " + std::to_string(y.size()) + " coordinates, the basis has " +
                                     std::to_string(entry.k()) + " components");
  require(style.size() == entry.dim(), "edit: style dimension does not match the basis");
  return style + entry.basis.transpose() * y;
}

const DirectionEntry* DirectionBank::find(int cls, int layer) const {
  for (const auto& e : entries)
    if (e.cls == cls && e.layer == layer) return &e;
  return nullptr;
}

const DirectionEntry& DirectionBank::at(int cls, int layer) const {
  const auto* e = find(cls, layer);
  if (!e) throw std::out_of_range("direction bank has no entry for class " + std::to_string(cls) + ", layer " + std::to_string(layer));
  return *e;
}

void DirectionBank::save(const std::filesystem::path& path) const {
  Archive archive;
  archive.meta["kind"] = "direction_bank";
  archive.meta["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    const std::string key = "class" + std::to_string(e.cls) + ".layer" + std::to_string(e.layer);
    archive.meta["entries"].push_back({{"class", e.cls}, {"layer", e.layer}, {"target", to_string(e.target)}, {"k", e.k()},
                                       {"dim", e.dim()}, {"degenerate", e.degenerate}, {"key", key}});
    archive.put_vector<double>(key + "/mean", e.mean);
    archive.put_matrix(key + "/basis", e.basis);
    archive.put_vector<double>(key + "/variances", e.variances);
  }
  archive.save(path);
}

DirectionBank DirectionBank::load(const std::filesystem::path& path) {
  const Archive archive = Archive::load(path);
  require(archive.meta.value("kind", "") == "direction_bank", "direction bank: " + path.string() + " is not a direction bank");
  DirectionBank bank;
  for (const auto& m : archive.meta.at("entries")) {
    DirectionEntry e;
    e.cls = m.at("class").get<int>();
    e.layer = m.at("layer").get<int>();
    e.target = parse_harvest_target(m.at("target").get<std::string>());
    e.degenerate = m.value("degenerate", 0);
    const std::string key = m.at("key").get<std::string>();
    e.mean = archive.get<double>(key + "/mean");
    e.basis = archive.get_matrix<double>(key + "/basis");
    e.variances = archive.get<double>(key + "/variances");
    require(e.basis.rows() == e.variances.size() && e.basis.cols() == e.mean.size(), "direction bank: inconsistent entry " + key);
    bank.entries.push_back(std::move(e));
  }
  return bank;
}

template <typename Scalar>
DirectionBank discover_directions(const Generator<Scalar>& g, const std::vector<int>& classes, const std::vector<int>& layers,
                                  int n, int k, std::uint64_t seed, HarvestTarget target) {
  DirectionBank bank;
  for (int c : classes)
    for (int l : layers) bank.entries.push_back(pca(collect_styles(g, n, c, l, seed, target), k));
  return bank;
}

template DirectionBank discover_directions<float>(const Generator<float>&, const std::vector<int>&, const std::vector<int>&, int,
                                                  int, std::uint64_t, HarvestTarget);
template DirectionBank discover_directions<double>(const Generator<double>&, const std::vector<int>&, const std::vector<int>&,
                                                   int, int, std::uint64_t, HarvestTarget);

EditSpec EditSpec::from_json(const nlohmann::json& doc, const DirectionBank& bank) {
  require(doc.is_object() && doc.contains("edits") && doc["edits"].is_array(), "edit spec: expected {\"edits\": [...]}");
  EditSpec spec;
  for (const auto& item : doc["edits"]) {
    require(item.is_object() && item.contains("class") && item.contains("layer"), "edit spec: every edit needs class and layer");
    EditItem e;
    e.cls = item["class"].get<int>();
    e.layer = item["layer"].get<int>();
    const auto* entry = bank.find(e.cls, e.layer);
    require(entry != nullptr, "edit spec: no direction for class " + std::to_string(e.cls) + ", layer " + std::to_string(e.layer));
    if (item.contains("y")) {
      const auto y = item["y"].get<std::vector<double>>();
      e.y = Eigen::Map<const Vector<double>>(y.data(), static_cast<Eigen::Index>(y.size()));
    } else {
      require(item.contains("component") && item.contains("magnitude"), "edit spec: give either y or component + magnitude");
      const int comp = item["component"].get<int>();
      require(comp >= 0 && comp < entry->k(), "edit spec: component " + std::to_string(comp) + " out of range");
      e.y = Vector<double>::Zero(entry->k());
      e.y[comp] = item["magnitude"].get<double>();
    }
    spec.items.push_back(std::move(e));
  }
  spec.validate(bank);
  return spec;
}

nlohmann::json EditSpec::to_json() const {
  nlohmann::json edits = nlohmann::json::array();
  for (const auto& e : items)
    edits.push_back({{"class", e.cls}, {"layer", e.layer}, {"y", std::vector<double>(e.y.data(), e.y.data() + e.y.size())}});
  return {{"edits", edits}};
}

void EditSpec::validate(const DirectionBank& bank) const {
  for (const auto& e : items) {
    const auto* entry = bank.find(e.cls, e.layer);
    require(entry != nullptr, "edit spec: no direction for class " + std::to_string(e.cls) + ", layer " + std::to_string(e.layer));
    require(entry->target == HarvestTarget::Style, "edit spec: only style-space directions can edit a scene");
    require(e.y.size() == entry->k(), "edit spec: y for class " + std::to_string(e.cls) + ", layer " + std::to_string(e.layer) +
                                          " needs " + std::to_string(entry->k()) + " coordinates");
  }
}

template <typename Scalar>
StyleBank<Scalar> edited_styles(const Generator<Scalar>& g, const std::vector<LatentTriple<Scalar>>& per_class,
                                const DirectionBank& bank, const EditSpec& spec) {
  spec.validate(bank);
  StyleBank<Scalar> styles = g.style_bank(per_class);
  for (const auto& item : spec.items) {
    require(item.cls < g.config().num_classes, "edit: class out of range");
    auto& s = styles.at(item.cls, item.layer);
    s = edit(s.template cast<double>(), bank.at(item.cls, item.layer), item.y).template cast<Scalar>();
  }
  return styles;
}

template <typename Scalar>
CompositionResult<Scalar> apply_edit(const Generator<Scalar>& g, const std::vector<LatentTriple<Scalar>>& per_class,
                                     const DirectionBank& bank, const EditSpec& spec) {
  return g.generate(edited_styles(g, per_class, bank, spec));
}

template StyleBank<float> edited_styles<float>(const Generator<float>&, const std::vector<LatentTriple<float>>&,
                                               const DirectionBank&, const EditSpec&);
template StyleBank<double> edited_styles<double>(const Generator<double>&, const std::vector<LatentTriple<double>>&,
                                                 const DirectionBank&, const EditSpec&);
template CompositionResult<float> apply_edit<float>(const Generator<float>&, const std::vector<LatentTriple<float>>&,
                                                    const DirectionBank&, const EditSpec&);
template CompositionResult<double> apply_edit<double>(const Generator<double>&, const std::vector<LatentTriple<double>>&,
                                                      const DirectionBank&, const EditSpec&);

}  // namespace scenegan
