#include "scenegan/cli.hpp"

#include "scenegan/config.hpp"
#include "scenegan/dataset.hpp"
#include "scenegan/evaluation.hpp"
#include "scenegan/image_io.hpp"
#include "scenegan/latent_explorer.hpp"
#include "scenegan/service.hpp"
#include "scenegan/toy_scenes.hpp"
#include "scenegan/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace scenegan {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  RunConfig resolve() const {
    auto all = overrides;
    if (seed) all.push_back("seed=" + std::to_string(*seed));
    return resolve_run_config(config.empty() ? std::nullopt : std::optional<fs::path>(config), all);
  }
};

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw std::runtime_error(path.string() + " is not valid JSON");
  return doc;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

void write_run_config(const fs::path& dir, const RunConfig& cfg) { write_json(dir / "run_config.json", cfg); }

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

// A dataset directory holds images/ and labels/; a bare directory of PNGs is used as is.
fs::path sub_or_self(const fs::path& dir, const char* sub) { return fs::is_directory(dir / sub) ? dir / sub : dir; }

std::vector<Image> read_images(const fs::path& dir) {
  std::vector<Image> images;
  for (const auto& f : list_pngs(sub_or_self(dir, "images"))) images.push_back(from_bitmap(read_png(f)));
  if (images.empty()) throw std::runtime_error("no PNG images in " + dir.string());
  return images;
}

int max_label(const Bitmap& b) {
  if (b.channels != 1) throw std::runtime_error("label maps must be single-channel 8-bit images");
  return b.pixels.empty() ? 0 : *std::max_element(b.pixels.begin(), b.pixels.end());
}

Palette palette_for(const std::string& table, int classes) {
  return table.empty() ? default_palette(classes) : palette_from_table(load_remap_table(table));
}

std::string numbered(const char* prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d", prefix, i);
  return buf;
}

void write_result(const fs::path& dir, const std::string& stem, const CompositionResult<float>& r, const Palette& palette) {
  const auto labels = argmax_labels(r.final_mask);
  write_png(dir / (stem + ".png"), to_bitmap(r.image));
  write_png(dir / (stem + "_labels.png"), label_bitmap(labels));
  write_png(dir / (stem + "_mask.png"), colorize(labels, palette));
  write_png(dir / (stem + "_overlay.png"), overlay(r.image, labels, palette));
}

// ---- subcommands

int cmd_preprocess(const Globals& g, const std::string& table_path, const fs::path& in, const fs::path& out, std::ostream& os,
                   std::ostream& es) {
  const auto cfg = g.resolve();
  const auto table = load_remap_table(table_path);
  const fs::path label_dir = sub_or_self(in, "labels");
  const auto files = list_pngs(label_dir);
  if (files.empty()) throw std::runtime_error("no label maps in " + in.string());

  std::vector<LabelMap> maps;
  std::map<int, int> unmapped;  // value -> files containing it
  for (const auto& f : files) {
    const auto bitmap = read_png(f);
    maps.push_back(labels_from_bitmap(bitmap, std::max(max_label(bitmap) + 1, table.num_source_classes())));
    for (int v : unmapped_values(maps.back(), table)) ++unmapped[v];
  }
  if (!unmapped.empty()) {
    es << "error: unmapped class values:";
    const char* sep = " ";
    for (const auto& [v, n] : unmapped) {
      es << sep << v << " (" << n << (n == 1 ? " file)" : " files)");
      sep = ", ";
    }
    es << "\n";
    return 1;
  }

  const bool layout = label_dir != in;
  const fs::path out_labels = layout ? out / "labels" : out;
  fs::create_directories(out_labels);
  for (std::size_t i = 0; i < files.size(); ++i)
    write_png(out_labels / files[i].filename(), label_bitmap(remap(maps[i], table)));
  if (layout && fs::is_directory(in / "images")) {
    fs::create_directories(out / "images");
    for (const auto& f : list_pngs(in / "images")) fs::copy_file(f, out / "images" / f.filename(), fs::copy_options::overwrite_existing);
  }
  write_run_config(out, cfg);
  os << "remapped " << files.size() << " label maps to " << table.num_super_classes() << " super-classes\n";
  return 0;
}

int cmd_make_toy(const Globals& g, const std::string& spec_path, int count, bool grouped, const fs::path& out, std::ostream& os) {
  auto cfg = g.resolve();
  if (!spec_path.empty()) {
    nlohmann::json doc = cfg.toy;
    doc.merge_patch(read_json(spec_path));
    cfg.toy = doc.get<ToySceneSpec>();
    cfg.toy.validate();
  }
  auto data = make_toy_corpus(cfg.toy, count, cfg.seed);
  if (grouped) data = remap_dataset(data, toy_remap_table());
  save_dataset(out, data);
  write_run_config(out, cfg);
  write_json(out / "grouping.json", nlohmann::json::parse(serialize_remap_table(toy_remap_table())));
  os << "wrote " << count << " scenes (" << (grouped ? kToySuperClasses : kToyFineClasses) << " classes) to " << out.string() << "\n";
  return 0;
}

int cmd_train(const Globals& g, const fs::path& data_dir, const std::string& table_path, int toy_count, int log_every,
              const fs::path& out, std::ostream& os) {
  const auto cfg = g.resolve();
  Dataset data;
  if (toy_count > 0) {
    data = make_toy_corpus(cfg.toy, toy_count, cfg.seed);
    if (cfg.train.num_super_classes == kToySuperClasses) data = remap_dataset(data, toy_remap_table());
  } else if (!table_path.empty()) {
    const auto table = load_remap_table(table_path);
    data = remap_dataset(load_dataset(data_dir, table.num_source_classes()), table);
  } else {
    data = load_dataset(data_dir, cfg.train.num_super_classes);
  }
  if (data.empty()) throw std::runtime_error("training set is empty");
  if (data.front().labels.num_classes != cfg.train.num_super_classes)
    throw std::runtime_error("dataset has " + std::to_string(data.front().labels.num_classes) + " classes but train.num_super_classes is " +
                             std::to_string(cfg.train.num_super_classes));
  if (data.front().image.height != cfg.generator.output_resolution)
    throw std::runtime_error("dataset images are " + std::to_string(data.front().image.height) + " px, generator.output_resolution is " +
                             std::to_string(cfg.generator.output_resolution));

  fs::create_directories(out);
  write_run_config(out, cfg);
  TrainOptions options;
  options.out_dir = out;
  options.keep_reports = false;
  options.on_step = [&](const TrainReport& r) {
    if (log_every > 0 && r.step % log_every == 0)
      os << "step " << r.step << " d_loss " << r.d_loss << " g_loss " << r.g_loss << " real " << r.real_score << " fake "
         << r.fake_score << std::endl;
  };
  const auto outcome = train(cfg.generator, cfg.discriminator, cfg.train, data, options);
  for (const auto& [step, fid] : outcome.proxy_fid) os << "proxy-FID step " << step << ": " << fid << "\n";
  if (outcome.diverged) {
    os << "training diverged at step " << outcome.steps_run << "\n";
    return 1;
  }
  return 0;
}

int cmd_generate(const Globals& g, const fs::path& ckpt, int count, const std::string& table, const fs::path& out, std::ostream& os) {
  auto cfg = g.resolve();
  const auto model = load_generator(ckpt);
  cfg.generator = model.config();
  const auto palette = palette_for(table, model.config().num_classes);
  fs::create_directories(out);
  for (int i = 0; i < count; ++i)
    write_result(out, numbered("sample", i), model.generate(scene_latents(model, cfg.seed + i)), palette);
  write_run_config(out, cfg);
  os << "wrote " << count << " samples to " << out.string() << "\n";
  return 0;
}

int cmd_explore(const Globals& g, const fs::path& ckpt, std::vector<int> classes, const std::vector<int>& layers, int n, int k,
                const std::string& target, const fs::path& out, std::ostream& os) {
  auto cfg = g.resolve();
  const auto model = load_generator(ckpt);
  cfg.generator = model.config();
  if (classes.empty())
    for (int c = 0; c < model.config().num_classes; ++c) classes.push_back(c);
  const auto bank = discover_directions(model, classes, layers, n, k, cfg.seed, parse_harvest_target(target));
  bank.save(out);
  write_run_config(out.has_parent_path() ? out.parent_path() : fs::path("."), cfg);
  for (const auto& e : bank.entries)
    os << "class " << e.cls << " layer " << e.layer << ": top variance " << e.variances[0] << (e.degenerate ? ", degenerate" : "")
       << "\n";
  return 0;
}

int cmd_edit(const Globals& g, const fs::path& ckpt, const fs::path& bank_path, const fs::path& spec_path, const std::string& table,
             const fs::path& out, std::ostream& os) {
  auto cfg = g.resolve();
  const auto model = load_generator(ckpt);
  cfg.generator = model.config();
  const auto bank = DirectionBank::load(bank_path);
  const auto spec = EditSpec::from_json(read_json(spec_path), bank);
  spec.validate(bank);
  const auto palette = palette_for(table, model.config().num_classes);
  const auto latents = scene_latents(model, cfg.seed);
  fs::create_directories(out);
  write_result(out, "baseline", model.generate(latents), palette);
  write_result(out, "edited", apply_edit(model, latents, bank, spec), palette);
  write_json(out / "edit_spec.json", spec.to_json());
  write_run_config(out, cfg);
  os << "applied " << spec.items.size() << " edits, wrote " << out.string() << "\n";
  return 0;
}

int cmd_eval_fid(const Globals& g, const fs::path& real, const fs::path& fake, const std::string& out, std::ostream& os) {
  const auto cfg = g.resolve();
  const ProxyExtractor extractor;
  const auto a = read_images(real), b = read_images(fake);
  const double fid = frechet_distance(feature_stats(a, extractor), feature_stats(b, extractor));
  const nlohmann::json result{{"proxy_fid", fid}, {"real", a.size()}, {"fake", b.size()}};
  os << result.dump() << "\n";
  if (!out.empty()) {
    write_json(out, result);
    write_run_config(fs::path(out).has_parent_path() ? fs::path(out).parent_path() : fs::path("."), cfg);
  }
  return 0;
}

int cmd_eval_miou(const Globals& g, const fs::path& pred, const fs::path& gt, int classes, const std::string& out, std::ostream& os) {
  const auto cfg = g.resolve();
  const auto pred_files = list_pngs(sub_or_self(pred, "labels"));
  const fs::path gt_dir = sub_or_self(gt, "labels");
  if (pred_files.empty()) throw std::runtime_error("no label maps in " + pred.string());
  std::vector<Bitmap> p, t;
  int seen = 0;
  for (const auto& f : pred_files) {
    const fs::path match = gt_dir / f.filename();
    if (!fs::exists(match)) throw std::runtime_error("no ground truth for " + f.filename().string());
    p.push_back(read_png(f));
    t.push_back(read_png(match));
    seen = std::max({seen, max_label(p.back()) + 1, max_label(t.back()) + 1});
  }
  if (classes <= 0) classes = seen;
  if (seen > classes) throw std::runtime_error("label value " + std::to_string(seen - 1) + " outside --classes " + std::to_string(classes));
  std::vector<LabelMap> pm, tm;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pm.push_back(labels_from_bitmap(p[i], classes));
    tm.push_back(labels_from_bitmap(t[i], classes));
  }
  const nlohmann::json result{{"miou", miou(pm, tm, classes)}, {"images", pm.size()}, {"classes", classes}};
  os << result.dump() << "\n";
  if (!out.empty()) {
    write_json(out, result);
    write_run_config(fs::path(out).has_parent_path() ? fs::path(out).parent_path() : fs::path("."), cfg);
  }
  return 0;
}

int cmd_serve(const Globals& g, const std::string& ckpt, const std::string& bank, const std::string& table, const std::string& host,
              int port, std::ostream& os, std::ostream& es) {
  g.resolve();
  std::optional<Generator<float>> model;
  if (!ckpt.empty()) model = load_generator(ckpt);
  std::optional<DirectionBank> directions;
  if (!bank.empty()) directions = DirectionBank::load(bank);
  Palette palette;
  if (!table.empty()) palette = palette_from_table(load_remap_table(table));
  EditorService service(std::move(model), std::move(directions), palette);
  os << "listening on http://" << host << ":" << port << std::endl;
  if (!service.listen(host, port)) {
    es << "error: cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

int cmd_ablate(const Globals& g, const fs::path& matrix_path, const std::string& data_dir, int toy_count, const fs::path& out,
               std::ostream& os) {
  const auto base = g.resolve();
  const auto matrix_doc = read_json(matrix_path);
  if (!matrix_doc.contains("runs") || !matrix_doc["runs"].is_array() || matrix_doc["runs"].empty())
    throw std::runtime_error("ablation matrix needs a non-empty 'runs' array");

  Dataset corpus = data_dir.empty() ? make_toy_corpus(base.toy, toy_count, base.seed) : load_dataset(data_dir);
  if (corpus.empty()) throw std::runtime_error("ablation corpus is empty");
  const int fine_classes = corpus.front().labels.num_classes;

  std::vector<AblationConfig> matrix;
  for (const auto& run : matrix_doc["runs"]) {
    AblationConfig entry;
    entry.name = run.at("name").get<std::string>();
    const auto grouping = run.value("grouping", nlohmann::json());
    if (grouping.is_string()) entry.grouping = grouping == "toy" ? toy_remap_table() : load_remap_table(grouping.get<std::string>());
    auto overrides = run.value("set", std::vector<std::string>{});
    const int classes = entry.grouping ? entry.grouping->num_super_classes() : fine_classes;
    overrides.push_back("train.num_super_classes=" + std::to_string(classes));
    const auto cfg = resolve_run_config_json(nlohmann::json(base), overrides);
    entry.generator = cfg.generator;
    entry.discriminator = cfg.discriminator;
    entry.train = cfg.train;
    matrix.push_back(std::move(entry));
    fs::create_directories(out / matrix.back().name);
    write_run_config(out / matrix.back().name, cfg);
  }

  TrainOptions options;
  options.out_dir = out;
  options.keep_reports = false;
  const auto rows = run_ablation(matrix, corpus, options);
  nlohmann::json report = nlohmann::json::array();
  for (const auto& r : rows)
    report.push_back({{"name", r.name},
                      {"num_classes", r.num_classes},
                      {"spectral_norm", r.spectral_norm},
                      {"batch_size", r.batch_size},
                      {"steps", r.steps},
                      {"diverged", r.diverged},
                      {"proxy_fid", std::isfinite(r.proxy_fid) ? nlohmann::json(r.proxy_fid) : nlohmann::json()},
                      {"trajectory", r.trajectory}});
  write_json(out / "ablation.json", report);
  const auto table = format_ablation_table(rows);
  std::ofstream(out / "ablation.md") << table;
  write_run_config(out, base);
  os << table;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compositional scene generator: data preparation, training, latent editing and evaluation", "scenegan"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--config", globals.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--set", globals.overrides, "override a field, section.field=value (repeatable)")->take_all();
  app.add_option("--seed", globals.seed, "root seed for every random draw");

  std::function<int()> action;

  auto* pre = app.add_subcommand("preprocess", "remap a directory of label maps to super-classes");
  std::string pre_table;
  fs::path pre_in, pre_out;
  pre->add_option("--table", pre_table, "remap table")->required()->check(CLI::ExistingFile);
  pre->add_option("--in", pre_in, "label-map directory (or dataset with labels/)")->required()->check(CLI::ExistingDirectory);
  pre->add_option("--out", pre_out, "output directory")->required();
  pre->callback([&] { action = [&] { return cmd_preprocess(globals, pre_table, pre_in, pre_out, out, err); }; });

  auto* toy = app.add_subcommand("make-toy", "render a procedural toy corpus");
  std::string toy_spec;
  int toy_n = 2000;
  bool toy_grouped = false;
  fs::path toy_out;
  toy->add_option("--spec", toy_spec, "toy scene spec (JSON)")->check(CLI::ExistingFile);
  toy->add_option("-n,--count", toy_n, "number of scenes")->check(CLI::PositiveNumber);
  toy->add_flag("--grouped", toy_grouped, "write the 8 super-class labels instead of the 24 fine ones");
  toy->add_option("--out", toy_out, "output dataset directory")->required();
  toy->callback([&] { action = [&] { return cmd_make_toy(globals, toy_spec, toy_n, toy_grouped, toy_out, out); }; });

  auto* tr = app.add_subcommand("train", "train generator and discriminator");
  fs::path tr_data, tr_out;
  std::string tr_table;
  int tr_toy = 0, tr_log = 50;
  tr->add_option("--data", tr_data, "dataset directory")->check(CLI::ExistingDirectory);
  tr->add_option("--table", tr_table, "remap the dataset with this table first")->check(CLI::ExistingFile);
  tr->add_option("--toy", tr_toy, "train on N generated toy scenes instead of --data")->check(CLI::PositiveNumber);
  tr->add_option("--log-every", tr_log, "progress line interval (0 = quiet)");
  tr->add_option("--out", tr_out, "run directory")->required();
  tr->callback([&] {
    if (tr_data.empty() == (tr_toy == 0)) throw CLI::ValidationError("train", "give exactly one of --data or --toy");
    action = [&] { return cmd_train(globals, tr_data, tr_table, tr_toy, tr_log, tr_out, out); };
  });

  auto* gen = app.add_subcommand("generate", "sample scenes from a checkpoint (sample i uses seed + i)");
  fs::path gen_ckpt, gen_out{"samples"};
  int gen_n = 1;
  std::string gen_table;
  gen->add_option("--ckpt", gen_ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  gen->add_option("-n,--count", gen_n, "number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--table", gen_table, "take mask colors from this remap table")->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output directory");
  gen->callback([&] { action = [&] { return cmd_generate(globals, gen_ckpt, gen_n, gen_table, gen_out, out); }; });

  auto* exp = app.add_subcommand("explore", "discover per-class style directions by PCA");
  fs::path exp_ckpt, exp_out;
  std::vector<int> exp_classes, exp_layers{5, 9};
  int exp_n = 10000, exp_k = 8;
  std::string exp_target = "style";
  exp->add_option("--ckpt", exp_ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  exp->add_option("--classes", exp_classes, "classes (default: all)")->delimiter(',');
  exp->add_option("--layers", exp_layers, "layers")->delimiter(',');
  exp->add_option("-N,--samples", exp_n, "style samples per (class, layer)")->check(CLI::PositiveNumber);
  exp->add_option("-k,--components", exp_k, "components kept")->check(CLI::PositiveNumber);
  exp->add_option("--target", exp_target, "style, wplus or global_w")->check(CLI::IsMember({"style", "wplus", "global_w"}));
  exp->add_option("--out", exp_out, "direction bank file")->required();
  exp->callback([&] { action = [&] { return cmd_explore(globals, exp_ckpt, exp_classes, exp_layers, exp_n, exp_k, exp_target, exp_out, out); }; });

  auto* ed = app.add_subcommand("edit", "apply an edit spec to the scene of --seed");
  fs::path ed_ckpt, ed_bank, ed_spec, ed_out{"edit"};
  std::string ed_table;
  ed->add_option("--ckpt", ed_ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  ed->add_option("--bank", ed_bank, "direction bank")->required()->check(CLI::ExistingFile);
  ed->add_option("--spec", ed_spec, "edit spec (JSON)")->required()->check(CLI::ExistingFile);
  ed->add_option("--table", ed_table, "take mask colors from this remap table")->check(CLI::ExistingFile);
  ed->add_option("--out", ed_out, "output directory");
  ed->callback([&] { action = [&] { return cmd_edit(globals, ed_ckpt, ed_bank, ed_spec, ed_table, ed_out, out); }; });

  auto* ev = app.add_subcommand("eval", "evaluation metrics");
  ev->require_subcommand(1);
  auto* fid = ev->add_subcommand("fid", "proxy-FID between two image directories");
  fs::path fid_real, fid_fake;
  std::string fid_out;
  fid->add_option("--real", fid_real, "real images")->required()->check(CLI::ExistingDirectory);
  fid->add_option("--fake", fid_fake, "generated images")->required()->check(CLI::ExistingDirectory);
  fid->add_option("--out", fid_out, "also write the result to this JSON file");
  fid->callback([&] { action = [&] { return cmd_eval_fid(globals, fid_real, fid_fake, fid_out, out); }; });
  auto* mi = ev->add_subcommand("miou", "mean IoU between predicted and ground-truth label maps");
  fs::path mi_pred, mi_gt;
  int mi_classes = 0;
  std::string mi_out;
  mi->add_option("--pred", mi_pred, "predicted label maps")->required()->check(CLI::ExistingDirectory);
  mi->add_option("--gt", mi_gt, "ground-truth label maps (matched by file name)")->required()->check(CLI::ExistingDirectory);
  mi->add_option("--classes", mi_classes, "class count (default: 1 + largest label)");
  mi->add_option("--out", mi_out, "also write the result to this JSON file");
  mi->callback([&] { action = [&] { return cmd_eval_miou(globals, mi_pred, mi_gt, mi_classes, mi_out, out); }; });

  auto* sv = app.add_subcommand("serve", "run the editing REST service");
  std::string sv_ckpt, sv_bank, sv_table, sv_host = "127.0.0.1";
  int sv_port = 8080;
  sv->add_option("--ckpt", sv_ckpt, "checkpoint")->check(CLI::ExistingFile);
  sv->add_option("--bank", sv_bank, "direction bank")->check(CLI::ExistingFile);
  sv->add_option("--table", sv_table, "take mask colors from this remap table")->check(CLI::ExistingFile);
  sv->add_option("--host", sv_host, "bind address");
  sv->add_option("--port", sv_port, "port")->check(CLI::Range(1, 65535));
  sv->callback([&] { action = [&] { return cmd_serve(globals, sv_ckpt, sv_bank, sv_table, sv_host, sv_port, out, err); }; });

  auto* ab = app.add_subcommand("ablate", "train a configuration matrix and tabulate proxy-FID");
  fs::path ab_matrix, ab_out;
  std::string ab_data;
  int ab_toy = 2000;
  ab->add_option("--matrix", ab_matrix, "ablation matrix (JSON)")->required()->check(CLI::ExistingFile);
  ab->add_option("--data", ab_data, "fine-labeled dataset (default: toy corpus)")->check(CLI::ExistingDirectory);
  ab->add_option("--toy", ab_toy, "toy corpus size when --data is absent")->check(CLI::PositiveNumber);
  ab->add_option("--out", ab_out, "output directory")->required();
  ab->callback([&] { action = [&] { return cmd_ablate(globals, ab_matrix, ab_data, ab_toy, ab_out, out); }; });

  std::vector<const char*> argv{"scenegan"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const auto extras = app.remaining(true);
    if (!extras.empty()) {
      err << "error: unrecognized argument" << (extras.size() > 1 ? "s:" : ":");
      for (const auto& x : extras) err << " " << x;
      err << "\n";
    } else {
      err << "error: " << e.what() << "\n";
    }
    if (app.get_subcommands().empty()) err << app.help();
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace scenegan
