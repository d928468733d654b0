#include "helpers.hpp"

#include "scenegan/cli.hpp"
#include "scenegan/config.hpp"
#include "scenegan/image_io.hpp"
#include "scenegan/latent_explorer.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace scenegan;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> tiny_overrides() {
  return {"--set",
          "generator.output_resolution=16",
          "generator.coarse_resolution=4",
          "generator.latent_dim=8",
          "generator.style_dim=8",
          "generator.fourier_features=8",
          "generator.local_channels=6",
          "generator.feature_channels=5",
          "generator.render_channels=[6,5,4]",
          "generator.mapping_layers=2",
          "discriminator.channels=[4,6,8]",
          "train.num_super_classes=8",
          "train.batch_size=2",
          "train.total_steps=4",
          "train.eval_interval=2",
          "train.eval_samples=150",
          "train.r1_interval=2"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string data_file(const char* name) { return (fs::path(SCENEGAN_DATA_DIR) / name).string(); }

// Toy corpus, grouped copy and a 4-step checkpoint, built once.
struct Pipeline {
  fs::path root = scenegan::testing::temp_dir("cli_pipeline");
  fs::path fine = root / "fine", grouped = root / "grouped", run = root / "run";
  fs::path ckpt = run / "checkpoint.scng";
  Pipeline() {
    REQUIRE(cli(concat(tiny_overrides(), {"--seed", "3", "make-toy", "-n", "160", "--out", fine.string()})).code == 0);
    REQUIRE(cli({"preprocess", "--table", data_file("toy_24_to_8.json"), "--in", fine.string(), "--out", grouped.string()}).code == 0);
    const auto trained = cli(concat(tiny_overrides(), {"train", "--data", grouped.string(), "--out", run.string(), "--log-every", "0"}));
    REQUIRE_MESSAGE(trained.code == 0, trained.err);
  }
};

const Pipeline& pipeline() {
  static Pipeline p;
  return p;
}

}  // namespace

TEST_CASE("cli usage and parse errors") {
  const auto help = cli({"--help"});
  CHECK(help.code == 0);
  for (const char* sub : {"preprocess", "make-toy", "train", "generate", "explore", "edit", "eval", "serve", "ablate"})
    CHECK_MESSAGE(help.out.find(sub) != std::string::npos, sub);

  for (const char* sub : {"preprocess", "make-toy", "train", "generate", "explore", "edit", "eval", "serve", "ablate"}) {
    const auto r = cli({sub, "--help"});
    CHECK_MESSAGE(r.code == 0, sub);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  CHECK(cli({"eval", "fid", "--help"}).code == 0);

  const auto flag = cli({"generate", "--bogus-flag"});
  CHECK(flag.code == 2);
  CHECK(flag.err.find("--bogus-flag") != std::string::npos);

  const auto sub = cli({"frobnicate"});
  CHECK(sub.code == 2);
  CHECK(sub.err.find("frobnicate") != std::string::npos);
  CHECK(sub.err.find("Subcommands") != std::string::npos);

  CHECK(cli({}).code == 2);
  CHECK(cli({"train", "--out", "x"}).code == 2);  // neither --data nor --toy

  const auto bad_override = cli({"--set", "train.no_such_field=1", "make-toy", "-n", "1", "--out", (fs::temp_directory_path() / "scenegan_unused").string()});
  CHECK(bad_override.code == 1);
  CHECK(bad_override.err.find("train.no_such_field") != std::string::npos);
}

TEST_CASE("cli preprocess lists every unmapped value and writes nothing") {
  const auto& p = pipeline();
  const auto out = scenegan::testing::temp_dir("cli_unmapped") / "out";
  const auto r = cli({"preprocess", "--table", data_file("mapillary_template.json"), "--in", p.fine.string(), "--out", out.string()});
  CHECK(r.code == 1);
  // the template maps sources 0..2; the toy scenes always contain sky (0..2) and road (3..5) values
  CHECK(r.err.find("unmapped class values: 3") != std::string::npos);
  CHECK(!fs::exists(out));
}

TEST_CASE("cli preprocess writes super-class labels and copies images") {
  const auto& p = pipeline();
  const auto labels = fs::directory_iterator(p.grouped / "labels");
  int files = 0;
  for (const auto& e : labels) {
    const auto b = read_png(e.path());
    CHECK(b.channels == 1);
    CHECK(*std::max_element(b.pixels.begin(), b.pixels.end()) < 8);
    ++files;
  }
  CHECK(files == 160);
  CHECK(slurp(p.grouped / "images" / "000000.png") == slurp(p.fine / "images" / "000000.png"));
  CHECK(fs::exists(p.grouped / "run_config.json"));
}

TEST_CASE("cli train writes run config, checkpoints and metrics") {
  const auto& p = pipeline();
  CHECK(fs::exists(p.ckpt));
  const auto cfg = nlohmann::json::parse(slurp(p.run / "run_config.json")).get<RunConfig>();
  CHECK(cfg.train.total_steps == 4);
  CHECK(cfg.generator.num_classes == 8);
  std::ifstream metrics(p.run / "metrics.jsonl");
  int lines = 0;
  for (std::string line; std::getline(metrics, line);) ++lines;
  CHECK(lines == 5);
}

TEST_CASE("cli generate is byte-identical for a fixed seed") {
  const auto& p = pipeline();
  const auto dir = scenegan::testing::temp_dir("cli_generate");
  for (const char* name : {"a", "b"})
    REQUIRE(cli({"generate", "--ckpt", p.ckpt.string(), "--seed", "7", "-n", "2", "--out", (dir / name).string()}).code == 0);
  REQUIRE(cli({"generate", "--ckpt", p.ckpt.string(), "--seed", "8", "-n", "1", "--out", (dir / "c").string()}).code == 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    CHECK_MESSAGE(slurp(e.path()) == slurp(dir / "b" / e.path().filename()), e.path().filename().string());
    ++compared;
  }
  CHECK(compared == 9);  // 2 samples x 4 files + run_config.json
  CHECK(slurp(dir / "a" / "sample_0000.png") != slurp(dir / "c" / "sample_0000.png"));
  // sample i is the scene of seed + i
  CHECK(slurp(dir / "a" / "sample_0001.png") == slurp(dir / "c" / "sample_0000.png"));
  CHECK(nlohmann::json::parse(slurp(dir / "a" / "run_config.json"))["seed"] == 7);
}

TEST_CASE("cli explore, edit and eval") {
  const auto& p = pipeline();
  const auto dir = scenegan::testing::temp_dir("cli_edit");
  const auto bank = dir / "bank.scng";
  REQUIRE(cli({"explore", "--ckpt", p.ckpt.string(), "--classes", "1,2", "--layers", "5,9", "-N", "64", "-k", "4", "--out", bank.string()}).code == 0);
  CHECK(fs::exists(dir / "run_config.json"));
  const auto loaded = DirectionBank::load(bank);
  CHECK(loaded.entries.size() == 4);

  std::ofstream(dir / "zero.json") << R"({"edits":[{"class":1,"layer":9,"component":0,"magnitude":0}]})";
  std::ofstream(dir / "tex.json") << R"({"edits":[{"class":1,"layer":9,"component":0,"magnitude":3}]})";
  std::ofstream(dir / "bad.json") << R"({"edits":[{"class":0,"layer":9,"component":0,"magnitude":3}]})";
  REQUIRE(cli({"edit", "--ckpt", p.ckpt.string(), "--bank", bank.string(), "--spec", (dir / "zero.json").string(), "--seed", "7", "--out",
               (dir / "zero").string()})
              .code == 0);
  REQUIRE(cli({"edit", "--ckpt", p.ckpt.string(), "--bank", bank.string(), "--spec", (dir / "tex.json").string(), "--seed", "7", "--out",
               (dir / "tex").string()})
              .code == 0);
  REQUIRE(cli({"generate", "--ckpt", p.ckpt.string(), "--seed", "7", "--out", (dir / "gen").string()}).code == 0);
  CHECK(slurp(dir / "zero" / "edited.png") == slurp(dir / "zero" / "baseline.png"));
  CHECK(slurp(dir / "zero" / "baseline.png") == slurp(dir / "gen" / "sample_0000.png"));
  CHECK(slurp(dir / "tex" / "edited.png") != slurp(dir / "tex" / "baseline.png"));
  const auto missing = cli({"edit", "--ckpt", p.ckpt.string(), "--bank", bank.string(), "--spec", (dir / "bad.json").string(), "--out",
                            (dir / "bad").string()});
  CHECK(missing.code == 1);

  const auto fid = cli({"eval", "fid", "--real", p.fine.string(), "--fake", p.fine.string()});
  REQUIRE(fid.code == 0);
  CHECK(nlohmann::json::parse(fid.out)["proxy_fid"].get<double>() == doctest::Approx(0.0).epsilon(1e-6));
  const auto miou = cli({"eval", "miou", "--pred", p.grouped.string(), "--gt", p.grouped.string(), "--out", (dir / "miou.json").string()});
  REQUIRE(miou.code == 0);
  CHECK(nlohmann::json::parse(miou.out)["miou"].get<double>() == 1.0);
  CHECK(nlohmann::json::parse(slurp(dir / "miou.json"))["classes"] == 8);
}
