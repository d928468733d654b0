#include "scenegan/toy_scenes.hpp"

#include "scenegan/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace scenegan {

namespace {

enum Fine : int {
  kSky, kCloud, kSun,
  kRoad, kLane, kManhole,
  kSidewalk, kCurb, kTerrain,
  kWall, kWindow, kDoor,
  kCrown, kTrunk, kBush,
  kCarBody, kCarWindow, kWheel,
  kTorso, kHead, kLegs,
  kPole, kSign, kLight,
};

using Rgb = std::array<double, 3>;

constexpr std::array<Rgb, kToyFineClasses> kBaseColors{{
    {135, 180, 235}, {235, 235, 240}, {250, 220, 90},
    {70, 70, 75}, {230, 230, 220}, {35, 35, 38},
    {170, 160, 150}, {115, 110, 105}, {120, 150, 80},
    {150, 90, 70}, {60, 80, 110}, {80, 50, 30},
    {50, 120, 50}, {90, 60, 30}, {80, 150, 60},
    {180, 30, 30}, {40, 50, 70}, {20, 20, 20},
    {50, 70, 160}, {230, 190, 160}, {40, 40, 60},
    {105, 105, 105}, {220, 40, 40}, {240, 200, 0},
}};

constexpr std::array<Rgb, 4> kCarColors{{{180, 30, 30}, {30, 60, 170}, {210, 210, 215}, {40, 40, 45}}};
constexpr std::array<Rgb, 3> kWallColors{{{150, 90, 70}, {190, 170, 130}, {120, 120, 135}}};

class Canvas {
 public:
  Canvas(int resolution, Rng& rng, double jitter)
      : res_(resolution), rng_(rng), jitter_(jitter), image_(3, resolution, resolution), labels_(resolution, resolution, kToyFineClasses) {}

  Rgb color(int cls) { return jittered(kBaseColors[static_cast<std::size_t>(cls)]); }
  Rgb jittered(const Rgb& base) {
    Rgb c;
    const double shade = 1.0 + jitter_ * rng_.normal();
    for (std::size_t i = 0; i < 3; ++i) c[i] = std::clamp(std::round(base[i] * shade * (1.0 + 0.3 * jitter_ * rng_.normal())), 0.0, 255.0);
    return c;
  }

  void put(int x, int y, int cls, const Rgb& c) {
    if (x < 0 || y < 0 || x >= res_ || y >= res_) return;
    labels_(y, x) = cls;
    const int p = y * res_ + x;
    for (int i = 0; i < 3; ++i) image_.values(i, p) = static_cast<float>(c[static_cast<std::size_t>(i)] / 127.5 - 1.0);
  }

  void rect(int x0, int y0, int x1, int y1, int cls, const Rgb& c) {
    for (int y = std::max(y0, 0); y < std::min(y1, res_); ++y)
      for (int x = std::max(x0, 0); x < std::min(x1, res_); ++x) put(x, y, cls, c);
  }

  void ellipse(double cx, double cy, double rx, double ry, int cls, const Rgb& c) {
    for (int y = std::max(0, static_cast<int>(cy - ry) - 1); y <= std::min(res_ - 1, static_cast<int>(cy + ry) + 1); ++y)
      for (int x = std::max(0, static_cast<int>(cx - rx) - 1); x <= std::min(res_ - 1, static_cast<int>(cx + rx) + 1); ++x) {
        const double dx = (x + 0.5 - cx) / rx;
        const double dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy <= 1.0) put(x, y, cls, c);
      }
  }

  LabeledImage finish() { return {std::move(image_), std::move(labels_)}; }

 private:
  int res_;
  Rng& rng_;
  double jitter_;
  Image image_;
  LabelMap labels_;
};

int uniform_int(Rng& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1)) % (hi - lo + 1);
}

double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

int count(Rng& rng, const CountRange& r) { return uniform_int(rng, r.min, r.max); }

}  // namespace

void ToySceneSpec::validate() const {
  require(resolution >= 16, "toy scenes: resolution must be at least 16");
  auto band_ok = [](const BandRange& b) { return b.min_fraction >= 0 && b.min_fraction <= b.max_fraction && b.max_fraction < 1; };
  require(band_ok(sky_band) && band_ok(road_band), "toy scenes: invalid band range");
  require(sky_band.max_fraction + road_band.max_fraction < 0.9, "toy scenes: sky and road bands leave no room for the ground");
  for (const auto* r : {&buildings, &trees, &cars, &people, &poles})
    require(r->min >= 0 && r->min <= r->max, "toy scenes: invalid count range");
  require(color_jitter >= 0, "toy scenes: color jitter must be non-negative");
}

const std::vector<std::string>& toy_class_names() {
  static const std::vector<std::string> names{
      "sky", "cloud", "sun", "road", "lane_marking", "manhole", "sidewalk", "curb", "terrain", "wall", "window", "door",
      "tree_crown", "trunk", "bush", "car_body", "car_window", "wheel", "torso", "head", "legs", "pole", "traffic_sign",
      "traffic_light"};
  return names;
}

RemapTable toy_remap_table() {
  const std::vector<std::string> groups{"sky", "road", "ground", "building", "vegetation", "car", "person", "pole"};
  const std::vector<std::array<std::uint8_t, 3>> colors{{70, 130, 180}, {128, 64, 128}, {244, 35, 232}, {70, 70, 70},
                                                        {107, 142, 35}, {0, 0, 142},    {220, 20, 60},  {153, 153, 153}};
  std::vector<SuperClass> entries;
  for (int g = 0; g < kToySuperClasses; ++g)
    entries.push_back({groups[static_cast<std::size_t>(g)], g, {3 * g, 3 * g + 1, 3 * g + 2}, colors[static_cast<std::size_t>(g)]});
  auto table = RemapTable::from_entries(std::move(entries), kToyFineClasses);
  table.name = "toy-24-to-8";
  return table;
}

LabeledImage make_toy_scene(const ToySceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int R = spec.resolution;
  const double k = R / 64.0;
  auto px = [k](double v) { return static_cast<int>(std::lround(v * k)); };
  Canvas canvas(R, rng, spec.color_jitter);

  const int horizon = static_cast<int>(std::lround(uniform_real(rng, spec.sky_band.min_fraction, spec.sky_band.max_fraction) * R));
  const int road_top = R - static_cast<int>(std::lround(uniform_real(rng, spec.road_band.min_fraction, spec.road_band.max_fraction) * R));

  // Sky.
  canvas.rect(0, 0, R, horizon, kSky, canvas.color(kSky));
  for (int i = uniform_int(rng, 0, 2); i > 0; --i)
    canvas.ellipse(uniform_real(rng, 0, R), uniform_real(rng, 0.2, 0.6) * horizon, uniform_real(rng, 6, 10) * k,
                   uniform_real(rng, 2, 3.5) * k, kCloud, canvas.color(kCloud));
  if (rng.uniform() < 0.5) {
    const double r = uniform_real(rng, 2.5, 4) * k;
    canvas.ellipse(uniform_real(rng, r, R - r), uniform_real(rng, r, std::max(r, horizon * 0.5)), r, r, kSun, canvas.color(kSun));
  }

  // Ground between horizon and road.
  canvas.rect(0, horizon, R, road_top, kSidewalk, canvas.color(kSidewalk));
  for (int i = uniform_int(rng, 0, 2); i > 0; --i) {
    const int w = px(uniform_real(rng, 6, 14));
    const int x = uniform_int(rng, 0, R - w);
    const int y = uniform_int(rng, horizon + (road_top - horizon) / 2, std::max(horizon + (road_top - horizon) / 2, road_top - px(4)));
    canvas.rect(x, y, x + w, y + std::max(1, px(3)), kTerrain, canvas.color(kTerrain));
  }
  canvas.rect(0, road_top - std::max(1, px(2)), R, road_top, kCurb, canvas.color(kCurb));

  // Road.
  canvas.rect(0, road_top, R, R, kRoad, canvas.color(kRoad));
  {
    const int y = (road_top + R) / 2;
    const auto lane = canvas.color(kLane);
    const int dash = std::max(2, px(6)), gap = std::max(2, px(5));
    for (int x = uniform_int(rng, -dash, 0); x < R; x += dash + gap) canvas.rect(x, y, x + dash, y + std::max(1, px(1)), kLane, lane);
  }
  if (rng.uniform() < 0.5)
    canvas.ellipse(uniform_real(rng, 4 * k, R - 4 * k), uniform_real(rng, road_top + 3 * k, R - 3 * k), 3.5 * k, 1.6 * k, kManhole,
                   canvas.color(kManhole));

  // Buildings standing on the horizon.
  for (int i = count(rng, spec.buildings); i > 0; --i) {
    const int w = px(uniform_real(rng, 12, 24));
    const int x0 = uniform_int(rng, -w / 3, R - 2 * w / 3);
    const int base = horizon + uniform_int(rng, 1, std::max(1, px(3)));
    const int top = std::max(1, base - px(uniform_real(rng, 12, 22)));
    canvas.rect(x0, top, x0 + w, base, kWall, canvas.jittered(kWallColors[static_cast<std::size_t>(uniform_int(rng, 0, 2))]));
    const auto window = canvas.color(kWindow);
    const int ws = std::max(2, px(3)), step = std::max(4, px(6));
    for (int wy = top + px(2); wy + ws < base - px(6); wy += step)
      for (int wx = x0 + px(2); wx + ws <= x0 + w - px(2); wx += step) canvas.rect(wx, wy, wx + ws, wy + ws, kWindow, window);
    const int door_w = std::max(2, px(3));
    canvas.rect(x0 + w / 2 - door_w / 2, base - std::max(3, px(5)), x0 + w / 2 - door_w / 2 + door_w, base, kDoor, canvas.color(kDoor));
  }

  auto ground_y = [&]() { return uniform_int(rng, horizon + px(4), std::max(horizon + px(4), road_top - px(3))); };

  // Vegetation.
  for (int i = count(rng, spec.trees); i > 0; --i) {
    const int x = uniform_int(rng, px(4), R - px(4));
    const int base = ground_y();
    const int top = base - px(uniform_real(rng, 8, 12));
    const double r = uniform_real(rng, 4, 7) * k;
    canvas.rect(x - std::max(1, px(1)), top, x + std::max(1, px(1)), base, kTrunk, canvas.color(kTrunk));
    canvas.ellipse(x, top - r * 0.6, r, r, kCrown, canvas.color(kCrown));
  }
  if (rng.uniform() < 0.7) {
    const double r = uniform_real(rng, 2, 4) * k;
    canvas.ellipse(uniform_real(rng, r, R - r), ground_y() - r * 0.5, r * 1.3, r, kBush, canvas.color(kBush));
  }

  // Poles with a sign or a light on top.
  for (int i = count(rng, spec.poles); i > 0; --i) {
    const int x = uniform_int(rng, px(2), R - px(3));
    const int base = ground_y();
    const int top = std::max(1, base - px(uniform_real(rng, 18, 26)));
    canvas.rect(x, top, x + std::max(1, px(2)), base, kPole, canvas.color(kPole));
    if (rng.uniform() < 0.5) {
      const int s = std::max(3, px(5));
      canvas.rect(x - s / 2 + 1, top - s + 1, x - s / 2 + 1 + s, top + 1, kSign, canvas.color(kSign));
    } else {
      canvas.rect(x - 1, top - std::max(4, px(6)), x + std::max(2, px(3)) - 1, top, kLight, canvas.color(kLight));
    }
  }

  // People on the ground band.
  for (int i = count(rng, spec.people); i > 0; --i) {
    const int x = uniform_int(rng, px(2), R - px(6));
    const int feet = ground_y();
    const int legs = std::max(3, px(5)), torso = std::max(3, px(6)), w = std::max(3, px(4));
    canvas.rect(x, feet - legs, x + w, feet, kLegs, canvas.color(kLegs));
    canvas.rect(x, feet - legs - torso, x + w, feet - legs, kTorso, canvas.jittered(kBaseColors[kTorso]));
    const double hr = std::max(1.2, 1.8 * k);
    canvas.ellipse(x + w / 2.0, feet - legs - torso - hr, hr, hr, kHead, canvas.color(kHead));
  }

  // Cars on the road.
  for (int i = count(rng, spec.cars); i > 0; --i) {
    const int w = px(uniform_real(rng, 12, 18));
    const int h = px(uniform_real(rng, 6, 9));
    const int bottom = uniform_int(rng, std::min(R, road_top + h), R);
    const int x0 = uniform_int(rng, -w / 4, R - 3 * w / 4);
    canvas.rect(x0, bottom - h, x0 + w, bottom, kCarBody, canvas.jittered(kCarColors[static_cast<std::size_t>(uniform_int(rng, 0, 3))]));
    canvas.rect(x0 + px(3), bottom - h + std::max(1, px(1)), x0 + w - px(3), bottom - h + std::max(2, h / 3 + 1), kCarWindow,
                canvas.color(kCarWindow));
    const double wr = std::max(1.2, 1.8 * k);
    const auto wheel = canvas.color(kWheel);
    canvas.ellipse(x0 + 3.5 * k, bottom - wr * 0.5, wr, wr, kWheel, wheel);
    canvas.ellipse(x0 + w - 3.5 * k, bottom - wr * 0.5, wr, wr, kWheel, wheel);
  }
  return canvas.finish();
}

Dataset make_toy_corpus(const ToySceneSpec& spec, int count, std::uint64_t seed) {
  Dataset out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(make_toy_scene(spec, derive_seed(seed, static_cast<std::uint64_t>(i))));
  return out;
}

}  // namespace scenegan
