#include "scenegan/service.hpp"

#include <httplib.h>

#include <cmath>
#include <random>

namespace scenegan {

EditSpec consolidate(const std::vector<EditItem>& edits) {
  EditSpec spec;
  for (const auto& e : edits) {
    auto it = std::find_if(spec.items.begin(), spec.items.end(),
                           [&](const EditItem& s) { return s.cls == e.cls && s.layer == e.layer; });
    if (it == spec.items.end())
      spec.items.push_back(e);
    else
      it->y += e.y;
  }
  return spec;
}

InferenceWorker::InferenceWorker() : thread_([this] { loop(); }) {}

InferenceWorker::~InferenceWorker() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void InferenceWorker::loop() {
  for (;;) {
    std::function<void()> job;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    job();
  }
}

namespace {

ServiceResponse error(int status, const std::string& message, const std::string& field = {}) {
  nlohmann::json body{{"error", message}, {"status", status}};
  if (!field.empty()) body["field"] = field;
  return {status, body};
}

std::string png_base64(const Bitmap& bitmap) {
  const auto bytes = encode_png(bitmap);
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

LabelMap coarse_labels(const Matrix<float>& mask, int resolution) {
  LabelMap out(resolution, resolution, static_cast<int>(mask.rows()));
  for (Eigen::Index p = 0; p < mask.cols(); ++p) {
    Eigen::Index best = 0;
    mask.col(p).maxCoeff(&best);
    out.values.data()[p] = static_cast<std::int32_t>(best);
  }
  return out;
}

// Parses a JSON object body; an empty body counts as {}.
std::optional<nlohmann::json> parse_object(const std::string& body, ServiceResponse& failure) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return nlohmann::json::object();
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) {
    failure = error(400, "request body is not valid JSON");
    return std::nullopt;
  }
  if (!doc.is_object()) {
    failure = error(400, "request body must be a JSON object");
    return std::nullopt;
  }
  return doc;
}

bool reject_unknown(const nlohmann::json& doc, std::initializer_list<const char*> known, ServiceResponse& failure) {
  for (const auto& [key, value] : doc.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      failure = error(400, "unknown field '" + key + "'", key);
      return true;
    }
  }
  return false;
}

}  // namespace

EditorService::EditorService(std::optional<Generator<float>> model, std::optional<DirectionBank> bank, Palette palette)
    : model_(std::move(model)), bank_(std::move(bank)), palette_(std::move(palette)) {
  if (model_ && palette_.size() < static_cast<std::size_t>(model_->config().num_classes))
    palette_ = default_palette(model_->config().num_classes);
}

EditorService::~EditorService() { stop(); }

nlohmann::json EditorService::render(const Session& session) {
  const auto spec = consolidate(session.edits);
  return worker_.run([&] {
    const auto result = spec.items.empty() ? model_->generate(session.latents) : apply_edit(*model_, session.latents, *bank_, spec);
    const auto labels = argmax_labels(result.final_mask);
    return nlohmann::json{{"session_id", session.id},
                          {"seed", session.seed},
                          {"edits", spec.to_json()["edits"]},
                          {"image", png_base64(to_bitmap(result.image))},
                          {"mask_overlay", png_base64(overlay(result.image, labels, palette_))},
                          {"mask", png_base64(colorize(labels, palette_))},
                          {"coarse_mask", png_base64(colorize(coarse_labels(result.mask, result.coarse_resolution), palette_))}};
  });
}

ServiceResponse EditorService::create_session(const std::string& body) {
  ServiceResponse failure;
  const auto doc = parse_object(body, failure);
  if (!doc) return failure;
  if (reject_unknown(*doc, {"seed"}, failure)) return failure;
  if (!model_) return error(503, "no model loaded");

  Session session;
  if (doc->contains("seed")) {
    const auto& seed = (*doc)["seed"];
    if (!seed.is_number_unsigned()) return error(400, "seed must be a non-negative integer", "seed");
    session.seed = seed.get<std::uint64_t>();
  } else {
    std::random_device device;
    session.seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  }
  session.latents = worker_.run([&] { return scene_latents(*model_, session.seed); });
  {
    std::lock_guard lock(sessions_mutex_);
    session.id = "s" + std::to_string(next_id_++);
    sessions_[session.id] = session;
  }
  return {201, render(session)};
}

ServiceResponse EditorService::get_session(const std::string& session_id) {
  Session snapshot;
  {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return error(404, "unknown session '" + session_id + "'");
    snapshot = it->second;
  }
  if (!model_) return error(503, "no model loaded");
  return {200, render(snapshot)};
}

ServiceResponse EditorService::directions() const {
  if (!bank_ || bank_->empty()) return error(404, "no direction bank loaded");
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : bank_->entries)
    entries.push_back({{"class", e.cls},
                       {"layer", e.layer},
                       {"k", e.k()},
                       {"target", to_string(e.target)},
                       {"variances", std::vector<double>(e.variances.data(), e.variances.data() + e.variances.size())}});
  return {200, {{"directions", entries}}};
}

ServiceResponse EditorService::edit(const std::string& session_id, const std::string& body) {
  {
    std::lock_guard lock(sessions_mutex_);
    if (!sessions_.count(session_id)) return error(404, "unknown session '" + session_id + "'");
  }
  ServiceResponse failure;
  const auto doc = parse_object(body, failure);
  if (!doc) return failure;
  if (reject_unknown(*doc, {"class", "layer", "component", "magnitude"}, failure)) return failure;
  for (const char* key : {"class", "layer", "component"})
    if (!doc->contains(key) || !(*doc)[key].is_number_integer()) return error(400, std::string(key) + " must be an integer", key);
  if (!doc->contains("magnitude") || !(*doc)["magnitude"].is_number() || !std::isfinite((*doc)["magnitude"].get<double>()))
    return error(400, "magnitude must be a finite number", "magnitude");
  if (!model_) return error(503, "no model loaded");

  const int cls = (*doc)["class"].get<int>(), layer = (*doc)["layer"].get<int>(), component = (*doc)["component"].get<int>();
  const DirectionEntry* entry = bank_ ? bank_->find(cls, layer) : nullptr;
  if (!entry || entry->target != HarvestTarget::Style)
    return error(422, "no direction for class " + std::to_string(cls) + ", layer " + std::to_string(layer));
  if (component < 0 || component >= entry->k())
    return error(422, "component " + std::to_string(component) + " outside [0, " + std::to_string(entry->k()) + ")", "component");

  EditItem item{cls, layer, Vector<double>::Zero(entry->k())};
  item.y[component] = (*doc)["magnitude"].get<double>();
  Session snapshot;
  {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return error(404, "unknown session '" + session_id + "'");
    it->second.edits.push_back(item);
    snapshot = it->second;
  }
  return {200, render(snapshot)};
}

std::size_t EditorService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

void EditorService::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto guarded = [reply](auto handler) {
    return [reply, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, handler(req));
      } catch (const std::exception& e) {
        reply(res, error(500, e.what()));
      }
    };
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.Get("/health", guarded([this](const httplib::Request&) {
               return ServiceResponse{200, {{"model", model_.has_value()}, {"bank", bank_.has_value() && !bank_->empty()}}};
             }));
  server.Post("/sessions", guarded([this](const httplib::Request& req) { return create_session(req.body); }));
  server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req) { return get_session(req.matches[1]); }));
  server.Post(R"(/sessions/([^/]+)/edit)",
              guarded([this](const httplib::Request& req) { return edit(req.matches[1], req.body); }));
  server.Get("/directions", guarded([this](const httplib::Request&) { return directions(); }));
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) res.set_content(nlohmann::json{{"error", "not found"}, {"status", res.status}}.dump(), "application/json");
  });
}

bool EditorService::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  return server_->listen(host, port);
}

void EditorService::stop() {
  if (server_) server_->stop();
}

}  // namespace scenegan
