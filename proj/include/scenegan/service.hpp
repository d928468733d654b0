#pragma once

// REST front end for interactive editing. Requests are answered by handler
// methods that return (status, JSON body); a single worker thread runs every
// model evaluation, and the session store is mutex guarded.

#include "scenegan/generator.hpp"
#include "scenegan/image_io.hpp"
#include "scenegan/latent_explorer.hpp"

#include <json.hpp>

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace scenegan {

struct Session {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<LatentTriple<float>> latents;  // per class
  std::vector<EditItem> edits;               // accumulated, in arrival order
};

/// Edits summed per (class, layer), in order of first appearance. Opposite
/// magnitudes cancel exactly, so undoing an edit restores the baseline bit for bit.
EditSpec consolidate(const std::vector<EditItem>& edits);

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// Serializes model work onto one thread.
class InferenceWorker {
 public:
  InferenceWorker();
  ~InferenceWorker();
  InferenceWorker(const InferenceWorker&) = delete;
  InferenceWorker& operator=(const InferenceWorker&) = delete;

  template <typename F>
  auto run(F&& fn) -> decltype(fn()) {
    using R = decltype(fn());
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
    auto result = task->get_future();
    {
      std::lock_guard lock(mutex_);
      queue_.emplace_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return result.get();
  }

 private:
  void loop();
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::thread thread_;
};

class EditorService {
 public:
  EditorService(std::optional<Generator<float>> model, std::optional<DirectionBank> bank, Palette palette = {});
  ~EditorService();

  ServiceResponse create_session(const std::string& body);
  ServiceResponse directions() const;
  ServiceResponse edit(const std::string& session_id, const std::string& body);
  ServiceResponse get_session(const std::string& session_id);

  /// Routes: POST /sessions, GET /directions, POST /sessions/{id}/edit, GET /sessions/{id}, GET /health.
  void mount(httplib::Server& server);
  /// Blocks until stop() is called from another thread.
  bool listen(const std::string& host, int port);
  void stop();

  std::size_t session_count() const;

 private:
  nlohmann::json render(const Session& session);

  std::optional<Generator<float>> model_;
  std::optional<DirectionBank> bank_;
  Palette palette_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, Session> sessions_;
  std::uint64_t next_id_ = 1;
  InferenceWorker worker_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace scenegan
