#include "xdrive/app/service.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "xdrive/data/record.hpp"
#include "xdrive/errors.hpp"
#include "xdrive/vqa/predict.hpp"

namespace xdrive::app {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json category_json(const std::optional<sim::ActionCategory>& c) {
  return c ? ordered_json(sim::to_string(*c)) : ordered_json(nullptr);
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace

// ---- FrameStore

std::vector<FrameInfo> FrameStore::add_recording(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "log.jsonl")) throw MissingPrerequisite("recording not found: " + dir.string());
  const auto rec = data::read_recording_log(dir);
  std::vector<FrameInfo> out;
  std::lock_guard lock(mu_);
  for (const auto& e : rec.log) {
    disk_[e.frame_id] = data::frame_path(dir, e.frame_id);
    out.push_back({e.frame_id, e.sim_time, e.category});
  }
  return out;
}

void FrameStore::add_live(render::Frame frame) {
  std::lock_guard lock(mu_);
  live_[frame.meta.frame_id] = std::move(frame);
}

bool FrameStore::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return live_.count(id) || disk_.count(id);
}

render::Frame FrameStore::frame(const std::string& id) const {
  std::filesystem::path path;
  {
    std::lock_guard lock(mu_);
    if (auto it = live_.find(id); it != live_.end()) return it->second;
    path = disk_.at(id);
  }
  return render::read_frame(path);
}

std::vector<std::uint8_t> FrameStore::png(const std::string& id) const {
  std::filesystem::path path;
  {
    std::lock_guard lock(mu_);
    if (auto it = live_.find(id); it != live_.end()) return render::encode_png(it->second);
    path = disk_.at(id);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- Session

Session::Session(std::vector<FrameInfo> replay, double fps) : frames_(std::move(replay)), fps_(fps) {
  if (!(fps > 0.0)) throw InvalidConfig("fps must be positive");
}

Session::Session(LiveDrive live, FrameStore& store) : fps_(live.fps) {
  if (!(fps_ > 0.0)) throw InvalidConfig("fps must be positive");
  const auto& env = *live.env;
  live_.emplace(LiveState{std::move(live), &store, sim::Episode(env), {}, 0.0});
  live_->prev = live_->episode.reset(env.initial_state());
  extend();
}

bool Session::extend() {
  auto& L = *live_;
  const auto& env = *L.drive.env;
  while (L.episode.state().time < L.next_time - 1e-9) {
    if (L.episode.finished()) return false;
    L.episode.step(L.drive.policy(L.episode.state()).clamped());
  }
  const auto& st = L.episode.state();
  char id[32];
  std::snprintf(id, sizeof id, "live-%06zu", frames_.size());
  const auto category = sim::action_category(env.route(), st.route_progress, st);
  render::Frame f = render::render_frame(env.track(), st, L.drive.render);
  f.meta = {id, st.time, category};
  L.store->add_live(std::move(f));
  frames_.push_back({id, st.time, category});
  L.next_time = static_cast<double>(frames_.size()) / fps_;
  return true;
}

void Session::advance_to(std::size_t index) {
  if (live_)
    while (frames_.size() <= index && extend()) {
    }
  index_ = frames_.empty() ? 0 : std::min(index, frames_.size() - 1);
}

void Session::sync_playback() {
  if (!playing_) return;
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - anchor_time_).count();
  advance_to(anchor_index_ + static_cast<std::size_t>(std::floor(elapsed * fps_)));
  if (!frames_.empty() && index_ + 1 >= frames_.size() && (!live_ || live_->episode.finished())) playing_ = false;
}

ordered_json Session::state() {
  std::lock_guard lock(mu_);
  sync_playback();
  ordered_json j;
  j["mode"] = live_ ? "live" : "replay";
  j["playing"] = playing_;
  j["index"] = index_;
  j["frame_count"] = frames_.size();
  if (frames_.empty()) {
    j["frame_id"] = nullptr;
    j["sim_time"] = nullptr;
    j["category"] = nullptr;
  } else {
    const auto& f = frames_[index_];
    j["frame_id"] = f.id;
    j["sim_time"] = f.sim_time;
    j["category"] = category_json(f.category);
  }
  if (live_) j["termination"] = sim::to_string(live_->episode.termination());
  return j;
}

ordered_json Session::control(const std::string& command, const json& arg) {
  {
    std::lock_guard lock(mu_);
    sync_playback();
    if (command == "play") {
      playing_ = true;
      anchor_time_ = std::chrono::steady_clock::now();
      anchor_index_ = index_;
    } else if (command == "pause") {
      playing_ = false;
    } else if (command == "step") {
      long n = 1;
      if (!arg.is_null()) {
        if (!arg.is_number_integer()) throw InvalidArgument("step takes an integer count");
        n = arg.get<long>();
      }
      playing_ = false;
      const long target = std::max(0L, static_cast<long>(index_) + n);
      advance_to(static_cast<std::size_t>(target));
    } else if (command == "seek") {
      playing_ = false;
      if (arg.is_number_integer()) {
        if (arg.get<long>() < 0) throw InvalidArgument("seek index must be >= 0");
        advance_to(arg.get<std::size_t>());
      } else if (arg.is_string()) {
        const auto id = arg.get<std::string>();
        auto it = std::find_if(frames_.begin(), frames_.end(), [&](const FrameInfo& f) { return f.id == id; });
        if (it == frames_.end()) throw std::out_of_range("frame not in session: " + id);
        index_ = static_cast<std::size_t>(it - frames_.begin());
      } else {
        throw InvalidArgument("seek takes a frame index or frame id");
      }
    } else {
      throw InvalidArgument("unknown command '" + command + "' (play|pause|step|seek)");
    }
  }
  return state();
}

// ---- Service

struct Service::Impl {
  httplib::Server server;
  std::thread thread;
};

Service::Service(ServiceOptions opts) : opts_(std::move(opts)), impl_(std::make_unique<Impl>()) {
  for (const auto& dir : opts_.recordings) frames_.add_recording(dir);
  if (opts_.live) {
    session_ = std::make_unique<Session>(*opts_.live, frames_);
  } else {
    std::vector<FrameInfo> replay;
    if (opts_.replay) replay = frames_.add_recording(*opts_.replay);
    session_ = std::make_unique<Session>(std::move(replay), opts_.fps);
  }
  history_ = opts_.history ? std::make_unique<HistoryLog>(*opts_.history) : std::make_unique<HistoryLog>();

  auto& svr = impl_->server;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  svr.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  svr.Get("/api/session", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, session_->state());
  });

  svr.Get(R"(/api/frames/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!frames_.contains(id)) return send_error(res, 404, "unknown frame: " + id);
    try {
      const auto bytes = frames_.png(id);
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    } catch (const Error& e) {
      send_error(res, 500, e.what());
    }
  });

  svr.Post("/api/ask", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      return send_error(res, 400, "body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("frame_id") || !body["frame_id"].is_string() ||
        !body.contains("question") || !body["question"].is_string())
      return send_error(res, 400, "expected {\"frame_id\": string, \"question\": string}");
    if (!ready()) return send_error(res, 503, "VQA model not loaded");
    try {
      send_json(res, 200, ask(body["frame_id"], body["question"]));
    } catch (const EmptyQuestion& e) {
      send_error(res, 400, e.what());
    } catch (const std::out_of_range&) {
      send_error(res, 404, "unknown frame: " + body["frame_id"].get<std::string>());
    } catch (const ShapeMismatch& e) {
      send_error(res, 400, e.what());
    }
  });

  svr.Post("/api/control", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      return send_error(res, 400, "body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("command") || !body["command"].is_string())
      return send_error(res, 400, "expected {\"command\": play|pause|step|seek, \"arg\": ...}");
    try {
      send_json(res, 200, session_->control(body["command"], body.value("arg", json())));
    } catch (const InvalidArgument& e) {
      send_error(res, 400, e.what());
    } catch (const std::out_of_range& e) {
      send_error(res, 404, e.what());
    }
  });

  svr.Get("/api/history", [this](const httplib::Request&, httplib::Response& res) {
    ordered_json out = ordered_json::array();
    for (const auto& e : history_->entries()) out.push_back(to_json(e));
    send_json(res, 200, out);
  });

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });
}

Service::~Service() { stop(); }

void Service::load_model(const std::filesystem::path& path) {
  set_model(std::make_shared<const vqa::VqaBundle>(vqa::load_bundle(path)));
}

void Service::set_model(std::shared_ptr<const vqa::VqaBundle> model) {
  std::lock_guard lock(model_mu_);
  model_ = std::move(model);
}

bool Service::ready() const {
  std::lock_guard lock(model_mu_);
  return model_ != nullptr;
}

ordered_json Service::ask(const std::string& frame_id, const std::string& question) {
  std::shared_ptr<const vqa::VqaBundle> model;
  {
    std::lock_guard lock(model_mu_);
    model = model_;
  }
  if (!model) throw MissingPrerequisite("VQA model not loaded");
  const auto t0 = std::chrono::steady_clock::now();
  const render::Frame frame = frames_.frame(frame_id);
  const auto k = std::min(opts_.top_k, static_cast<std::size_t>(model->answers.size()));
  const auto p = vqa::predict_topk(*model, frame, question, k);
  ordered_json out = vqa::answers_json(p);
  out["latency_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  history_->append({now_seconds(), frame_id, frame.meta.category, question, p.ranked, p.chosen().text});
  return out;
}

int Service::start(const std::string& host, int port) {
  auto& svr = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = svr.bind_to_any_port(host);
  } else if (!svr.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
  return bound;
}

void Service::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace xdrive::app
