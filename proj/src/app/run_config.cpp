#include "xdrive/app/run_config.hpp"

#include <cstdio>
#include <fstream>

#include "xdrive/errors.hpp"

namespace xdrive::app {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void take_path(const json& j, const char* key, std::filesystem::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

void take_opt_path(const json& j, const char* key, std::optional<std::filesystem::path>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    out.reset();
  else
    out = j.at(key).get<std::string>();
}

ordered_json opt_path(const std::optional<std::filesystem::path>& p) {
  return p ? ordered_json(p->string()) : ordered_json(nullptr);
}

std::string_view noise_name(rl::NoiseKind k) { return k == rl::NoiseKind::gaussian ? "gaussian" : "ou"; }

rl::NoiseKind parse_noise(std::string_view s) {
  if (s == "gaussian") return rl::NoiseKind::gaussian;
  if (s == "ou") return rl::NoiseKind::ornstein_uhlenbeck;
  throw InvalidConfig("unknown noise kind '" + std::string(s) + "'");
}

std::string_view view_name(render::ViewMode v) { return v == render::ViewMode::chase ? "chase" : "ego_aligned"; }

render::ViewMode parse_view(std::string_view s) {
  if (s == "chase") return render::ViewMode::chase;
  if (s == "ego_aligned") return render::ViewMode::ego_aligned;
  throw InvalidConfig("unknown view '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Profile p) { return p == Profile::desk ? "desk" : "paper-scale"; }

Profile parse_profile(std::string_view s) {
  if (s == "desk") return Profile::desk;
  if (s == "paper-scale") return Profile::paper_scale;
  throw InvalidConfig("unknown profile '" + std::string(s) + "' (desk|paper-scale)");
}

std::string_view to_string(Driver d) { return d == Driver::actor ? "actor" : "pursuit"; }

Driver parse_driver(std::string_view s) {
  if (s == "actor") return Driver::actor;
  if (s == "pursuit") return Driver::pursuit;
  throw InvalidConfig("unknown driver '" + std::string(s) + "' (actor|pursuit)");
}

RunConfig RunConfig::paper_scale() {
  RunConfig cfg;
  cfg.profile = Profile::paper_scale;
  cfg.render = render::RenderConfig::paper_scale();
  cfg.vqa = vqa::VqaConfig::paper_scale();
  cfg.answer_count = 1000;
  return cfg;
}

void RunConfig::validate() const {
  ddpg.validate();
  vqa.validate();
  if (!(fps > 0.0)) throw InvalidConfig("fps must be positive");
  if (waypoints < 1) throw InvalidConfig("waypoints must be >= 1");
  if (answer_count < sim::kCategoryCount) throw InvalidConfig("answer_count must cover the five target answers");
  if (top_k < 1) throw InvalidConfig("top_k must be >= 1");
  if (render.width != vqa.image_width || render.height != vqa.image_height || render.channels != vqa.image_channels)
    throw InvalidConfig("render size and VQA input size disagree");
  if (corpus.train_per_category < 1 || corpus.test_per_category < 1)
    throw InvalidConfig("per-category counts must be >= 1");
}

std::filesystem::path RunConfig::recording_dir(const std::string& track) const {
  return corpus_root / "recordings" / std::filesystem::path(track).stem();
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["track_id"] = c.track_id;
  j["test_track_id"] = c.test_track_id;
  j["seed"] = c.seed;
  j["profile"] = to_string(c.profile);
  j["checkpoints"] = c.checkpoints.string();
  j["corpus_root"] = c.corpus_root.string();
  j["reports"] = c.reports.string();
  j["distractors"] = opt_path(c.distractors);
  j["overrides"] = opt_path(c.overrides);
  const auto& h = c.ddpg;
  j["ddpg"] = {{"actor_lr", h.actor_lr},
               {"critic_lr", h.critic_lr},
               {"tau", h.tau},
               {"buffer_capacity", h.buffer_capacity},
               {"batch_size", h.batch_size},
               {"gamma", h.gamma},
               {"episodes", h.episodes},
               {"warmup_steps", h.warmup_steps},
               {"hidden", h.hidden},
               {"reward_scale", h.reward_scale},
               {"random_warmup", h.random_warmup},
               {"preactivation_penalty", h.preactivation_penalty},
               {"random_start", h.random_start},
               {"random_start_speed", h.random_start_speed},
               {"noise",
                {{"kind", noise_name(h.noise.kind)},
                 {"sigma_start", h.noise.sigma_start},
                 {"sigma_end", h.noise.sigma_end},
                 {"theta", h.noise.theta}}}};
  j["waypoints"] = c.waypoints;
  j["driver"] = to_string(c.driver);
  j["test_driver"] = to_string(c.test_driver);
  j["fps"] = c.fps;
  j["quality_guard_steps"] = c.quality_guard_steps;
  j["corpus"] = {{"train_per_category", c.corpus.train_per_category},
                 {"test_per_category", c.corpus.test_per_category},
                 {"test_second_track_share", c.corpus.test_second_track_share},
                 {"train_fraction", c.corpus.train_fraction},
                 {"heldout_fraction", c.corpus.heldout_fraction},
                 {"min_segment", c.corpus.min_segment}};
  j["render"] = {{"width", c.render.width},
                 {"height", c.render.height},
                 {"channels", c.render.channels},
                 {"meters_per_pixel", c.render.meters_per_pixel},
                 {"marking_width", c.render.marking_width},
                 {"view", view_name(c.render.view)},
                 {"draw_ego", c.render.draw_ego}};
  j["vqa"] = vqa::to_json(c.vqa);
  j["answer_count"] = c.answer_count;
  j["top_k"] = c.top_k;
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  try {
    if (j.contains("profile")) {
      const Profile p = parse_profile(j.at("profile").get<std::string>());
      if (p != c.profile) {
        const RunConfig base = p == Profile::desk ? RunConfig::desk() : RunConfig::paper_scale();
        c.profile = p;
        c.render = base.render;
        c.vqa = base.vqa;
        c.answer_count = base.answer_count;
      }
    }
    take(j, "track_id", c.track_id);
    take(j, "test_track_id", c.test_track_id);
    take(j, "seed", c.seed);
    take_path(j, "checkpoints", c.checkpoints);
    take_path(j, "corpus_root", c.corpus_root);
    take_path(j, "reports", c.reports);
    take_opt_path(j, "distractors", c.distractors);
    take_opt_path(j, "overrides", c.overrides);
    if (j.contains("ddpg")) {
      const auto& d = j.at("ddpg");
      auto& h = c.ddpg;
      take(d, "actor_lr", h.actor_lr);
      take(d, "critic_lr", h.critic_lr);
      take(d, "tau", h.tau);
      take(d, "buffer_capacity", h.buffer_capacity);
      take(d, "batch_size", h.batch_size);
      take(d, "gamma", h.gamma);
      take(d, "episodes", h.episodes);
      take(d, "warmup_steps", h.warmup_steps);
      take(d, "hidden", h.hidden);
      take(d, "reward_scale", h.reward_scale);
      take(d, "random_warmup", h.random_warmup);
      take(d, "preactivation_penalty", h.preactivation_penalty);
      take(d, "random_start", h.random_start);
      take(d, "random_start_speed", h.random_start_speed);
      if (d.contains("noise")) {
        const auto& n = d.at("noise");
        if (n.contains("kind")) h.noise.kind = parse_noise(n.at("kind").get<std::string>());
        take(n, "sigma_start", h.noise.sigma_start);
        take(n, "sigma_end", h.noise.sigma_end);
        take(n, "theta", h.noise.theta);
      }
    }
    take(j, "waypoints", c.waypoints);
    if (j.contains("driver")) c.driver = parse_driver(j.at("driver").get<std::string>());
    if (j.contains("test_driver")) c.test_driver = parse_driver(j.at("test_driver").get<std::string>());
    take(j, "fps", c.fps);
    take(j, "quality_guard_steps", c.quality_guard_steps);
    if (j.contains("corpus")) {
      const auto& k = j.at("corpus");
      take(k, "train_per_category", c.corpus.train_per_category);
      take(k, "test_per_category", c.corpus.test_per_category);
      take(k, "test_second_track_share", c.corpus.test_second_track_share);
      take(k, "train_fraction", c.corpus.train_fraction);
      take(k, "heldout_fraction", c.corpus.heldout_fraction);
      take(k, "min_segment", c.corpus.min_segment);
    }
    if (j.contains("render")) {
      const auto& r = j.at("render");
      take(r, "width", c.render.width);
      take(r, "height", c.render.height);
      take(r, "channels", c.render.channels);
      take(r, "meters_per_pixel", c.render.meters_per_pixel);
      take(r, "marking_width", c.render.marking_width);
      if (r.contains("view")) c.render.view = parse_view(r.at("view").get<std::string>());
      take(r, "draw_ego", c.render.draw_ego);
    }
    if (j.contains("vqa")) {
      json merged = vqa::to_json(c.vqa);
      merged.update(j.at("vqa"));
      c.vqa = vqa::config_from_json(merged);
    }
    take(j, "answer_count", c.answer_count);
    take(j, "top_k", c.top_k);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("bad run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingPrerequisite("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidConfig("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

sim::TrackSpec resolve_track(const std::string& id) {
  for (const auto& name : sim::builtin_track_names())
    if (name == id) return sim::builtin_track(id);
  if (!std::filesystem::exists(id)) throw MissingPrerequisite("track not found: " + id);
  return sim::load_track_file(id);
}

}  // namespace xdrive::app
