#include "xdrive/app/pipeline.hpp"

#include <fstream>

#include <Eigen/Core>
#include <png.h>

#include "xdrive/data/vocab.hpp"
#include "xdrive/errors.hpp"

namespace xdrive::app {

namespace {

void require(const std::filesystem::path& p, const std::string& what) {
  if (!std::filesystem::exists(p)) throw MissingPrerequisite(what + " not found: " + p.string());
}

void ensure_parent(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

}  // namespace

nlohmann::ordered_json versions() {
  return {{"xdrive", "0.1.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"libpng", PNG_LIBPNG_VER_STRING}};
}

void write_stamp(const std::filesystem::path& artifact, const std::string& stage, const RunConfig& cfg,
                 const nlohmann::ordered_json& extra) {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["seed"] = cfg.seed;
  j["config_hash"] = config_hash(cfg);
  j["versions"] = versions();
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_text(artifact.string() + ".stamp.json", j.dump(2) + "\n");
}

sim::DrivingEnv make_env(const std::string& track_id) {
  sim::Track track(resolve_track(track_id));
  auto route = sim::default_route(track);
  return sim::DrivingEnv(std::move(track), std::move(route));
}

AgentSummary train_agent_stage(const RunConfig& cfg, const std::function<void(const rl::EpisodeLog&)>& progress) {
  cfg.validate();
  const auto env = make_env(cfg.track_id);
  ensure_parent(cfg.agent_checkpoint());
  ensure_parent(cfg.learning_curve());
  rl::TrainOptions opts;
  opts.seed = cfg.seed;
  opts.observation_waypoints = cfg.waypoints;
  opts.checkpoint = cfg.agent_checkpoint();
  opts.curve = cfg.learning_curve();
  opts.on_episode = progress;
  auto result = rl::train(env, cfg.ddpg, opts);
  AgentSummary s{std::move(result.curve), {}};
  const auto ocfg = rl::ObservationConfig::for_env(env, cfg.waypoints);
  s.greedy = rl::rollout(env, rl::actor_policy(result.agent, env.route(), ocfg));
  write_stamp(cfg.agent_checkpoint(), "train-agent", cfg,
              {{"track_id", cfg.track_id},
               {"episodes", cfg.ddpg.episodes},
               {"greedy", {{"termination", sim::to_string(s.greedy.termination)},
                           {"steps", s.greedy.actions.size()},
                           {"return", s.greedy.ret}}}});
  return s;
}

rl::DdpgAgent load_agent(const RunConfig& cfg, const sim::DrivingEnv& env) {
  require(cfg.agent_checkpoint(), "agent checkpoint");
  const auto ocfg = rl::ObservationConfig::for_env(env, cfg.waypoints);
  rl::DdpgAgent agent(ocfg.dim(), 2, cfg.ddpg, cfg.seed);
  agent.load(cfg.agent_checkpoint());
  return agent;
}

std::vector<data::Recording> record_stage(const RunConfig& cfg) {
  cfg.validate();
  std::vector<data::Recording> out;
  for (const auto& track_id : {cfg.track_id, cfg.test_track_id}) {
    const auto env = make_env(track_id);
    const auto dir = cfg.recording_dir(track_id);
    data::RecordOptions opts;
    opts.fps = cfg.fps;
    opts.quality_guard_steps = cfg.quality_guard_steps;
    opts.id_prefix = dir.filename().string();
    opts.render = cfg.render;
    opts.render.vehicle = env.config().vehicle;
    const Driver driver = track_id == cfg.track_id ? cfg.driver : cfg.test_driver;
    data::Recording rec;
    if (driver == Driver::actor) {
      const auto agent = load_agent(cfg, env);
      const auto ocfg = rl::ObservationConfig::for_env(env, cfg.waypoints);
      rec = data::record_drive(env, rl::actor_policy(agent, env.route(), ocfg), opts);
    } else {
      rec = data::record_drive(env, rl::pure_pursuit_policy(env), opts);
    }
    rec.track_id = dir.filename().string();
    if (std::filesystem::exists(dir)) std::filesystem::remove_all(dir);
    data::write_recording(rec, dir);
    write_stamp(dir / "log.jsonl", "record", cfg,
                {{"track_id", track_id},
                 {"driver", to_string(driver)},
                 {"frames", rec.log.size()},
                 {"termination", sim::to_string(rec.termination)}});
    out.push_back(std::move(rec));
  }
  return out;
}

data::Corpus build_dataset_stage(const RunConfig& cfg) {
  cfg.validate();
  const auto train_dir = cfg.recording_dir(cfg.track_id);
  const auto test_dir = cfg.recording_dir(cfg.test_track_id);
  require(train_dir / "log.jsonl", "recording log");
  require(test_dir / "log.jsonl", "recording log");
  auto train_rec = data::read_recording_log(train_dir);
  auto test_rec = data::read_recording_log(test_dir);
  std::size_t relabelled = 0;
  if (cfg.overrides) {
    require(*cfg.overrides, "overrides file");
    relabelled += data::apply_overrides(train_rec, *cfg.overrides, true);
    relabelled += data::apply_overrides(test_rec, *cfg.overrides, true);
  }
  // frame paths in the manifest are relative to its directory
  const auto rel = [&](const std::filesystem::path& d) {
    return std::filesystem::relative(d, cfg.corpus_root).generic_string();
  };
  auto corpus = data::build_desk_corpus(train_rec, rel(train_dir), test_rec, rel(test_dir), cfg.corpus);
  data::write_manifest(cfg.manifest(), corpus.all());
  std::size_t second = 0;
  for (const auto& r : corpus.test) second += r.track_id == test_rec.track_id;
  write_stamp(cfg.manifest(), "build-dataset", cfg,
              {{"train_records", corpus.train.size()},
               {"test_records", corpus.test.size()},
               {"test_from_second_track", second},
               {"test_second_track_share",
                corpus.test.empty() ? 0.0 : static_cast<double>(second) / static_cast<double>(corpus.test.size())},
               {"relabelled", relabelled}});
  return corpus;
}

std::vector<std::string> distractors_for(const RunConfig& cfg) {
  const auto path = cfg.distractors ? *cfg.distractors : data::default_distractor_path();
  require(path, "distractor list");
  auto base = data::load_distractors(path);
  const std::size_t want = cfg.answer_count - sim::kCategoryCount;
  if (base.size() >= want) {
    base.resize(want);
    return base;
  }
  return data::synthesize_distractors(base, want);
}

std::vector<vqa::EpochStats> train_vqa_stage(const RunConfig& cfg,
                                             const std::function<void(const vqa::EpochStats&)>& progress) {
  cfg.validate();
  require(cfg.manifest(), "manifest");
  const auto records = data::read_manifest(cfg.manifest());
  const auto train = data::filter_split(records, data::Split::train);
  if (train.empty()) throw InsufficientFrames("manifest has no train records");
  auto [qv, av] = data::build_vocabs(records, distractors_for(cfg));
  auto bundle = vqa::make_bundle(cfg.vqa, std::move(qv), std::move(av), cfg.seed);
  const auto data = vqa::make_dataset(bundle, train, vqa::manifest_loader(cfg.manifest()));
  ensure_parent(cfg.vqa_log());
  std::ofstream log(cfg.vqa_log(), std::ios::trunc);
  if (!log) throw IoError("cannot write " + cfg.vqa_log().string());
  auto stats = vqa::train_vqa(bundle, data, cfg.vqa.epochs, cfg.seed, [&](const vqa::EpochStats& s) {
    nlohmann::ordered_json j{{"epoch", s.epoch}, {"loss", s.loss}, {"accuracy", s.accuracy}};
    log << j.dump() << "\n";
    if (progress) progress(s);
  });
  ensure_parent(cfg.model());
  vqa::save_bundle(cfg.model(), bundle);
  write_stamp(cfg.model(), "train-vqa", cfg,
              {{"train_records", train.size()},
               {"epochs", cfg.vqa.epochs},
               {"train_accuracy", vqa::accuracy(bundle, data)}});
  return stats;
}

vqa::Report eval_vqa_stage(const RunConfig& cfg) {
  require(cfg.model(), "VQA model");
  require(cfg.manifest(), "manifest");
  const auto bundle = vqa::load_bundle(cfg.model());
  const auto test = data::filter_split(data::read_manifest(cfg.manifest()), data::Split::test);
  vqa::ModelAnswerer answerer(bundle, vqa::manifest_loader(cfg.manifest()));
  const auto report = vqa::evaluate(test, bundle.answers, answerer);
  write_text(cfg.report(), vqa::format_report(report));
  auto json_path = cfg.report();
  json_path.replace_extension(".json");
  write_text(json_path, vqa::to_json(report).dump(2) + "\n");
  write_stamp(cfg.report(), "eval-vqa", cfg, {{"test_records", test.size()}, {"accuracy", report.accuracy}});
  return report;
}

vqa::Prediction explain(const std::filesystem::path& frame, const std::string& question,
                        const std::filesystem::path& model, std::size_t k) {
  require(model, "VQA model");
  require(frame, "frame");
  const auto bundle = vqa::load_bundle(model);
  return vqa::predict_topk(bundle, render::read_frame(frame), question, k);
}

}  // namespace xdrive::app
