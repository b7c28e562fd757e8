#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "xdrive/app/pipeline.hpp"
#include "xdrive/app/service.hpp"
#include "xdrive/errors.hpp"

using namespace xdrive;
using nlohmann::json;

namespace {

// Flags are gathered into a JSON patch with the same shape as a config file,
// so --config and flags go through one parser.
struct Overrides {
  json patch = json::object();
  std::string config_file;
  std::string profile;

  template <typename T>
  void add(CLI::App& app, const std::string& flag, const std::string& pointer, const std::string& help) {
    app.add_option_function<T>(
           flag, [this, pointer](const T& v) { patch[json::json_pointer(pointer)] = v; }, help)
        ->group("Run config");
  }

  app::RunConfig resolve() const {
    app::RunConfig cfg;
    if (!profile.empty()) cfg = app::config_from_json(json{{"profile", profile}}, cfg);
    if (!config_file.empty()) cfg = app::config_from_json(app::to_json(app::load_run_config(config_file)), cfg);
    return app::config_from_json(patch, cfg);
  }
};

void register_flags(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_file, "JSON run config; flags override it")->group("Run config");
  app.add_option("--profile", o.profile, "desk | paper-scale")->group("Run config");
  o.add<std::string>(app, "--track-id", "/track_id", "training track (built-in name or file)");
  o.add<std::string>(app, "--test-track-id", "/test_track_id", "second track for the test split");
  o.add<std::uint64_t>(app, "--seed", "/seed", "master seed");
  o.add<std::string>(app, "--checkpoints", "/checkpoints", "checkpoint directory");
  o.add<std::string>(app, "--corpus-root", "/corpus_root", "recordings and manifest directory");
  o.add<std::string>(app, "--reports", "/reports", "report directory");
  o.add<std::string>(app, "--distractors", "/distractors", "distractor answer list");
  o.add<std::string>(app, "--overrides", "/overrides", "manual category overrides");
  o.add<double>(app, "--actor-lr", "/ddpg/actor_lr", "");
  o.add<double>(app, "--critic-lr", "/ddpg/critic_lr", "");
  o.add<double>(app, "--tau", "/ddpg/tau", "");
  o.add<std::size_t>(app, "--buffer-capacity", "/ddpg/buffer_capacity", "");
  o.add<std::size_t>(app, "--batch-size", "/ddpg/batch_size", "");
  o.add<double>(app, "--gamma", "/ddpg/gamma", "");
  o.add<int>(app, "--episodes", "/ddpg/episodes", "");
  o.add<int>(app, "--warmup-steps", "/ddpg/warmup_steps", "");
  o.add<int>(app, "--hidden", "/ddpg/hidden", "");
  o.add<double>(app, "--reward-scale", "/ddpg/reward_scale", "");
  o.add<bool>(app, "--random-warmup", "/ddpg/random_warmup", "");
  o.add<double>(app, "--preactivation-penalty", "/ddpg/preactivation_penalty", "");
  o.add<double>(app, "--random-start", "/ddpg/random_start", "");
  o.add<double>(app, "--random-start-speed", "/ddpg/random_start_speed", "");
  o.add<std::string>(app, "--noise", "/ddpg/noise/kind", "gaussian | ou");
  o.add<double>(app, "--sigma-start", "/ddpg/noise/sigma_start", "");
  o.add<double>(app, "--sigma-end", "/ddpg/noise/sigma_end", "");
  o.add<std::size_t>(app, "--waypoints", "/waypoints", "");
  o.add<std::string>(app, "--driver", "/driver", "actor | pursuit");
  o.add<std::string>(app, "--test-driver", "/test_driver", "actor | pursuit");
  o.add<double>(app, "--fps", "/fps", "");
  o.add<int>(app, "--quality-guard-steps", "/quality_guard_steps", "");
  o.add<int>(app, "--train-per-category", "/corpus/train_per_category", "");
  o.add<int>(app, "--test-per-category", "/corpus/test_per_category", "");
  o.add<double>(app, "--test-second-track-share", "/corpus/test_second_track_share", "");
  o.add<std::size_t>(app, "--min-segment", "/corpus/min_segment", "");
  o.add<int>(app, "--vqa-epochs", "/vqa/epochs", "");
  o.add<double>(app, "--vqa-lr", "/vqa/learning_rate", "");
  o.add<std::size_t>(app, "--vqa-batch-size", "/vqa/batch_size", "");
  o.add<double>(app, "--dropout", "/vqa/dropout_p", "");
  o.add<std::size_t>(app, "--answer-count", "/answer_count", "");
  o.add<int>(app, "--top-k", "/top_k", "");
}

void print_prediction(const vqa::Prediction& p, const std::string& format) {
  if (format == "json") {
    std::cout << vqa::answers_json(p).dump() << "\n";
    return;
  }
  for (std::size_t i = 0; i < p.ranked.size(); ++i)
    std::printf("%zu  %.6f  %s\n", i + 1, p.ranked[i].prob, p.ranked[i].text.c_str());
}

app::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"xdrive: driving agent, frame corpus and question answering"};
  cli.require_subcommand(1);
  cli.fallthrough();
  Overrides o;
  register_flags(cli, o);

  auto* train_agent = cli.add_subcommand("train-agent", "train the DDPG agent on the training track");
  auto* record = cli.add_subcommand("record", "record drives on both tracks (--driver, --test-driver)");
  auto* build = cli.add_subcommand("build-dataset", "segment recordings and write the QA manifest");
  auto* train_vqa = cli.add_subcommand("train-vqa", "train the question answering model");
  auto* eval_vqa = cli.add_subcommand("eval-vqa", "evaluate on the test split and write the report");
  auto* pipeline = cli.add_subcommand("pipeline", "run every stage in order");
  auto* show_config = cli.add_subcommand("config", "print the resolved run config");

  auto* explain = cli.add_subcommand("explain", "answer a question about one frame");
  std::string frame, question, model, format = "text";
  std::size_t k = 5;
  explain->add_option("--frame", frame, "frame PNG")->required();
  explain->add_option("--question", question, "question text")->required();
  explain->add_option("--model", model, "model checkpoint (default: from the run config)");
  explain->add_option("-k,--k", k, "number of answers")->capture_default_str();
  explain->add_option("--format", format, "text | json")->check(CLI::IsMember({"text", "json"}));

  auto* serve = cli.add_subcommand("serve", "HTTP service for the dashboard");
  std::string host = "127.0.0.1", replay_track;
  int port = 8080;
  bool live = false;
  if (const char* env = std::getenv("XDRIVE_PORT")) port = std::atoi(env);
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "overrides XDRIVE_PORT")->capture_default_str();
  serve->add_option("--replay", replay_track, "track whose recording is played back (default: test track)");
  serve->add_flag("--live", live, "drive the trained actor live instead of replaying");

  bool quiet = false;
  cli.add_flag("-q,--quiet", quiet, "no per-epoch progress");

  CLI11_PARSE(cli, argc, argv);

  const char* stage = cli.get_subcommands().front()->get_name().c_str();
  try {
    const auto cfg = o.resolve();
    auto episode_progress = [&](const rl::EpisodeLog& l) {
      if (!quiet) std::fprintf(stderr, "episode %d return %.2f steps %d %s\n", l.episode, l.ret, l.steps,
                               std::string(sim::to_string(l.event)).c_str());
    };
    auto epoch_progress = [&](const vqa::EpochStats& s) {
      if (!quiet) std::fprintf(stderr, "epoch %d loss %.6f accuracy %.4f\n", s.epoch, s.loss, s.accuracy);
    };
    auto run_train_agent = [&] {
      const auto s = app::train_agent_stage(cfg, episode_progress);
      std::printf("greedy rollout: %s after %zu steps, return %.2f\n",
                  std::string(sim::to_string(s.greedy.termination)).c_str(), s.greedy.actions.size(), s.greedy.ret);
    };
    auto run_record = [&] {
      for (const auto& r : app::record_stage(cfg))
        std::printf("%s: %zu frames, %s\n", r.track_id.c_str(), r.log.size(),
                    std::string(sim::to_string(r.termination)).c_str());
    };
    auto run_build = [&] {
      const auto c = app::build_dataset_stage(cfg);
      std::printf("manifest %s: %zu train, %zu test\n", cfg.manifest().string().c_str(), c.train.size(),
                  c.test.size());
    };
    auto run_train_vqa = [&] {
      const auto log = app::train_vqa_stage(cfg, epoch_progress);
      if (!log.empty()) std::printf("final epoch loss %.6f\n", log.back().loss);
    };
    auto run_eval = [&] { std::cout << vqa::format_report(app::eval_vqa_stage(cfg)); };

    if (*train_agent) run_train_agent();
    if (*record) run_record();
    if (*build) run_build();
    if (*train_vqa) run_train_vqa();
    if (*eval_vqa) run_eval();
    if (*pipeline) {
      run_train_agent();
      run_record();
      run_build();
      run_train_vqa();
      run_eval();
    }
    if (*show_config) std::cout << app::to_json(cfg).dump(2) << "\n";
    if (*explain) print_prediction(app::explain(frame, question, model.empty() ? cfg.model() : std::filesystem::path(model), k), format);
    if (*serve) {
      app::ServiceOptions opts;
      opts.top_k = static_cast<std::size_t>(cfg.top_k);
      opts.fps = cfg.fps;
      opts.history = cfg.history();
      for (const auto& t : {cfg.track_id, cfg.test_track_id})
        if (std::filesystem::exists(cfg.recording_dir(t) / "log.jsonl")) opts.recordings.push_back(cfg.recording_dir(t));
      if (live) {
        auto env = std::make_shared<const sim::DrivingEnv>(app::make_env(replay_track.empty() ? cfg.track_id : replay_track));
        auto agent = std::make_shared<rl::DdpgAgent>(app::load_agent(cfg, *env));
        const auto ocfg = rl::ObservationConfig::for_env(*env, cfg.waypoints);
        app::LiveDrive drive{env, {}, cfg.render, cfg.fps};
        drive.render.vehicle = env->config().vehicle;
        drive.policy = [agent, env, ocfg](const sim::EgoState& s) {
          return rl::to_action(agent->policy(rl::observe(s, env->route(), ocfg)));
        };
        opts.live = std::move(drive);
      } else {
        const auto dir = cfg.recording_dir(replay_track.empty() ? cfg.test_track_id : replay_track);
        if (!std::filesystem::exists(dir / "log.jsonl")) throw MissingPrerequisite("recording not found: " + dir.string());
        opts.replay = dir;
      }
      app::Service service(opts);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const int bound = service.start(host, port);
      std::fprintf(stderr, "serving on http://%s:%d\n", host.c_str(), bound);
      if (std::filesystem::exists(cfg.model())) {
        service.load_model(cfg.model());
        std::fprintf(stderr, "model loaded from %s\n", cfg.model().string().c_str());
      } else {
        std::fprintf(stderr, "no model at %s; /api/ask answers 503\n", cfg.model().string().c_str());
      }
      service.wait();
      g_service = nullptr;
    }
  } catch (const MissingPrerequisite& e) {
    std::fprintf(stderr, "xdrive %s: missing prerequisite: %s\n", stage, e.what());
    return 3;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "xdrive %s: invalid argument: %s\n", stage, e.what());
    return 2;
  } catch (const EmptyQuestion& e) {
    std::fprintf(stderr, "xdrive %s: empty question: %s\n", stage, e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "xdrive %s: %s\n", stage, e.what());
    return 1;
  }
  return 0;
}
