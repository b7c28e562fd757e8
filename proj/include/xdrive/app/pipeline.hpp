#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "xdrive/app/run_config.hpp"
#include "xdrive/data/corpus.hpp"
#include "xdrive/rl/trainer.hpp"
#include "xdrive/vqa/evaluate.hpp"
#include "xdrive/vqa/train.hpp"

namespace xdrive::app {

nlohmann::ordered_json versions();

// Writes <artifact>.stamp.json: {stage, seed, config_hash, versions, ...extra}.
void write_stamp(const std::filesystem::path& artifact, const std::string& stage, const RunConfig& cfg,
                 const nlohmann::ordered_json& extra = nlohmann::ordered_json::object());

sim::DrivingEnv make_env(const std::string& track_id);

struct AgentSummary {
  std::vector<rl::EpisodeLog> curve;
  rl::Rollout greedy;
};

AgentSummary train_agent_stage(const RunConfig& cfg, const std::function<void(const rl::EpisodeLog&)>& progress = {});

// Throws MissingPrerequisite naming the checkpoint.
rl::DdpgAgent load_agent(const RunConfig& cfg, const sim::DrivingEnv& env);

// Records the training track and the test track.
std::vector<data::Recording> record_stage(const RunConfig& cfg);

data::Corpus build_dataset_stage(const RunConfig& cfg);

// Distractors sized to answer_count - 5 (truncated or synthesized).
std::vector<std::string> distractors_for(const RunConfig& cfg);

std::vector<vqa::EpochStats> train_vqa_stage(const RunConfig& cfg,
                                             const std::function<void(const vqa::EpochStats&)>& progress = {});

vqa::Report eval_vqa_stage(const RunConfig& cfg);

vqa::Prediction explain(const std::filesystem::path& frame, const std::string& question,
                        const std::filesystem::path& model, std::size_t k);

}  // namespace xdrive::app
