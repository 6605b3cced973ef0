#include "gridpilot/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace gridpilot {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& section) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw std::runtime_error("config: unknown key \"" +
                               (section.empty() ? key : section + "." + key) + "\"");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

uint64_t RunConfig::require_seed() const {
  if (!seed.has_value())
    throw std::runtime_error("config: key \"seed\" is required for this command");
  return *seed;
}

RunConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig cfg;
  reject_unknown(j,
                 {"seed", "model", "train", "loop", "episodes", "scenes", "eval",
                  "scene_dir", "eval_split"},
                 "");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  read(j, "scene_dir", cfg.scene_dir);
  read(j, "eval_split", cfg.eval_split);
  if (cfg.eval_split != "train" && cfg.eval_split != "val_seen" &&
      cfg.eval_split != "val_unseen") {
    throw std::runtime_error(
        "config: eval_split must be one of train, val_seen, val_unseen");
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"d", "n_layers", "n_heads", "vocab", "k", "l_max"}, "model");
    read(m, "d", cfg.model.d);
    read(m, "n_layers", cfg.model.n_layers);
    read(m, "n_heads", cfg.model.n_heads);
    read(m, "vocab", cfg.model.vocab);
    read(m, "k", cfg.model.k);
    read(m, "l_max", cfg.model.l_max);
    cfg.model.validate();
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t,
                   {"lambda_pil", "lr", "epochs", "batch_episodes",
                    "supervision_mode", "label_mode", "teacher_forcing",
                    "detach_targets"},
                   "train");
    read(t, "lambda_pil", cfg.train.lambda_pil);
    read(t, "lr", cfg.train.lr);
    read(t, "epochs", cfg.train.epochs);
    read(t, "batch_episodes", cfg.train.batch_episodes);
    if (t.contains("supervision_mode"))
      cfg.train.supervision_mode =
          supervision_mode_from_string(t.at("supervision_mode").get<std::string>());
    if (t.contains("label_mode"))
      cfg.train.label_mode = label_mode_from_string(t.at("label_mode").get<std::string>());
    read(t, "teacher_forcing", cfg.train.teacher_forcing);
    read(t, "detach_targets", cfg.train.detach_targets);
    cfg.train.validate();
  }
  if (j.contains("loop")) {
    const json& l = j.at("loop");
    reject_unknown(l,
                   {"rounds", "episodes_per_round", "bootstrap_episodes",
                    "dev_threshold", "t_max", "aggregate", "eval_episodes"},
                   "loop");
    read(l, "rounds", cfg.loop.rounds);
    read(l, "episodes_per_round", cfg.loop.episodes_per_round);
    read(l, "bootstrap_episodes", cfg.loop.bootstrap_episodes);
    read(l, "dev_threshold", cfg.loop.dev_threshold);
    read(l, "t_max", cfg.loop.t_max);
    read(l, "aggregate", cfg.loop.aggregate);
    read(l, "eval_episodes", cfg.loop.eval_episodes);
    cfg.loop.validate();
  }
  if (j.contains("episodes")) {
    const json& e = j.at("episodes");
    reject_unknown(e, {"min_len", "r_goal", "max_retries", "max_instruction_len"},
                   "episodes");
    read(e, "min_len", cfg.episodes.min_len);
    read(e, "r_goal", cfg.episodes.r_goal);
    read(e, "max_retries", cfg.episodes.max_retries);
    read(e, "max_instruction_len", cfg.episodes.max_instruction_len);
  }
  if (j.contains("scenes")) {
    const json& s = j.at("scenes");
    reject_unknown(s,
                   {"width", "height", "rooms", "landmark_density", "n_train",
                    "n_val_unseen"},
                   "scenes");
    read(s, "width", cfg.scenes.width);
    read(s, "height", cfg.scenes.height);
    read(s, "rooms", cfg.scenes.rooms);
    read(s, "landmark_density", cfg.scenes.landmark_density);
    read(s, "n_train", cfg.scenes.n_train);
    read(s, "n_val_unseen", cfg.scenes.n_val_unseen);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, {"d_succ", "sample", "temperature"}, "eval");
    read(e, "d_succ", cfg.eval.d_succ);
    read(e, "sample", cfg.eval.policy.sample);
    read(e, "temperature", cfg.eval.policy.temperature);
  }
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  if (cfg.seed.has_value()) j["seed"] = *cfg.seed;
  j["scene_dir"] = cfg.scene_dir;
  j["eval_split"] = cfg.eval_split;
  j["model"] = {{"d", cfg.model.d},         {"n_layers", cfg.model.n_layers},
                {"n_heads", cfg.model.n_heads}, {"vocab", cfg.model.vocab},
                {"k", cfg.model.k},         {"l_max", cfg.model.l_max}};
  j["train"] = {{"lambda_pil", cfg.train.lambda_pil},
                {"lr", cfg.train.lr},
                {"epochs", cfg.train.epochs},
                {"batch_episodes", cfg.train.batch_episodes},
                {"supervision_mode", to_string(cfg.train.supervision_mode)},
                {"label_mode", to_string(cfg.train.label_mode)},
                {"teacher_forcing", cfg.train.teacher_forcing},
                {"detach_targets", cfg.train.detach_targets}};
  j["loop"] = {{"rounds", cfg.loop.rounds},
               {"episodes_per_round", cfg.loop.episodes_per_round},
               {"bootstrap_episodes", cfg.loop.bootstrap_episodes},
               {"dev_threshold", cfg.loop.dev_threshold},
               {"t_max", cfg.loop.t_max},
               {"aggregate", cfg.loop.aggregate},
               {"eval_episodes", cfg.loop.eval_episodes}};
  j["episodes"] = {{"min_len", cfg.episodes.min_len},
                   {"r_goal", cfg.episodes.r_goal},
                   {"max_retries", cfg.episodes.max_retries},
                   {"max_instruction_len", cfg.episodes.max_instruction_len}};
  j["scenes"] = {{"width", cfg.scenes.width},
                 {"height", cfg.scenes.height},
                 {"rooms", cfg.scenes.rooms},
                 {"landmark_density", cfg.scenes.landmark_density},
                 {"n_train", cfg.scenes.n_train},
                 {"n_val_unseen", cfg.scenes.n_val_unseen}};
  j["eval"] = {{"d_succ", cfg.eval.d_succ},
               {"sample", cfg.eval.policy.sample},
               {"temperature", cfg.eval.policy.temperature}};
  return j.dump(2) + "\n";
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot read \"" + path + "\"");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return config_from_json(text);
  } catch (const json::exception& e) {
    throw std::runtime_error("config: \"" + path + "\" is not valid JSON: " + e.what());
  }
}

void write_config_file(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("config: cannot write \"" + path + "\"");
  out << config_to_json(cfg);
}

}  // namespace gridpilot
