#include "gridpilot/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gridpilot {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "CKPT v1";

}  // namespace

std::string checkpoint_to_json(const ModelConfig& cfg, const ParamStore& store) {
  json j;
  j["format"] = kFormat;
  j["config"] = {{"d", cfg.d},           {"n_layers", cfg.n_layers},
                 {"n_heads", cfg.n_heads}, {"vocab", cfg.vocab},
                 {"k", cfg.k},           {"l_max", cfg.l_max},
                 {"action_count", cfg.action_count}};
  json params = json::object();
  for (const auto& [name, p] : store) {
    if (!p.value.finite())
      throw std::runtime_error("checkpoint: parameter \"" + name +
                               "\" contains non-finite values");
    params[name] = {{"shape", p.value.shape}, {"values", p.value.data}};
  }
  j["params"] = std::move(params);
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j = json::parse(text);
  if (!j.contains("format") || j["format"] != kFormat) {
    throw std::runtime_error("checkpoint: unsupported format \"" +
                             (j.contains("format") ? j["format"].dump() : "?") +
                             "\", expected \"" + kFormat + "\"");
  }
  Checkpoint out;
  const json& c = j.at("config");
  out.config.d = c.at("d");
  out.config.n_layers = c.at("n_layers");
  out.config.n_heads = c.at("n_heads");
  out.config.vocab = c.at("vocab");
  out.config.k = c.at("k");
  out.config.l_max = c.at("l_max");
  out.config.action_count = c.at("action_count");
  out.config.validate();

  const auto expected = expected_param_shapes(out.config);
  const json& params = j.at("params");
  for (const auto& [name, shape] : expected) {
    if (!params.contains(name))
      throw std::runtime_error("checkpoint: missing parameter \"" + name + "\"");
    const json& p = params.at(name);
    const std::vector<int> got_shape = p.at("shape").get<std::vector<int>>();
    if (got_shape != shape)
      throw std::runtime_error("checkpoint: parameter \"" + name +
                               "\" has unexpected shape");
    Tensor t(shape[0], shape[1]);
    t.data = p.at("values").get<std::vector<double>>();
    if (t.size() != static_cast<int64_t>(shape[0]) * shape[1])
      throw std::runtime_error("checkpoint: parameter \"" + name +
                               "\" has wrong value count");
    if (!t.finite())
      throw std::runtime_error("checkpoint: parameter \"" + name +
                               "\" contains non-finite values");
    out.params.add(name, std::move(t));
  }
  for (const auto& [name, p] : params.items()) {
    if (!expected.count(name))
      throw std::runtime_error("checkpoint: unknown parameter \"" + name + "\"");
  }
  return out;
}

void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const ParamStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write \"" + path + "\"");
  out << checkpoint_to_json(cfg, store);
  out << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read \"" + path + "\"");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace gridpilot
