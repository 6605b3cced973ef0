#pragma once

#include <string>

#include "gridpilot/model.hpp"
#include "gridpilot/tensor.hpp"

namespace gridpilot {

// CKPT v1: versioned JSON with the model config and every parameter as
// {shape, row-major values}. Unknown format versions are rejected, as are
// missing/extra parameters, shape mismatches and non-finite values.
std::string checkpoint_to_json(const ModelConfig& cfg, const ParamStore& store);

struct Checkpoint {
  ModelConfig config;
  ParamStore params;
};

Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const ParamStore& store);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gridpilot
