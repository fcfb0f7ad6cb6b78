#pragma once

#include <map>
#include <string>
#include <vector>

#include "textsimp/model.hpp"

namespace textsimp {

// On-disk container shared by every model kind: magic bytes, a format
// version, a key=value text header (model kind, config, vocabulary), then
// named flat little-endian float32 arrays in checkpoint order. Master
// parameters are f32-snapped, so save followed by load is bit-identical.
struct CheckpointData {
    std::string kind;  // "mlm" | "tagger" | "seq2seq"
    std::map<std::string, std::string> header;
    std::vector<std::string> vocab_tokens;
    std::vector<ParamTensor> arrays;
};

inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint_data(const CheckpointData& data, const std::string& path);
CheckpointData load_checkpoint_data(const std::string& path);

// ModelParams wrappers; loading verifies the kind and that array shapes
// match the config.
void save_model_checkpoint(const ModelParams& params, const std::string& kind,
                           const std::string& path);
ModelParams load_model_checkpoint(const std::string& path, const std::string& expected_kind);

}  // namespace textsimp
