#pragma once

// Checkpoint archive: a single little-endian binary file.
//
//   magic      8 bytes  "SVIARCH1"
//   meta_len   u64      length of the JSON record that follows
//   meta       bytes    compact JSON (configuration, step, seeds)
//   count      u64      number of tensors
//   per tensor (sorted by name):
//     name_len u32, name bytes
//     dtype    u8       0 = float32, 1 = float64, 2 = int64
//     ndim     u32, dims i64[ndim]
//     data     raw contiguous element bytes
//
// The encoding is a pure function of its contents, so save -> load -> save
// reproduces the file byte for byte.

#include "svi/model/networks.hpp"

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <filesystem>
#include <map>
#include <string>

namespace svi::model {

struct TensorArchive {
    nlohmann::json meta = nlohmann::json::object();
    std::map<std::string, torch::Tensor> tensors;
};

void write_archive(const std::filesystem::path& path, const TensorArchive& archive);
TensorArchive read_archive(const std::filesystem::path& path);

/// Named parameters of the joint model; the shared alignment appears once.
std::map<std::string, torch::Tensor> model_state(InpaintingModelImpl& model);
/// Copies values into the model. Every parameter must be present with a matching shape.
void load_model_state(InpaintingModelImpl& model, const std::map<std::string, torch::Tensor>& state,
                      const std::string& prefix = "");

/// Writes a model-only checkpoint (meta carries "model" and whatever `extra` holds).
void save_model(const std::filesystem::path& path, InpaintingModelImpl& model,
                const nlohmann::json& extra = nlohmann::json::object());
InpaintingModel load_model(const std::filesystem::path& path);

}  // namespace svi::model
