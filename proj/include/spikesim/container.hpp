#pragma once

#include <filesystem>
#include <vector>

#include "spikesim/model.hpp"
#include "spikesim/spike_tensor.hpp"

namespace spikesim {

// A batch of packed spike images with optional labels.
struct InputBundle {
    Shape3 shape;
    std::vector<SpikeTensor> images;
    std::vector<int> labels; // empty, or one per image

    bool has_labels() const { return !labels.empty(); }
};

// Model container: a directory holding manifest.json plus one raw
// little-endian two's-complement int8 blob per weight tensor, row-major
// [oc][ic][kh][kw] for conv and [classes][features] for FC. The manifest
// declares shapes; blob byte counts must match exactly.
ModelGraph load_model(const std::filesystem::path &dir);
void save_model(const ModelGraph &model, const std::filesystem::path &dir);

// Input bundle: a single binary file, magic "SPIKEIN1", header, then one
// packed bitmap of ceil(C*H*W/8) bytes per image (bit (c*H+y)*W+x, LSB first
// within each byte), then u16 labels when present.
InputBundle load_inputs(const std::filesystem::path &file);
void save_inputs(const InputBundle &bundle, const std::filesystem::path &file);

} // namespace spikesim
