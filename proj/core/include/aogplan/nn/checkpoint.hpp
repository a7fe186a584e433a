#pragma once

// Versioned binary checkpoints: a small header (magic, version, free-form
// JSON meta string) followed by named tensors as little-endian 64-bit
// floats. Save then load reproduces every bit.

#include <filesystem>
#include <string>
#include <vector>

#include "aogplan/nn/tensor.hpp"

namespace aogplan::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<ParamRef>& params,
                     const std::string& meta_json);

// Loads into an already-sized registry; names and shapes must match the
// file. Returns the meta string.
std::string load_checkpoint(const std::filesystem::path& path,
                            const std::vector<ParamRef>& params);

// Reads only the meta string (e.g. to discover widths before sizing).
std::string read_checkpoint_meta(const std::filesystem::path& path);

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aogplan::nn
