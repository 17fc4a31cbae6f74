#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rwt/datamodel/tensor_io.hpp"
#include "rwt/nn/tensor.hpp"

namespace rwt::nn {

// Single-file container: one JSON header line
//   {"format":"rwt-checkpoint","metadata":{...},"tensors":[{"name","shape"}...]}
// followed by each tensor's little-endian f32 payload in header order.
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::pair<std::string, RawTensor>> tensors;

  const RawTensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  void put(const std::string& name, const Tensor& t);
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Rejects truncated payloads and non-finite values.
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies a stored tensor into `dst`, checking the element count.
void load_into(const Checkpoint& ckpt, const std::string& name, Tensor& dst);

}  // namespace rwt::nn
