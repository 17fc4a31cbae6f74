#include "rwt/nn/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace rwt::nn {

const RawTensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw Error("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

void Checkpoint::put(const std::string& name, const Tensor& t) {
  const Shape& s = t.shape();
  tensors.emplace_back(name, RawTensor{{s.n, s.c, s.h, s.w}, {t.values().begin(), t.values().end()}});
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nlohmann::json header;
  header["format"] = "rwt-checkpoint";
  header["metadata"] = ckpt.metadata;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.tensors) {
    if (t.data.size() != t.element_count()) {
      throw Error("checkpoint tensor '" + name + "' does not match its shape");
    }
    header["tensors"].push_back({{"name", name}, {"shape", t.shape}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  out << header.dump() << '\n';
  for (const auto& [name, t] : ckpt.tensors) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) throw Error("I/O failure writing checkpoint '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("checkpoint '" + path.string() + "' is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt checkpoint header in '" + path.string() + "': " + e.what());
  }
  if (header.value("format", "") != "rwt-checkpoint") {
    throw Error("'" + path.string() + "' is not an rwt checkpoint");
  }
  Checkpoint ckpt;
  ckpt.metadata = header.value("metadata", nlohmann::json::object());
  for (const auto& entry : header.at("tensors")) {
    RawTensor t;
    t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    t.data.resize(t.element_count());
    const auto bytes = static_cast<std::streamsize>(t.data.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(t.data.data()), bytes);
    const auto name = entry.at("name").get<std::string>();
    if (in.gcount() != bytes) {
      throw Error("checkpoint payload length mismatch at tensor '" + name + "'");
    }
    for (float v : t.data)
      if (!std::isfinite(v)) throw Error("checkpoint tensor '" + name + "' has non-finite values");
    ckpt.tensors.emplace_back(name, std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error("checkpoint payload length mismatch (trailing bytes)");
  }
  return ckpt;
}

void load_into(const Checkpoint& ckpt, const std::string& name, Tensor& dst) {
  const RawTensor& t = ckpt.get(name);
  if (t.data.size() != dst.size()) {
    throw Error("checkpoint tensor '" + name + "' has " +
                std::to_string(t.data.size()) + " values, expected " +
                std::to_string(dst.size()));
  }
  std::memcpy(dst.data(), t.data.data(), t.data.size() * sizeof(float));
}

}  // namespace rwt::nn
