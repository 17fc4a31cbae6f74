#include "rwt/datamodel/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace rwt {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void check_shape(const std::vector<std::int64_t>& shape) {
  if (shape.empty()) throw Error("tensor shape has no dimensions");
  for (auto d : shape) {
    if (d <= 0) throw Error("tensor shape has a zero dimension");
  }
}

}  // namespace

std::size_t RawTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return shape.empty() ? 0 : n;
}

RawTensor to_raw(const ImageTensor& image) {
  return {{image.height(), image.width(), ImageTensor::kChannels},
          image.values()};
}

RawTensor to_raw(const ScoreMap& map) {
  RawTensor raw{{map.height(), map.width(), 2}, {}};
  raw.data.resize(map.cells() * 2);
  for (std::size_t i = 0; i < map.cells(); ++i) {
    raw.data[2 * i] = map.region_plane()[i];
    raw.data[2 * i + 1] = map.affinity_plane()[i];
  }
  return raw;
}

ImageTensor image_from_raw(const RawTensor& raw) {
  if (raw.shape.size() != 3 || raw.shape[2] != ImageTensor::kChannels) {
    throw Error("image tensors must have shape [h, w, 3]");
  }
  ImageTensor image(static_cast<int>(raw.shape[0]),
                    static_cast<int>(raw.shape[1]), raw.data);
  if (!image.values_in_unit_range()) {
    throw Error("image tensor values must lie in [0,1]");
  }
  return image;
}

ScoreMap score_map_from_raw(const RawTensor& raw) {
  if (raw.shape.size() != 3 || raw.shape[2] != 2) {
    throw Error("score map tensors must have shape [h, w, 2]");
  }
  const auto n = static_cast<std::size_t>(raw.shape[0] * raw.shape[1]);
  std::vector<float> region(n), affinity(n);
  for (std::size_t i = 0; i < n; ++i) {
    region[i] = raw.data[2 * i];
    affinity[i] = raw.data[2 * i + 1];
  }
  ScoreMap map(static_cast<int>(raw.shape[0]), static_cast<int>(raw.shape[1]),
               std::move(region), std::move(affinity));
  if (!map.values_in_unit_range()) {
    throw Error("score map values must lie in [0,1]");
  }
  return map;
}

void write_raw(std::ostream& out, const RawTensor& tensor) {
  check_shape(tensor.shape);
  if (tensor.data.size() != tensor.element_count()) {
    throw Error("tensor data does not match its shape");
  }
  nlohmann::json header;
  header["dtype"] = "f32";
  header["shape"] = tensor.shape;
  out << header.dump() << '\n';
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
  } else {
    for (float v : tensor.data) {
      auto bits = byteswap32(std::bit_cast<std::uint32_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw Error("I/O failure writing tensor payload");
}

RawTensor read_raw(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("missing tensor header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed tensor header: ") + e.what());
  }
  if (header.value("dtype", "") != "f32") {
    throw Error("unsupported tensor dtype");
  }
  RawTensor tensor;
  tensor.shape = header.at("shape").get<std::vector<std::int64_t>>();
  check_shape(tensor.shape);
  const std::size_t n = tensor.element_count();
  tensor.data.resize(n);
  const auto bytes = static_cast<std::streamsize>(n * sizeof(float));
  in.read(reinterpret_cast<char*>(tensor.data.data()), bytes);
  if (in.gcount() != bytes) throw Error("payload length mismatch");
  if constexpr (std::endian::native != std::endian::little) {
    for (float& v : tensor.data)
      v = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(v)));
  }
  return tensor;
}

void write_tensor(const std::filesystem::path& path, const RawTensor& tensor) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_raw(out, tensor);
}

void write_tensor(const std::filesystem::path& path, const ImageTensor& image) {
  write_tensor(path, to_raw(image));
}

void write_tensor(const std::filesystem::path& path, const ScoreMap& map) {
  write_tensor(path, to_raw(map));
}

RawTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tensor file '" + path.string() + "'");
  RawTensor t = read_raw(in);
  // A single-tensor file must end exactly at the payload.
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error("payload length mismatch");
  }
  return t;
}

ImageTensor read_image_tensor(const std::filesystem::path& path) {
  return image_from_raw(read_tensor(path));
}

ScoreMap read_score_map(const std::filesystem::path& path) {
  return score_map_from_raw(read_tensor(path));
}

}  // namespace rwt
