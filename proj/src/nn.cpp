#include "nn.hpp"

#include <cstring>
#include <fstream>

namespace fusqa::nn {

namespace {

constexpr char kMagic[4] = {'F', 'Q', 'M', '1'};
constexpr uint32_t kFormatVersion = 1;

void put_u32_le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

int64_t param_count(const LayerSpec& spec) {
  using Kind = LayerSpec::Kind;
  switch (spec.kind) {
    case Kind::Conv2d:
      return static_cast<int64_t>(spec.out_ch) * spec.in_ch * 9 + spec.out_ch;
    case Kind::FullyConnected:
      return static_cast<int64_t>(spec.out_dim) * spec.in_dim + spec.out_dim;
    default:
      return 0;
  }
}

nlohmann::json layer_to_json(const LayerSpec& spec) {
  using Kind = LayerSpec::Kind;
  nlohmann::json j;
  switch (spec.kind) {
    case Kind::Conv2d:
      j["kind"] = "conv";
      j["in"] = spec.in_ch;
      j["out"] = spec.out_ch;
      break;
    case Kind::ReLU: j["kind"] = "relu"; break;
    case Kind::MaxPool: j["kind"] = "maxpool"; break;
    case Kind::GlobalAvgPool: j["kind"] = "gap"; break;
    case Kind::FullyConnected:
      j["kind"] = "fc";
      j["in"] = spec.in_dim;
      j["out"] = spec.out_dim;
      break;
    case Kind::Sigmoid: j["kind"] = "sigmoid"; break;
    case Kind::NearestUpsample: j["kind"] = "upsample"; break;
  }
  return j;
}

LayerSpec layer_from_json(const nlohmann::json& j) {
  std::string kind;
  try {
    kind = j.at("kind").get<std::string>();
    if (kind == "conv") return LayerSpec::conv(j.at("in").get<int>(), j.at("out").get<int>());
    if (kind == "fc") return LayerSpec::fc(j.at("in").get<int>(), j.at("out").get<int>());
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint header has malformed layer spec");
  }
  if (kind == "relu") return LayerSpec::relu();
  if (kind == "maxpool") return LayerSpec::maxpool();
  if (kind == "gap") return LayerSpec::gap();
  if (kind == "sigmoid") return LayerSpec::sigmoid();
  if (kind == "upsample") return LayerSpec::upsample();
  throw DataError("checkpoint header has unknown layer kind: " + kind);
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::string header = ck.header.dump();
  std::string blob;
  blob.reserve(12 + header.size() + 4 * ck.weights.size());
  blob.append(kMagic, 4);
  put_u32_le(blob, kFormatVersion);
  put_u32_le(blob, static_cast<uint32_t>(header.size()));
  blob += header;
  for (float w : ck.weights) {
    uint32_t bits;
    static_assert(sizeof bits == sizeof w);
    std::memcpy(&bits, &w, 4);
    put_u32_le(blob, bits);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out.good()) throw DataError("cannot write " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const unsigned char* p = reinterpret_cast<const unsigned char*>(blob.data());
  if (blob.size() < 12) throw DataError("checkpoint truncated");
  if (std::memcmp(p, kMagic, 4) != 0) throw DataError("checkpoint bad magic");
  uint32_t version = get_u32_le(p + 4);
  if (version != kFormatVersion) {
    throw DataError("checkpoint unsupported version " + std::to_string(version));
  }
  uint32_t header_len = get_u32_le(p + 8);
  if (blob.size() < 12u + header_len) throw DataError("checkpoint truncated");
  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(blob.substr(12, header_len));
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint header is not valid JSON");
  }
  size_t payload = blob.size() - 12 - header_len;
  if (payload % 4 != 0) throw DataError("checkpoint truncated");
  size_t count = payload / 4;
  // When the header describes the layers, the payload size must match the
  // topology's parameter count exactly.
  if (ck.header.contains("layers") && ck.header["layers"].is_array()) {
    int64_t expected = 0;
    for (const nlohmann::json& lj : ck.header["layers"]) {
      expected += param_count(layer_from_json(lj));
    }
    if (expected >= 0 && static_cast<size_t>(expected) != count) {
      throw DataError("checkpoint weight count mismatch");
    }
  }
  ck.weights.resize(count);
  const unsigned char* w = p + 12 + header_len;
  for (size_t i = 0; i < count; ++i) {
    uint32_t bits = get_u32_le(w + 4 * i);
    std::memcpy(&ck.weights[i], &bits, 4);
  }
  return ck;
}

}  // namespace fusqa::nn
