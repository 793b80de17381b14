#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "chromex/error.hpp"
#include "chromex/tensornet.hpp"

namespace chromex {

static_assert(std::endian::native == std::endian::little, "weights I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'C', 'X', 'W', '1'};
constexpr std::uint32_t kVersion = 1;

using nlohmann::json;

json config_to_json(const NetConfig& c) {
  return {{"input_size", c.input_size},     {"stage_channels", c.stage_channels},
          {"aspp_rates", c.aspp_rates},     {"aspp_enabled", c.aspp_enabled},
          {"residual", c.residual},         {"seed", c.seed}};
}

NetConfig config_from_json(const json& j) {
  NetConfig c;
  c.input_size = j.at("input_size").get<int>();
  c.stage_channels = j.at("stage_channels").get<std::vector<int>>();
  c.aspp_rates = j.at("aspp_rates").get<std::vector<int>>();
  c.aspp_enabled = j.at("aspp_enabled").get<bool>();
  c.residual = j.at("residual").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json meta_to_json(const TrainingMeta& m) {
  return {{"iterations", m.iterations}, {"final_loss", m.final_loss},
          {"learning_rate", m.learning_rate}, {"batch", m.batch}, {"samples", m.samples}};
}

TrainingMeta meta_from_json(const json& j) {
  TrainingMeta m;
  m.iterations = j.at("iterations").get<std::int64_t>();
  m.final_loss = j.at("final_loss").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.batch = j.at("batch").get<int>();
  m.samples = j.at("samples").get<std::size_t>();
  return m;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 4);
}

void put_bytes(std::vector<std::uint8_t>& out, const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  out.insert(out.end(), p, p + n);
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  void read(void* dst, std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::corrupt, "weights file is truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    read(&v, 4);
    return v;
  }

  std::string string(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string net_config_to_json(const NetConfig& config) { return config_to_json(config).dump(1); }

NetConfig net_config_preset(std::string_view name) {
  if (name == "desk") return desk_config();
  if (name == "full") return full_config();
  if (name == "tiny") return tiny_config();
  throw Error(ErrorCode::invalid_argument, "unknown network preset '" + std::string(name) + "'");
}

NetConfig parse_net_config(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::invalid_argument, "network config must be a JSON object");
  }
  try {
    NetConfig c = net_config_preset(j.value("preset", std::string("desk")));
    if (j.contains("input_size")) c.input_size = j.at("input_size").get<int>();
    if (j.contains("stage_channels")) c.stage_channels = j.at("stage_channels").get<std::vector<int>>();
    if (j.contains("aspp_rates")) c.aspp_rates = j.at("aspp_rates").get<std::vector<int>>();
    if (j.contains("aspp_enabled")) c.aspp_enabled = j.at("aspp_enabled").get<bool>();
    if (j.contains("residual")) c.residual = j.at("residual").get<bool>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    validate_config(c);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("bad network config: ") + e.what());
  }
}

std::vector<std::uint8_t> serialize_weights(const NetworkWeights& w) {
  std::vector<std::uint8_t> out;
  put_bytes(out, kMagic, 4);
  put_u32(out, kVersion);
  const std::string header = json{{"config", config_to_json(w.config)}, {"meta", meta_to_json(w.meta)}}.dump();
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  put_bytes(out, header.data(), header.size());
  for (const auto& p : w.params) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    put_bytes(out, p.name.data(), p.name.size());
    put_u32(out, static_cast<std::uint32_t>(p.shape.size()));
    for (int d : p.shape) put_u32(out, static_cast<std::uint32_t>(d));
    put_bytes(out, p.data.data(), p.data.size() * sizeof(float));
  }
  return out;
}

NetworkWeights deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::corrupt, "not a weights file");
  const std::uint32_t version = in.u32();
  if (version != kVersion) {
    throw Error(ErrorCode::version_mismatch,
                "unsupported weights version " + std::to_string(version));
  }
  NetworkWeights w;
  try {
    const json header = json::parse(in.string(in.u32()));
    w.config = config_from_json(header.at("config"));
    w.meta = meta_from_json(header.at("meta"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt, std::string("bad weights header: ") + e.what());
  }
  try {
    validate_config(w.config);
  } catch (const Error& e) {
    throw Error(ErrorCode::corrupt, std::string("bad weights config: ") + e.what());
  }
  w.params = parameter_layout(w.config);
  for (auto& expected : w.params) {
    const std::string name = in.string(in.u32());
    const std::uint32_t rank = in.u32();
    if (rank > 8) throw Error(ErrorCode::corrupt, "bad rank for layer " + name);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(in.u32());
    if (name != expected.name || shape != expected.shape) {
      throw Error(ErrorCode::corrupt, "layer '" + name + "' does not match the stored config");
    }
    in.read(expected.data.data(), expected.data.size() * sizeof(float));
  }
  if (!in.done()) throw Error(ErrorCode::corrupt, "trailing bytes after the last layer");
  return w;
}

void save_weights(const std::filesystem::path& path, const NetworkWeights& weights) {
  const auto bytes = serialize_weights(weights);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

NetworkWeights load_weights(const std::filesystem::path& path, const NetConfig& expected) {
  NetworkWeights w = load_weights(path);
  if (!(w.config == expected)) {
    throw Error(ErrorCode::config_mismatch,
                path.string() + " was trained with a different network config");
  }
  return w;
}

std::string weights_id(const NetworkWeights& weights) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : serialize_weights(weights)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id(12, '0');
  for (int i = 0; i < 12; ++i) id[static_cast<std::size_t>(i)] = kHex[(h >> (60 - 4 * i)) & 0xf];
  return id;
}

}  // namespace chromex
