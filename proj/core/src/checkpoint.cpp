#include "hsipnp/checkpoint.hpp"

#include <cstring>
#include <string>

#include <json.hpp>

#include "hsipnp/binary_io.hpp"
#include "hsipnp/error.hpp"

namespace hsipnp::grcnn {
namespace {

constexpr char kMagic[4] = {'G', 'R', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const GrcnnModel& model, const std::filesystem::path& path) {
  const Architecture& a = model.architecture();
  const nlohmann::json desc = {
      {"depth", a.depth},
      {"widths", a.widths},
      {"uses_noise_map", a.uses_noise_map},
      {"sigma_min", a.sigma_min},
      {"sigma_max", a.sigma_max},
  };
  const std::string text = desc.dump();
  std::vector<unsigned char> bytes(kMagic, kMagic + 4);
  io::put_u32(bytes, kVersion);
  io::put_u32(bytes, static_cast<std::uint32_t>(text.size()));
  bytes.insert(bytes.end(), text.begin(), text.end());
  for (double p : model.parameters()) io::put_f32(bytes, static_cast<float>(p));
  io::write_with_crc(path, std::move(bytes));
}

GrcnnModel load_checkpoint(const std::filesystem::path& path) {
  const std::string what = "checkpoint " + path.string();
  std::vector<unsigned char> bytes = io::read_file(path);
  require(bytes.size() >= 12, ErrorCode::Truncated, what + ": truncated header");
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::BadMagic,
          what + ": not a GRC1 file");
  const std::uint32_t version = io::get_u32(bytes, 4);
  require(version == kVersion, ErrorCode::UnsupportedVersion,
          what + ": unsupported version " + std::to_string(version));
  const std::size_t json_len = io::get_u32(bytes, 8);
  require(bytes.size() >= 12 + json_len, ErrorCode::Truncated, what + ": truncated descriptor");

  Architecture arch;
  try {
    const auto desc = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + json_len);
    arch.depth = desc.at("depth").get<std::size_t>();
    arch.widths = desc.at("widths").get<std::vector<std::size_t>>();
    arch.uses_noise_map = desc.at("uses_noise_map").get<bool>();
    arch.sigma_min = desc.at("sigma_min").get<double>();
    arch.sigma_max = desc.at("sigma_max").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, what + ": bad architecture descriptor: " + e.what());
  }
  GrcnnModel model(arch, 0);
  const std::size_t count = model.parameter_count();
  const std::size_t payload_end = 12 + json_len + 4 * count;
  require(bytes.size() >= payload_end + 4, ErrorCode::Truncated, what + ": truncated parameters");
  require(bytes.size() == payload_end + 4, ErrorCode::InvalidArgument,
          what + ": trailing bytes after parameters");
  io::strip_crc(bytes, what);
  std::vector<double> params(count);
  for (std::size_t i = 0; i < count; ++i) params[i] = io::get_f32(bytes, 12 + json_len + 4 * i);
  model.set_parameters(params);
  return model;
}

}  // namespace hsipnp::grcnn
