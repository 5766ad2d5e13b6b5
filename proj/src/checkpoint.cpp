#include "svda/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "svda/io.hpp"

namespace svda {

namespace {

constexpr const char* kConfigSection = "__config__";
constexpr size_t kConfigValues = 11;

void write_section(std::ostream& os, const std::string& name, const std::vector<double>& values) {
  if (name.size() > UINT16_MAX)
    throw Error(ErrorKind::invalid_argument, "section name too long: " + name);
  io::write_u16(os, static_cast<uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  io::write_u64(os, values.size());
  for (double v : values) io::write_f64(os, v);
}

struct Section {
  std::string name;
  std::vector<double> values;
};

Section read_section(std::istream& is, const std::string& path) {
  Section s;
  const uint16_t name_len = io::read_u16(is);
  s.name.resize(name_len);
  is.read(s.name.data(), name_len);
  if (!is) throw Error(ErrorKind::io, path + ": unexpected end of file in section name");
  const uint64_t count = io::read_u64(is);
  s.values.resize(count);
  for (double& v : s.values) v = io::read_f64(is);
  return s;
}

std::vector<double> encode_config(const ModelConfig& config) {
  return {static_cast<double>(config.image_h),
          static_cast<double>(config.image_w),
          static_cast<double>(config.channels),
          static_cast<double>(config.patch_size),
          static_cast<double>(config.d_model),
          static_cast<double>(config.attention.num_heads),
          static_cast<double>(config.attention.d_k),
          static_cast<double>(config.num_layers),
          static_cast<double>(config.mlp_hidden),
          config.attention.mechanism == Mechanism::svda ? 0.0 : 1.0,
          0.0 /* head kind */};
}

ModelConfig decode_config(const std::vector<double>& v, const std::string& path) {
  if (v.size() != kConfigValues)
    throw Error(ErrorKind::format, path + ": config section has " + std::to_string(v.size()) +
                                       " values, expected " + std::to_string(kConfigValues));
  ModelConfig c;
  c.image_h = static_cast<size_t>(v[0]);
  c.image_w = static_cast<size_t>(v[1]);
  c.channels = static_cast<size_t>(v[2]);
  c.patch_size = static_cast<size_t>(v[3]);
  c.d_model = static_cast<size_t>(v[4]);
  c.attention.d_model = c.d_model;
  c.attention.num_heads = static_cast<size_t>(v[5]);
  c.attention.d_k = static_cast<size_t>(v[6]);
  c.num_layers = static_cast<size_t>(v[7]);
  c.mlp_hidden = static_cast<size_t>(v[8]);
  if (v[9] != 0.0 && v[9] != 1.0)
    throw Error(ErrorKind::format, path + ": unknown mechanism code");
  c.attention.mechanism = v[9] == 0.0 ? Mechanism::svda : Mechanism::baseline;
  if (v[10] != 0.0) throw Error(ErrorKind::format, path + ": unknown head kind code");
  c.head = HeadKind::nearest_upsample_linear;
  c.validate();
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const ModelConfig& config) {
  config.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os.write("SVDA", 4);
  io::write_u32(os, 1);
  io::write_u64(os, model_param_count(config));
  write_section(os, kConfigSection, encode_config(config));
  // named_params takes a mutable reference for optimizer use; serialization
  // only reads, so the const_cast is confined to this call.
  auto named = named_params(const_cast<ModelParams&>(params));
  for (const NamedParam& np : named) write_section(os, np.name, np.tensor.values());
  if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string() + " for reading");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SVDA", 4) != 0)
    throw Error(ErrorKind::format, path.string() + ": not a checkpoint file (bad magic)");
  const uint32_t version = io::read_u32(is);
  if (version != 1)
    throw Error(ErrorKind::format,
                path.string() + ": unsupported checkpoint version " + std::to_string(version));
  const uint64_t declared_count = io::read_u64(is);

  Section config_sec = read_section(is, path.string());
  if (config_sec.name != kConfigSection)
    throw Error(ErrorKind::format,
                path.string() + ": first section must be " + std::string(kConfigSection));
  Checkpoint ckpt;
  ckpt.config = decode_config(config_sec.values, path.string());
  if (declared_count != model_param_count(ckpt.config))
    throw Error(ErrorKind::format,
                path.string() + ": declared parameter count " + std::to_string(declared_count) +
                    " does not match configuration (" +
                    std::to_string(model_param_count(ckpt.config)) + ")");

  // Shapes come from the configuration; the seed only fills values that the
  // sections overwrite below.
  ckpt.params = init_params(ckpt.config, 0);
  for (NamedParam& np : named_params(ckpt.params)) {
    Section s = read_section(is, path.string());
    if (s.name != np.name)
      throw Error(ErrorKind::format,
                  path.string() + ": expected section " + np.name + ", found " + s.name);
    if (s.values.size() != np.tensor.numel())
      throw Error(ErrorKind::format, path.string() + ": section " + np.name + " has " +
                                         std::to_string(s.values.size()) + " values, expected " +
                                         std::to_string(np.tensor.numel()));
    np.tensor.values() = std::move(s.values);
  }
  is.peek();
  if (!is.eof())
    throw Error(ErrorKind::format, path.string() + ": trailing bytes after last section");
  return ckpt;
}

}  // namespace svda
