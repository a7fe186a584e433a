#include "aogplan/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace aogplan::nn {

namespace {

constexpr char kMagic[8] = {'A', 'O', 'G', 'P', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw CheckpointError("checkpoint truncated");
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw CheckpointError("checkpoint truncated");
  return s;
}

void read_header(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError("not a checkpoint file");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<ParamRef>& params,
                     const std::string& meta_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_string(out, meta_json);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const ParamRef& p : params) {
    write_string(out, p.name);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensor->shape.size()));
    for (std::size_t dim : p.tensor->shape) {
      write_pod<std::uint64_t>(out, dim);
    }
    out.write(reinterpret_cast<const char*>(p.tensor->v.data()),
              static_cast<std::streamsize>(p.tensor->numel() * sizeof(double)));
  }
  if (!out) throw CheckpointError("write failed: " + path.string());
}

std::string load_checkpoint(const std::filesystem::path& path,
                            const std::vector<ParamRef>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  read_header(in);
  const std::string meta = read_string(in);
  const auto count = read_pod<std::uint32_t>(in);
  if (count != params.size()) {
    throw CheckpointError("checkpoint tensor count mismatch");
  }
  for (const ParamRef& p : params) {
    const std::string name = read_string(in);
    if (name != p.name) {
      throw CheckpointError("checkpoint tensor order mismatch: expected " +
                            p.name + ", found " + name);
    }
    const auto ndim = read_pod<std::uint32_t>(in);
    std::vector<std::size_t> shape(ndim);
    for (auto& dim : shape) {
      dim = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    }
    if (shape != p.tensor->shape) {
      throw CheckpointError("checkpoint shape mismatch for " + p.name);
    }
    in.read(reinterpret_cast<char*>(p.tensor->v.data()),
            static_cast<std::streamsize>(p.tensor->numel() * sizeof(double)));
    if (!in) throw CheckpointError("checkpoint truncated in " + p.name);
  }
  return meta;
}

std::string read_checkpoint_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  read_header(in);
  return read_string(in);
}

}  // namespace aogplan::nn
