#include "svda/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "svda/error.hpp"

namespace svda::io {

namespace {

void write_bytes_le(std::ostream& os, uint64_t v, size_t n) {
  char buf[8];
  for (size_t i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, static_cast<std::streamsize>(n));
}

uint64_t read_bytes_le(std::istream& is, size_t n) {
  char buf[8];
  is.read(buf, static_cast<std::streamsize>(n));
  if (!is) throw Error(ErrorKind::io, "unexpected end of file");
  uint64_t v = 0;
  for (size_t i = 0; i < n; ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

}  // namespace

void write_u16(std::ostream& os, uint16_t v) { write_bytes_le(os, v, 2); }
void write_u32(std::ostream& os, uint32_t v) { write_bytes_le(os, v, 4); }
void write_u64(std::ostream& os, uint64_t v) { write_bytes_le(os, v, 8); }

void write_f64(std::ostream& os, double v) { write_bytes_le(os, std::bit_cast<uint64_t>(v), 8); }

uint16_t read_u16(std::istream& is) { return static_cast<uint16_t>(read_bytes_le(is, 2)); }
uint32_t read_u32(std::istream& is) { return static_cast<uint32_t>(read_bytes_le(is, 4)); }
uint64_t read_u64(std::istream& is) { return read_bytes_le(is, 8); }

double read_f64(std::istream& is) { return std::bit_cast<double>(read_bytes_le(is, 8)); }

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  if (!t.defined()) throw Error(ErrorKind::invalid_argument, "save_tensor: undefined tensor");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os.write("TNSR", 4);
  write_u32(os, 1);
  const auto& shape = t.shape();
  if (shape.size() > 255) throw Error(ErrorKind::invalid_argument, "save_tensor: rank > 255");
  os.put(static_cast<char>(shape.size()));
  for (size_t e : shape) write_u64(os, e);
  for (double v : t.values()) write_f64(os, v);
  if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string() + " for reading");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TNSR", 4) != 0)
    throw Error(ErrorKind::format, path.string() + ": not a tensor file (bad magic)");
  const uint32_t version = read_u32(is);
  if (version != 1)
    throw Error(ErrorKind::format,
                path.string() + ": unsupported tensor version " + std::to_string(version));
  const int rank = is.get();
  if (rank < 0) throw Error(ErrorKind::io, path.string() + ": unexpected end of file");
  std::vector<size_t> shape(static_cast<size_t>(rank));
  size_t numel = 1;
  for (size_t& e : shape) {
    e = static_cast<size_t>(read_u64(is));
    numel *= e;
  }
  std::vector<double> values(numel);
  for (double& v : values) v = read_f64(is);
  is.peek();
  if (!is.eof())
    throw Error(ErrorKind::format, path.string() + ": trailing bytes after tensor payload");
  return Tensor::from_values(std::move(shape), std::move(values));
}

void save_manifest(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  for (const auto& [image, depth] : pairs) os << image << '\t' << depth << '\n';
  if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::vector<std::pair<std::string, std::string>> load_manifest(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string() + " for reading");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw Error(ErrorKind::format, path.string() + ":" + std::to_string(line_no) +
                                         ": expected image<TAB>depth");
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return pairs;
}

}  // namespace svda::io
