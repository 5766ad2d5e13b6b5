#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "svda/tensor.hpp"

namespace svda::io {

// Little-endian primitives shared by the tensor and checkpoint containers.
// Encoding is explicit byte assembly, so files are identical across hosts.
void write_u16(std::ostream& os, uint16_t v);
void write_u32(std::ostream& os, uint32_t v);
void write_u64(std::ostream& os, uint64_t v);
void write_f64(std::ostream& os, double v);
uint16_t read_u16(std::istream& is);
uint32_t read_u32(std::istream& is);
uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);

/// Single-tensor container: "TNSR", version u32, rank u8, one u64 extent per
/// dimension, then row-major f64 payload. All fields little-endian.
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

/// One "image<TAB>depth" relative-path pair per line, LF-terminated.
void save_manifest(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& pairs);
std::vector<std::pair<std::string, std::string>> load_manifest(
    const std::filesystem::path& path);

}  // namespace svda::io
