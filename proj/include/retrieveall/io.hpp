#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "retrieveall/linalg.hpp"

// Little-endian binary primitives shared by the adapter and index file formats.
// Strings are u32 byte length + UTF-8 payload; floats are IEEE-754 binary32.
namespace retrieveall::io {

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_str(std::ostream& out, std::string_view s);
void write_f32s(std::ostream& out, const float* data, std::size_t n);

/// Readers throw FormatError("truncated ...") on premature EOF.
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
std::string read_str(std::istream& in, std::size_t max_len = 1u << 24);
void read_f32s(std::istream& in, float* data, std::size_t n);

std::ifstream open_input(const std::filesystem::path& path);    // IoError on failure
std::ofstream open_output(const std::filesystem::path& path);   // IoError on failure

/// Throws FormatError when the stream has bytes left past the declared payload.
void expect_eof(std::istream& in);

}  // namespace retrieveall::io
