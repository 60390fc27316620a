#include "retrieveall/io.hpp"

#include <array>
#include <bit>
#include <cstring>

#include "retrieveall/errors.hpp"

namespace retrieveall::io {

namespace {

void put_bytes(std::ostream& out, const char* data, std::size_t n) {
  out.write(data, static_cast<std::streamsize>(n));
  if (!out) {
    throw IoError("write failed");
  }
}

void get_bytes(std::istream& in, char* data, std::size_t n) {
  in.read(data, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError("truncated payload");
  }
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  put_bytes(out, b.data(), b.size());
}

void write_u64(std::ostream& out, std::uint64_t v) {
  write_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<std::uint32_t>(v)); }

void write_str(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}

void write_f32s(std::ostream& out, const float* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    write_f32(out, data[i]);
  }
}

std::uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  get_bytes(in, reinterpret_cast<char*>(b.data()), b.size());
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in) {
  const std::uint64_t lo = read_u32(in);
  const std::uint64_t hi = read_u32(in);
  return lo | (hi << 32);
}

float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

std::string read_str(std::istream& in, std::size_t max_len) {
  const std::uint32_t len = read_u32(in);
  if (len > max_len) {
    throw FormatError("string length " + std::to_string(len) + " exceeds limit");
  }
  std::string s(len, '\0');
  if (len > 0) {
    get_bytes(in, s.data(), len);
  }
  return s;
}

void read_f32s(std::istream& in, float* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = read_f32(in);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  return out;
}

void expect_eof(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes past end of payload");
  }
}

}  // namespace retrieveall::io
