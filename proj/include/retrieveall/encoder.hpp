#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "retrieveall/linalg.hpp"

namespace retrieveall {

enum class EncoderKind { ReferenceTrigram, External };

/// The reference encoder is fully determined by (dim, seed); same spec and text
/// give a bit-identical vector in any process.
struct EncoderSpec {
  int dim = 256;  // >= 8
  EncoderKind kind = EncoderKind::ReferenceTrigram;
  std::uint64_t seed = 0;
};

void validate_encoder_spec(const EncoderSpec& spec);

std::string_view encoder_kind_name(EncoderKind kind);
EncoderKind encoder_kind_from_name(std::string_view name);  // ConfigError on unknown

/// Hook for kind=external: a callable taking text and returning dim floats.
using ExternalEncoderFn = std::function<std::vector<float>(const std::string&)>;

/// FNV-1a over the bytes, with the seed XOR-folded into the offset basis.
std::uint64_t hash64(std::string_view bytes, std::uint64_t seed);

std::string trim_whitespace(std::string_view text);

/// Text -> unit embedding. Reference kind hashes every UTF-8 byte trigram of the
/// trimmed text (window 3, stride 1; texts shorter than 3 bytes hash the whole
/// byte string once) into a bucket via hash64 mod dim, then L2-normalizes.
/// Throws EmptyText when the text trims to nothing and ExternalUnavailable for
/// kind=external with no callable configured.
VectorF encode(const EncoderSpec& spec, std::string_view text,
               const ExternalEncoderFn& external = nullptr);

}  // namespace retrieveall
