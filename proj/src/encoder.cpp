#include "retrieveall/encoder.hpp"

#include <cctype>
#include <cmath>

#include "retrieveall/errors.hpp"

namespace retrieveall {

namespace {
constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;
}  // namespace

void validate_encoder_spec(const EncoderSpec& spec) {
  if (spec.dim < 8) {
    throw ConfigError("encoder dim must be >= 8, got " + std::to_string(spec.dim));
  }
}

std::string_view encoder_kind_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::ReferenceTrigram:
      return "reference-trigram";
    case EncoderKind::External:
      return "external";
  }
  return "unknown";
}

EncoderKind encoder_kind_from_name(std::string_view name) {
  if (name == "reference-trigram") return EncoderKind::ReferenceTrigram;
  if (name == "external") return EncoderKind::External;
  throw ConfigError("unknown encoder kind '" + std::string(name) + "'");
}

std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = kFnvOffsetBasis ^ seed;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

std::string trim_whitespace(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

namespace {

VectorF normalize_unit(Eigen::VectorXd acc) {
  const double norm = std::sqrt(acc.squaredNorm());
  if (norm == 0.0) {
    throw ZeroNorm("encode: zero embedding");
  }
  return (acc / norm).cast<float>();
}

VectorF encode_reference(const EncoderSpec& spec, const std::string& text) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.dim);
  const std::uint64_t d = static_cast<std::uint64_t>(spec.dim);
  if (text.size() < 3) {
    acc[static_cast<Eigen::Index>(hash64(text, spec.seed) % d)] += 1.0;
  } else {
    for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
      const std::uint64_t h = hash64(std::string_view(text).substr(i, 3), spec.seed);
      acc[static_cast<Eigen::Index>(h % d)] += 1.0;
    }
  }
  return normalize_unit(std::move(acc));
}

}  // namespace

VectorF encode(const EncoderSpec& spec, std::string_view text, const ExternalEncoderFn& external) {
  validate_encoder_spec(spec);
  const std::string trimmed = trim_whitespace(text);
  if (trimmed.empty()) {
    throw EmptyText("encode: text is empty after trimming");
  }
  if (spec.kind == EncoderKind::ReferenceTrigram) {
    return encode_reference(spec, trimmed);
  }
  if (!external) {
    throw ExternalUnavailable("encoder kind 'external' has no backend configured");
  }
  const std::vector<float> raw = external(trimmed);
  if (static_cast<int>(raw.size()) != spec.dim) {
    throw DimensionMismatch("external encoder returned " + std::to_string(raw.size()) +
                            " floats, expected " + std::to_string(spec.dim));
  }
  Eigen::VectorXd acc(spec.dim);
  for (int i = 0; i < spec.dim; ++i) {
    if (!std::isfinite(raw[static_cast<std::size_t>(i)])) {
      throw Error("external encoder returned non-finite value");
    }
    acc[i] = raw[static_cast<std::size_t>(i)];
  }
  return normalize_unit(std::move(acc));
}

}  // namespace retrieveall
