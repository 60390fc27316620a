#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retrieveall/encoder.hpp"
#include "retrieveall/example_index.hpp"

namespace retrieveall {

/// Parses a flat key=value UTF-8 file. Blank lines and lines starting with '#'
/// are skipped; "\n" and "\\" escapes in values are decoded.
std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path);

std::string unescape_kv_value(std::string_view raw);

struct RunConfig {
  EncoderSpec encoder;                            // encoder.dim / encoder.seed / encoder.kind
  RetrievalConfig retrieval;                      // retrieval.tau_e / retrieval.tau_c / retrieval.k
  std::string templates_path;                     // templates
  std::string pool_dir;                           // pool
  std::optional<std::string> default_language;    // default_language
  std::string backend_spec = "oracle-echo";       // backend
  float corruption_rate = 0.0f;                   // backend.corruption_rate
  std::uint64_t seed = 0;                         // seed
  int batch_size = 8;                             // infer.batch
  std::vector<std::string> type_order;            // types (comma-separated)
};

/// Applies one key=value pair; throws ConfigError on unknown keys or bad values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig load_run_config(const std::filesystem::path& path);

std::vector<std::string> split_csv(std::string_view csv);

}  // namespace retrieveall
