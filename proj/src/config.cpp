#include "retrieveall/config.hpp"

#include <charconv>
#include <fstream>

#include "retrieveall/errors.hpp"

namespace retrieveall {

std::string unescape_kv_value(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\\' && i + 1 < raw.size()) {
      const char next = raw[i + 1];
      if (next == 'n') {
        out.push_back('\n');
        ++i;
        continue;
      }
      if (next == '\\') {
        out.push_back('\\');
        ++i;
        continue;
      }
    }
    out.push_back(raw[i]);
  }
  return out;
}

std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    entries[line.substr(0, eq)] = unescape_kv_value(std::string_view(line).substr(eq + 1));
  }
  return entries;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an integer");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an unsigned integer");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_csv(std::string_view csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string_view piece =
        comma == std::string_view::npos ? csv.substr(start) : csv.substr(start, comma - start);
    std::size_t b = 0, e = piece.size();
    while (b < e && piece[b] == ' ') ++b;
    while (e > b && piece[e - 1] == ' ') --e;
    if (e > b) out.emplace_back(piece.substr(b, e - b));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "encoder.dim") {
    cfg.encoder.dim = static_cast<int>(parse_int(key, value));
  } else if (key == "encoder.seed") {
    cfg.encoder.seed = parse_u64(key, value);
  } else if (key == "encoder.kind") {
    cfg.encoder.kind = encoder_kind_from_name(value);
  } else if (key == "retrieval.tau_e") {
    cfg.retrieval.tau_e = static_cast<float>(parse_double(key, value));
  } else if (key == "retrieval.tau_c") {
    cfg.retrieval.tau_c = static_cast<float>(parse_double(key, value));
  } else if (key == "retrieval.k") {
    cfg.retrieval.k = static_cast<int>(parse_int(key, value));
  } else if (key == "templates") {
    cfg.templates_path = value;
  } else if (key == "pool") {
    cfg.pool_dir = value;
  } else if (key == "default_language") {
    cfg.default_language = value;
  } else if (key == "backend") {
    cfg.backend_spec = value;
  } else if (key == "backend.corruption_rate") {
    cfg.corruption_rate = static_cast<float>(parse_double(key, value));
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "infer.batch") {
    cfg.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "types") {
    cfg.type_order = split_csv(value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  for (const auto& [key, value] : parse_kv_file(path)) {
    apply_config_entry(cfg, key, value);
  }
  validate_encoder_spec(cfg.encoder);
  validate_retrieval_config(cfg.retrieval);
  if (cfg.corruption_rate < 0.0f || cfg.corruption_rate > 1.0f) {
    throw ConfigError("backend.corruption_rate must be in [0, 1]");
  }
  if (cfg.batch_size < 1) {
    throw ConfigError("infer.batch must be >= 1");
  }
  return cfg;
}

}  // namespace retrieveall
