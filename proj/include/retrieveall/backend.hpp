#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "retrieveall/prompt.hpp"

namespace retrieveall {

enum class BackendKind { OracleEcho, TableLookup, External };

/// Newline-delimited JSON request/response channel to an external generator:
/// request {"id": str, "prompt": str}\n, response {"id": str, "text": str}\n.
class LineTransport {
 public:
  virtual ~LineTransport() = default;

  /// Writes one line (terminator appended) and blocks for one response line.
  virtual std::string roundtrip(const std::string& request_line) = 0;
};

/// Connects to host:port; throws ExternalUnavailable on failure.
std::shared_ptr<LineTransport> connect_tcp(const std::string& host, int port);

/// Spawns `argv` with the request stream on its stdin and the response stream
/// on its stdout. Throws ExternalUnavailable when the process cannot start.
std::shared_ptr<LineTransport> spawn_process(const std::vector<std::string>& argv);

/// Prompt -> output text. oracle-echo replays the bundle's serialized gold
/// (the perfect model); table-lookup maps sample id -> canned output;
/// external round-trips over a LineTransport. corruption_rate > 0
/// deterministically mangles outputs under `seed` for parser-robustness tests.
struct GenerationBackend {
  BackendKind kind = BackendKind::OracleEcho;
  std::map<std::string, std::string> table;  // sample_id -> output, for table-lookup
  float corruption_rate = 0.0f;              // in [0, 1]
  std::uint64_t seed = 0;
  std::shared_ptr<LineTransport> transport;  // for external
};

std::string generate(const GenerationBackend& backend, const PromptBundle& bundle);

/// The deterministic mangling rule applied by generate: under (sample_id, seed)
/// either drops the first tuple or breaks a bracket. Exposed for tests.
std::string corrupt_output(const std::string& text, const std::string& sample_id,
                           float corruption_rate, std::uint64_t seed);

/// Loads a table-lookup backend's table: a JSON object {sample_id: output}.
std::map<std::string, std::string> load_backend_table(const std::filesystem::path& path);

}  // namespace retrieveall
