#include "retrieveall/backend.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "retrieveall/encoder.hpp"
#include "retrieveall/errors.hpp"

namespace retrieveall {

namespace {

using nlohmann::json;

// Line-framed I/O over a pair of file descriptors. Owns and closes them.
class FdLineTransport : public LineTransport {
 public:
  FdLineTransport(int read_fd, int write_fd, pid_t child = -1)
      : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}

  ~FdLineTransport() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0 && read_fd_ != write_fd_) ::close(read_fd_);
    if (child_ > 0) {
      int status = 0;
      ::waitpid(child_, &status, 0);
    }
  }

  std::string roundtrip(const std::string& request_line) override {
    std::string framed = request_line;
    framed.push_back('\n');
    std::size_t sent = 0;
    while (sent < framed.size()) {
      const ssize_t n = ::write(write_fd_, framed.data() + sent, framed.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ExternalUnavailable(std::string("backend write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
    std::string line;
    char c = 0;
    while (true) {
      const ssize_t n = ::read(read_fd_, &c, 1);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ExternalUnavailable(std::string("backend read failed: ") + std::strerror(errno));
      }
      if (n == 0) {
        throw ExternalUnavailable("backend closed the stream mid-response");
      }
      if (c == '\n') break;
      line.push_back(c);
    }
    return line;
  }

 private:
  int read_fd_;
  int write_fd_;
  pid_t child_;
};

}  // namespace

std::shared_ptr<LineTransport> connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* results = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &results) != 0 || results == nullptr) {
    throw ExternalUnavailable("cannot resolve backend host '" + host + "'");
  }
  int fd = -1;
  for (addrinfo* r = results; r != nullptr; r = r->ai_next) {
    fd = ::socket(r->ai_family, r->ai_socktype, r->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, r->ai_addr, r->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(results);
  if (fd < 0) {
    throw ExternalUnavailable("cannot connect to backend " + host + ":" + service);
  }
  return std::make_shared<FdLineTransport>(fd, fd);
}

std::shared_ptr<LineTransport> spawn_process(const std::vector<std::string>& argv) {
  if (argv.empty()) {
    throw ExternalUnavailable("empty backend command");
  }
  int to_child[2] = {-1, -1};
  int from_child[2] = {-1, -1};
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw ExternalUnavailable("cannot create backend pipes");
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    throw ExternalUnavailable("cannot fork backend process");
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_shared<FdLineTransport>(from_child[0], to_child[1], pid);
}

std::string corrupt_output(const std::string& text, const std::string& sample_id,
                           float corruption_rate, std::uint64_t seed) {
  if (corruption_rate <= 0.0f) return text;
  // Deterministic per (sample, seed): hash decides both whether and how.
  const std::uint64_t h = hash64(sample_id, seed ^ 0x636f727275707400ull);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u >= static_cast<double>(corruption_rate)) return text;
  std::string out = text;
  if ((h & 1) == 0) {
    // Drop the first tuple, separator included.
    const std::size_t open = out.find('(');
    const std::size_t close = out.find(')');
    if (open != std::string::npos && close != std::string::npos && close > open) {
      out.erase(open, close - open + 1);
      if (out.compare(0, 2, ", ") == 0) out.erase(0, 2);
      return out;
    }
  }
  // Break a bracket.
  const std::size_t bracket = out.find(']');
  if (bracket != std::string::npos) {
    out.erase(bracket, 1);
    return out;
  }
  const std::size_t paren = out.rfind(')');
  if (paren != std::string::npos) {
    out.erase(paren, 1);
    return out;
  }
  return out + "(";
}

std::string generate(const GenerationBackend& backend, const PromptBundle& bundle) {
  if (bundle.input_text.empty()) {
    throw Error("bundle has no input text");
  }
  std::string output;
  switch (backend.kind) {
    case BackendKind::OracleEcho:
      output = bundle.expected_target.value_or("(none)");
      break;
    case BackendKind::TableLookup: {
      auto it = backend.table.find(bundle.source_sample_id);
      if (it == backend.table.end()) {
        throw MissingTableEntry("no table entry for sample '" + bundle.source_sample_id + "'");
      }
      output = it->second;
      break;
    }
    case BackendKind::External: {
      if (!backend.transport) {
        throw ExternalUnavailable("external backend has no transport configured");
      }
      const json request = {{"id", bundle.source_sample_id}, {"prompt", bundle.input_text}};
      const std::string line = backend.transport->roundtrip(request.dump());
      json response;
      try {
        response = json::parse(line);
      } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid backend response: ") + e.what());
      }
      if (!response.is_object() || !response.contains("id") || !response.contains("text") ||
          !response["text"].is_string()) {
        throw FormatError("backend response must be {\"id\": str, \"text\": str}");
      }
      if (response["id"].get<std::string>() != bundle.source_sample_id) {
        throw FormatError("backend response id does not match request");
      }
      output = response["text"].get<std::string>();
      break;
    }
  }
  return corrupt_output(output, bundle.source_sample_id, backend.corruption_rate, backend.seed);
}

std::map<std::string, std::string> load_backend_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open backend table: " + path.string());
  }
  json obj;
  try {
    in >> obj;
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid backend table: ") + e.what());
  }
  if (!obj.is_object()) {
    throw FormatError("backend table must be a JSON object of {sample_id: output}");
  }
  std::map<std::string, std::string> table;
  for (const auto& [key, value] : obj.items()) {
    if (!value.is_string()) {
      throw FormatError("backend table entry '" + key + "' is not a string");
    }
    table[key] = value.get<std::string>();
  }
  return table;
}

}  // namespace retrieveall
