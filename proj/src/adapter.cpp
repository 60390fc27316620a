#include "retrieveall/adapter.hpp"

#include <algorithm>
#include <utility>

#include "retrieveall/errors.hpp"
#include "retrieveall/io.hpp"

namespace retrieveall {

namespace {

constexpr char kMagic[4] = {'L', 'O', 'R', 'A'};
constexpr std::uint32_t kFormatVersion = 1;

void check_invariants(const LoraAdapter& a) {
  if (a.id.empty()) throw FormatError("adapter id is empty");
  if (a.language.empty()) throw FormatError("adapter language is empty");
  if (a.rank < 1) throw FormatError("adapter rank must be >= 1");
  if (a.dim < 1) throw FormatError("adapter dim must be >= 1");
  if (!(a.scale > 0.0f)) throw FormatError("adapter scale must be > 0");
  if (a.A.rows() != a.rank || a.A.cols() != a.dim) {
    throw DimensionMismatch("adapter A must be rank x dim");
  }
  if (a.B.rows() != a.dim || a.B.cols() != a.rank) {
    throw DimensionMismatch("adapter B must be dim x rank");
  }
  require_finite(a.A, "adapter A");
  require_finite(a.B, "adapter B");
}

}  // namespace

LoraAdapter make_adapter(std::string id, std::string language, float scale, MatrixF A, MatrixF B) {
  LoraAdapter a;
  a.id = std::move(id);
  a.language = std::move(language);
  a.rank = static_cast<int>(A.rows());
  a.dim = static_cast<int>(A.cols());
  a.scale = scale;
  a.A = std::move(A);
  a.B = std::move(B);
  check_invariants(a);
  return a;
}

VectorF delta_forward(const LoraAdapter& adapter, const Eigen::Ref<const VectorF>& x) {
  if (x.size() != adapter.dim) {
    throw DimensionMismatch("delta_forward: input dim " + std::to_string(x.size()) +
                            " vs adapter dim " + std::to_string(adapter.dim));
  }
  const Eigen::VectorXd xd = x.cast<double>();
  const double s = static_cast<double>(adapter.scale) / adapter.rank;
  const Eigen::VectorXd yd = (adapter.B.cast<double>() * (adapter.A.cast<double>() * xd)) * s;
  return yd.cast<float>();
}

void save_adapter(const LoraAdapter& adapter, const std::filesystem::path& path) {
  check_invariants(adapter);
  auto out = io::open_output(path);
  out.write(kMagic, sizeof(kMagic));
  io::write_u32(out, kFormatVersion);
  io::write_str(out, adapter.id);
  io::write_str(out, adapter.language);
  io::write_u32(out, static_cast<std::uint32_t>(adapter.rank));
  io::write_u32(out, static_cast<std::uint32_t>(adapter.dim));
  io::write_f32(out, adapter.scale);
  io::write_f32s(out, adapter.A.data(), static_cast<std::size_t>(adapter.A.size()));
  io::write_f32s(out, adapter.B.data(), static_cast<std::size_t>(adapter.B.size()));
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

LoraAdapter load_adapter(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || !std::equal(magic, magic + 4, kMagic)) {
    throw FormatError("bad magic in " + path.string());
  }
  const std::uint32_t version = io::read_u32(in);
  if (version != kFormatVersion) {
    throw FormatError("unsupported adapter format version " + std::to_string(version));
  }
  LoraAdapter a;
  a.id = io::read_str(in);
  a.language = io::read_str(in);
  const std::uint32_t r = io::read_u32(in);
  const std::uint32_t d = io::read_u32(in);
  if (r == 0 || d == 0 || r > (1u << 16) || d > (1u << 20)) {
    throw FormatError("implausible adapter shape r=" + std::to_string(r) +
                      " d=" + std::to_string(d));
  }
  a.rank = static_cast<int>(r);
  a.dim = static_cast<int>(d);
  a.scale = io::read_f32(in);
  a.A.resize(a.rank, a.dim);
  io::read_f32s(in, a.A.data(), static_cast<std::size_t>(a.A.size()));
  a.B.resize(a.dim, a.rank);
  io::read_f32s(in, a.B.data(), static_cast<std::size_t>(a.B.size()));
  io::expect_eof(in);
  check_invariants(a);
  return a;
}

const LoraAdapter& AdapterPool::lookup(const std::string& language) const {
  auto it = by_language_.find(language);
  if (it == by_language_.end()) {
    throw AdapterMissing(language, "no adapter registered for language '" + language + "'");
  }
  return adapters_[it->second];
}

const LoraAdapter* AdapterPool::find_language(const std::string& language) const noexcept {
  auto it = by_language_.find(language);
  return it == by_language_.end() ? nullptr : &adapters_[it->second];
}

const LoraAdapter* AdapterPool::find_id(const std::string& id) const noexcept {
  for (const auto& a : adapters_) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

AdapterPool register_adapter(const AdapterPool& pool, LoraAdapter adapter) {
  check_invariants(adapter);
  if (pool.by_language_.count(adapter.language) > 0) {
    throw DuplicateLanguage("language '" + adapter.language + "' already registered");
  }
  if (!pool.empty() && adapter.dim != pool.dim()) {
    throw DimensionMismatch("adapter dim " + std::to_string(adapter.dim) +
                            " does not match pool dim " + std::to_string(pool.dim()));
  }
  AdapterPool next = pool;
  next.by_language_.emplace(adapter.language, next.adapters_.size());
  next.adapters_.push_back(std::move(adapter));
  return next;
}

AdapterPool load_pool_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".lora") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());  // directory order is not deterministic
  AdapterPool pool;
  for (const auto& f : files) {
    pool = register_adapter(pool, load_adapter(f));
  }
  return pool;
}

}  // namespace retrieveall
