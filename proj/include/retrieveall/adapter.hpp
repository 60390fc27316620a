#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "retrieveall/linalg.hpp"

namespace retrieveall {

/// One language's low-rank update: y += (scale / rank) * B * A * x.
struct LoraAdapter {
  std::string id;
  std::string language;  // BCP-47-style, lowercase
  int rank = 0;          // r >= 1
  int dim = 0;           // d >= 1
  float scale = 1.0f;    // alpha > 0; effective multiplier is scale / rank
  MatrixF A;             // rank x dim
  MatrixF B;             // dim x rank
};

/// Validating constructor. rank and dim are taken from A; B must be dim x rank.
LoraAdapter make_adapter(std::string id, std::string language, float scale, MatrixF A, MatrixF B);

/// The Eq. 1 delta term for a single input: (scale / rank) * B * (A * x).
VectorF delta_forward(const LoraAdapter& adapter, const Eigen::Ref<const VectorF>& x);

void save_adapter(const LoraAdapter& adapter, const std::filesystem::path& path);
LoraAdapter load_adapter(const std::filesystem::path& path);

/// Immutable per-language adapter registry. register_adapter returns a fresh pool,
/// leaving the original untouched, so a serving thread can keep reading the old
/// value during hot extension.
class AdapterPool {
 public:
  AdapterPool() = default;

  bool empty() const noexcept { return adapters_.empty(); }
  std::size_t size() const noexcept { return adapters_.size(); }
  int dim() const noexcept { return adapters_.empty() ? 0 : adapters_.front().dim; }

  const LoraAdapter& at(std::size_t i) const { return adapters_.at(i); }
  const std::vector<LoraAdapter>& adapters() const noexcept { return adapters_; }

  /// Throws AdapterMissing when the language is absent.
  const LoraAdapter& lookup(const std::string& language) const;

  const LoraAdapter* find_language(const std::string& language) const noexcept;
  const LoraAdapter* find_id(const std::string& id) const noexcept;

  friend AdapterPool register_adapter(const AdapterPool& pool, LoraAdapter adapter);

 private:
  std::vector<LoraAdapter> adapters_;
  std::map<std::string, std::size_t> by_language_;
};

/// Throws DuplicateLanguage when the language is already registered and
/// DimensionMismatch when the adapter's dim differs from the pool's.
AdapterPool register_adapter(const AdapterPool& pool, LoraAdapter adapter);

/// Loads every *.lora file in a directory; identity comes from the file header.
AdapterPool load_pool_dir(const std::filesystem::path& dir);

}  // namespace retrieveall
