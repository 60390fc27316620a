#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "retrieveall/corpus.hpp"
#include "retrieveall/encoder.hpp"
#include "retrieveall/linalg.hpp"

namespace retrieveall {

struct EntityRecord {
  std::string sample_id;
  std::string language;
  std::string entity_type;
  std::string entity_text;
  VectorF embedding;  // unit norm, index dim
};

struct ContextRecord {
  std::string sample_id;
  std::string language;
  std::string text;
  std::vector<Mention> mentions;
  VectorF embedding;  // unit norm, index dim
};

struct RetrievalConfig {
  float tau_e = 0.65f;
  float tau_c = 0.7f;
  int k = 5;
};

void validate_retrieval_config(const RetrievalConfig& cfg);

/// One scored record. `record` indexes into the granularity that produced the
/// hit (context_record / entity_record). `fallback` marks below-threshold hits
/// surfaced by the router's nearest-record fallback.
struct RetrievalHit {
  std::size_t record = 0;
  float similarity = 0.0f;
  std::string sample_id;
  std::string language;
  bool fallback = false;
};

/// Cross-granularity knowledge store over a training corpus. Immutable after
/// build; concurrent queries are safe. Retrieval is an exact scan: hits are
/// every record strictly above the threshold, sorted by (similarity desc,
/// sample_id asc), truncated to k.
class ExampleIndex {
 public:
  /// declared_types, when non-empty, fixes the entity type set (it may list
  /// types with zero records but must cover every observed type).
  static ExampleIndex build(const std::vector<CorpusSample>& corpus, const EncoderSpec& spec,
                            const ExternalEncoderFn& external = nullptr,
                            const std::vector<std::string>& declared_types = {});

  /// Assembles an index from prebuilt records (loader and tests). Validates
  /// dims and unit norms; throws FormatError on violation.
  static ExampleIndex from_records(const EncoderSpec& spec, std::vector<ContextRecord> contexts,
                                   std::vector<EntityRecord> entities,
                                   const std::vector<std::string>& declared_types = {});

  int dim() const noexcept { return spec_.dim; }
  const EncoderSpec& encoder_spec() const noexcept { return spec_; }

  std::size_t context_count() const noexcept { return contexts_.size(); }
  std::size_t entity_count() const noexcept { return entities_.size(); }
  const ContextRecord& context_record(std::size_t i) const { return contexts_.at(i); }
  const EntityRecord& entity_record(std::size_t i) const { return entities_.at(i); }

  /// The entity type set: declared order when given, otherwise first-appearance
  /// order over the build corpus.
  const std::vector<std::string>& entity_types() const noexcept { return entity_types_; }
  bool has_entity_type(const std::string& type) const noexcept;

  std::vector<RetrievalHit> retrieve_context(const Eigen::Ref<const VectorF>& query,
                                             const RetrievalConfig& cfg,
                                             const std::string& exclude_sample = {}) const;

  std::vector<RetrievalHit> retrieve_entities(const Eigen::Ref<const VectorF>& query,
                                              const std::string& entity_type,
                                              const RetrievalConfig& cfg,
                                              const std::string& exclude_sample = {}) const;

  /// Globally nearest context record regardless of threshold, flagged as a
  /// fallback hit. Throws EmptyIndex when there are no context records.
  RetrievalHit nearest_context(const Eigen::Ref<const VectorF>& query) const;

 private:
  ExampleIndex() = default;

  EncoderSpec spec_;
  std::vector<ContextRecord> contexts_;
  std::vector<EntityRecord> entities_;
  std::vector<std::string> entity_types_;
};

void save_index(const ExampleIndex& index, const std::filesystem::path& path);
ExampleIndex load_index(const std::filesystem::path& path);

}  // namespace retrieveall
