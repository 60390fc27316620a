#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retrieveall/adapter.hpp"
#include "retrieveall/example_index.hpp"

namespace retrieveall {

struct RoutingDecision {
  std::string language;                           // mode of the hit languages
  std::string adapter_id;                         // empty until resolved against a pool
  std::map<std::string, int> votes;               // language -> hit count
  std::map<std::string, double> vote_similarity;  // language -> summed similarity
  bool fallback_used = false;
  std::vector<RetrievalHit> hits;                 // the context hits consumed
};

/// Language inference by mode voting over the top-k context hits (no exclusion).
/// Ties break by (1) larger summed similarity, then (2) lexicographically
/// smallest code. When no hit passes tau_c, the single globally nearest context
/// record's language wins and fallback_used is set.
/// Throws EmptyIndex when the index has no context records.
RoutingDecision infer_language(const ExampleIndex& index, const Eigen::Ref<const VectorF>& query,
                               const RetrievalConfig& cfg);

/// infer_language plus adapter resolution. When the inferred language has no
/// adapter, falls back to default_language (setting fallback_used) if given,
/// otherwise throws AdapterMissing carrying the inferred language.
RoutingDecision route(const AdapterPool& pool, const ExampleIndex& index,
                      const Eigen::Ref<const VectorF>& query, const RetrievalConfig& cfg,
                      const std::optional<std::string>& default_language = std::nullopt);

}  // namespace retrieveall
