#include "retrieveall/router.hpp"

#include "retrieveall/errors.hpp"

namespace retrieveall {

RoutingDecision infer_language(const ExampleIndex& index, const Eigen::Ref<const VectorF>& query,
                               const RetrievalConfig& cfg) {
  if (index.context_count() == 0) {
    throw EmptyIndex("cannot infer a language from an empty index");
  }
  RoutingDecision decision;
  decision.hits = index.retrieve_context(query, cfg);
  if (decision.hits.empty()) {
    // Nothing passed tau_c: stay total and take the globally nearest record.
    decision.hits.push_back(index.nearest_context(query));
    decision.fallback_used = true;
  }
  for (const auto& hit : decision.hits) {
    decision.votes[hit.language] += 1;
    decision.vote_similarity[hit.language] += static_cast<double>(hit.similarity);
  }
  // Mode with deterministic ties: count, then summed similarity, then the
  // lexicographically smallest code (map iteration order is ascending).
  const std::string* winner = nullptr;
  int best_count = -1;
  double best_sum = 0.0;
  for (const auto& [language, count] : decision.votes) {
    const double sum = decision.vote_similarity.at(language);
    if (count > best_count || (count == best_count && sum > best_sum)) {
      winner = &language;
      best_count = count;
      best_sum = sum;
    }
  }
  decision.language = *winner;
  return decision;
}

RoutingDecision route(const AdapterPool& pool, const ExampleIndex& index,
                      const Eigen::Ref<const VectorF>& query, const RetrievalConfig& cfg,
                      const std::optional<std::string>& default_language) {
  RoutingDecision decision = infer_language(index, query, cfg);
  if (const LoraAdapter* adapter = pool.find_language(decision.language)) {
    decision.adapter_id = adapter->id;
    return decision;
  }
  if (default_language) {
    if (const LoraAdapter* fallback = pool.find_language(*default_language)) {
      decision.adapter_id = fallback->id;
      decision.fallback_used = true;
      return decision;
    }
  }
  throw AdapterMissing(decision.language, "no adapter for inferred language '" +
                                              decision.language + "' and no default configured");
}

}  // namespace retrieveall
