#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retrieveall/adapter.hpp"
#include "retrieveall/backend.hpp"
#include "retrieveall/corpus.hpp"
#include "retrieveall/example_index.hpp"
#include "retrieveall/prompt.hpp"
#include "retrieveall/router.hpp"

namespace retrieveall {

struct F1Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LanguageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;         // gold (type, entity) pairs
  long parse_failures = 0;  // outputs rejected by the parser, scored as empty
};

struct EvalReport {
  std::map<std::string, LanguageMetrics> per_language;
  F1Scores micro;                 // pooled TP/FP/FN over all samples and types
  double macro_f1 = 0.0;          // unweighted mean of per-language F1
  double routing_accuracy = 0.0;  // inferred language == gold language
  long samples = 0;
  long parse_failures = 0;
};

/// Span micro-F1 with multiset matching: a predicted (type, entity) pair is a
/// true positive iff an unmatched identical pair exists in the same sample's
/// gold. Strings compare exactly after whitespace trimming. 0/0 is 0.
/// Throws LengthMismatch when preds and golds differ in length.
F1Scores micro_f1(const std::vector<std::vector<Annotation>>& preds,
                  const std::vector<std::vector<Annotation>>& golds);

/// Fraction of decisions whose language equals the gold code.
double routing_accuracy(const std::vector<RoutingDecision>& decisions,
                        const std::vector<std::string>& gold_languages);

struct PipelineConfig {
  RetrievalConfig retrieval;
  std::optional<std::string> default_language;
  std::vector<std::string> type_order;  // empty: index first-appearance order
};

/// Per-sample record of one pipeline pass, shared by infer and eval.
struct PipelineResult {
  std::string sample_id;
  RoutingDecision decision;
  PromptBundle bundle;
  std::string output;
  std::vector<Annotation> prediction;  // empty when parse failed
  bool parse_failed = false;
};

/// encode -> route -> retrieve (self-excluding) -> build prompt, for one sample.
PromptBundle assemble_bundle(const CorpusSample& sample, const ExampleIndex& index,
                             const PromptTemplates& templates, const PipelineConfig& cfg,
                             const Eigen::Ref<const VectorF>& query);

/// Runs the full service pass over a corpus. Parse errors become empty
/// predictions counted per language; infrastructure errors propagate.
std::vector<PipelineResult> run_pipeline(const std::vector<CorpusSample>& corpus,
                                         const AdapterPool& pool, const ExampleIndex& index,
                                         const PromptTemplates& templates,
                                         const GenerationBackend& backend,
                                         const PipelineConfig& cfg);

EvalReport evaluate_pipeline(const std::vector<CorpusSample>& corpus, const AdapterPool& pool,
                             const ExampleIndex& index, const PromptTemplates& templates,
                             const GenerationBackend& backend, const PipelineConfig& cfg);

std::string report_json(const EvalReport& report);  // pretty JSON
std::string report_csv(const EvalReport& report);   // flat per-language table

}  // namespace retrieveall
