#include "retrieveall/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <utility>

#include "json.hpp"
#include "retrieveall/errors.hpp"

namespace retrieveall {

namespace {

using nlohmann::json;

struct MatchCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long parse_failures = 0;
};

std::string trim_ascii(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// (type, entity) pairs as a multiset, entities whitespace-trimmed.
std::map<std::pair<std::string, std::string>, long> pair_counts(
    const std::vector<Annotation>& annotations) {
  std::map<std::pair<std::string, std::string>, long> counts;
  for (const auto& ann : annotations) {
    const std::string type = trim_ascii(ann.type);
    for (const auto& entity : ann.entities) {
      counts[{type, trim_ascii(entity)}] += 1;
    }
  }
  return counts;
}

void count_sample(const std::vector<Annotation>& pred, const std::vector<Annotation>& gold,
                  MatchCounts& counts) {
  const auto pred_counts = pair_counts(pred);
  const auto gold_counts = pair_counts(gold);
  long tp = 0, pred_total = 0, gold_total = 0;
  for (const auto& [pair, n] : pred_counts) {
    pred_total += n;
    auto it = gold_counts.find(pair);
    if (it != gold_counts.end()) {
      tp += std::min(n, it->second);
    }
  }
  for (const auto& [pair, n] : gold_counts) {
    gold_total += n;
  }
  counts.tp += tp;
  counts.fp += pred_total - tp;
  counts.fn += gold_total - tp;
}

F1Scores scores_from(const MatchCounts& c) {
  F1Scores s;
  const long pred_total = c.tp + c.fp;
  const long gold_total = c.tp + c.fn;
  s.precision = pred_total > 0 ? static_cast<double>(c.tp) / pred_total : 0.0;
  s.recall = gold_total > 0 ? static_cast<double>(c.tp) / gold_total : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

}  // namespace

F1Scores micro_f1(const std::vector<std::vector<Annotation>>& preds,
                  const std::vector<std::vector<Annotation>>& golds) {
  if (preds.size() != golds.size()) {
    throw LengthMismatch("micro_f1: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(golds.size()) + " golds");
  }
  MatchCounts counts;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    count_sample(preds[i], golds[i], counts);
  }
  return scores_from(counts);
}

double routing_accuracy(const std::vector<RoutingDecision>& decisions,
                        const std::vector<std::string>& gold_languages) {
  if (decisions.size() != gold_languages.size()) {
    throw LengthMismatch("routing_accuracy: " + std::to_string(decisions.size()) +
                         " decisions vs " + std::to_string(gold_languages.size()) + " golds");
  }
  if (decisions.empty()) return 0.0;
  long correct = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i].language == gold_languages[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(decisions.size());
}

PromptBundle assemble_bundle(const CorpusSample& sample, const ExampleIndex& index,
                             const PromptTemplates& templates, const PipelineConfig& cfg,
                             const Eigen::Ref<const VectorF>& query) {
  PromptBundle bundle;
  bundle.source_sample_id = sample.id;

  const std::vector<std::string>& type_order =
      cfg.type_order.empty() ? index.entity_types() : cfg.type_order;
  for (const auto& type : type_order) {
    std::vector<std::string> examples;
    for (const auto& hit : index.retrieve_entities(query, type, cfg.retrieval, sample.id)) {
      examples.push_back(index.entity_record(hit.record).entity_text);
    }
    bundle.entity_examples.emplace_back(type, std::move(examples));
  }
  for (const auto& hit : index.retrieve_context(query, cfg.retrieval, sample.id)) {
    const ContextRecord& ctx = index.context_record(hit.record);
    bundle.context_examples.emplace_back(ctx.text, group_mentions(ctx.mentions));
  }
  bundle.input_text =
      build_input(sample.text, bundle.entity_examples, bundle.context_examples, templates);
  bundle.expected_target = serialize_target(group_mentions(sample.entities));
  return bundle;
}

std::vector<PipelineResult> run_pipeline(const std::vector<CorpusSample>& corpus,
                                         const AdapterPool& pool, const ExampleIndex& index,
                                         const PromptTemplates& templates,
                                         const GenerationBackend& backend,
                                         const PipelineConfig& cfg) {
  std::vector<PipelineResult> results;
  results.reserve(corpus.size());
  for (const auto& sample : corpus) {
    PipelineResult result;
    result.sample_id = sample.id;
    const VectorF query = encode(index.encoder_spec(), sample.text);
    result.decision = route(pool, index, query, cfg.retrieval, cfg.default_language);
    result.bundle = assemble_bundle(sample, index, templates, cfg, query);
    result.output = generate(backend, result.bundle);
    try {
      result.prediction = parse_output(result.output);
    } catch (const ParseError&) {
      result.prediction.clear();
      result.parse_failed = true;
    }
    results.push_back(std::move(result));
  }
  return results;
}

EvalReport evaluate_pipeline(const std::vector<CorpusSample>& corpus, const AdapterPool& pool,
                             const ExampleIndex& index, const PromptTemplates& templates,
                             const GenerationBackend& backend, const PipelineConfig& cfg) {
  const std::vector<PipelineResult> results =
      run_pipeline(corpus, pool, index, templates, backend, cfg);

  EvalReport report;
  report.samples = static_cast<long>(results.size());
  MatchCounts overall;
  std::map<std::string, MatchCounts> by_language;
  std::map<std::string, long> support;
  long routed_correct = 0;

  for (std::size_t i = 0; i < results.size(); ++i) {
    const CorpusSample& sample = corpus[i];
    const PipelineResult& result = results[i];
    const std::vector<Annotation> gold = group_mentions(sample.entities);
    MatchCounts& lang_counts = by_language[sample.language];
    count_sample(result.prediction, gold, lang_counts);
    count_sample(result.prediction, gold, overall);
    long gold_pairs = 0;
    for (const auto& ann : gold) gold_pairs += static_cast<long>(ann.entities.size());
    support[sample.language] += gold_pairs;
    if (result.parse_failed) {
      ++lang_counts.parse_failures;
      ++report.parse_failures;
    }
    if (result.decision.language == sample.language) ++routed_correct;
  }

  double macro_sum = 0.0;
  for (const auto& [language, counts] : by_language) {
    const F1Scores s = scores_from(counts);
    report.per_language[language] = {s.precision, s.recall, s.f1, support[language],
                                     counts.parse_failures};
    macro_sum += s.f1;
  }
  report.micro = scores_from(overall);
  report.macro_f1 = by_language.empty() ? 0.0 : macro_sum / static_cast<double>(by_language.size());
  report.routing_accuracy =
      results.empty() ? 0.0 : static_cast<double>(routed_correct) / static_cast<double>(results.size());
  return report;
}

std::string report_json(const EvalReport& report) {
  json languages = json::object();
  for (const auto& [language, m] : report.per_language) {
    languages[language] = {{"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"support", m.support},
                           {"parse_failures", m.parse_failures}};
  }
  const json doc = {{"languages", languages},
                    {"micro",
                     {{"precision", report.micro.precision},
                      {"recall", report.micro.recall},
                      {"f1", report.micro.f1}}},
                    {"macro_f1", report.macro_f1},
                    {"routing_accuracy", report.routing_accuracy},
                    {"samples", report.samples},
                    {"parse_failures", report.parse_failures}};
  return doc.dump(2);
}

std::string report_csv(const EvalReport& report) {
  std::string out = "language,precision,recall,f1,support,parse_failures\n";
  char row[256];
  for (const auto& [language, m] : report.per_language) {
    std::snprintf(row, sizeof(row), "%s,%.6f,%.6f,%.6f,%ld,%ld\n", language.c_str(), m.precision,
                  m.recall, m.f1, m.support, m.parse_failures);
    out += row;
  }
  return out;
}

}  // namespace retrieveall
