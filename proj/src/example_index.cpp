#include "retrieveall/example_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "retrieveall/errors.hpp"
#include "retrieveall/io.hpp"

namespace retrieveall {

namespace {

using nlohmann::json;

constexpr std::uint32_t kIndexVersion = 1;

// Similarity order shared with the test oracles: score desc, then sample id,
// then record content for entity records with identical (score, sample).
struct ScoredRef {
  std::size_t record;
  float similarity;
};

void check_embedding(const VectorF& e, int dim, const std::string& what) {
  if (e.size() != dim) {
    throw FormatError(what + ": embedding dim " + std::to_string(e.size()) + " != index dim " +
                      std::to_string(dim));
  }
  require_finite(e, what);
  const double norm = e.cast<double>().norm();
  if (std::abs(norm - 1.0) > 1e-3) {
    throw FormatError(what + ": embedding is not unit norm (|v| = " + std::to_string(norm) + ")");
  }
}

}  // namespace

void validate_retrieval_config(const RetrievalConfig& cfg) {
  if (!(cfg.tau_e >= 0.0f && cfg.tau_e <= 1.0f)) {
    throw ConfigError("tau_e must be in [0, 1]");
  }
  if (!(cfg.tau_c >= 0.0f && cfg.tau_c <= 1.0f)) {
    throw ConfigError("tau_c must be in [0, 1]");
  }
  if (cfg.k < 1) {
    throw ConfigError("k must be >= 1");
  }
}

namespace {

// Declared type sets may carry zero-record types but must cover what the
// records use, and must not repeat.
std::vector<std::string> resolve_types(std::vector<std::string> declared,
                                       const std::vector<std::string>& observed) {
  if (declared.empty()) return observed;
  std::set<std::string> unique(declared.begin(), declared.end());
  if (unique.size() != declared.size()) {
    throw BuildError("declared entity types contain duplicates");
  }
  for (const auto& type : observed) {
    if (unique.count(type) == 0) {
      throw BuildError("entity type '" + type + "' occurs in records but is not declared");
    }
  }
  return declared;
}

}  // namespace

ExampleIndex ExampleIndex::build(const std::vector<CorpusSample>& corpus, const EncoderSpec& spec,
                                 const ExternalEncoderFn& external,
                                 const std::vector<std::string>& declared_types) {
  validate_encoder_spec(spec);
  if (corpus.empty()) {
    throw EmptyCorpus("cannot build an index from an empty corpus");
  }
  validate_corpus(corpus);

  ExampleIndex index;
  index.spec_ = spec;
  index.contexts_.reserve(corpus.size());
  for (const auto& sample : corpus) {
    ContextRecord ctx;
    ctx.sample_id = sample.id;
    ctx.language = sample.language;
    ctx.text = sample.text;
    ctx.mentions = sample.entities;
    try {
      ctx.embedding = encode(spec, sample.text, external);
    } catch (const Error& e) {
      throw EncodeFailure(sample.id, "sample '" + sample.id + "': " + e.what());
    }
    index.contexts_.push_back(std::move(ctx));

    for (const auto& mention : sample.entities) {
      EntityRecord rec;
      rec.sample_id = sample.id;
      rec.language = sample.language;
      rec.entity_type = mention.type;
      rec.entity_text = mention.text;
      try {
        rec.embedding = encode(spec, mention.text, external);
      } catch (const Error& e) {
        throw EncodeFailure(sample.id, "sample '" + sample.id + "', entity '" + mention.text +
                                           "': " + e.what());
      }
      if (!index.has_entity_type(rec.entity_type)) {
        index.entity_types_.push_back(rec.entity_type);
      }
      index.entities_.push_back(std::move(rec));
    }
  }
  index.entity_types_ = resolve_types(declared_types, index.entity_types_);
  return index;
}

ExampleIndex ExampleIndex::from_records(const EncoderSpec& spec,
                                        std::vector<ContextRecord> contexts,
                                        std::vector<EntityRecord> entities,
                                        const std::vector<std::string>& declared_types) {
  validate_encoder_spec(spec);
  ExampleIndex index;
  index.spec_ = spec;
  for (const auto& ctx : contexts) {
    check_embedding(ctx.embedding, spec.dim, "context record '" + ctx.sample_id + "'");
  }
  for (const auto& rec : entities) {
    check_embedding(rec.embedding, spec.dim, "entity record '" + rec.sample_id + "'");
    if (std::find(index.entity_types_.begin(), index.entity_types_.end(), rec.entity_type) ==
        index.entity_types_.end()) {
      index.entity_types_.push_back(rec.entity_type);
    }
  }
  index.entity_types_ = resolve_types(declared_types, index.entity_types_);
  index.contexts_ = std::move(contexts);
  index.entities_ = std::move(entities);
  return index;
}

bool ExampleIndex::has_entity_type(const std::string& type) const noexcept {
  return std::find(entity_types_.begin(), entity_types_.end(), type) != entity_types_.end();
}

std::vector<RetrievalHit> ExampleIndex::retrieve_context(const Eigen::Ref<const VectorF>& query,
                                                         const RetrievalConfig& cfg,
                                                         const std::string& exclude_sample) const {
  validate_retrieval_config(cfg);
  if (query.size() != spec_.dim) {
    throw DimensionMismatch("query dim " + std::to_string(query.size()) + " != index dim " +
                            std::to_string(spec_.dim));
  }
  std::vector<ScoredRef> scored;
  for (std::size_t i = 0; i < contexts_.size(); ++i) {
    if (contexts_[i].sample_id == exclude_sample) continue;
    const float sim = cosine(query, contexts_[i].embedding);
    if (sim > cfg.tau_c) {
      scored.push_back({i, sim});
    }
  }
  std::stable_sort(scored.begin(), scored.end(), [this](const ScoredRef& a, const ScoredRef& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return contexts_[a.record].sample_id < contexts_[b.record].sample_id;
  });
  if (scored.size() > static_cast<std::size_t>(cfg.k)) {
    scored.resize(static_cast<std::size_t>(cfg.k));
  }
  std::vector<RetrievalHit> hits;
  hits.reserve(scored.size());
  for (const auto& s : scored) {
    hits.push_back(
        {s.record, s.similarity, contexts_[s.record].sample_id, contexts_[s.record].language});
  }
  return hits;
}

std::vector<RetrievalHit> ExampleIndex::retrieve_entities(const Eigen::Ref<const VectorF>& query,
                                                          const std::string& entity_type,
                                                          const RetrievalConfig& cfg,
                                                          const std::string& exclude_sample) const {
  validate_retrieval_config(cfg);
  if (!has_entity_type(entity_type)) {
    throw UnknownEntityType("unknown entity type '" + entity_type + "'");
  }
  if (query.size() != spec_.dim) {
    throw DimensionMismatch("query dim " + std::to_string(query.size()) + " != index dim " +
                            std::to_string(spec_.dim));
  }
  std::vector<ScoredRef> scored;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (entities_[i].entity_type != entity_type) continue;
    if (entities_[i].sample_id == exclude_sample) continue;
    const float sim = cosine(query, entities_[i].embedding);
    if (sim > cfg.tau_e) {
      scored.push_back({i, sim});
    }
  }
  std::stable_sort(scored.begin(), scored.end(), [this](const ScoredRef& a, const ScoredRef& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    const auto& ra = entities_[a.record];
    const auto& rb = entities_[b.record];
    if (ra.sample_id != rb.sample_id) return ra.sample_id < rb.sample_id;
    return ra.entity_text < rb.entity_text;
  });
  if (scored.size() > static_cast<std::size_t>(cfg.k)) {
    scored.resize(static_cast<std::size_t>(cfg.k));
  }
  std::vector<RetrievalHit> hits;
  hits.reserve(scored.size());
  for (const auto& s : scored) {
    hits.push_back(
        {s.record, s.similarity, entities_[s.record].sample_id, entities_[s.record].language});
  }
  return hits;
}

RetrievalHit ExampleIndex::nearest_context(const Eigen::Ref<const VectorF>& query) const {
  if (contexts_.empty()) {
    throw EmptyIndex("index has no context records");
  }
  if (query.size() != spec_.dim) {
    throw DimensionMismatch("query dim " + std::to_string(query.size()) + " != index dim " +
                            std::to_string(spec_.dim));
  }
  std::size_t best = 0;
  float best_sim = cosine(query, contexts_[0].embedding);
  for (std::size_t i = 1; i < contexts_.size(); ++i) {
    const float sim = cosine(query, contexts_[i].embedding);
    if (sim > best_sim ||
        (sim == best_sim && contexts_[i].sample_id < contexts_[best].sample_id)) {
      best = i;
      best_sim = sim;
    }
  }
  return {best, best_sim, contexts_[best].sample_id, contexts_[best].language, /*fallback=*/true};
}

void save_index(const ExampleIndex& index, const std::filesystem::path& path) {
  auto out = io::open_output(path);
  const json header = {
      {"version", kIndexVersion},
      {"dim", index.dim()},
      {"encoder",
       {{"kind", std::string(encoder_kind_name(index.encoder_spec().kind))},
        {"seed", index.encoder_spec().seed}}},
      {"counts", {{"contexts", index.context_count()}, {"entities", index.entity_count()}}},
      {"types", index.entity_types()},
  };
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < index.context_count(); ++i) {
    const auto& ctx = index.context_record(i);
    io::write_str(out, ctx.sample_id);
    io::write_str(out, ctx.language);
    io::write_str(out, ctx.text);
    io::write_u32(out, static_cast<std::uint32_t>(ctx.mentions.size()));
    for (const auto& m : ctx.mentions) {
      io::write_str(out, m.text);
      io::write_str(out, m.type);
    }
    io::write_f32s(out, ctx.embedding.data(), static_cast<std::size_t>(ctx.embedding.size()));
  }
  for (std::size_t i = 0; i < index.entity_count(); ++i) {
    const auto& rec = index.entity_record(i);
    io::write_str(out, rec.sample_id);
    io::write_str(out, rec.language);
    io::write_str(out, rec.entity_type);
    io::write_str(out, rec.entity_text);
    io::write_f32s(out, rec.embedding.data(), static_cast<std::size_t>(rec.embedding.size()));
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

ExampleIndex load_index(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw FormatError("missing index header line");
  }
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid index header: ") + e.what());
  }
  if (!header.is_object() || header.value("version", 0u) != kIndexVersion) {
    throw FormatError("unsupported index version");
  }
  EncoderSpec spec;
  try {
    spec.dim = header.at("dim").get<int>();
    spec.kind = encoder_kind_from_name(header.at("encoder").at("kind").get<std::string>());
    spec.seed = header.at("encoder").at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid index header: ") + e.what());
  }
  std::size_t n_contexts = 0;
  std::size_t n_entities = 0;
  std::vector<std::string> declared_types;
  try {
    n_contexts = header.at("counts").at("contexts").get<std::size_t>();
    n_entities = header.at("counts").at("entities").get<std::size_t>();
    declared_types = header.at("types").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid index header: ") + e.what());
  }

  std::vector<ContextRecord> contexts;
  contexts.reserve(n_contexts);
  for (std::size_t i = 0; i < n_contexts; ++i) {
    ContextRecord ctx;
    ctx.sample_id = io::read_str(in);
    ctx.language = io::read_str(in);
    ctx.text = io::read_str(in);
    const std::uint32_t n_mentions = io::read_u32(in);
    for (std::uint32_t j = 0; j < n_mentions; ++j) {
      Mention m;
      m.text = io::read_str(in);
      m.type = io::read_str(in);
      ctx.mentions.push_back(std::move(m));
    }
    ctx.embedding.resize(spec.dim);
    io::read_f32s(in, ctx.embedding.data(), static_cast<std::size_t>(spec.dim));
    contexts.push_back(std::move(ctx));
  }
  std::vector<EntityRecord> entities;
  entities.reserve(n_entities);
  for (std::size_t i = 0; i < n_entities; ++i) {
    EntityRecord rec;
    rec.sample_id = io::read_str(in);
    rec.language = io::read_str(in);
    rec.entity_type = io::read_str(in);
    rec.entity_text = io::read_str(in);
    rec.embedding.resize(spec.dim);
    io::read_f32s(in, rec.embedding.data(), static_cast<std::size_t>(spec.dim));
    entities.push_back(std::move(rec));
  }
  io::expect_eof(in);
  try {
    return ExampleIndex::from_records(spec, std::move(contexts), std::move(entities),
                                      declared_types);
  } catch (const BuildError& e) {
    throw FormatError(e.what());
  }
}

}  // namespace retrieveall
