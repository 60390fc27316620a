#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace retrieveall {

/// One labeled entity occurrence: (entity text, entity type).
struct Mention {
  std::string text;
  std::string type;

  bool operator==(const Mention&) const = default;
};

struct CorpusSample {
  std::string id;        // unique corpus-wide
  std::string language;
  std::string text;
  std::vector<Mention> entities;
};

/// JSON Lines, one object per sample:
///   {"id": str, "lang": str, "text": str, "entities": [{"text": str, "type": str}]}
/// Throws FormatError with the offending line number, IoError on open failure.
std::vector<CorpusSample> load_corpus_jsonl(const std::filesystem::path& path);

void save_corpus_jsonl(const std::vector<CorpusSample>& corpus, const std::filesystem::path& path);

/// Enforces sample invariants: non-empty unique ids, non-empty language/text,
/// every entity text a substring of the sample text. Throws BuildError naming
/// the offending sample.
void validate_corpus(const std::vector<CorpusSample>& corpus);

}  // namespace retrieveall
