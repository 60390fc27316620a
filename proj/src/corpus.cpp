#include "retrieveall/corpus.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "retrieveall/errors.hpp"

namespace retrieveall {

namespace {
using nlohmann::json;

CorpusSample sample_from_json(const json& obj, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no);
  if (!obj.is_object()) {
    throw FormatError(where + ": expected a JSON object");
  }
  for (const char* key : {"id", "lang", "text"}) {
    if (!obj.contains(key) || !obj[key].is_string()) {
      throw FormatError(where + ": missing string field '" + key + "'");
    }
  }
  CorpusSample sample;
  sample.id = obj["id"].get<std::string>();
  sample.language = obj["lang"].get<std::string>();
  sample.text = obj["text"].get<std::string>();
  if (obj.contains("entities")) {
    if (!obj["entities"].is_array()) {
      throw FormatError(where + ": 'entities' must be an array");
    }
    for (const auto& ent : obj["entities"]) {
      if (!ent.is_object() || !ent.contains("text") || !ent["text"].is_string() ||
          !ent.contains("type") || !ent["type"].is_string()) {
        throw FormatError(where + ": entity entries need string 'text' and 'type'");
      }
      sample.entities.push_back({ent["text"].get<std::string>(), ent["type"].get<std::string>()});
    }
  }
  return sample;
}

}  // namespace

std::vector<CorpusSample> load_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open corpus: " + path.string());
  }
  std::vector<CorpusSample> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    corpus.push_back(sample_from_json(obj, line_no));
  }
  return corpus;
}

void save_corpus_jsonl(const std::vector<CorpusSample>& corpus,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  for (const auto& sample : corpus) {
    json entities = json::array();
    for (const auto& m : sample.entities) {
      entities.push_back({{"text", m.text}, {"type", m.type}});
    }
    const json obj = {
        {"id", sample.id}, {"lang", sample.language}, {"text", sample.text}, {"entities", entities}};
    out << obj.dump() << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

void validate_corpus(const std::vector<CorpusSample>& corpus) {
  std::set<std::string> seen;
  for (const auto& sample : corpus) {
    if (sample.id.empty()) {
      throw BuildError("sample with empty id");
    }
    if (!seen.insert(sample.id).second) {
      throw BuildError("duplicate sample id '" + sample.id + "'");
    }
    if (sample.language.empty()) {
      throw BuildError("sample '" + sample.id + "' has empty language");
    }
    if (sample.text.empty()) {
      throw BuildError("sample '" + sample.id + "' has empty text");
    }
    for (const auto& m : sample.entities) {
      if (m.type.empty()) {
        throw BuildError("sample '" + sample.id + "' has an entity with empty type");
      }
      if (m.text.empty() || sample.text.find(m.text) == std::string::npos) {
        throw BuildError("sample '" + sample.id + "': entity '" + m.text +
                         "' does not occur in the sample text");
      }
    }
  }
}

}  // namespace retrieveall
