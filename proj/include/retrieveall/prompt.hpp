#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "retrieveall/corpus.hpp"

namespace retrieveall {

/// Headers and line formats of the hierarchical input. The defaults are pinned
/// by golden files; all fields are overridable through a templates file.
struct PromptTemplates {
  std::string entity_header = "Entity examples by type:";
  std::string context_header = "Context examples:";
  std::string task_header =
      "Extract entities from the following sentence and answer in the format (type: [entities]):";
  std::string entity_line = "{type}: [{entities}]";        // required slots: {type}, {entities}
  std::string context_line = "{text} => {annotations}";    // required slots: {text}, {annotations}
};

/// Throws TemplateError when a header is empty or a line format misses a slot.
void validate_templates(const PromptTemplates& templates);

/// key=value file, one per line, "\n" and "\\" escapes allowed in values.
PromptTemplates load_templates(const std::filesystem::path& path);

/// One target tuple: (type: [entities]).
struct Annotation {
  std::string type;
  std::vector<std::string> entities;

  bool operator==(const Annotation&) const = default;
};

/// Entity examples grouped per type, in declared type order.
using EntityExamples = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Context examples: (sample text, its annotations).
using ContextExamples = std::vector<std::pair<std::string, std::vector<Annotation>>>;

struct PromptBundle {
  std::string input_text;
  std::optional<std::string> expected_target;  // serialized gold, when known
  EntityExamples entity_examples;
  ContextExamples context_examples;
  std::string source_sample_id;
};

/// Assembles the hierarchical input: entity header + per-type example lines,
/// context header + example lines, task header, then the raw sample text,
/// newline-separated. Empty sections emit the header followed by "(none)".
std::string build_input(std::string_view sample_text, const EntityExamples& entity_examples,
                        const ContextExamples& context_examples,
                        const PromptTemplates& templates = {});

/// "(type1: [e1, e2]), (type2: [e3])"; empty entity list renders "(type: [])";
/// empty annotation list renders "(none)". ',', ']' and '\' in entities are
/// backslash-escaped.
std::string serialize_target(const std::vector<Annotation>& annotations);

/// Inverse of serialize_target. Whitespace-tolerant between tokens. Throws
/// ParseError with byte offset and reason.
std::vector<Annotation> parse_output(std::string_view text);

/// Groups gold mentions into the target annotation list: types in
/// first-appearance order, entities in mention order.
std::vector<Annotation> group_mentions(const std::vector<Mention>& mentions);

}  // namespace retrieveall
