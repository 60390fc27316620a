#include "retrieveall/prompt.hpp"

#include <cctype>

#include "retrieveall/config.hpp"
#include "retrieveall/errors.hpp"

namespace retrieveall {

namespace {

void require_slot(std::string_view fmt, std::string_view slot, std::string_view which) {
  if (fmt.find(slot) == std::string_view::npos) {
    throw TemplateError(std::string(which) + " is missing required slot " + std::string(slot));
  }
}

std::string substitute(std::string_view fmt, std::string_view slot, std::string_view value) {
  std::string out;
  out.reserve(fmt.size() + value.size());
  std::size_t pos = 0;
  while (pos < fmt.size()) {
    const std::size_t hit = fmt.find(slot, pos);
    if (hit == std::string_view::npos) {
      out.append(fmt.substr(pos));
      break;
    }
    out.append(fmt.substr(pos, hit - pos));
    out.append(value);
    pos = hit + slot.size();
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string escape_entity(std::string_view entity) {
  std::string out;
  out.reserve(entity.size());
  for (char c : entity) {
    if (c == '\\' || c == ']' || c == ',') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

void validate_templates(const PromptTemplates& templates) {
  if (templates.entity_header.empty()) throw TemplateError("entity_header is empty");
  if (templates.context_header.empty()) throw TemplateError("context_header is empty");
  if (templates.task_header.empty()) throw TemplateError("task_header is empty");
  require_slot(templates.entity_line, "{type}", "entity_line");
  require_slot(templates.entity_line, "{entities}", "entity_line");
  require_slot(templates.context_line, "{text}", "context_line");
  require_slot(templates.context_line, "{annotations}", "context_line");
}

PromptTemplates load_templates(const std::filesystem::path& path) {
  PromptTemplates templates;
  for (const auto& [key, value] : parse_kv_file(path)) {
    if (key == "entity_header") {
      templates.entity_header = value;
    } else if (key == "context_header") {
      templates.context_header = value;
    } else if (key == "task_header") {
      templates.task_header = value;
    } else if (key == "entity_line") {
      templates.entity_line = value;
    } else if (key == "context_line") {
      templates.context_line = value;
    } else {
      throw TemplateError("unknown template key '" + key + "'");
    }
  }
  validate_templates(templates);
  return templates;
}

std::string build_input(std::string_view sample_text, const EntityExamples& entity_examples,
                        const ContextExamples& context_examples,
                        const PromptTemplates& templates) {
  validate_templates(templates);
  std::vector<std::string> lines;
  lines.push_back(templates.entity_header);
  std::size_t entity_lines = 0;
  for (const auto& [type, entities] : entity_examples) {
    if (entities.empty()) continue;
    std::string line = substitute(templates.entity_line, "{type}", type);
    line = substitute(line, "{entities}", join(entities, ", "));
    lines.push_back(std::move(line));
    ++entity_lines;
  }
  if (entity_lines == 0) lines.push_back("(none)");

  lines.push_back(templates.context_header);
  for (const auto& [text, annotations] : context_examples) {
    std::string line = substitute(templates.context_line, "{text}", text);
    line = substitute(line, "{annotations}", serialize_target(annotations));
    lines.push_back(std::move(line));
  }
  if (context_examples.empty()) lines.push_back("(none)");

  lines.push_back(templates.task_header);
  lines.push_back(std::string(sample_text));
  return join(lines, "\n");
}

std::string serialize_target(const std::vector<Annotation>& annotations) {
  if (annotations.empty()) return "(none)";
  std::vector<std::string> tuples;
  tuples.reserve(annotations.size());
  for (const auto& ann : annotations) {
    std::vector<std::string> escaped;
    escaped.reserve(ann.entities.size());
    for (const auto& e : ann.entities) escaped.push_back(escape_entity(e));
    tuples.push_back("(" + ann.type + ": [" + join(escaped, ", ") + "])");
  }
  return join(tuples, ", ");
}

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  void expect(char c, const char* what) {
    if (eof() || text[pos] != c) {
      throw ParseError(pos, std::string("expected ") + what);
    }
    ++pos;
  }
};

std::string trim_ascii(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string parse_type(Cursor& c) {
  c.skip_ws();
  const std::size_t start = c.pos;
  while (!c.eof()) {
    const char ch = c.peek();
    if (ch == ':') break;
    if (ch == '(' || ch == ')' || ch == '[' || ch == ']') {
      throw ParseError(c.pos, "expected ':' after entity type");
    }
    ++c.pos;
  }
  if (c.eof()) {
    throw ParseError(c.pos, "expected ':' after entity type");
  }
  const std::string type = trim_ascii(c.text.substr(start, c.pos - start));
  if (type.empty()) {
    throw ParseError(start, "empty entity type");
  }
  ++c.pos;  // ':'
  return type;
}

std::vector<std::string> parse_entity_list(Cursor& c) {
  std::vector<std::string> entities;
  c.expect('[', "'['");
  c.skip_ws();
  if (!c.eof() && c.peek() == ']') {
    ++c.pos;
    return entities;
  }
  while (true) {
    const std::size_t start = c.pos;
    std::string raw;
    char stop = '\0';
    while (true) {
      if (c.eof()) {
        throw ParseError(c.pos, "unterminated entity list");
      }
      const char ch = c.peek();
      if (ch == '\\') {
        ++c.pos;
        if (c.eof()) {
          throw ParseError(c.pos, "unterminated escape");
        }
        const char esc = c.peek();
        if (esc != ',' && esc != ']' && esc != '\\') {
          throw ParseError(c.pos, "invalid escape sequence");
        }
        raw.push_back(esc);
        ++c.pos;
        continue;
      }
      if (ch == ',' || ch == ']') {
        stop = ch;
        break;
      }
      raw.push_back(ch);
      ++c.pos;
    }
    const std::string entity = trim_ascii(raw);
    if (entity.empty()) {
      throw ParseError(start, "empty entity");
    }
    entities.push_back(entity);
    ++c.pos;  // separator or ']'
    if (stop == ']') break;
    c.skip_ws();
  }
  return entities;
}

Annotation parse_tuple(Cursor& c) {
  c.expect('(', "'('");
  Annotation ann;
  ann.type = parse_type(c);
  c.skip_ws();
  ann.entities = parse_entity_list(c);
  c.skip_ws();
  c.expect(')', "')'");
  return ann;
}

}  // namespace

std::vector<Annotation> parse_output(std::string_view text) {
  Cursor c{text};
  c.skip_ws();
  if (c.eof()) {
    throw ParseError(c.pos, "empty output");
  }
  if (c.text.substr(c.pos, 6) == "(none)") {
    c.pos += 6;
    c.skip_ws();
    if (!c.eof()) {
      throw ParseError(c.pos, "trailing characters after (none)");
    }
    return {};
  }
  std::vector<Annotation> annotations;
  annotations.push_back(parse_tuple(c));
  c.skip_ws();
  while (!c.eof() && c.peek() == ',') {
    ++c.pos;
    c.skip_ws();
    annotations.push_back(parse_tuple(c));
    c.skip_ws();
  }
  if (!c.eof()) {
    throw ParseError(c.pos, "trailing characters");
  }
  return annotations;
}

std::vector<Annotation> group_mentions(const std::vector<Mention>& mentions) {
  std::vector<Annotation> out;
  for (const auto& m : mentions) {
    Annotation* slot = nullptr;
    for (auto& ann : out) {
      if (ann.type == m.type) {
        slot = &ann;
        break;
      }
    }
    if (slot == nullptr) {
      out.push_back({m.type, {}});
      slot = &out.back();
    }
    slot->entities.push_back(m.text);
  }
  return out;
}

}  // namespace retrieveall
