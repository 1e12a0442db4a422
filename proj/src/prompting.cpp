#include "transbench/prompting.hpp"

#include <algorithm>

#include "transbench/normalize.hpp"
#include "transbench/text.hpp"

namespace transbench::prompting {

namespace detail {
// Generated at build time from templates/*.txt.
std::string_view builtin_template(std::string_view file_name);
}  // namespace detail

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::SpecGen: return "SpecGen";
    case TemplateId::TranslateSpecOnly: return "TranslateSpecOnly";
    case TemplateId::TranslateSpecPlusSource: return "TranslateSpecPlusSource";
    case TemplateId::RepairCompile: return "RepairCompile";
    case TemplateId::TranslateSourceOnly: return "TranslateSourceOnly";
  }
  return "?";
}

std::string_view file_name(TemplateId id) {
  switch (id) {
    case TemplateId::SpecGen: return "spec_gen.txt";
    case TemplateId::TranslateSpecOnly: return "translate_spec_only.txt";
    case TemplateId::TranslateSpecPlusSource: return "translate_spec_plus_source.txt";
    case TemplateId::RepairCompile: return "repair_compile.txt";
    case TemplateId::TranslateSourceOnly: return "translate_source_only.txt";
  }
  return "";
}

namespace {

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

bool known_placeholder(std::string_view name) {
  return std::find(kPlaceholders.begin(), kPlaceholders.end(), name) != kPlaceholders.end();
}

/// Calls `on_text(chunk)` for literal runs and `on_name(name)` for placeholders.
template <typename OnText, typename OnName>
void scan(std::string_view body, OnText on_text, OnName on_name) {
  std::size_t i = 0, literal_start = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && is_name_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}' && j > i + 1) {
        std::string_view name = body.substr(i + 1, j - i - 1);
        if (!known_placeholder(name))
          throw PromptError("UnknownPlaceholder", "template uses unknown placeholder {" + std::string(name) + "}");
        on_text(body.substr(literal_start, i - literal_start));
        on_name(name);
        i = j + 1;
        literal_start = i;
        continue;
      }
    }
    ++i;
  }
  on_text(body.substr(literal_start));
}

/// Template files conventionally end with a newline; the prompt does not.
std::string strip_final_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::vector<std::string> placeholders(std::string_view body) {
  std::vector<std::string> names;
  scan(
      body, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
      });
  return names;
}

std::string render_template(std::string_view body, const Bindings& bindings) {
  // Validate first so a missing binding never yields a partial prompt.
  for (const auto& name : placeholders(body))
    if (bindings.find(name) == bindings.end())
      throw PromptError("UnboundPlaceholder", "unbound placeholder '" + name + "'");
  std::string out;
  scan(
      body, [&](std::string_view chunk) { out.append(chunk); },
      [&](std::string_view name) { out.append(bindings.find(name)->second); });
  return out;
}

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  for (TemplateId id : kAllTemplates) {
    auto body = detail::builtin_template(file_name(id));
    if (body.empty()) throw PromptError("MissingTemplate", "no builtin template " + std::string(file_name(id)));
    set.set_body(id, std::string(body));
  }
  return set;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
  TemplateSet set = builtin();
  for (TemplateId id : kAllTemplates) {
    const auto path = dir / file_name(id);
    if (std::filesystem::is_regular_file(path)) set.set_body(id, text::read_file(path));
  }
  return set;
}

const std::string& TemplateSet::body(TemplateId id) const {
  auto it = bodies_.find(id);
  if (it == bodies_.end()) throw PromptError("MissingTemplate", "template " + std::string(to_string(id)) + " not loaded");
  return it->second;
}

void TemplateSet::set_body(TemplateId id, std::string body) {
  body = strip_final_newline(std::move(body));
  placeholders(body);  // rejects unknown placeholders up front
  bodies_[id] = std::move(body);
}

std::string TemplateSet::render(TemplateId id, const Bindings& bindings) const {
  return render_template(body(id), bindings);
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

constexpr std::string_view kSentinel = "End of Code";

bool is_fence(std::string_view line) {
  auto t = text::trim(line);
  return t.starts_with("```") || t.starts_with("~~~");
}

/// Position where the sentinel comment starts on `line`, or npos.
std::size_t sentinel_start(std::string_view line) {
  auto pos = line.find(kSentinel);
  if (pos == std::string_view::npos) return pos;
  std::string_view before = line.substr(0, pos);
  std::size_t marker = std::string_view::npos;
  for (std::string_view m : {"//", "#", "--", "/*"}) {
    auto at = before.rfind(m);
    if (at != std::string_view::npos && (marker == std::string_view::npos || at > marker)) marker = at;
  }
  if (marker != std::string_view::npos) {
    // only quotes/space may sit between the comment marker and the sentinel
    auto gap = before.substr(marker);
    gap.remove_prefix(gap.starts_with("//") || gap.starts_with("--") || gap.starts_with("/*") ? 2 : 1);
    if (std::all_of(gap.begin(), gap.end(), [](char c) { return c == ' ' || c == '\t' || c == '"' || c == '\''; }))
      return marker;
    return std::string_view::npos;
  }
  // a bare `End of Code` line (optionally quoted) also ends the program
  auto bare = text::trim(line);
  while (!bare.empty() && (bare.front() == '"' || bare.front() == '\'')) bare.remove_prefix(1);
  while (!bare.empty() && (bare.back() == '"' || bare.back() == '\'' || bare.back() == '.')) bare.remove_suffix(1);
  return bare == kSentinel ? 0 : std::string_view::npos;
}

}  // namespace

std::string extract_code(std::string_view raw, const SubjectLanguage& /*target*/) {
  if (text::is_blank(raw)) throw PromptError("EmptyExtraction", "model response is empty");
  const std::string unified = unify_newlines(raw);
  const auto lines = text::split_lines(unified);

  std::vector<std::string_view> body;
  if (std::any_of(lines.begin(), lines.end(), is_fence)) {
    bool inside = false;
    for (auto line : lines) {
      if (is_fence(line)) {
        inside = !inside;
        continue;
      }
      if (inside) body.push_back(line);
    }
  } else {
    body = lines;
  }

  std::string out;
  for (auto line : body) {
    auto cut = sentinel_start(line);
    if (cut != std::string_view::npos) {
      auto kept = text::rtrim(line.substr(0, cut));
      if (!kept.empty()) out.append(kept).push_back('\n');
      break;
    }
    out.append(line).push_back('\n');
  }

  // leading blank lines, trailing whitespace
  std::size_t start = 0;
  while (start < out.size()) {
    auto nl = out.find('\n', start);
    if (nl == std::string::npos || !text::is_blank(std::string_view(out).substr(start, nl - start))) break;
    start = nl + 1;
  }
  std::string result(text::rtrim(std::string_view(out).substr(start)));
  if (result.empty()) throw PromptError("EmptyExtraction", "no code left after stripping fences and sentinel");
  return result;
}

}  // namespace transbench::prompting
