#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "transbench/error.hpp"
#include "transbench/language.hpp"

namespace transbench::prompting {

/// Codes: UnboundPlaceholder, UnknownPlaceholder, EmptyExtraction, MissingTemplate.
class PromptError : public Error {
 public:
  using Error::Error;
};

enum class TemplateId {
  SpecGen,
  TranslateSpecOnly,
  TranslateSpecPlusSource,
  RepairCompile,
  /// Baseline: translate directly from source code.
  TranslateSourceOnly,
};

inline constexpr std::array<TemplateId, 5> kAllTemplates{TemplateId::SpecGen, TemplateId::TranslateSpecOnly,
                                                         TemplateId::TranslateSpecPlusSource,
                                                         TemplateId::RepairCompile, TemplateId::TranslateSourceOnly};

std::string_view to_string(TemplateId id);
/// File name under the template directory, e.g. "spec_gen.txt".
std::string_view file_name(TemplateId id);

/// The placeholder names a template body may use.
inline constexpr std::array<std::string_view, 6> kPlaceholders{"source_code",        "source_language",
                                                               "target_language",    "pseudocode_content",
                                                               "target_code",        "err_context"};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Placeholders referenced by `body`, in order of first appearance.
/// Throws UnknownPlaceholder for `{name}` tokens outside kPlaceholders.
std::vector<std::string> placeholders(std::string_view body);

/// Substitutes every `{name}` in one pass; bound values are inserted verbatim
/// and never re-scanned. Throws UnboundPlaceholder naming the first missing key.
std::string render_template(std::string_view body, const Bindings& bindings);

/// The set of prompt bodies in use.
class TemplateSet {
 public:
  /// Bodies compiled into the binary from templates/.
  static TemplateSet builtin();
  /// Loads `<dir>/<file_name(id)>` for each id; missing files keep the builtin body.
  static TemplateSet load_dir(const std::filesystem::path& dir);

  const std::string& body(TemplateId id) const;
  void set_body(TemplateId id, std::string body);
  std::string render(TemplateId id, const Bindings& bindings) const;

 private:
  std::map<TemplateId, std::string> bodies_;
};

/// Natural-language specification produced from one sample.
struct Specification {
  std::string sample_id;
  std::string text;
  SubjectLanguage source_language;
  std::string request_digest;
};

/// Pulls program text out of a model reply: fenced blocks (all of them, in
/// order) when present, everything from an "End of Code" sentinel comment
/// onward dropped, leading blank lines and trailing whitespace trimmed.
/// Throws EmptyExtraction if nothing remains.
std::string extract_code(std::string_view raw, const SubjectLanguage& target);

}  // namespace transbench::prompting
