#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace transbench {

/// Identifier of a programming language that programs are translated from or
/// into ("c", "cpp", "go", "java", "python"). Whether the id is usable is
/// decided by the toolchain registry, not by this type.
class SubjectLanguage {
 public:
  SubjectLanguage() = default;
  explicit SubjectLanguage(std::string id);

  const std::string& id() const noexcept { return id_; }

  /// Name used inside prompts, e.g. "C++" for "cpp". Unknown ids map to themselves.
  std::string display_name() const;

  /// Source-file extension without the dot ("py", "java", ...).
  std::string file_extension() const;

  auto operator<=>(const SubjectLanguage&) const = default;

 private:
  std::string id_;
};

/// The five default subject languages in canonical order.
const std::vector<SubjectLanguage>& default_languages();

/// Maps a file extension (without dot) back to a language id, or "" if unknown.
std::string language_id_for_extension(std::string_view ext);

}  // namespace transbench
