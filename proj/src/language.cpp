#include "transbench/language.hpp"

#include <array>
#include <utility>

#include "transbench/error.hpp"

namespace transbench {

namespace {

struct LanguageInfo {
  std::string_view id;
  std::string_view display;
  std::string_view ext;
};

constexpr std::array<LanguageInfo, 5> kKnown{{
    {"c", "C", "c"},
    {"cpp", "C++", "cpp"},
    {"go", "Go", "go"},
    {"java", "Java", "java"},
    {"python", "Python", "py"},
}};

const LanguageInfo* find_info(std::string_view id) {
  for (const auto& info : kKnown)
    if (info.id == id) return &info;
  return nullptr;
}

}  // namespace

SubjectLanguage::SubjectLanguage(std::string id) : id_(std::move(id)) {
  if (id_.empty()) throw ConfigError("subject language id must be non-empty");
}

std::string SubjectLanguage::display_name() const {
  if (const auto* info = find_info(id_)) return std::string(info->display);
  return id_;
}

std::string SubjectLanguage::file_extension() const {
  if (const auto* info = find_info(id_)) return std::string(info->ext);
  return id_;
}

const std::vector<SubjectLanguage>& default_languages() {
  static const std::vector<SubjectLanguage> langs = [] {
    std::vector<SubjectLanguage> v;
    for (const auto& info : kKnown) v.emplace_back(std::string(info.id));
    return v;
  }();
  return langs;
}

std::string language_id_for_extension(std::string_view ext) {
  for (const auto& info : kKnown)
    if (info.ext == ext) return std::string(info.id);
  if (ext == "cc" || ext == "cxx" || ext == "hpp" || ext == "h++") return "cpp";
  if (ext == "h") return "c";
  return {};
}

}  // namespace transbench
