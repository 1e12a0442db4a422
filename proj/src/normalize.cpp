#include "transbench/normalize.hpp"

#include "transbench/text.hpp"

namespace transbench {

std::string unify_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string normalize_output(std::string_view text) {
  const std::string unified = unify_newlines(text);
  std::string out;
  out.reserve(unified.size());
  for (auto line : text::split_lines(unified)) {
    out.append(text::rtrim(line));
    out.push_back('\n');
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

}  // namespace transbench
