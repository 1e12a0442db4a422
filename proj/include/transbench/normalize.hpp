#pragma once

#include <string>
#include <string_view>

namespace transbench {

/// Canonical form used for every stdout comparison: CRLF and lone CR become
/// LF, trailing whitespace is trimmed per line, trailing blank lines dropped.
/// Leading whitespace is preserved.
std::string normalize_output(std::string_view text);

/// Only the newline unification step of normalize_output.
std::string unify_newlines(std::string_view text);

}  // namespace transbench
