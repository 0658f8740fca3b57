#pragma once

#include <string>
#include <string_view>

namespace wikimpact {

/// Replaces the five predefined XML entities and numeric character
/// references with the characters they denote. Unknown or malformed
/// references are kept verbatim; returns false through `ok` in that case.
std::string xml_unescape(std::string_view in, bool* ok = nullptr);

/// Appends the UTF-8 encoding of `code_point`. Returns false (and appends
/// nothing) for surrogates and values above U+10FFFF.
bool append_utf8(std::string& out, char32_t code_point);

/// Converts CR LF and lone CR to LF, as an XML processor does before parsing.
std::string normalize_newlines(std::string_view in);

}  // namespace wikimpact
