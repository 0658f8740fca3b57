#include "wikimpact/xml_text.hpp"

#include <charconv>

namespace wikimpact {

bool append_utf8(std::string& out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return true;
}

namespace {

// Decodes the reference body between '&' and ';'.
bool decode_reference(std::string_view name, std::string& out) {
  if (name == "lt") return out += '<', true;
  if (name == "gt") return out += '>', true;
  if (name == "amp") return out += '&', true;
  if (name == "quot") return out += '"', true;
  if (name == "apos") return out += '\'', true;
  if (name.size() < 2 || name[0] != '#') return false;

  int base = 10;
  name.remove_prefix(1);
  if (name[0] == 'x') {
    base = 16;
    name.remove_prefix(1);
  }
  if (name.empty()) return false;
  std::uint32_t cp = 0;
  const auto [end, ec] = std::from_chars(name.data(), name.data() + name.size(), cp, base);
  if (ec != std::errc() || end != name.data() + name.size() || cp == 0) return false;
  return append_utf8(out, cp);
}

}  // namespace

std::string xml_unescape(std::string_view in, bool* ok) {
  std::string out;
  out.reserve(in.size());
  bool clean = true;
  std::size_t i = 0;
  while (i < in.size()) {
    const auto amp = in.find('&', i);
    if (amp == std::string_view::npos) {
      out.append(in.substr(i));
      break;
    }
    out.append(in.substr(i, amp - i));
    const auto semi = in.find(';', amp + 1);
    // Entity names are short; a distant ';' means this '&' is literal.
    if (semi == std::string_view::npos || semi - amp > 12 ||
        !decode_reference(in.substr(amp + 1, semi - amp - 1), out)) {
      clean = false;
      out += '&';
      i = amp + 1;
      continue;
    }
    i = semi + 1;
  }
  if (ok != nullptr) *ok = clean;
  return out;
}

std::string normalize_newlines(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '\r') {
      out += '\n';
      if (i + 1 < in.size() && in[i + 1] == '\n') ++i;
    } else {
      out += in[i];
    }
  }
  return out;
}

}  // namespace wikimpact
