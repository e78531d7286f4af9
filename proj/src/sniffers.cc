#include "corbfuzz/sniffers.h"

#include <algorithm>
#include <array>
#include <cctype>

#include "corbfuzz/strings.h"

namespace corbfuzz {

namespace {

bool IsJsonWhitespace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

size_t SkipWhitespace(std::string_view body, size_t pos) {
  while (pos < body.size() &&
         std::isspace(static_cast<unsigned char>(body[pos]))) {
    ++pos;
  }
  return pos;
}

constexpr std::array<std::string_view, 10> kHtmlTags = {
    "html", "head", "body", "script", "iframe",
    "meta", "div",  "a",    "p",      "table"};

}  // namespace

SnifferVerdict SniffJson(std::string_view body) {
  enum class State { kStart, kLeftBrace, kKey, kEscape };
  State state = State::kStart;
  for (size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    switch (state) {
      case State::kStart:
        if (IsJsonWhitespace(c))
          break;
        if (c != '{')
          return {false, i + 1};
        state = State::kLeftBrace;
        break;
      case State::kLeftBrace:
        if (IsJsonWhitespace(c))
          break;
        if (c != '"')
          return {false, i + 1};
        state = State::kKey;
        break;
      case State::kKey:
        if (c == '"')
          return {true, i + 1};
        if (c == '\\') {
          state = State::kEscape;
          break;
        }
        if (static_cast<unsigned char>(c) < 0x20)
          return {false, i + 1};
        break;
      case State::kEscape:
        state = State::kKey;
        break;
    }
  }
  return {false, body.size()};
}

SnifferVerdict SniffXml(std::string_view body) {
  size_t pos = SkipWhitespace(body, 0);
  if (body.substr(pos, 5) == "<?xml")
    return {true, pos + 5};
  if (pos + 1 < body.size() && body[pos] == '<') {
    char next = body[pos + 1];
    if (std::isalpha(static_cast<unsigned char>(next)) || next == '!' ||
        next == '?') {
      return {true, pos + 2};
    }
  }
  return {false, std::min(body.size(), pos + 2)};
}

SnifferVerdict SniffHtml(std::string_view body) {
  size_t pos = SkipWhitespace(body, 0);
  std::string_view rest = body.substr(pos);
  if (rest.substr(0, 4) == "<!--")
    return {true, pos + 4};
  if (StartsWithIgnoreCase(rest, "<!doctype"))
    return {true, pos + 9};
  if (rest.empty() || rest.front() != '<')
    return {false, std::min(body.size(), pos + 1)};
  size_t name_end = 1;
  while (name_end < rest.size() &&
         std::isalnum(static_cast<unsigned char>(rest[name_end]))) {
    ++name_end;
  }
  std::string_view name = rest.substr(1, name_end - 1);
  // The tag name must be terminated, otherwise "<abbr" would match "a".
  bool terminated =
      name_end < rest.size() &&
      (rest[name_end] == '>' || rest[name_end] == '/' ||
       std::isspace(static_cast<unsigned char>(rest[name_end])));
  if (terminated) {
    for (std::string_view tag : kHtmlTags) {
      if (EqualsIgnoreCase(name, tag))
        return {true, pos + name_end + 1};
    }
  }
  return {false, std::min(body.size(), pos + name_end + 1)};
}

}  // namespace corbfuzz
