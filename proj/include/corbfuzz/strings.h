#ifndef CORBFUZZ_STRINGS_H_
#define CORBFUZZ_STRINGS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace corbfuzz {

std::string AsciiLower(std::string_view in);
bool EqualsIgnoreCase(std::string_view a, std::string_view b);
bool StartsWithIgnoreCase(std::string_view text, std::string_view prefix);
std::string_view TrimWhitespace(std::string_view in);
std::vector<std::string> SplitString(std::string_view in, char separator);

// 64-bit FNV-1a. Stable across platforms; used for every persisted digest.
std::uint64_t Fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string HexDigest(std::uint64_t value);

// Escapes control and non-ASCII bytes as \xHH so the result is printable.
std::string EscapeBytes(std::string_view raw);

}  // namespace corbfuzz

#endif  // CORBFUZZ_STRINGS_H_
