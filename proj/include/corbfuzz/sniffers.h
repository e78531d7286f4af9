#ifndef CORBFUZZ_SNIFFERS_H_
#define CORBFUZZ_SNIFFERS_H_

#include <cstddef>
#include <string_view>

namespace corbfuzz {

struct SnifferVerdict {
  bool matches = false;
  // Bytes examined before the verdict was reached. Never exceeds the body
  // length.
  size_t consumed_prefix_len = 0;

  bool operator==(const SnifferVerdict&) const = default;
};

// Confirmation sniffer for JSON MIME types. Only the opening brace and the
// first object key are inspected:
//
//   [start] --ws--> [start] --'{'--> [brace] --ws--> [brace]
//   [brace] --'"'--> [key] --'\\'--> [escape] --any--> [key]
//   [key] --'"'--> MATCH        [key] --0x00..0x1f--> NO MATCH
//
// Anything else, or running out of input, is NO MATCH.
SnifferVerdict SniffJson(std::string_view body);

// Matches "<?xml" or '<' followed by a letter, '!' or '?' after optional
// leading whitespace.
SnifferVerdict SniffXml(std::string_view body);

// Matches "<!--", "<!doctype" (case-insensitive) or '<' followed by a tag
// name from a fixed table, after optional leading whitespace.
SnifferVerdict SniffHtml(std::string_view body);

}  // namespace corbfuzz

#endif  // CORBFUZZ_SNIFFERS_H_
