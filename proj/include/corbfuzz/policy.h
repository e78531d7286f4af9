#ifndef CORBFUZZ_POLICY_H_
#define CORBFUZZ_POLICY_H_

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corbfuzz/http.h"

namespace corbfuzz::policy {

inline constexpr std::string_view kChromiumCorb = "chromium-corb";
inline constexpr std::string_view kWebkitCorb = "webkit-corb";
inline constexpr std::string_view kOrb = "orb";

// The four sets are pairwise disjoint; their union is the set of protected
// MIME types.
struct ProtectedMimeSet {
  std::set<std::string> json_types;
  std::set<std::string> xml_types;
  std::set<std::string> html_types;
  std::set<std::string> plain_types;

  bool Contains(const MimeType& mime) const;
  // Throws std::invalid_argument if two sets overlap.
  void Validate() const;
};

struct MediaSignature {
  std::string kind;  // "image", "audio/video"
  std::string name;
  size_t offset = 0;
  std::string bytes;
};

struct OrbConfig {
  // Exact essences or "type/*" wildcards.
  std::vector<std::string> safelisted_mime;
  std::vector<MediaSignature> signatures;
  // Prefixes (after leading whitespace) that make a body plausible script or
  // stylesheet text. Only consulted for MIME types that are neither
  // safelisted nor protected.
  std::vector<std::string> javascript_prefixes;
  std::vector<std::string> css_prefixes;
};

struct PolicyConfig {
  ProtectedMimeSet protected_mime;
  OrbConfig orb;
  std::vector<std::string> engines;
};

// Built-in tables; identical to config/policy.json.
PolicyConfig DefaultPolicyConfig();
// Throws std::runtime_error on unreadable or malformed files.
PolicyConfig LoadPolicyConfig(const std::string& path);
PolicyConfig ParsePolicyConfig(std::string_view json_text);

PolicyDecision CorbCheckChromium(const HttpResponse& response,
                                 const ProtectedMimeSet& mimes);
PolicyDecision CorbCheckWebkit(const HttpResponse& response,
                               const ProtectedMimeSet& mimes);
PolicyDecision OrbCheck(const HttpResponse& response, const PolicyConfig& config);

bool MatchesMediaSignature(std::string_view body, const OrbConfig& orb);

struct PolicyEngine {
  std::string id;
  std::function<PolicyDecision(const HttpResponse&)> check;
};

// Throws std::invalid_argument for unknown engine ids.
std::vector<PolicyEngine> MakeEngines(const std::vector<std::string>& ids,
                                      const PolicyConfig& config);
std::vector<PolicyDecision> EvaluateAll(const std::vector<PolicyEngine>& engines,
                                        const HttpResponse& response);

}  // namespace corbfuzz::policy

#endif  // CORBFUZZ_POLICY_H_
