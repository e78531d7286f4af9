#include "corbfuzz/policy.h"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "corbfuzz/sniffers.h"
#include "corbfuzz/strings.h"
#include "json.hpp"

namespace corbfuzz::policy {

namespace {

constexpr std::string_view kDefaultConfigJson = R"json({
  "engines": ["chromium-corb", "webkit-corb", "orb"],
  "protected_mime": {
    "json": ["application/json", "text/json", "application/x-json"],
    "xml": ["text/xml", "application/xml"],
    "html": ["text/html"],
    "plain": ["text/plain"]
  },
  "orb": {
    "safelisted_mime": [
      "image/*", "audio/*", "video/*", "text/css",
      "application/javascript", "text/javascript", "application/ecmascript"
    ],
    "signatures": [
      {"kind": "image", "name": "png", "offset": 0, "hex": "89504e470d0a1a0a"},
      {"kind": "image", "name": "jpeg", "offset": 0, "hex": "ffd8ff"},
      {"kind": "image", "name": "gif87a", "offset": 0, "hex": "474946383761"},
      {"kind": "image", "name": "gif89a", "offset": 0, "hex": "474946383961"},
      {"kind": "audio/video", "name": "webm", "offset": 0, "hex": "1a45dfa3"},
      {"kind": "audio/video", "name": "mp4", "offset": 4, "hex": "66747970"}
    ],
    "javascript_prefixes": [
      "var ", "let ", "const ", "function", "(function", "!function",
      "'use strict'", "\"use strict\"", "window.", "document.", "//", "/*"
    ],
    "css_prefixes": ["@import", "@charset", "@media", "@font-face", "/*"]
  }
})json";

std::string DecodeHex(std::string_view hex) {
  if (hex.size() % 2 != 0)
    throw std::runtime_error("odd-length hex signature");
  std::string out;
  for (size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<char>(
        std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  return out;
}

std::set<std::string> MimeSet(const nlohmann::json& list) {
  std::set<std::string> out;
  for (const auto& item : list) {
    auto mime = ParseContentType(item.get<std::string>());
    if (!mime)
      throw std::runtime_error("invalid MIME in config: " + item.dump());
    out.insert(*mime);
  }
  return out;
}

bool InSet(const std::set<std::string>& set, const MimeType& mime) {
  return mime && set.count(*mime) > 0;
}

bool SafelistMatch(const std::vector<std::string>& safelist,
                   const MimeType& mime) {
  if (!mime)
    return false;
  for (const std::string& entry : safelist) {
    if (entry.size() > 2 && entry.compare(entry.size() - 2, 2, "/*") == 0) {
      std::string_view prefix(entry.data(), entry.size() - 1);
      if (std::string_view(*mime).substr(0, prefix.size()) == prefix)
        return true;
    } else if (entry == *mime) {
      return true;
    }
  }
  return false;
}

bool HasTextPrefix(std::string_view body,
                   const std::vector<std::string>& prefixes) {
  std::string_view trimmed = body;
  while (!trimmed.empty() &&
         std::isspace(static_cast<unsigned char>(trimmed.front()))) {
    trimmed.remove_prefix(1);
  }
  for (const std::string& prefix : prefixes) {
    if (trimmed.substr(0, prefix.size()) == prefix)
      return true;
  }
  return false;
}

PolicyDecision Allow(std::string_view engine, DecisionReason reason) {
  return PolicyDecision(std::string(engine), Verdict::kAllow, reason);
}

PolicyDecision Block(std::string_view engine, DecisionReason reason) {
  return PolicyDecision(std::string(engine), Verdict::kBlock, reason);
}

bool IsHttpFamily(Scheme scheme) {
  return scheme == Scheme::kHttp || scheme == Scheme::kHttps;
}

}  // namespace

bool ProtectedMimeSet::Contains(const MimeType& mime) const {
  return InSet(json_types, mime) || InSet(xml_types, mime) ||
         InSet(html_types, mime) || InSet(plain_types, mime);
}

void ProtectedMimeSet::Validate() const {
  const std::set<std::string>* sets[] = {&json_types, &xml_types, &html_types,
                                         &plain_types};
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = i + 1; j < 4; ++j) {
      for (const std::string& mime : *sets[i]) {
        if (sets[j]->count(mime))
          throw std::invalid_argument("MIME type in two protected sets: " +
                                      mime);
      }
    }
  }
}

PolicyConfig ParsePolicyConfig(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("policy config: ") + e.what());
  }
  PolicyConfig config;
  try {
    const auto& mimes = doc.at("protected_mime");
    config.protected_mime.json_types = MimeSet(mimes.at("json"));
    config.protected_mime.xml_types = MimeSet(mimes.at("xml"));
    config.protected_mime.html_types = MimeSet(mimes.at("html"));
    config.protected_mime.plain_types = MimeSet(mimes.at("plain"));
    config.protected_mime.Validate();

    const auto& orb = doc.at("orb");
    config.orb.safelisted_mime =
        orb.at("safelisted_mime").get<std::vector<std::string>>();
    for (const auto& sig : orb.at("signatures")) {
      config.orb.signatures.push_back(
          {sig.at("kind").get<std::string>(), sig.at("name").get<std::string>(),
           sig.value("offset", size_t{0}),
           DecodeHex(sig.at("hex").get<std::string>())});
    }
    config.orb.javascript_prefixes =
        orb.value("javascript_prefixes", std::vector<std::string>{});
    config.orb.css_prefixes =
        orb.value("css_prefixes", std::vector<std::string>{});
    config.engines = doc.value(
        "engines", std::vector<std::string>{std::string(kChromiumCorb),
                                            std::string(kWebkitCorb),
                                            std::string(kOrb)});
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("policy config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("policy config: ") + e.what());
  }
  return config;
}

PolicyConfig DefaultPolicyConfig() {
  static const PolicyConfig config = ParsePolicyConfig(kDefaultConfigJson);
  return config;
}

PolicyConfig LoadPolicyConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open policy config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePolicyConfig(buffer.str());
}

PolicyDecision CorbCheckChromium(const HttpResponse& response,
                                 const ProtectedMimeSet& mimes) {
  if (!IsHttpFamily(response.scheme()))
    return Allow(kChromiumCorb, DecisionReason::kNonHttpScheme);
  const MimeType& mime = response.content_type();
  if (!mimes.Contains(mime))
    return Allow(kChromiumCorb, DecisionReason::kUnprotectedMime);
  std::string_view body = response.body();
  if (InSet(mimes.json_types, mime) && !SniffJson(body).matches)
    return Allow(kChromiumCorb, DecisionReason::kSniffMismatch);
  if (InSet(mimes.xml_types, mime) && !SniffXml(body).matches)
    return Allow(kChromiumCorb, DecisionReason::kSniffMismatch);
  if (InSet(mimes.html_types, mime) && !SniffHtml(body).matches)
    return Allow(kChromiumCorb, DecisionReason::kSniffMismatch);
  if (InSet(mimes.plain_types, mime) && !SniffJson(body).matches &&
      !SniffXml(body).matches && !SniffHtml(body).matches) {
    return Allow(kChromiumCorb, DecisionReason::kSniffMismatch);
  }
  return Block(kChromiumCorb, DecisionReason::kProtectedBlocked);
}

PolicyDecision CorbCheckWebkit(const HttpResponse& response,
                               const ProtectedMimeSet& mimes) {
  if (!IsHttpFamily(response.scheme()))
    return Allow(kWebkitCorb, DecisionReason::kNonHttpScheme);
  if (!mimes.Contains(response.content_type()))
    return Allow(kWebkitCorb, DecisionReason::kUnprotectedMime);
  return Block(kWebkitCorb, DecisionReason::kProtectedBlocked);
}

bool MatchesMediaSignature(std::string_view body, const OrbConfig& orb) {
  for (const MediaSignature& sig : orb.signatures) {
    if (body.size() >= sig.offset + sig.bytes.size() &&
        body.substr(sig.offset, sig.bytes.size()) == sig.bytes) {
      return true;
    }
  }
  return false;
}

PolicyDecision OrbCheck(const HttpResponse& response,
                        const PolicyConfig& config) {
  if (!IsHttpFamily(response.scheme()))
    return Allow(kOrb, DecisionReason::kNonHttpScheme);
  const MimeType& mime = response.content_type();
  const OrbConfig& orb = config.orb;
  if (SafelistMatch(orb.safelisted_mime, mime) ||
      MatchesMediaSignature(response.body(), orb)) {
    return Allow(kOrb, DecisionReason::kWhitelistPass);
  }
  if (mime && !config.protected_mime.Contains(mime) &&
      (HasTextPrefix(response.body(), orb.javascript_prefixes) ||
       HasTextPrefix(response.body(), orb.css_prefixes))) {
    return Allow(kOrb, DecisionReason::kWhitelistPass);
  }
  return Block(kOrb, DecisionReason::kWhitelistFail);
}

std::vector<PolicyEngine> MakeEngines(const std::vector<std::string>& ids,
                                      const PolicyConfig& config) {
  std::vector<PolicyEngine> engines;
  for (const std::string& id : ids) {
    if (id == kChromiumCorb) {
      engines.push_back({id, [mimes = config.protected_mime](
                                 const HttpResponse& r) {
                           return CorbCheckChromium(r, mimes);
                         }});
    } else if (id == kWebkitCorb) {
      engines.push_back({id, [mimes = config.protected_mime](
                                 const HttpResponse& r) {
                           return CorbCheckWebkit(r, mimes);
                         }});
    } else if (id == kOrb) {
      engines.push_back(
          {id, [config](const HttpResponse& r) { return OrbCheck(r, config); }});
    } else {
      throw std::invalid_argument("unknown policy engine: " + id);
    }
  }
  return engines;
}

std::vector<PolicyDecision> EvaluateAll(const std::vector<PolicyEngine>& engines,
                                        const HttpResponse& response) {
  std::vector<PolicyDecision> decisions;
  decisions.reserve(engines.size());
  for (const PolicyEngine& engine : engines)
    decisions.push_back(engine.check(response));
  return decisions;
}

}  // namespace corbfuzz::policy
