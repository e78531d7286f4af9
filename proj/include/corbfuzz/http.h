#ifndef CORBFUZZ_HTTP_H_
#define CORBFUZZ_HTTP_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corbfuzz {

enum class Scheme { kHttp, kHttps, kOther };

std::string_view SchemeName(Scheme scheme);
// Accepts "HTTP", "HTTPS", "OTHER" in any case.
std::optional<Scheme> ParseScheme(std::string_view name);

// A MIME essence ("type/subtype"). std::nullopt is the distinguished NONE
// value used when a response carries no parseable Content-Type.
using MimeType = std::optional<std::string>;

inline constexpr std::string_view kNoneMime = "NONE";
std::string MimeName(const MimeType& mime);

// Lowercased "type/subtype" with parameters and surrounding whitespace
// removed. Input without a '/' (or with an empty half) yields NONE.
MimeType ParseContentType(std::string_view raw);

using QueryParams = std::vector<std::pair<std::string, std::string>>;
using HeaderList = std::vector<std::pair<std::string, std::string>>;

std::string PercentEncode(std::string_view raw);
std::string PercentDecode(std::string_view encoded);

class HttpRequest {
 public:
  // Throws std::invalid_argument when the path does not start with '/' or a
  // parameter name is empty.
  HttpRequest(Scheme scheme,
              std::string path,
              QueryParams query_params = {},
              bool cross_origin = true);

  // Parses "/path?a=1&b=2" (percent-decoded). Absolute http(s) URLs are
  // accepted and reduced to their path and query.
  static HttpRequest FromUrl(std::string_view url,
                             Scheme scheme = Scheme::kHttp,
                             bool cross_origin = true);

  Scheme scheme() const { return scheme_; }
  const std::string& path() const { return path_; }
  const QueryParams& query_params() const { return query_params_; }
  bool cross_origin() const { return cross_origin_; }

  // Last value for |name|, if present.
  std::optional<std::string> Param(std::string_view name) const;

  // Path plus percent-encoded query string.
  std::string Url() const;

  HttpRequest WithParams(QueryParams params) const;

  bool operator==(const HttpRequest&) const = default;

 private:
  Scheme scheme_;
  std::string path_;
  QueryParams query_params_;
  bool cross_origin_;
};

class HttpResponse {
 public:
  // Throws std::invalid_argument for a status outside 100-599.
  HttpResponse(Scheme scheme, int status, HeaderList headers, std::string body);

  Scheme scheme() const { return scheme_; }
  int status() const { return status_; }
  const HeaderList& headers() const { return headers_; }
  const MimeType& content_type() const { return content_type_; }
  const std::string& body() const { return body_; }

  // Case-insensitive; returns the last occurrence.
  std::optional<std::string> Header(std::string_view name) const;

  bool operator==(const HttpResponse&) const = default;

 private:
  Scheme scheme_;
  int status_;
  HeaderList headers_;
  MimeType content_type_;
  std::string body_;
};

// Line-oriented capture format:
//   STATUS <code> <scheme>
//   H <name>: <value>
//   <blank line>
//   <raw body bytes>
std::string SerializeCapture(const HttpResponse& response);
// Throws std::invalid_argument on malformed input.
HttpResponse ParseCapture(std::string_view capture);

enum class Verdict { kAllow, kBlock };

enum class DecisionReason {
  kNonHttpScheme,
  kUnprotectedMime,
  kSniffMismatch,
  kProtectedBlocked,
  kWhitelistPass,
  kWhitelistFail,
};

std::string_view VerdictName(Verdict verdict);
std::string_view ReasonName(DecisionReason reason);
std::optional<Verdict> ParseVerdict(std::string_view name);
std::optional<DecisionReason> ParseReason(std::string_view name);

class PolicyDecision {
 public:
  // Throws std::invalid_argument when a BLOCK verdict carries an ALLOW-only
  // reason.
  PolicyDecision(std::string engine_id, Verdict verdict, DecisionReason reason);

  const std::string& engine_id() const { return engine_id_; }
  Verdict verdict() const { return verdict_; }
  DecisionReason reason() const { return reason_; }
  bool blocked() const { return verdict_ == Verdict::kBlock; }

  // "<engine_id> <ALLOW|BLOCK> <REASON>"
  std::string ToLine() const;

  bool operator==(const PolicyDecision&) const = default;

 private:
  std::string engine_id_;
  Verdict verdict_;
  DecisionReason reason_;
};

}  // namespace corbfuzz

#endif  // CORBFUZZ_HTTP_H_
