#include "corbfuzz/http.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

#include "corbfuzz/strings.h"

namespace corbfuzz {

std::string_view SchemeName(Scheme scheme) {
  switch (scheme) {
    case Scheme::kHttp:
      return "HTTP";
    case Scheme::kHttps:
      return "HTTPS";
    case Scheme::kOther:
      return "OTHER";
  }
  return "OTHER";
}

std::optional<Scheme> ParseScheme(std::string_view name) {
  std::string lower = AsciiLower(name);
  if (lower == "http")
    return Scheme::kHttp;
  if (lower == "https")
    return Scheme::kHttps;
  if (lower == "other")
    return Scheme::kOther;
  return std::nullopt;
}

std::string MimeName(const MimeType& mime) {
  return mime ? *mime : std::string(kNoneMime);
}

MimeType ParseContentType(std::string_view raw) {
  std::string_view essence = raw.substr(0, raw.find(';'));
  essence = TrimWhitespace(essence);
  size_t slash = essence.find('/');
  if (slash == std::string_view::npos || slash == 0 ||
      slash + 1 == essence.size()) {
    return std::nullopt;
  }
  std::string_view type = TrimWhitespace(essence.substr(0, slash));
  std::string_view subtype = TrimWhitespace(essence.substr(slash + 1));
  if (type.empty() || subtype.empty() ||
      subtype.find('/') != std::string_view::npos) {
    return std::nullopt;
  }
  return AsciiLower(type) + "/" + AsciiLower(subtype);
}

namespace {

bool IsUnreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~' ||
         c == '/';
}

int HexValue(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string PercentEncode(std::string_view raw) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    auto c = static_cast<unsigned char>(ch);
    if (IsUnreserved(c)) {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string PercentDecode(std::string_view encoded) {
  std::string out;
  out.reserve(encoded.size());
  for (size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size()) {
      int hi = HexValue(encoded[i + 1]);
      int lo = HexValue(encoded[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(encoded[i] == '+' ? ' ' : encoded[i]);
  }
  return out;
}

HttpRequest::HttpRequest(Scheme scheme,
                         std::string path,
                         QueryParams query_params,
                         bool cross_origin)
    : scheme_(scheme),
      path_(std::move(path)),
      query_params_(std::move(query_params)),
      cross_origin_(cross_origin) {
  if (path_.empty() || path_.front() != '/')
    throw std::invalid_argument("request path must start with '/': " + path_);
  for (const auto& [name, value] : query_params_) {
    if (name.empty())
      throw std::invalid_argument("empty query parameter name");
  }
}

HttpRequest HttpRequest::FromUrl(std::string_view url,
                                 Scheme scheme,
                                 bool cross_origin) {
  for (std::string_view prefix : {"http://", "https://"}) {
    if (url.substr(0, prefix.size()) == prefix) {
      url.remove_prefix(prefix.size());
      size_t slash = url.find('/');
      url = slash == std::string_view::npos ? std::string_view("/")
                                            : url.substr(slash);
      break;
    }
  }
  url = url.substr(0, url.find('#'));
  size_t question = url.find('?');
  std::string path = PercentDecode(url.substr(0, question));
  QueryParams params;
  if (question != std::string_view::npos) {
    std::string_view query = url.substr(question + 1);
    while (!query.empty()) {
      size_t amp = query.find('&');
      std::string_view pair = query.substr(0, amp);
      query = amp == std::string_view::npos ? std::string_view()
                                            : query.substr(amp + 1);
      if (pair.empty())
        continue;
      size_t eq = pair.find('=');
      std::string name = PercentDecode(pair.substr(0, eq));
      std::string value = eq == std::string_view::npos
                              ? std::string()
                              : PercentDecode(pair.substr(eq + 1));
      if (!name.empty())
        params.emplace_back(std::move(name), std::move(value));
    }
  }
  if (path.empty())
    path = "/";
  return HttpRequest(scheme, std::move(path), std::move(params), cross_origin);
}

std::optional<std::string> HttpRequest::Param(std::string_view name) const {
  std::optional<std::string> found;
  for (const auto& [key, value] : query_params_) {
    if (key == name)
      found = value;
  }
  return found;
}

std::string HttpRequest::Url() const {
  std::string url = PercentEncode(path_);
  char separator = '?';
  for (const auto& [name, value] : query_params_) {
    url.push_back(separator);
    url += PercentEncode(name);
    url.push_back('=');
    url += PercentEncode(value);
    separator = '&';
  }
  return url;
}

HttpRequest HttpRequest::WithParams(QueryParams params) const {
  return HttpRequest(scheme_, path_, std::move(params), cross_origin_);
}

HttpResponse::HttpResponse(Scheme scheme,
                           int status,
                           HeaderList headers,
                           std::string body)
    : scheme_(scheme),
      status_(status),
      headers_(std::move(headers)),
      body_(std::move(body)) {
  if (status_ < 100 || status_ > 599)
    throw std::invalid_argument("status out of range: " +
                                std::to_string(status_));
  if (auto raw = Header("Content-Type"))
    content_type_ = ParseContentType(*raw);
}

std::optional<std::string> HttpResponse::Header(std::string_view name) const {
  std::optional<std::string> found;
  for (const auto& [key, value] : headers_) {
    if (EqualsIgnoreCase(key, name))
      found = value;
  }
  return found;
}

std::string SerializeCapture(const HttpResponse& response) {
  std::string out = "STATUS " + std::to_string(response.status()) + " " +
                    std::string(SchemeName(response.scheme())) + "\n";
  for (const auto& [name, value] : response.headers())
    out += "H " + name + ": " + value + "\n";
  out += "\n";
  out += response.body();
  return out;
}

HttpResponse ParseCapture(std::string_view capture) {
  auto next_line = [&capture]() -> std::optional<std::string_view> {
    if (capture.empty())
      return std::nullopt;
    size_t newline = capture.find('\n');
    std::string_view line = capture.substr(0, newline);
    capture = newline == std::string_view::npos ? std::string_view()
                                                : capture.substr(newline + 1);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    return line;
  };

  auto status_line = next_line();
  if (!status_line || status_line->substr(0, 7) != "STATUS ")
    throw std::invalid_argument("capture must start with a STATUS line");
  std::string_view rest = status_line->substr(7);
  size_t space = rest.find(' ');
  if (space == std::string_view::npos)
    throw std::invalid_argument("STATUS line needs <code> <scheme>");
  int status = 0;
  std::string_view code = rest.substr(0, space);
  auto [ptr, ec] = std::from_chars(code.data(), code.data() + code.size(),
                                   status);
  if (ec != std::errc() || ptr != code.data() + code.size())
    throw std::invalid_argument("bad status code");
  auto scheme = ParseScheme(TrimWhitespace(rest.substr(space + 1)));
  if (!scheme)
    throw std::invalid_argument("bad scheme in STATUS line");

  HeaderList headers;
  while (true) {
    auto line = next_line();
    if (!line || line->empty())
      break;
    if (line->substr(0, 2) != "H ")
      throw std::invalid_argument("header lines must start with 'H '");
    std::string_view header = line->substr(2);
    size_t colon = header.find(':');
    if (colon == std::string_view::npos || colon == 0)
      throw std::invalid_argument("header line missing ':'");
    headers.emplace_back(std::string(TrimWhitespace(header.substr(0, colon))),
                         std::string(TrimWhitespace(header.substr(colon + 1))));
  }
  return HttpResponse(*scheme, status, std::move(headers),
                      std::string(capture));
}

std::string_view VerdictName(Verdict verdict) {
  return verdict == Verdict::kAllow ? "ALLOW" : "BLOCK";
}

std::string_view ReasonName(DecisionReason reason) {
  switch (reason) {
    case DecisionReason::kNonHttpScheme:
      return "NON_HTTP_SCHEME";
    case DecisionReason::kUnprotectedMime:
      return "UNPROTECTED_MIME";
    case DecisionReason::kSniffMismatch:
      return "SNIFF_MISMATCH";
    case DecisionReason::kProtectedBlocked:
      return "PROTECTED_BLOCKED";
    case DecisionReason::kWhitelistPass:
      return "WHITELIST_PASS";
    case DecisionReason::kWhitelistFail:
      return "WHITELIST_FAIL";
  }
  return "UNKNOWN";
}

std::optional<Verdict> ParseVerdict(std::string_view name) {
  if (name == "ALLOW")
    return Verdict::kAllow;
  if (name == "BLOCK")
    return Verdict::kBlock;
  return std::nullopt;
}

std::optional<DecisionReason> ParseReason(std::string_view name) {
  for (auto reason :
       {DecisionReason::kNonHttpScheme, DecisionReason::kUnprotectedMime,
        DecisionReason::kSniffMismatch, DecisionReason::kProtectedBlocked,
        DecisionReason::kWhitelistPass, DecisionReason::kWhitelistFail}) {
    if (ReasonName(reason) == name)
      return reason;
  }
  return std::nullopt;
}

PolicyDecision::PolicyDecision(std::string engine_id,
                               Verdict verdict,
                               DecisionReason reason)
    : engine_id_(std::move(engine_id)), verdict_(verdict), reason_(reason) {
  if (verdict_ == Verdict::kBlock && reason_ != DecisionReason::kProtectedBlocked &&
      reason_ != DecisionReason::kWhitelistFail) {
    throw std::invalid_argument("BLOCK verdict with non-blocking reason " +
                                std::string(ReasonName(reason_)));
  }
}

std::string PolicyDecision::ToLine() const {
  return engine_id_ + " " + std::string(VerdictName(verdict_)) + " " +
         std::string(ReasonName(reason_));
}

}  // namespace corbfuzz
