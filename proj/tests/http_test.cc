#include <gtest/gtest.h>

#include "corbfuzz/http.h"
#include "corbfuzz/rng.h"

namespace corbfuzz {
namespace {

TEST(ContentTypeTest, NormalizesCaseAndParameters) {
  EXPECT_EQ(ParseContentType("application/JSON; charset=utf-8"),
            "application/json");
  EXPECT_EQ(ParseContentType("text/html"), "text/html");
  EXPECT_EQ(ParseContentType("garbage"), std::nullopt);
}

TEST(ContentTypeTest, RejectsEmptyHalves) {
  EXPECT_EQ(ParseContentType("/json"), std::nullopt);
  EXPECT_EQ(ParseContentType("text/"), std::nullopt);
  EXPECT_EQ(ParseContentType(""), std::nullopt);
  EXPECT_EQ(MimeName(std::nullopt), "NONE");
}

TEST(ContentTypeTest, ParseIsIdempotent) {
  Rng rng(7);
  const std::string alphabet = "aBcJsOn/;= \t+-.x";
  for (int i = 0; i < 5000; ++i) {
    std::string raw;
    size_t len = rng.Below(20);
    for (size_t j = 0; j < len; ++j)
      raw.push_back(alphabet[rng.Below(alphabet.size())]);
    MimeType once = ParseContentType(raw);
    if (once)
      EXPECT_EQ(ParseContentType(*once), once) << raw;
  }
}

TEST(HttpResponseTest, HeaderLookupIsCaseInsensitiveAndReturnsLast) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    HeaderList headers;
    std::string last;
    size_t copies = 1 + rng.Below(5);
    for (size_t c = 0; c < copies; ++c) {
      std::string name = "x-custom";
      for (char& ch : name)
        if (rng.Chance(1, 2))
          ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      last = "v" + std::to_string(c);
      headers.emplace_back(name, last);
      if (rng.Chance(1, 3))
        headers.emplace_back("Other", "o");
    }
    HttpResponse response(Scheme::kHttp, 200, headers, "");
    EXPECT_EQ(response.Header("X-CUSTOM"), last);
    EXPECT_EQ(response.Header("x-custom"), last);
  }
  HttpResponse empty(Scheme::kHttp, 200, {}, "");
  EXPECT_EQ(empty.Header("x-custom"), std::nullopt);
}

TEST(HttpResponseTest, ContentTypeComesFromHeader) {
  HttpResponse response(Scheme::kHttps, 200,
                        {{"content-type", "Text/HTML; charset=x"}}, "<p>");
  EXPECT_EQ(response.content_type(), "text/html");
  HttpResponse none(Scheme::kHttps, 200, {}, "");
  EXPECT_EQ(none.content_type(), std::nullopt);
}

TEST(HttpResponseTest, RejectsStatusOutsideRange) {
  EXPECT_THROW(HttpResponse(Scheme::kHttp, 99, {}, ""), std::invalid_argument);
  EXPECT_THROW(HttpResponse(Scheme::kHttp, 600, {}, ""), std::invalid_argument);
  EXPECT_NO_THROW(HttpResponse(Scheme::kHttp, 100, {}, ""));
  EXPECT_NO_THROW(HttpResponse(Scheme::kHttp, 599, {}, ""));
}

TEST(HttpRequestTest, ParsesUrlAndRoundTrips) {
  HttpRequest request = HttpRequest::FromUrl("/a.app?x=1&y=h%20i&x=2");
  EXPECT_EQ(request.path(), "/a.app");
  ASSERT_EQ(request.query_params().size(), 3u);
  EXPECT_EQ(request.Param("x"), "2");
  EXPECT_EQ(request.Param("y"), "h i");
  EXPECT_EQ(request.Param("z"), std::nullopt);
  EXPECT_TRUE(request.cross_origin());
  EXPECT_EQ(HttpRequest::FromUrl(request.Url()), request);
}

TEST(HttpRequestTest, AcceptsAbsoluteUrls) {
  HttpRequest request = HttpRequest::FromUrl("http://example.test/b.app?k=v");
  EXPECT_EQ(request.path(), "/b.app");
  EXPECT_EQ(request.Param("k"), "v");
}

TEST(HttpRequestTest, RejectsRelativePathAndEmptyName) {
  EXPECT_THROW(HttpRequest(Scheme::kHttp, "a.app"), std::invalid_argument);
  EXPECT_THROW(HttpRequest(Scheme::kHttp, "/a.app", {{"", "v"}}),
               std::invalid_argument);
}

TEST(HttpRequestTest, UrlEncodingRoundTripsArbitraryValues) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    std::string value;
    size_t len = rng.Below(12);
    for (size_t j = 0; j < len; ++j)
      value.push_back(static_cast<char>(rng.Below(256)));
    HttpRequest request(Scheme::kHttp, "/p.app", {{"k", value}});
    EXPECT_EQ(HttpRequest::FromUrl(request.Url()).Param("k"), value);
  }
}

TEST(CaptureTest, RoundTrips) {
  HttpResponse response(Scheme::kOther, 404,
                        {{"Content-Type", "application/json"}, {"X-A", "b"}},
                        "line1\n\nline3\x01");
  EXPECT_EQ(ParseCapture(SerializeCapture(response)), response);
}

TEST(CaptureTest, ParsesDocumentedFormat) {
  HttpResponse response = ParseCapture(
      "STATUS 200 https\nH Content-Type: application/json\n\n[1,2,3]");
  EXPECT_EQ(response.status(), 200);
  EXPECT_EQ(response.scheme(), Scheme::kHttps);
  EXPECT_EQ(response.content_type(), "application/json");
  EXPECT_EQ(response.body(), "[1,2,3]");
}

TEST(CaptureTest, RejectsMalformedInput) {
  EXPECT_THROW(ParseCapture("HELLO"), std::invalid_argument);
  EXPECT_THROW(ParseCapture("STATUS abc http\n\n"), std::invalid_argument);
  EXPECT_THROW(ParseCapture("STATUS 200 gopher\n\n"), std::invalid_argument);
}

TEST(PolicyDecisionTest, RejectsBlockWithAllowOnlyReason) {
  EXPECT_THROW(PolicyDecision("e", Verdict::kBlock, DecisionReason::kNonHttpScheme),
               std::invalid_argument);
  PolicyDecision d("orb", Verdict::kBlock, DecisionReason::kWhitelistFail);
  EXPECT_EQ(d.ToLine(), "orb BLOCK WHITELIST_FAIL");
}

}  // namespace
}  // namespace corbfuzz
