#ifndef CORBFUZZ_FUZZER_H_
#define CORBFUZZ_FUZZER_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corbfuzz/http.h"
#include "corbfuzz/interpreter.h"
#include "corbfuzz/policy.h"
#include "corbfuzz/query_synthesis.h"
#include "corbfuzz/rng.h"
#include "corbfuzz/session_synthesis.h"

namespace corbfuzz::fuzzer {

using Seed = std::uint32_t;

struct CorpusEntry {
  HttpRequest request;
  Seed seed = 0;

  bool operator==(const CorpusEntry&) const = default;
};

// Hit-count classes: 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128+ map to 1..8;
// zero maps to 0.
int HitClass(std::uint32_t count);

class CoverageBitmap {
 public:
  static constexpr size_t kBuckets = 65536;

  static size_t Bucket(const appscript::EdgeHit& edge);

  // True when some bucket would reach a higher hit class. Does not modify
  // the bitmap.
  bool IsNewCoverage(const std::map<appscript::EdgeHit, std::uint32_t>& edges)
      const;
  // Raises bucket classes; returns what IsNewCoverage would have returned.
  bool Merge(const std::map<appscript::EdgeHit, std::uint32_t>& edges);
  size_t covered_buckets() const;

 private:
  std::array<std::uint8_t, kBuckets> classes_{};
};

enum class Strategy {
  kReplaceParam,
  kAddParam,
  kDeleteParam,
  kFlipSeedBits,
  kFreshSeed,
  kIncrementSeed,
};
inline constexpr int kStrategyCount = 6;
std::string_view StrategyName(Strategy strategy);

// Applies one uniformly drawn strategy.
CorpusEntry Mutate(const CorpusEntry& entry, Rng& rng,
                   const std::vector<std::string>& dictionary,
                   Strategy* applied = nullptr);

// Digest of status, content type and the body with digit runs replaced by
// '#'.
std::string ResponseDigest(const HttpResponse& response);

struct SinkEntry {
  HttpRequest request;
  Seed seed = 0;
  HttpResponse response;
  std::string response_digest;
  std::vector<appscript::ResourceAccess> access_log;
  std::vector<PolicyDecision> decisions;  // campaign engine order
};

struct CampaignConfig {
  double budget_seconds = 180.0;
  // 0 means no cap. A cap that binds before the wall clock makes
  // single-worker runs reproducible.
  std::uint64_t max_iterations = 0;
  int workers = 1;
  std::uint64_t rng_seed = 1;
  std::vector<std::string> engines = {"chromium-corb", "webkit-corb", "orb"};
  policy::PolicyConfig policy;
  synth::QuerySynthOptions query_options;
  synth::SessionSynthOptions session_options;
  // Called for every executed request (under the campaign lock).
  std::function<void(const CorpusEntry&, const appscript::ExecutionResult&)>
      observer;
};

struct CampaignResult {
  std::string app_id;
  std::vector<SinkEntry> sink;
  std::uint64_t iterations = 0;
  std::uint64_t executions = 0;
  std::uint64_t aborts = 0;
  size_t corpus_size = 0;
  size_t frontier_size = 0;
  std::set<appscript::EdgeHit> edges;
  size_t covered_buckets = 0;
  appscript::TypeStats type_stats;
  int max_bits_used = 0;
  double elapsed_seconds = 0;
};

CampaignResult RunCampaign(const appscript::App& app,
                           const CampaignConfig& config);

}  // namespace corbfuzz::fuzzer

#endif  // CORBFUZZ_FUZZER_H_
