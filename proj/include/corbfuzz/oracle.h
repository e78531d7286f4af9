#ifndef CORBFUZZ_ORACLE_H_
#define CORBFUZZ_ORACLE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corbfuzz/fuzzer.h"
#include "corbfuzz/http.h"

namespace corbfuzz::oracle {

enum class Granularity { kTable, kRow };

std::string_view GranularityName(Granularity granularity);
std::optional<Granularity> ParseGranularity(std::string_view name);

struct ResourceId {
  Granularity granularity = Granularity::kTable;
  std::string table;
  std::string digest;  // empty for kTable

  // "table:<t>" or "row:<t>:<digest>"
  std::string ToString() const;
  static std::optional<ResourceId> Parse(std::string_view text);

  auto operator<=>(const ResourceId&) const = default;
};

// Resources an entry touched at |granularity|, in log order (with repeats).
std::vector<ResourceId> ResourcesOf(const fuzzer::SinkEntry& entry,
                                    Granularity granularity);

struct FrequencyTable {
  std::map<ResourceId, std::uint64_t> counts;
  std::uint64_t total = 0;

  double mean() const;
  // count < mean, compared exactly.
  bool BelowMean(std::uint64_t count) const;
};

FrequencyTable BuildFrequencyTable(const std::vector<fuzzer::SinkEntry>& sink,
                                   Granularity granularity);

// Oracle verdict per sink entry: true (BLOCK) when the entry touched a
// resource accessed less often than the mean.
std::vector<bool> OracleVerdicts(const std::vector<fuzzer::SinkEntry>& sink,
                                 const FrequencyTable& table,
                                 Granularity granularity);

enum class WeaknessClass {
  kJsonArray,
  kMalformedJsonKey,
  kPrependedContent,
  kUnclassified,
};

std::string_view WeaknessClassName(WeaknessClass tag);
std::optional<WeaknessClass> ParseWeaknessClass(std::string_view name);

WeaknessClass ClassifyWeakness(const HttpResponse& response);

struct WeaknessReport {
  std::string app_id;
  std::string url;
  std::uint32_t seed = 0;
  std::string engine_id;
  Verdict engine_verdict = Verdict::kAllow;
  Verdict oracle_verdict = Verdict::kBlock;
  ResourceId resource;
  std::uint64_t count = 0;
  double threshold = 0;
  std::string response_digest;
  WeaknessClass weakness_class = WeaknessClass::kUnclassified;

  bool operator==(const WeaknessReport&) const = default;
};

// One report per (oracle-BLOCK cross-origin entry, engine that allowed it).
// The offending resource is the least accessed one the entry touched.
std::vector<WeaknessReport> RunOracle(const std::string& app_id,
                                      const std::vector<fuzzer::SinkEntry>& sink,
                                      Granularity granularity);

}  // namespace corbfuzz::oracle

#endif  // CORBFUZZ_ORACLE_H_
