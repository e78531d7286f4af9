#ifndef CORBFUZZ_REPORT_H_
#define CORBFUZZ_REPORT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "corbfuzz/fuzzer.h"
#include "corbfuzz/oracle.h"

namespace corbfuzz::report {

struct FrequencyRow {
  std::string resource;
  std::uint64_t count = 0;

  bool operator==(const FrequencyRow&) const = default;
};

struct AppReport {
  std::string app_id;
  std::uint64_t iterations = 0;
  std::uint64_t executions = 0;
  std::uint64_t aborts = 0;
  std::uint64_t corpus_size = 0;
  std::uint64_t sink_size = 0;
  std::uint64_t edge_count = 0;
  int max_bits_used = 0;
  std::vector<FrequencyRow> frequency;
  double mean = 0;
  std::vector<oracle::WeaknessReport> weaknesses;

  bool operator==(const AppReport&) const = default;
};

struct ReportConfig {
  std::string apps;
  double budget_seconds = 0;
  std::uint64_t max_iterations = 0;
  int workers = 1;
  std::vector<std::string> engines;
  std::uint64_t rng_seed = 0;
  std::string granularity;

  bool operator==(const ReportConfig&) const = default;
};

struct CampaignReport {
  std::string timestamp;
  ReportConfig config;
  std::vector<AppReport> apps;

  size_t WeaknessCount() const;
  bool operator==(const CampaignReport&) const = default;
};

AppReport BuildAppReport(const fuzzer::CampaignResult& result,
                         oracle::Granularity granularity);

// Pretty-printed JSON; field names are documented in docs/report-schema.md.
std::string EmitReport(const CampaignReport& report);
// Throws std::runtime_error on malformed documents.
CampaignReport ParseReport(std::string_view json_text);

// UTC, ISO 8601.
std::string CurrentTimestamp();

}  // namespace corbfuzz::report

#endif  // CORBFUZZ_REPORT_H_
