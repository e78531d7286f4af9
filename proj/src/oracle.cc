#include "corbfuzz/oracle.h"

#include <algorithm>

#include "corbfuzz/sniffers.h"

namespace corbfuzz::oracle {

std::string_view GranularityName(Granularity granularity) {
  return granularity == Granularity::kTable ? "table" : "row";
}

std::optional<Granularity> ParseGranularity(std::string_view name) {
  if (name == "table")
    return Granularity::kTable;
  if (name == "row")
    return Granularity::kRow;
  return std::nullopt;
}

std::string ResourceId::ToString() const {
  if (granularity == Granularity::kTable)
    return "table:" + table;
  return "row:" + table + ":" + digest;
}

std::optional<ResourceId> ResourceId::Parse(std::string_view text) {
  if (text.starts_with("table:"))
    return ResourceId{Granularity::kTable, std::string(text.substr(6)), ""};
  if (text.starts_with("row:")) {
    std::string_view rest = text.substr(4);
    size_t colon = rest.rfind(':');
    if (colon == std::string_view::npos)
      return std::nullopt;
    return ResourceId{Granularity::kRow, std::string(rest.substr(0, colon)),
                      std::string(rest.substr(colon + 1))};
  }
  return std::nullopt;
}

std::vector<ResourceId> ResourcesOf(const fuzzer::SinkEntry& entry,
                                    Granularity granularity) {
  std::vector<ResourceId> out;
  for (const appscript::ResourceAccess& access : entry.access_log) {
    bool row_level = !access.row_digest.empty();
    if (row_level != (granularity == Granularity::kRow))
      continue;
    out.push_back({granularity, access.table, access.row_digest});
  }
  return out;
}

double FrequencyTable::mean() const {
  return counts.empty() ? 0.0
                        : static_cast<double>(total) /
                              static_cast<double>(counts.size());
}

bool FrequencyTable::BelowMean(std::uint64_t count) const {
  return count * counts.size() < total;
}

FrequencyTable BuildFrequencyTable(const std::vector<fuzzer::SinkEntry>& sink,
                                   Granularity granularity) {
  FrequencyTable table;
  for (const fuzzer::SinkEntry& entry : sink) {
    for (const ResourceId& id : ResourcesOf(entry, granularity)) {
      ++table.counts[id];
      ++table.total;
    }
  }
  return table;
}

std::vector<bool> OracleVerdicts(const std::vector<fuzzer::SinkEntry>& sink,
                                 const FrequencyTable& table,
                                 Granularity granularity) {
  std::vector<bool> out;
  for (const fuzzer::SinkEntry& entry : sink) {
    bool block = false;
    for (const ResourceId& id : ResourcesOf(entry, granularity))
      block = block || table.BelowMean(table.counts.at(id));
    out.push_back(block);
  }
  return out;
}

std::string_view WeaknessClassName(WeaknessClass tag) {
  switch (tag) {
    case WeaknessClass::kJsonArray:
      return "JSON_ARRAY";
    case WeaknessClass::kMalformedJsonKey:
      return "MALFORMED_JSON_KEY";
    case WeaknessClass::kPrependedContent:
      return "PREPENDED_CONTENT";
    case WeaknessClass::kUnclassified:
      return "UNCLASSIFIED";
  }
  return "UNCLASSIFIED";
}

std::optional<WeaknessClass> ParseWeaknessClass(std::string_view name) {
  for (WeaknessClass tag :
       {WeaknessClass::kJsonArray, WeaknessClass::kMalformedJsonKey,
        WeaknessClass::kPrependedContent, WeaknessClass::kUnclassified}) {
    if (WeaknessClassName(tag) == name)
      return tag;
  }
  return std::nullopt;
}

namespace {

bool IsJsonSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

size_t SkipSpace(std::string_view body, size_t i) {
  while (i < body.size() && IsJsonSpace(body[i]))
    ++i;
  return i;
}

bool ControlCharInFirstKey(std::string_view body) {
  size_t i = SkipSpace(body, 0);
  if (i >= body.size() || body[i] != '{')
    return false;
  i = SkipSpace(body, i + 1);
  if (i >= body.size() || body[i] != '"')
    return false;
  for (++i; i < body.size(); ++i) {
    char c = body[i];
    if (c == '\\') {
      ++i;
    } else if (c == '"') {
      return false;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      return true;
    }
  }
  return false;
}

bool LooksProtected(std::string_view body) {
  size_t i = SkipSpace(body, 0);
  return (i < body.size() && body[i] == '[') || SniffJson(body).matches ||
         SniffXml(body).matches || SniffHtml(body).matches;
}

}  // namespace

WeaknessClass ClassifyWeakness(const HttpResponse& response) {
  std::string_view body = response.body();
  size_t start = SkipSpace(body, 0);
  if (start < body.size() && body[start] == '[')
    return WeaknessClass::kJsonArray;
  if (ControlCharInFirstKey(body))
    return WeaknessClass::kMalformedJsonKey;
  if (!LooksProtected(body)) {
    for (size_t i = body.find_first_of("{[<", start); i != std::string_view::npos;
         i = body.find_first_of("{[<", i + 1)) {
      std::string_view rest = body.substr(i);
      if (SniffJson(rest).matches || SniffXml(rest).matches ||
          SniffHtml(rest).matches || rest.front() == '[') {
        return WeaknessClass::kPrependedContent;
      }
    }
  }
  return WeaknessClass::kUnclassified;
}

std::vector<WeaknessReport> RunOracle(const std::string& app_id,
                                      const std::vector<fuzzer::SinkEntry>& sink,
                                      Granularity granularity) {
  std::vector<WeaknessReport> reports;
  if (sink.empty())
    return reports;
  FrequencyTable table = BuildFrequencyTable(sink, granularity);
  for (const fuzzer::SinkEntry& entry : sink) {
    if (!entry.request.cross_origin())
      continue;
    std::optional<ResourceId> offending;
    std::uint64_t lowest = 0;
    for (const ResourceId& id : ResourcesOf(entry, granularity)) {
      std::uint64_t count = table.counts.at(id);
      if (!table.BelowMean(count))
        continue;
      if (!offending || count < lowest || (count == lowest && id < *offending)) {
        offending = id;
        lowest = count;
      }
    }
    if (!offending)
      continue;
    WeaknessClass tag = ClassifyWeakness(entry.response);
    for (const PolicyDecision& decision : entry.decisions) {
      if (decision.blocked())
        continue;
      WeaknessReport report;
      report.app_id = app_id;
      report.url = entry.request.Url();
      report.seed = entry.seed;
      report.engine_id = decision.engine_id();
      report.resource = *offending;
      report.count = lowest;
      report.threshold = table.mean();
      report.response_digest = entry.response_digest;
      report.weakness_class = tag;
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

}  // namespace corbfuzz::oracle
