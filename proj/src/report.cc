#include "corbfuzz/report.h"

#include <chrono>
#include <ctime>
#include <stdexcept>

#include "json.hpp"

namespace corbfuzz::report {

using nlohmann::json;

size_t CampaignReport::WeaknessCount() const {
  size_t n = 0;
  for (const AppReport& app : apps)
    n += app.weaknesses.size();
  return n;
}

AppReport BuildAppReport(const fuzzer::CampaignResult& result,
                         oracle::Granularity granularity) {
  AppReport app;
  app.app_id = result.app_id;
  app.iterations = result.iterations;
  app.executions = result.executions;
  app.aborts = result.aborts;
  app.corpus_size = result.corpus_size;
  app.sink_size = result.sink.size();
  app.edge_count = result.edges.size();
  app.max_bits_used = result.max_bits_used;
  oracle::FrequencyTable table =
      oracle::BuildFrequencyTable(result.sink, granularity);
  for (const auto& [id, count] : table.counts)
    app.frequency.push_back({id.ToString(), count});
  app.mean = table.mean();
  app.weaknesses = oracle::RunOracle(result.app_id, result.sink, granularity);
  return app;
}

namespace {

json WeaknessJson(const oracle::WeaknessReport& w) {
  return json{
      {"app_id", w.app_id},
      {"url", w.url},
      {"seed", w.seed},
      {"engine_id", w.engine_id},
      {"engine_verdict", VerdictName(w.engine_verdict)},
      {"oracle_verdict", VerdictName(w.oracle_verdict)},
      {"resource", w.resource.ToString()},
      {"count", w.count},
      {"threshold", w.threshold},
      {"response_digest", w.response_digest},
      {"weakness_class", oracle::WeaknessClassName(w.weakness_class)},
  };
}

template <typename Parsed>
Parsed Require(std::optional<Parsed> value, const std::string& what) {
  if (!value)
    throw std::runtime_error("report: bad " + what);
  return *value;
}

oracle::WeaknessReport WeaknessFromJson(const json& j) {
  oracle::WeaknessReport w;
  w.app_id = j.at("app_id").get<std::string>();
  w.url = j.at("url").get<std::string>();
  w.seed = j.at("seed").get<std::uint32_t>();
  w.engine_id = j.at("engine_id").get<std::string>();
  w.engine_verdict = Require(
      ParseVerdict(j.at("engine_verdict").get<std::string>()), "verdict");
  w.oracle_verdict = Require(
      ParseVerdict(j.at("oracle_verdict").get<std::string>()), "verdict");
  w.resource = Require(
      oracle::ResourceId::Parse(j.at("resource").get<std::string>()),
      "resource");
  w.count = j.at("count").get<std::uint64_t>();
  w.threshold = j.at("threshold").get<double>();
  w.response_digest = j.at("response_digest").get<std::string>();
  w.weakness_class = Require(
      oracle::ParseWeaknessClass(j.at("weakness_class").get<std::string>()),
      "weakness class");
  return w;
}

}  // namespace

std::string EmitReport(const CampaignReport& report) {
  json apps = json::array();
  for (const AppReport& app : report.apps) {
    json frequency = json::array();
    for (const FrequencyRow& row : app.frequency)
      frequency.push_back({{"resource", row.resource}, {"count", row.count}});
    json weaknesses = json::array();
    for (const oracle::WeaknessReport& w : app.weaknesses)
      weaknesses.push_back(WeaknessJson(w));
    apps.push_back({
        {"app_id", app.app_id},
        {"iterations", app.iterations},
        {"executions", app.executions},
        {"aborts", app.aborts},
        {"corpus_size", app.corpus_size},
        {"sink_size", app.sink_size},
        {"edge_count", app.edge_count},
        {"max_bits_used", app.max_bits_used},
        {"frequency_table", frequency},
        {"mean", app.mean},
        {"weaknesses", weaknesses},
    });
  }
  const ReportConfig& c = report.config;
  json doc = {
      {"timestamp", report.timestamp},
      {"config",
       {{"apps", c.apps},
        {"budget_seconds", c.budget_seconds},
        {"max_iterations", c.max_iterations},
        {"workers", c.workers},
        {"engines", c.engines},
        {"rng_seed", c.rng_seed},
        {"granularity", c.granularity}}},
      {"apps", apps},
      {"weakness_count", report.WeaknessCount()},
  };
  return doc.dump(2) + "\n";
}

CampaignReport ParseReport(std::string_view json_text) {
  try {
    json doc = json::parse(json_text);
    CampaignReport report;
    report.timestamp = doc.at("timestamp").get<std::string>();
    const json& c = doc.at("config");
    report.config.apps = c.at("apps").get<std::string>();
    report.config.budget_seconds = c.at("budget_seconds").get<double>();
    report.config.max_iterations = c.at("max_iterations").get<std::uint64_t>();
    report.config.workers = c.at("workers").get<int>();
    report.config.engines = c.at("engines").get<std::vector<std::string>>();
    report.config.rng_seed = c.at("rng_seed").get<std::uint64_t>();
    report.config.granularity = c.at("granularity").get<std::string>();
    for (const json& a : doc.at("apps")) {
      AppReport app;
      app.app_id = a.at("app_id").get<std::string>();
      app.iterations = a.at("iterations").get<std::uint64_t>();
      app.executions = a.at("executions").get<std::uint64_t>();
      app.aborts = a.at("aborts").get<std::uint64_t>();
      app.corpus_size = a.at("corpus_size").get<std::uint64_t>();
      app.sink_size = a.at("sink_size").get<std::uint64_t>();
      app.edge_count = a.at("edge_count").get<std::uint64_t>();
      app.max_bits_used = a.at("max_bits_used").get<int>();
      for (const json& row : a.at("frequency_table")) {
        app.frequency.push_back({row.at("resource").get<std::string>(),
                                 row.at("count").get<std::uint64_t>()});
      }
      app.mean = a.at("mean").get<double>();
      for (const json& w : a.at("weaknesses"))
        app.weaknesses.push_back(WeaknessFromJson(w));
      report.apps.push_back(std::move(app));
    }
    return report;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("report: ") + e.what());
  }
}

std::string CurrentTimestamp() {
  std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

}  // namespace corbfuzz::report
