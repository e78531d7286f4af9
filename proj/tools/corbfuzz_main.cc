#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corbfuzz/fuzzer.h"
#include "corbfuzz/interpreter.h"
#include "corbfuzz/oracle.h"
#include "corbfuzz/policy.h"
#include "corbfuzz/query_synthesis.h"
#include "corbfuzz/report.h"
#include "corbfuzz/sql.h"

namespace fs = std::filesystem;
using namespace corbfuzz;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitWeakness = 2;
constexpr const char* kDefaultConfigPath = "config/policy.json";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --config wins, then $CORBFUZZ_CONFIG, then config/policy.json when present,
// then the built-in tables.
policy::PolicyConfig ResolvePolicy(const std::string& flag) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("CORBFUZZ_CONFIG"); env && *env)
      path = env;
  }
  if (path.empty() && fs::exists(kDefaultConfigPath))
    path = kDefaultConfigPath;
  if (path.empty())
    return policy::DefaultPolicyConfig();
  return policy::LoadPolicyConfig(path);
}

// "30s", "2m", "1h" or plain seconds.
double ParseBudget(const std::string& text) {
  if (text.empty())
    throw UsageError("empty budget");
  double scale = 1;
  std::string number = text;
  switch (text.back()) {
    case 's':
      number.pop_back();
      break;
    case 'm':
      scale = 60;
      number.pop_back();
      break;
    case 'h':
      scale = 3600;
      number.pop_back();
      break;
    default:
      break;
  }
  size_t used = 0;
  double value = 0;
  try {
    value = std::stod(number, &used);
  } catch (const std::exception&) {
    throw UsageError("bad budget: " + text);
  }
  if (used != number.size() || value <= 0)
    throw UsageError("bad budget: " + text);
  return value * scale;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

// A directory holding index.app is one app; otherwise every subdirectory that
// holds one, in name order.
std::vector<fs::path> AppDirs(const fs::path& root) {
  if (!fs::is_directory(root))
    throw UsageError("not a directory: " + root.string());
  if (fs::exists(root / "index.app"))
    return {root};
  std::vector<fs::path> dirs;
  for (const fs::directory_entry& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "index.app"))
      dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty())
    throw UsageError("no apps under " + root.string());
  return dirs;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct RunOptions {
  std::string apps;
  std::string budget = "180s";
  std::uint64_t max_iterations = 5000;
  int workers = 1;
  std::string engines = "chromium-corb,webkit-corb,orb";
  std::uint64_t rng_seed = 1;
  std::string granularity = "table";
  std::string report_path;
  std::string config;
};

int Run(const RunOptions& opts) {
  if (opts.workers < 1)
    throw UsageError("--workers must be at least 1");
  std::optional<oracle::Granularity> granularity =
      oracle::ParseGranularity(opts.granularity);
  if (!granularity)
    throw UsageError("--granularity must be table or row");
  std::vector<std::string> engines = SplitList(opts.engines);
  if (engines.empty())
    throw UsageError("--engines is empty");

  fuzzer::CampaignConfig config;
  config.budget_seconds = ParseBudget(opts.budget);
  config.max_iterations = opts.max_iterations;
  config.workers = opts.workers;
  config.rng_seed = opts.rng_seed;
  config.engines = engines;
  config.policy = ResolvePolicy(opts.config);
  try {
    policy::MakeEngines(engines, config.policy);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  report::CampaignReport out;
  out.timestamp = report::CurrentTimestamp();
  out.config = {opts.apps,   config.budget_seconds, config.max_iterations,
                opts.workers, engines,               opts.rng_seed,
                opts.granularity};
  for (const fs::path& dir : AppDirs(opts.apps)) {
    appscript::App app = appscript::App::Load(dir);
    fuzzer::CampaignResult result = fuzzer::RunCampaign(app, config);
    out.apps.push_back(report::BuildAppReport(result, *granularity));
    const report::AppReport& summary = out.apps.back();
    std::cerr << summary.app_id << ": " << summary.executions
              << " executions, " << summary.edge_count << " edges, "
              << summary.sink_size << " unique responses, "
              << summary.weaknesses.size() << " weaknesses\n";
  }
  std::string text = report::EmitReport(out);
  if (opts.report_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(opts.report_path, std::ios::binary);
    if (!file)
      throw std::runtime_error("cannot write " + opts.report_path);
    file << text;
  }
  for (const report::AppReport& app : out.apps) {
    for (const oracle::WeaknessReport& w : app.weaknesses) {
      std::cerr << "weakness " << oracle::WeaknessClassName(w.weakness_class)
                << " " << w.engine_id << " " << app.app_id << " " << w.url
                << " seed=" << w.seed << "\n";
    }
  }
  return out.WeaknessCount() > 0 ? kExitWeakness : kExitOk;
}

int CheckResponse(const std::string& capture, const std::string& config_path) {
  HttpResponse response = ParseCapture(ReadFile(capture));
  policy::PolicyConfig config = ResolvePolicy(config_path);
  std::vector<policy::PolicyEngine> engines = policy::MakeEngines(
      {"chromium-corb", "webkit-corb", "orb"}, config);
  for (const PolicyDecision& d : policy::EvaluateAll(engines, response)) {
    std::cout << d.engine_id() << " " << VerdictName(d.verdict()) << " "
              << ReasonName(d.reason()) << "\n";
  }
  return kExitOk;
}

int SynthQuery(const std::string& query, std::uint64_t seed,
               const std::vector<std::string>& hints,
               const std::vector<std::string>& fields, bool no_inference,
               bool dump_tables) {
  synth::QuerySynthOptions options;
  options.type_inference = !no_inference;
  synth::QuerySynthesizer synthesizer(options);
  synthesizer.Add(query, seed);
  for (const std::string& hint : hints) {
    size_t eq = hint.find('=');
    std::optional<ValueType> type =
        eq == std::string::npos ? std::nullopt
                                : ParseTypeName(hint.substr(eq + 1));
    if (!type)
      throw UsageError("bad --hint (want field=type): " + hint);
    synthesizer.Notify(query, hint.substr(0, eq), *type);
  }
  std::shared_ptr<const synth::ResultSet> result =
      synthesizer.Rows(query, seed);
  for (const std::string& field : fields)
    result = synthesizer.Field(query, seed, field);

  for (size_t c = 0; c < result->columns.size(); ++c)
    std::cout << (c ? "\t" : "") << result->columns[c];
  std::cout << "\n";
  for (const std::vector<Value>& row : result->rows) {
    for (size_t c = 0; c < row.size(); ++c)
      std::cout << (c ? "\t" : "") << row[c].DebugString();
    std::cout << "\n";
  }
  if (dump_tables) {
    for (const auto& [name, table] : result->tables) {
      std::cout << "\n# " << name << "\n";
      for (size_t c = 0; c < table.columns.size(); ++c)
        std::cout << (c ? "\t" : "") << table.columns[c];
      std::cout << "\n";
      for (const std::vector<Value>& row : table.rows) {
        for (size_t c = 0; c < row.size(); ++c)
          std::cout << (c ? "\t" : "") << row[c].DebugString();
        std::cout << "\n";
      }
    }
  }
  return kExitOk;
}

int SynthSession(const std::string& app_dir, const std::string& url,
                 std::uint32_t seed, bool trace) {
  appscript::App app = appscript::App::Load(app_dir);
  synth::QuerySynthesizer queries;
  synth::GlobalSessionCache sessions;
  appscript::SynthHandles handles{&queries, &sessions, {}};
  appscript::ExecutionResult exec =
      appscript::ExecuteApp(app, HttpRequest::FromUrl(url), seed, handles);
  std::cout << "status " << exec.response.status() << "\n";
  if (exec.aborted)
    std::cout << "aborted " << exec.abort_reason << "\n";
  std::cout << "bits_used " << exec.bits_used << "\n";
  if (trace) {
    for (const synth::DecisionRecord& d : exec.decision_trace) {
      std::cout << "bit " << d.item << " " << (d.bit ? 1 : 0) << " "
                << (d.accepted ? "accepted" : "unsat") << "\n";
    }
  }
  for (const appscript::SessionConstraint& c : exec.session_constraints)
    std::cout << "rcache " << c.item.Name() << " " << c.formula.ToString()
              << "\n";
  return kExitOk;
}

int CorpusList(const std::string& root) {
  for (const fs::path& dir : AppDirs(root)) {
    appscript::App app = appscript::App::Load(dir);
    std::cout << app.id() << "\n";
    for (const auto& [path, program] : app.endpoints())
      std::cout << "  " << path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"CORB/ORB policy fuzzer for AppScript web apps"};
  cli.require_subcommand(1);

  RunOptions run;
  CLI::App* run_cmd = cli.add_subcommand("run", "Fuzz apps and report weaknesses");
  run_cmd->add_option("--apps", run.apps, "App directory or directory of apps")
      ->required();
  run_cmd->add_option("--budget", run.budget, "Wall-clock budget per app (30s, 2m)");
  run_cmd->add_option("--max-iterations", run.max_iterations,
                      "Iteration cap per app; 0 for none");
  run_cmd->add_option("--workers", run.workers, "Worker threads");
  run_cmd->add_option("--engines", run.engines, "Comma-separated engine ids");
  run_cmd->add_option("--seed-rng", run.rng_seed, "Master RNG seed");
  run_cmd->add_option("--granularity", run.granularity, "table or row");
  run_cmd->add_option("--report", run.report_path, "Report path (default stdout)");
  run_cmd->add_option("--config", run.config, "Policy config file");

  std::string capture, check_config;
  CLI::App* check_cmd = cli.add_subcommand(
      "check-response", "Evaluate every engine on a captured response");
  check_cmd->add_option("capture", capture, "Capture file")->required();
  check_cmd->add_option("--config", check_config, "Policy config file");

  std::string query;
  std::uint64_t query_seed = 0;
  std::vector<std::string> hints, fields;
  bool no_inference = false, dump_tables = false;
  CLI::App* query_cmd =
      cli.add_subcommand("synth-query", "Synthesize a result set for a query");
  query_cmd->add_option("sql", query, "Query text")->required();
  query_cmd->add_option("--seed", query_seed, "Seed")->required();
  query_cmd->add_option("--hint", hints, "Type hint field=type (repeatable)");
  query_cmd->add_option("--field", fields,
                        "Output field to read (repeatable, for SELECT *)");
  query_cmd->add_flag("--no-inference", no_inference, "Disable type inference");
  query_cmd->add_flag("--tables", dump_tables, "Also print witness tables");

  std::string session_app, session_url;
  std::uint32_t session_seed = 0;
  bool trace = false;
  CLI::App* session_cmd = cli.add_subcommand(
      "synth-session", "Run one request and show session synthesis state");
  session_cmd->add_option("--app", session_app, "App directory")->required();
  session_cmd->add_option("--url", session_url, "Request URL")->required();
  session_cmd->add_option("--seed", session_seed, "Seed")->required();
  session_cmd->add_flag("--trace", trace, "Print the decision bit trace");

  std::string corpus_root = "corpus";
  CLI::App* list_cmd =
      cli.add_subcommand("corpus-list", "List apps and their endpoints");
  list_cmd->add_option("--apps", corpus_root, "Corpus directory");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd)
      return Run(run);
    if (*check_cmd)
      return CheckResponse(capture, check_config);
    if (*query_cmd)
      return SynthQuery(query, query_seed, hints, fields, no_inference,
                        dump_tables);
    if (*session_cmd)
      return SynthSession(session_app, session_url, session_seed, trace);
    if (*list_cmd)
      return CorpusList(corpus_root);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << cli.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
