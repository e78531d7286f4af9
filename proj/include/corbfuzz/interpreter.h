#ifndef CORBFUZZ_INTERPRETER_H_
#define CORBFUZZ_INTERPRETER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "corbfuzz/appscript.h"
#include "corbfuzz/formula.h"
#include "corbfuzz/http.h"
#include "corbfuzz/query_synthesis.h"
#include "corbfuzz/session_synthesis.h"

namespace corbfuzz::appscript {

class RuntimeAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OriginKind { kPlain, kQueryField, kSession, kCookie };

struct Origin {
  OriginKind kind = OriginKind::kPlain;
  std::string query;  // kQueryField
  std::string name;   // field or item key

  bool operator==(const Origin&) const = default;
};

struct TrackedValue {
  Value value;
  Origin origin;
};

// A database resource touched by one request. |row_digest| is empty for the
// table-level record logged when the query is issued.
struct ResourceAccess {
  std::string table;
  std::string row_digest;

  auto operator<=>(const ResourceAccess&) const = default;
};

// Edge between basic blocks of one endpoint program.
struct EdgeHit {
  std::uint32_t program = 0;
  int from = 0;
  int to = 0;

  auto operator<=>(const EdgeHit&) const = default;
};

// Comparisons and internal calls on query fields whose synthesized value had
// the type the operation expects.
struct TypeStats {
  std::uint64_t compare_total = 0;
  std::uint64_t compare_correct = 0;
  std::uint64_t call_total = 0;
  std::uint64_t call_correct = 0;

  TypeStats& operator+=(const TypeStats& other);
};

struct SessionConstraint {
  synth::ItemKey item;
  Formula formula;
  std::vector<SolverVariable> variables;
};

struct ExecutionResult {
  HttpResponse response{Scheme::kHttp, 200, {}, ""};
  std::map<EdgeHit, std::uint32_t> edges;
  std::vector<ResourceAccess> access_log;
  std::vector<SessionConstraint> session_constraints;
  std::vector<synth::DecisionRecord> decision_trace;
  int bits_used = 0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<std::string> warnings;
  TypeStats type_stats;
};

struct SynthHandles {
  synth::QuerySynthesizer* queries = nullptr;
  synth::GlobalSessionCache* sessions = nullptr;
  synth::SessionSynthOptions session_options;
};

std::uint32_t ProgramId(const std::string& path);

// Runs one request. Aborts (explicit, unsatisfiable synthesis, unsupported
// SQL, unknown functions) produce status 500 with |aborted| set.
ExecutionResult Execute(const Program& program, const HttpRequest& request,
                        std::uint32_t seed, const SynthHandles& synth);

// A directory of endpoints: every "name.app" file is served at "/name.app".
class App {
 public:
  static constexpr const char* kEntryPath = "/index.app";

  // Throws std::runtime_error (with the file name) on I/O or syntax errors.
  static App Load(const std::filesystem::path& dir);

  const std::string& id() const { return id_; }
  const std::map<std::string, Program>& endpoints() const { return endpoints_; }
  const Program* Find(const std::string& path) const;
  // Literals and parameter names of every endpoint.
  std::vector<std::string> Dictionary() const;

 private:
  std::string id_;
  std::map<std::string, Program> endpoints_;
};

// Dispatches to the endpoint for the request path; unknown paths get 404.
ExecutionResult ExecuteApp(const App& app, const HttpRequest& request,
                           std::uint32_t seed, const SynthHandles& synth);

// href="..."/src="..." values and fetch("...") literals in order of
// appearance, resolved against |request_path|.
std::vector<std::string> ExtractLinks(const HttpResponse& response,
                                      const std::string& request_path);

// JSON-style encoding used by serialize().
std::string JsonQuote(const std::string& raw);

}  // namespace corbfuzz::appscript

#endif  // CORBFUZZ_INTERPRETER_H_
