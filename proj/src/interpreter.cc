#include "corbfuzz/interpreter.h"

#include <algorithm>
#include <fstream>
#include <memory>
#include <regex>
#include <sstream>

#include "corbfuzz/sql.h"
#include "corbfuzz/strings.h"

namespace corbfuzz::appscript {

TypeStats& TypeStats::operator+=(const TypeStats& other) {
  compare_total += other.compare_total;
  compare_correct += other.compare_correct;
  call_total += other.call_total;
  call_correct += other.call_correct;
  return *this;
}

std::uint32_t ProgramId(const std::string& path) {
  return static_cast<std::uint32_t>(Fnv1a64(path));
}

std::string JsonQuote(const std::string& raw) {
  std::string out = "\"";
  for (char c : raw) {
    auto byte = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (byte < 0x20) {
      static constexpr char kHex[] = "0123456789abcdef";
      out += "\\u00";
      out.push_back(kHex[byte >> 4]);
      out.push_back(kHex[byte & 0xf]);
    } else {
      out.push_back(c);
    }
  }
  return out + "\"";
}

namespace {

constexpr std::uint64_t kStepLimit = 200000;

struct RtValue {
  enum class Kind { kScalar, kResult, kRow, kItem };

  Kind kind = Kind::kScalar;
  Value value;
  Origin origin;
  size_t handle = 0;  // kResult, kRow
  size_t row = 0;     // kRow
  synth::ItemKey item;

  static RtValue Scalar(Value v, Origin o = {}) {
    RtValue r;
    r.value = std::move(v);
    r.origin = std::move(o);
    return r;
  }
};

struct QueryExec {
  std::string query;
  std::shared_ptr<const synth::ResultSet> result;
  size_t cursor = 0;
  std::set<size_t> fetched;
};

std::string JsonValue(const Value& v) {
  switch (v.type()) {
    case ValueType::kNull:
      return "null";
    case ValueType::kInt:
      return std::to_string(v.as_int());
    case ValueType::kBool:
      return v.as_bool() ? "true" : "false";
    case ValueType::kStr:
      return JsonQuote(v.as_str());
  }
  return "null";
}

class Interpreter {
 public:
  Interpreter(const Program& program, const HttpRequest& request,
              std::uint32_t seed, const SynthHandles& synth)
      : program_(program),
        request_(request),
        seed_(seed),
        synth_(synth),
        program_id_(ProgramId(program.source_path())),
        session_(synth.sessions, seed, synth.session_options) {}

  ExecutionResult Run() {
    ExecutionResult result;
    Enter(0);
    try {
      ExecList(program_.statements());
      if (!std::any_of(headers_.begin(), headers_.end(), [](const auto& h) {
            return EqualsIgnoreCase(h.first, "Content-Type");
          })) {
        headers_.emplace_back("Content-Type", "text/html");
      }
      result.response =
          HttpResponse(request_.scheme(), 200, headers_, body_);
      result.access_log = FinalAccessLog();
    } catch (const RuntimeAbort& e) {
      Abort(result, e.what());
    } catch (const synth::SynthesisAbort& e) {
      Abort(result, e.what());
    } catch (const synth::SessionAbort& e) {
      Abort(result, e.what());
    } catch (const sql::UnsupportedSql& e) {
      Abort(result, e.what());
    }
    result.edges = std::move(edges_);
    result.warnings = std::move(warnings_);
    result.type_stats = stats_;
    result.bits_used = session_.bits_used();
    result.decision_trace = session_.trace();
    for (const auto& [item, formula] : session_.rcache())
      result.session_constraints.push_back(
          {item, formula, session_.VariablesOf(item)});
    return result;
  }

 private:
  void Abort(ExecutionResult& result, const std::string& reason) {
    result.aborted = true;
    result.abort_reason = reason;
    result.response = HttpResponse(request_.scheme(), 500,
                                   {{"Content-Type", "text/html"}}, "");
  }

  void Enter(int block) {
    ++edges_[{program_id_, current_block_, block}];
    current_block_ = block;
  }

  void Step() {
    if (++steps_ > kStepLimit)
      throw RuntimeAbort("step limit exceeded");
  }

  void Warn(const std::string& message, int line) {
    std::string text = "Warning: " + message + " in " +
                       program_.source_path() + " on line " +
                       std::to_string(line) + "\n";
    warnings_.push_back(text);
    body_ += text;
  }

  void ExecList(const std::vector<Stmt>& list) {
    for (const Stmt& stmt : list)
      Exec(stmt);
  }

  void Exec(const Stmt& stmt) {
    Step();
    switch (stmt.kind) {
      case Stmt::Kind::kAssign:
        vars_[stmt.var] = Eval(stmt.exprs.front());
        return;
      case Stmt::Kind::kEcho:
        body_ += Scalar(Eval(stmt.exprs.front())).value.ToOutputString();
        return;
      case Stmt::Kind::kHeader: {
        std::string name =
            Scalar(Eval(stmt.exprs[0])).value.ToOutputString();
        std::string value =
            Scalar(Eval(stmt.exprs[1])).value.ToOutputString();
        headers_.emplace_back(std::move(name), std::move(value));
        return;
      }
      case Stmt::Kind::kSessionStart:
        session_started_ = true;
        return;
      case Stmt::Kind::kAbort:
        throw RuntimeAbort("abort() at line " + std::to_string(stmt.line));
      case Stmt::Kind::kIf: {
        bool taken = Truthy(Eval(stmt.exprs.front()));
        Enter(taken ? stmt.then_block : stmt.else_block);
        ExecList(taken ? stmt.then_body : stmt.else_body);
        if (stmt.cont_block >= 0)
          Enter(stmt.cont_block);
        return;
      }
      case Stmt::Kind::kFor:
        for (std::int64_t i = stmt.lo; i < stmt.hi; ++i) {
          vars_[stmt.var] = RtValue::Scalar(Value(i));
          Enter(stmt.then_block);
          ExecList(stmt.then_body);
        }
        if (stmt.cont_block >= 0)
          Enter(stmt.cont_block);
        return;
    }
  }

  // Converts any runtime value to a scalar; symbolic session items are
  // concretized (an operation the session workflow does not model).
  RtValue Scalar(const RtValue& v) {
    switch (v.kind) {
      case RtValue::Kind::kScalar:
        return v;
      case RtValue::Kind::kItem:
        return RtValue::Scalar(
            session_.Concretize(v.item),
            {v.item.kind == synth::ItemKind::kSession ? OriginKind::kSession
                                                      : OriginKind::kCookie,
             "", v.item.key});
      case RtValue::Kind::kResult:
      case RtValue::Kind::kRow:
        return RtValue::Scalar(Value("Array"));
    }
    return v;
  }

  bool Truthy(const RtValue& v) {
    if (v.kind == RtValue::Kind::kResult || v.kind == RtValue::Kind::kRow)
      return true;
    return Scalar(v).value.Truthy();
  }

  std::optional<synth::ItemKey> ItemFor(Source source, const Expr& key_expr,
                                        int line) {
    std::string key = Scalar(Eval(key_expr)).value.ToOutputString();
    if (source == Source::kSession && !session_started_) {
      Warn("session used before session_start()", line);
      return std::nullopt;
    }
    return synth::ItemKey{source == Source::kSession ? synth::ItemKind::kSession
                                                     : synth::ItemKind::kCookie,
                          key};
  }

  RtValue Eval(const Expr& e) {
    Step();
    switch (e.kind) {
      case Expr::Kind::kLiteral:
        return RtValue::Scalar(e.literal);
      case Expr::Kind::kVar: {
        auto it = vars_.find(e.name);
        if (it == vars_.end()) {
          Warn("Undefined variable $" + e.name, e.line);
          return RtValue::Scalar(Value());
        }
        return it->second;
      }
      case Expr::Kind::kConcat: {
        std::string text;
        Origin origin;
        for (const Expr& arg : e.args) {
          RtValue part = Scalar(Eval(arg));
          text += part.value.ToOutputString();
          if (origin.kind == OriginKind::kPlain)
            origin = part.origin;
        }
        return RtValue::Scalar(Value(text), origin);
      }
      case Expr::Kind::kCmp:
        return RtValue::Scalar(
            Value(Compare(Eval(e.args[0]), e.op, Eval(e.args[1]))));
      case Expr::Kind::kIsSet: {
        if (e.source == Source::kParam) {
          std::string key = Scalar(Eval(e.args[0])).value.ToOutputString();
          return RtValue::Scalar(Value(request_.Param(key).has_value()));
        }
        auto item = ItemFor(e.source, e.args[0], e.line);
        return RtValue::Scalar(Value(item && session_.IsSet(*item)));
      }
      case Expr::Kind::kSourceRef: {
        if (e.source == Source::kParam) {
          std::string key = Scalar(Eval(e.args[0])).value.ToOutputString();
          if (auto v = request_.Param(key))
            return RtValue::Scalar(Value(*v));
          Warn("Undefined index: " + key, e.line);
          return RtValue::Scalar(Value());
        }
        auto item = ItemFor(e.source, e.args[0], e.line);
        if (!item)
          return RtValue::Scalar(Value());
        if (!session_.enabled())
          return RtValue::Scalar(Value());
        RtValue r;
        r.kind = RtValue::Kind::kItem;
        r.item = *item;
        return r;
      }
      case Expr::Kind::kQuery:
        return Query(Scalar(Eval(e.args[0])).value.ToOutputString());
      case Expr::Kind::kFetch:
        return Fetch(Eval(e.args[0]), e.line);
      case Expr::Kind::kIndex:
        return Index(Eval(e.args[0]), Eval(e.args[1]), e.line);
      case Expr::Kind::kCall:
        return Call(e);
    }
    return RtValue::Scalar(Value());
  }

  RtValue Query(const std::string& query) {
    std::shared_ptr<const synth::ResultSet> cached =
        synth_.queries->Add(query, seed_);
    for (const std::string& table : synth_.queries->TablesOf(query))
      access_log_.push_back({table, ""});
    queries_.push_back({query, cached, 0, {}});
    RtValue r;
    r.kind = RtValue::Kind::kResult;
    r.handle = queries_.size() - 1;
    return r;
  }

  RtValue Fetch(const RtValue& handle, int line) {
    if (handle.kind != RtValue::Kind::kResult) {
      Warn("fetch() expects a query result", line);
      return RtValue::Scalar(Value());
    }
    QueryExec& q = queries_[handle.handle];
    q.result = synth_.queries->Rows(q.query, seed_);
    if (q.cursor >= q.result->size())
      return RtValue::Scalar(Value());
    RtValue r;
    r.kind = RtValue::Kind::kRow;
    r.handle = handle.handle;
    r.row = q.cursor++;
    q.fetched.insert(r.row);
    return r;
  }

  RtValue Index(const RtValue& base, const RtValue& key_value, int line) {
    std::string key = Scalar(key_value).value.ToOutputString();
    if (base.kind != RtValue::Kind::kRow) {
      Warn("Cannot index a non-row value with \"" + key + "\"", line);
      return RtValue::Scalar(Value());
    }
    QueryExec& q = queries_[base.handle];
    q.result = synth_.queries->Field(q.query, seed_, key);
    Origin origin{OriginKind::kQueryField, q.query, AsciiLower(key)};
    std::optional<Value> v = q.result->Get(base.row, key);
    if (!v)
      Warn("Undefined index: " + key, line);
    return RtValue::Scalar(v.value_or(Value()), origin);
  }

  // Hint for a query field compared with a plain value, plus correctness
  // bookkeeping.
  void Observe(const RtValue& field, const RtValue& other) {
    if (field.origin.kind != OriginKind::kQueryField ||
        other.origin.kind != OriginKind::kPlain || other.value.is_null()) {
      return;
    }
    ValueType hint = other.value.type();
    synth_.queries->Notify(field.origin.query, field.origin.name, hint);
    if (field.value.is_null())
      return;
    ++stats_.compare_total;
    if (field.value.type() == hint)
      ++stats_.compare_correct;
  }

  bool Compare(const RtValue& lhs, CmpOp op, const RtValue& rhs) {
    bool l_item = lhs.kind == RtValue::Kind::kItem;
    bool r_item = rhs.kind == RtValue::Kind::kItem;
    if (l_item && r_item)
      return session_.CompareItems(lhs.item, op, rhs.item);
    if (l_item)
      return session_.Compare(lhs.item, op, Scalar(rhs).value);
    if (r_item)
      return session_.Compare(rhs.item, MirrorOp(op), Scalar(lhs).value);
    RtValue a = Scalar(lhs);
    RtValue b = Scalar(rhs);
    Observe(a, b);
    Observe(b, a);
    return LooseCompare(a.value, op, b.value);
  }

  std::string SerializeRow(const QueryExec& q, size_t row) {
    std::string out = "{";
    for (size_t c = 0; c < q.result->columns.size(); ++c) {
      if (c)
        out += ",";
      out += JsonQuote(q.result->columns[c]) + ":" +
             JsonValue(q.result->rows[row][c]);
    }
    return out + "}";
  }

  RtValue Call(const Expr& e) {
    const InternalFunction* f = FindInternalFunction(e.name);
    if (!f)
      throw RuntimeAbort("unknown internal function " + e.name + "()");
    if (e.args.size() != 1)
      throw RuntimeAbort(e.name + "() takes exactly one argument");
    RtValue arg = Eval(e.args.front());

    if (e.name == "count") {
      if (arg.kind == RtValue::Kind::kResult) {
        QueryExec& q = queries_[arg.handle];
        q.result = synth_.queries->Rows(q.query, seed_);
        return RtValue::Scalar(Value(static_cast<std::int64_t>(q.result->size())));
      }
      if (arg.kind == RtValue::Kind::kRow) {
        return RtValue::Scalar(Value(
            static_cast<std::int64_t>(queries_[arg.handle].result->columns.size())));
      }
      Warn("count(): Argument #1 must be a result or row", e.line);
      return RtValue::Scalar(Value());
    }
    if (e.name == "serialize") {
      if (arg.kind == RtValue::Kind::kResult) {
        QueryExec& q = queries_[arg.handle];
        q.result = synth_.queries->Rows(q.query, seed_);
        std::string out = "[";
        for (size_t r = 0; r < q.result->size(); ++r) {
          if (r)
            out += ",";
          out += SerializeRow(q, r);
          q.fetched.insert(r);
        }
        return RtValue::Scalar(Value(out + "]"),
                               {OriginKind::kQueryField, q.query, ""});
      }
      if (arg.kind == RtValue::Kind::kRow) {
        const QueryExec& q = queries_[arg.handle];
        return RtValue::Scalar(Value(SerializeRow(q, arg.row)),
                               {OriginKind::kQueryField, q.query, ""});
      }
      RtValue v = Scalar(arg);
      return RtValue::Scalar(Value(JsonValue(v.value)), v.origin);
    }

    RtValue v = Scalar(arg);
    if (f->arg_type != ValueType::kNull &&
        v.origin.kind == OriginKind::kQueryField) {
      synth_.queries->Notify(v.origin.query, v.origin.name, f->arg_type);
      if (!v.value.is_null()) {
        ++stats_.call_total;
        if (v.value.type() == f->arg_type)
          ++stats_.call_correct;
      }
    }
    auto wrong_type = [&]() {
      Warn(e.name + "() expects parameter 1 to be " +
               std::string(TypeName(f->arg_type)) + ", " +
               std::string(TypeName(v.value.type())) + " given",
           e.line);
      return RtValue::Scalar(Value(), v.origin);
    };
    if (e.name == "strlen") {
      if (!v.value.is_str())
        return wrong_type();
      return RtValue::Scalar(
          Value(static_cast<std::int64_t>(v.value.as_str().size())), v.origin);
    }
    if (e.name == "lower") {
      if (!v.value.is_str())
        return wrong_type();
      return RtValue::Scalar(Value(AsciiLower(v.value.as_str())), v.origin);
    }
    if (e.name == "abs") {
      if (!v.value.is_int())
        return wrong_type();
      std::int64_t n = v.value.as_int();
      if (n == std::numeric_limits<std::int64_t>::min())
        return RtValue::Scalar(Value(n), v.origin);
      return RtValue::Scalar(Value(n < 0 ? -n : n), v.origin);
    }
    // intval
    std::int64_t n = 0;
    switch (v.value.type()) {
      case ValueType::kInt:
        n = v.value.as_int();
        break;
      case ValueType::kBool:
        n = v.value.as_bool() ? 1 : 0;
        break;
      case ValueType::kStr:
        n = ParseNumericString(v.value.as_str()).value_or(0);
        break;
      case ValueType::kNull:
        break;
    }
    return RtValue::Scalar(Value(n), v.origin);
  }

  std::vector<ResourceAccess> FinalAccessLog() {
    std::vector<ResourceAccess> log = access_log_;
    for (QueryExec& q : queries_) {
      if (q.fetched.empty())
        continue;
      auto latest = synth_.queries->Add(q.query, seed_);
      if (latest)
        q.result = latest;
      std::set<ResourceAccess> seen;
      for (size_t row : q.fetched) {
        for (const auto& [table, index] : q.result->witnesses[row]) {
          ResourceAccess access{table, q.result->RowDigest(table, index)};
          if (seen.insert(access).second)
            log.push_back(access);
        }
      }
    }
    return log;
  }

  const Program& program_;
  const HttpRequest& request_;
  std::uint32_t seed_;
  const SynthHandles& synth_;
  std::uint32_t program_id_;
  synth::SessionContext session_;

  std::map<std::string, RtValue> vars_;
  std::vector<QueryExec> queries_;
  std::vector<ResourceAccess> access_log_;
  std::map<EdgeHit, std::uint32_t> edges_;
  int current_block_ = kEntryBlock;
  std::uint64_t steps_ = 0;
  bool session_started_ = false;
  HeaderList headers_;
  std::string body_;
  std::vector<std::string> warnings_;
  TypeStats stats_;
};

}  // namespace

ExecutionResult Execute(const Program& program, const HttpRequest& request,
                        std::uint32_t seed, const SynthHandles& synth) {
  return Interpreter(program, request, seed, synth).Run();
}

App App::Load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw std::runtime_error("not an app directory: " + dir.string());
  App app;
  fs::path canonical = fs::weakly_canonical(dir);
  app.id_ = canonical.filename().string();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".app")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string route = "/" + file.filename().string();
    try {
      app.endpoints_.emplace(route, ParseProgram(buffer.str(), route));
    } catch (const SyntaxError& e) {
      throw std::runtime_error(file.string() + ": " + e.what());
    }
  }
  if (!app.endpoints_.count(kEntryPath))
    throw std::runtime_error("app has no index.app: " + dir.string());
  return app;
}

const Program* App::Find(const std::string& path) const {
  auto it = endpoints_.find(path);
  return it == endpoints_.end() ? nullptr : &it->second;
}

std::vector<std::string> App::Dictionary() const {
  std::set<std::string> words;
  for (const auto& [route, program] : endpoints_) {
    words.insert(program.literals().begin(), program.literals().end());
    words.insert(program.param_names().begin(), program.param_names().end());
  }
  return {words.begin(), words.end()};
}

ExecutionResult ExecuteApp(const App& app, const HttpRequest& request,
                           std::uint32_t seed, const SynthHandles& synth) {
  const Program* program = app.Find(request.path());
  if (!program) {
    ExecutionResult result;
    result.response = HttpResponse(request.scheme(), 404,
                                   {{"Content-Type", "text/html"}},
                                   "Not Found");
    return result;
  }
  return Execute(*program, request, seed, synth);
}

namespace {

std::string Resolve(const std::string& link, const std::string& request_path) {
  static const std::regex kAbsolute(R"(^https?://[^/]*(/.*)?$)",
                                    std::regex::icase);
  std::smatch m;
  if (std::regex_match(link, m, kAbsolute))
    return m[1].matched ? m[1].str() : "/";
  if (!link.empty() && link.front() == '/')
    return link;
  if (!link.empty() && link.front() == '?')
    return request_path + link;
  std::string dir = request_path.substr(0, request_path.rfind('/') + 1);
  return dir + link;
}

}  // namespace

std::vector<std::string> ExtractLinks(const HttpResponse& response,
                                      const std::string& request_path) {
  const std::string mime = MimeName(response.content_type());
  if (StartsWithIgnoreCase(mime, "image/") ||
      StartsWithIgnoreCase(mime, "audio/") ||
      StartsWithIgnoreCase(mime, "video/")) {
    return {};
  }
  static const std::regex kLink(
      R"re((?:href|src)\s*=\s*"([^"]*)"|fetch\(\s*"([^"]*)"\s*\))re",
      std::regex::icase);
  std::vector<std::string> out;
  const std::string& body = response.body();
  for (auto it = std::sregex_iterator(body.begin(), body.end(), kLink);
       it != std::sregex_iterator(); ++it) {
    std::string link = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
    if (link.empty() || link.front() == '#' ||
        StartsWithIgnoreCase(link, "javascript:")) {
      continue;
    }
    out.push_back(Resolve(link, request_path));
  }
  return out;
}

}  // namespace corbfuzz::appscript
