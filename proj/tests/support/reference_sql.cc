#include "reference_sql.h"

#include <algorithm>
#include <cctype>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>

namespace corbfuzz::testing {

namespace {

struct Tok {
  enum Kind { kWord, kInt, kStr, kSym, kEnd } kind = kEnd;
  std::string text;
  std::int64_t number = 0;
};

std::vector<Tok> Tokenize(std::string_view q) {
  std::vector<Tok> out;
  size_t i = 0;
  while (i < q.size()) {
    unsigned char c = static_cast<unsigned char>(q[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (std::isalpha(c) || c == '_') {
      size_t j = i;
      while (j < q.size() &&
             (std::isalnum(static_cast<unsigned char>(q[j])) || q[j] == '_'))
        ++j;
      std::string word(q.substr(i, j - i));
      for (char& ch : word)
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      out.push_back({Tok::kWord, word});
      i = j;
    } else if (std::isdigit(c) ||
               (c == '-' && i + 1 < q.size() &&
                std::isdigit(static_cast<unsigned char>(q[i + 1])))) {
      size_t j = i + 1;
      while (j < q.size() && std::isdigit(static_cast<unsigned char>(q[j])))
        ++j;
      Tok t{Tok::kInt, std::string(q.substr(i, j - i))};
      t.number = std::stoll(t.text);
      out.push_back(t);
      i = j;
    } else if (c == '\'') {
      std::string s;
      size_t j = i + 1;
      while (true) {
        if (j >= q.size())
          throw std::runtime_error("reference: unterminated string");
        if (q[j] == '\'') {
          if (j + 1 < q.size() && q[j + 1] == '\'') {
            s.push_back('\'');
            j += 2;
            continue;
          }
          ++j;
          break;
        }
        s.push_back(q[j++]);
      }
      out.push_back({Tok::kStr, s});
      i = j;
    } else {
      std::string sym(1, static_cast<char>(c));
      if (i + 1 < q.size()) {
        std::string two(q.substr(i, 2));
        if (two == "<=" || two == ">=" || two == "!=" || two == "<>")
          sym = two;
      }
      out.push_back({Tok::kSym, sym});
      i += sym.size();
    }
  }
  out.push_back({Tok::kEnd, ""});
  return out;
}

struct Operand {
  bool column = false;
  std::string qualifier;
  std::string name;
  Value literal;
};

struct Cond {
  enum Kind { kCmp, kAnd, kOr, kNot } kind = kCmp;
  Operand lhs;
  std::string op;
  Operand rhs;
  std::vector<Cond> kids;
};

struct Query;

struct Item {
  std::string qualifier;
  std::string name;
  std::string alias;
};

struct Core {
  std::shared_ptr<Query> sub;
  bool wildcard = false;
  bool count = false;
  std::vector<Item> items;
  std::string table;
  std::string alias;
  std::optional<Cond> where;
};

struct Query {
  std::vector<std::vector<Core>> terms;  // UNION of INTERSECT chains
  std::optional<std::int64_t> limit;
};

class RefParser {
 public:
  explicit RefParser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  Query Top() {
    Query q = ParseQuery();
    if (IsSym(";"))
      ++pos_;
    if (toks_[pos_].kind != Tok::kEnd)
      throw std::runtime_error("reference: trailing tokens");
    return q;
  }

 private:
  bool IsWord(const char* w) const {
    return toks_[pos_].kind == Tok::kWord && toks_[pos_].text == w;
  }
  bool IsSym(const char* s) const {
    return toks_[pos_].kind == Tok::kSym && toks_[pos_].text == s;
  }
  void Expect(bool ok, const char* what) {
    if (!ok)
      throw std::runtime_error(std::string("reference: expected ") + what);
    ++pos_;
  }
  std::string Word() {
    if (toks_[pos_].kind != Tok::kWord)
      throw std::runtime_error("reference: expected identifier");
    return toks_[pos_++].text;
  }

  Query ParseQuery() {
    Query q;
    q.terms.push_back(ParseTerm());
    while (IsWord("union")) {
      ++pos_;
      q.terms.push_back(ParseTerm());
    }
    if (IsWord("limit")) {
      ++pos_;
      if (toks_[pos_].kind != Tok::kInt)
        throw std::runtime_error("reference: LIMIT needs an integer");
      q.limit = toks_[pos_++].number;
    }
    return q;
  }

  std::vector<Core> ParseTerm() {
    std::vector<Core> chain{ParseCore()};
    while (IsWord("intersect")) {
      ++pos_;
      chain.push_back(ParseCore());
    }
    return chain;
  }

  Core ParseCore() {
    Core core;
    if (IsSym("(")) {
      ++pos_;
      core.sub = std::make_shared<Query>(ParseQuery());
      Expect(IsSym(")"), ")");
      return core;
    }
    Expect(IsWord("select"), "SELECT");
    if (IsSym("*")) {
      ++pos_;
      core.wildcard = true;
    } else if (IsWord("count") && toks_[pos_ + 1].text == "(") {
      pos_ += 2;
      core.count = true;
      Item item = Column();
      Expect(IsSym(")"), ")");
      item.alias = MaybeAlias();
      core.items.push_back(item);
    } else {
      do {
        if (IsSym(","))
          ++pos_;
        Item item = Column();
        item.alias = MaybeAlias();
        core.items.push_back(item);
      } while (IsSym(","));
    }
    Expect(IsWord("from"), "FROM");
    core.table = Word();
    if (IsWord("as")) {
      ++pos_;
      core.alias = Word();
    } else if (toks_[pos_].kind == Tok::kWord && !Keyword(toks_[pos_].text)) {
      core.alias = Word();
    }
    if (IsWord("where")) {
      ++pos_;
      core.where = ParseOr();
    }
    return core;
  }

  static bool Keyword(const std::string& w) {
    static const std::set<std::string> kw = {"where", "limit", "union",
                                             "intersect"};
    return kw.count(w) > 0;
  }

  std::string MaybeAlias() {
    if (!IsWord("as"))
      return "";
    ++pos_;
    return Word();
  }

  Item Column() {
    Item item;
    item.name = Word();
    if (IsSym(".")) {
      ++pos_;
      item.qualifier = item.name;
      item.name = Word();
    }
    return item;
  }

  Cond ParseOr() {
    Cond first = ParseAnd();
    if (!IsWord("or"))
      return first;
    Cond c;
    c.kind = Cond::kOr;
    c.kids.push_back(std::move(first));
    while (IsWord("or")) {
      ++pos_;
      c.kids.push_back(ParseAnd());
    }
    return c;
  }

  Cond ParseAnd() {
    Cond first = ParseNot();
    if (!IsWord("and"))
      return first;
    Cond c;
    c.kind = Cond::kAnd;
    c.kids.push_back(std::move(first));
    while (IsWord("and")) {
      ++pos_;
      c.kids.push_back(ParseNot());
    }
    return c;
  }

  Cond ParseNot() {
    if (IsWord("not")) {
      ++pos_;
      Cond c;
      c.kind = Cond::kNot;
      c.kids.push_back(ParseNot());
      return c;
    }
    if (IsSym("(")) {
      ++pos_;
      Cond inner = ParseOr();
      Expect(IsSym(")"), ")");
      return inner;
    }
    Cond c;
    c.lhs = ParseOperand();
    if (toks_[pos_].kind != Tok::kSym)
      throw std::runtime_error("reference: expected comparison");
    c.op = toks_[pos_++].text;
    c.rhs = ParseOperand();
    return c;
  }

  Operand ParseOperand() {
    Operand o;
    const Tok& t = toks_[pos_];
    if (t.kind == Tok::kInt) {
      o.literal = Value(t.number);
      ++pos_;
    } else if (t.kind == Tok::kStr) {
      o.literal = Value(t.text);
      ++pos_;
    } else if (IsWord("true") || IsWord("false")) {
      o.literal = Value(t.text == "true");
      ++pos_;
    } else {
      Item item = Column();
      o.column = true;
      o.qualifier = item.qualifier;
      o.name = item.name;
    }
    return o;
  }

  std::vector<Tok> toks_;
  size_t pos_ = 0;
};

// Typed comparison: mismatched types and nulls never satisfy anything.
bool Compare(const Value& a, const std::string& op, const Value& b) {
  if (a.is_null() || b.is_null() || a.type() != b.type())
    return false;
  int c = 0;
  if (a.is_int())
    c = a.as_int() < b.as_int() ? -1 : a.as_int() > b.as_int() ? 1 : 0;
  else if (a.is_str())
    c = a.as_str().compare(b.as_str()) < 0 ? -1
        : a.as_str() == b.as_str()         ? 0
                                           : 1;
  else
    c = static_cast<int>(a.as_bool()) - static_cast<int>(b.as_bool());
  if (op == "=")
    return c == 0;
  if (op == "!=" || op == "<>")
    return c != 0;
  if (op == "<")
    return c < 0;
  if (op == "<=")
    return c <= 0;
  if (op == ">")
    return c > 0;
  if (op == ">=")
    return c >= 0;
  throw std::runtime_error("reference: unknown operator " + op);
}

class Evaluator {
 public:
  explicit Evaluator(const Database& db) : db_(db) {}

  Relation Run(const Query& q) {
    bool set_semantics = q.terms.size() > 1;
    std::vector<Relation> terms;
    for (const std::vector<Core>& chain : q.terms) {
      Relation r = RunCore(chain.front());
      for (size_t i = 1; i < chain.size(); ++i) {
        set_semantics = true;
        Relation other = RunCore(chain[i]);
        std::set<std::vector<Value>> keep(other.rows.begin(), other.rows.end());
        std::vector<std::vector<Value>> rows;
        for (auto& row : r.rows)
          if (keep.count(row))
            rows.push_back(row);
        r.rows = std::move(rows);
      }
      terms.push_back(std::move(r));
    }
    Relation out = terms.front();
    for (size_t i = 1; i < terms.size(); ++i)
      out.rows.insert(out.rows.end(), terms[i].rows.begin(), terms[i].rows.end());
    if (set_semantics) {
      std::set<std::vector<Value>> seen;
      std::vector<std::vector<Value>> rows;
      for (auto& row : out.rows)
        if (seen.insert(row).second)
          rows.push_back(row);
      out.rows = std::move(rows);
    }
    if (q.limit && out.rows.size() > static_cast<size_t>(*q.limit))
      out.rows.resize(static_cast<size_t>(std::max<std::int64_t>(0, *q.limit)));
    return out;
  }

 private:
  Relation RunCore(const Core& core) {
    if (core.sub)
      return Run(*core.sub);
    static const synth::WitnessTable kEmpty;
    auto it = db_.find(core.table);
    const synth::WitnessTable& table = it == db_.end() ? kEmpty : it->second;
    auto column_index = [&](const std::string& qualifier,
                            const std::string& name) -> std::optional<size_t> {
      if (!qualifier.empty() && qualifier != core.table &&
          qualifier != core.alias)
        throw std::runtime_error("reference: unknown qualifier " + qualifier);
      for (size_t i = 0; i < table.columns.size(); ++i)
        if (table.columns[i] == name)
          return i;
      return std::nullopt;
    };
    auto operand = [&](const Operand& o, const std::vector<Value>& row) {
      if (!o.column)
        return o.literal;
      auto idx = column_index(o.qualifier, o.name);
      return idx ? row[*idx] : Value();
    };
    std::function<bool(const Cond&, const std::vector<Value>&)> holds =
        [&](const Cond& c, const std::vector<Value>& row) -> bool {
      switch (c.kind) {
        case Cond::kCmp:
          return Compare(operand(c.lhs, row), c.op, operand(c.rhs, row));
        case Cond::kAnd:
          return std::all_of(c.kids.begin(), c.kids.end(),
                             [&](const Cond& k) { return holds(k, row); });
        case Cond::kOr:
          return std::any_of(c.kids.begin(), c.kids.end(),
                             [&](const Cond& k) { return holds(k, row); });
        case Cond::kNot:
          return !holds(c.kids.front(), row);
      }
      return false;
    };

    std::vector<const std::vector<Value>*> matching;
    for (const auto& row : table.rows)
      if (!core.where || holds(*core.where, row))
        matching.push_back(&row);

    Relation out;
    if (core.count) {
      const Item& item = core.items.front();
      out.columns = {item.alias.empty() ? "count(" + item.name + ")"
                                        : item.alias};
      out.rows = {{Value(static_cast<std::int64_t>(matching.size()))}};
      return out;
    }
    if (core.wildcard) {
      out.columns = table.columns;
      for (const auto* row : matching)
        out.rows.push_back(*row);
      return out;
    }
    for (const Item& item : core.items)
      out.columns.push_back(item.alias.empty() ? item.name : item.alias);
    for (const auto* row : matching) {
      std::vector<Value> projected;
      for (const Item& item : core.items) {
        auto idx = column_index(item.qualifier, item.name);
        projected.push_back(idx ? (*row)[*idx] : Value());
      }
      out.rows.push_back(std::move(projected));
    }
    return out;
  }

  const Database& db_;
};

std::string RenderRows(const std::vector<std::vector<Value>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += "  (";
    for (size_t i = 0; i < row.size(); ++i)
      out += (i ? ", " : "") + row[i].DebugString();
    out += ")\n";
  }
  return out;
}

// Generator state for one query: tables are never reused.
class QueryGen {
 public:
  explicit QueryGen(Rng& rng) : rng_(rng) {}

  std::string Query() {
    std::uint64_t shape = rng_.Below(10);
    if (shape < 5) {
      std::string q = Core(Projection(false, 0));
      if (rng_.Chance(1, 3))
        q += " LIMIT " + std::to_string(rng_.Below(6));
      return q;
    }
    if (shape == 5)
      return Core(Projection(true, 0)) +
             (rng_.Chance(1, 5) ? " LIMIT " + std::to_string(rng_.Below(2))
                                : "");
    size_t width = 1 + rng_.Below(2);
    size_t cores = 2 + rng_.Below(2);
    std::string q;
    for (size_t i = 0; i < cores; ++i) {
      std::string core = Core(Projection(false, width));
      if (rng_.Chance(1, 4))
        core = "(" + core + " LIMIT " + std::to_string(1 + rng_.Below(4)) + ")";
      if (i)
        q += rng_.Chance(1, 2) ? " UNION " : " INTERSECT ";
      q += core;
    }
    if (rng_.Chance(1, 4))
      q += " LIMIT " + std::to_string(1 + rng_.Below(6));
    return q;
  }

 private:
  struct Proj {
    bool wildcard = false;
    bool count = false;
    std::vector<std::string> fields;
    bool aliases = false;
  };

  Proj Projection(bool count, size_t width) {
    Proj p;
    p.count = count;
    if (count) {
      p.fields = {Field()};
      return p;
    }
    if (width == 0 && rng_.Chance(1, 3)) {
      p.wildcard = true;
      return p;
    }
    size_t n = width ? width : 1 + rng_.Below(3);
    std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
    for (size_t i = 0; i < n; ++i) {
      size_t pick = rng_.Below(pool.size());
      p.fields.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    p.aliases = rng_.Chance(1, 4);
    return p;
  }

  std::string Field() {
    static const char* kFields[] = {"a", "b", "c", "d", "e"};
    return kFields[rng_.Below(5)];
  }

  std::string Ref(const std::string& field) {
    return rng_.Chance(1, 2) ? field : qualifier_ + "." + field;
  }

  std::string Literal() {
    switch (rng_.Below(6)) {
      case 0:
      case 1:
      case 2:
        return std::to_string(rng_.Range(-3, 9));
      case 3: {
        static const char* kStrings[] = {"''", "'x'", "'y'", "'ab'", "'it''s'"};
        return kStrings[rng_.Below(5)];
      }
      case 4:
        return "'" + std::string(1, static_cast<char>('a' + rng_.Below(3))) + "'";
      default:
        return rng_.Chance(1, 2) ? "TRUE" : "FALSE";
    }
  }

  std::string Atom() {
    static const char* kOps[] = {"=", "!=", "<", "<=", ">", ">=", "<>"};
    std::string lhs = Ref(Field());
    std::string op = kOps[rng_.Below(7)];
    std::string rhs = rng_.Chance(1, 5) ? Ref(Field()) : Literal();
    if (rng_.Chance(1, 6))
      std::swap(lhs, rhs);
    return lhs + " " + op + " " + rhs;
  }

  std::string Cond(int depth) {
    std::uint64_t pick = depth >= 2 ? 0 : rng_.Below(6);
    switch (pick) {
      case 0:
      case 1:
      case 2:
        return Atom();
      case 3:
        return Cond(depth + 1) + " AND " + Cond(depth + 1);
      case 4:
        return "(" + Cond(depth + 1) + " OR " + Cond(depth + 1) + ")";
      default:
        return "NOT " + (rng_.Chance(1, 2) ? Atom()
                                           : "(" + Cond(depth + 1) + ")");
    }
  }

  std::string Core(const Proj& p) {
    table_ = "t" + std::to_string(next_table_++);
    qualifier_ = table_;
    std::string from = table_;
    if (rng_.Chance(1, 3)) {
      qualifier_ = "x" + std::to_string(next_table_);
      from += rng_.Chance(1, 2) ? " AS " + qualifier_ : " " + qualifier_;
    }
    std::string select;
    if (p.wildcard) {
      select = "*";
    } else if (p.count) {
      select = "COUNT(" + Ref(p.fields.front()) + ")";
      if (rng_.Chance(1, 4))
        select += " AS n";
    } else {
      for (size_t i = 0; i < p.fields.size(); ++i) {
        if (i)
          select += ", ";
        select += Ref(p.fields[i]);
        if (p.aliases)
          select += " AS o" + std::to_string(i);
      }
    }
    std::string q = "SELECT " + select + " FROM " + from;
    if (rng_.Chance(2, 3))
      q += " WHERE " + Cond(0);
    return q;
  }

  Rng& rng_;
  int next_table_ = 0;
  std::string table_;
  std::string qualifier_;
};

}  // namespace

Relation EvaluateReference(std::string_view query, const Database& db) {
  Query parsed = RefParser(Tokenize(query)).Top();
  return Evaluator(db).Run(parsed);
}

std::string GenerateQuery(Rng& rng) {
  return QueryGen(rng).Query();
}

std::vector<std::vector<Value>> CanonicalRows(
    const Relation& relation, const std::vector<std::string>& columns) {
  std::vector<size_t> order;
  for (const std::string& c : columns) {
    auto it = std::find(relation.columns.begin(), relation.columns.end(), c);
    if (it == relation.columns.end())
      return {};
    order.push_back(static_cast<size_t>(it - relation.columns.begin()));
  }
  std::vector<std::vector<Value>> rows;
  for (const auto& row : relation.rows) {
    std::vector<Value> r;
    for (size_t i : order)
      r.push_back(row[i]);
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::string ReplayMismatch(const std::string& query,
                           const synth::ResultSet& result) {
  Relation expected = EvaluateReference(query, result.tables);
  std::set<std::string> want(expected.columns.begin(), expected.columns.end());
  std::set<std::string> got(result.columns.begin(), result.columns.end());
  // Wildcard results expose only the fields the program has read so far.
  bool wildcard_subset =
      std::includes(want.begin(), want.end(), got.begin(), got.end());
  if (want != got && !wildcard_subset)
    return "column mismatch for " + query;
  Relation synthesized{result.columns, result.rows};
  auto a = CanonicalRows(expected, result.columns);
  auto b = CanonicalRows(synthesized, result.columns);
  if (a == b)
    return "";
  return "row mismatch for " + query + "\nreference:\n" + RenderRows(a) +
         "synthesized:\n" + RenderRows(b);
}

}  // namespace corbfuzz::testing
