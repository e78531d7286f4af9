#include "corbfuzz/sql.h"

#include <cctype>
#include <charconv>
#include <functional>

#include "corbfuzz/strings.h"

namespace corbfuzz::sql {

namespace {

struct Token {
  enum class Kind { kIdent, kInt, kString, kSymbol, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;  // identifiers are lowercased
  std::int64_t number = 0;
};

class Lexer {
 public:
  Lexer(std::string_view text, const std::string& query)
      : text_(text), query_(query) {}

  std::vector<Token> Run() {
    std::vector<Token> tokens;
    while (true) {
      SkipSpace();
      if (pos_ >= text_.size())
        break;
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_')) {
          ++pos_;
        }
        tokens.push_back({Token::Kind::kIdent,
                          AsciiLower(text_.substr(start, pos_ - start))});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < text_.size() &&
                  std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        size_t start = pos_++;
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          ++pos_;
        }
        std::string_view digits = text_.substr(start, pos_ - start);
        Token token{Token::Kind::kInt, std::string(digits)};
        auto [ptr, ec] = std::from_chars(
            digits.data(), digits.data() + digits.size(), token.number);
        if (ec != std::errc())
          throw UnsupportedSql(query_, "integer literal out of range");
        tokens.push_back(std::move(token));
      } else if (c == '\'') {
        std::string value;
        ++pos_;
        while (true) {
          if (pos_ >= text_.size())
            throw UnsupportedSql(query_, "unterminated string literal");
          if (text_[pos_] == '\'') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
              value.push_back('\'');
              pos_ += 2;
              continue;
            }
            ++pos_;
            break;
          }
          value.push_back(text_[pos_++]);
        }
        tokens.push_back({Token::Kind::kString, std::move(value)});
      } else {
        static constexpr std::string_view kTwoChar[] = {"<=", ">=", "!=", "<>"};
        std::string symbol(1, c);
        for (std::string_view two : kTwoChar) {
          if (text_.substr(pos_, 2) == two)
            symbol = std::string(two);
        }
        if (symbol.size() == 1 &&
            std::string_view("(),*;=<>.").find(c) == std::string_view::npos) {
          throw UnsupportedSql(query_,
                               std::string("unexpected character '") + c + "'");
        }
        pos_ += symbol.size();
        tokens.push_back({Token::Kind::kSymbol, symbol});
      }
    }
    tokens.push_back({Token::Kind::kEnd, ""});
    return tokens;
  }

 private:
  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  std::string_view text_;
  const std::string& query_;
  size_t pos_ = 0;
};

bool IsKeyword(const std::string& word) {
  static const std::set<std::string> kKeywords = {
      "select", "from",  "where", "limit", "union", "intersect", "and",
      "or",     "not",   "as",    "count", "true",  "false"};
  return kKeywords.count(word) > 0;
}

struct RawColumn {
  std::string qualifier;
  std::string name;
};

struct RawOperand {
  bool is_column = false;
  RawColumn column;
  Value literal;
};

// Condition AST kept until the FROM clause has been read, then resolved to a
// Formula.
struct RawCond {
  enum class Kind { kCmp, kAnd, kOr, kNot } kind = Kind::kCmp;
  RawOperand lhs;
  CmpOp op = CmpOp::kEq;
  RawOperand rhs;
  std::vector<RawCond> children;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string query)
      : tokens_(std::move(tokens)), query_(std::move(query)) {}

  RelAlgExpr ParseTop() {
    RelAlgExpr expr = ParseQuery();
    AcceptSymbol(";");
    if (Peek().kind != Token::Kind::kEnd)
      Fail("trailing input near '" + Peek().text + "'");
    return expr;
  }

 private:
  const Token& Peek() const { return tokens_[pos_]; }
  Token Take() { return tokens_[pos_++]; }

  [[noreturn]] void Fail(const std::string& why) const {
    throw UnsupportedSql(query_, why);
  }

  bool PeekKeyword(std::string_view word) const {
    return Peek().kind == Token::Kind::kIdent && Peek().text == word;
  }

  bool AcceptKeyword(std::string_view word) {
    if (!PeekKeyword(word))
      return false;
    ++pos_;
    return true;
  }

  void ExpectKeyword(std::string_view word) {
    if (!AcceptKeyword(word))
      Fail("expected " + std::string(word));
  }

  bool PeekSymbol(std::string_view symbol) const {
    return Peek().kind == Token::Kind::kSymbol && Peek().text == symbol;
  }

  bool AcceptSymbol(std::string_view symbol) {
    if (!PeekSymbol(symbol))
      return false;
    ++pos_;
    return true;
  }

  void ExpectSymbol(std::string_view symbol) {
    if (!AcceptSymbol(symbol))
      Fail("expected '" + std::string(symbol) + "'");
  }

  std::string ExpectIdent() {
    if (Peek().kind != Token::Kind::kIdent || IsKeyword(Peek().text))
      Fail("expected identifier");
    return Take().text;
  }

  RelAlgExpr ParseQuery() {
    RelAlgExpr expr = ParseTerm();
    while (AcceptKeyword("union")) {
      RelAlgExpr node;
      node.kind = RelAlgExpr::Kind::kUnion;
      node.children.push_back(std::move(expr));
      node.children.push_back(ParseTerm());
      expr = std::move(node);
    }
    if (AcceptKeyword("limit")) {
      if (Peek().kind != Token::Kind::kInt || Peek().number < 0)
        Fail("LIMIT needs a non-negative integer");
      auto n = static_cast<std::uint64_t>(Take().number);
      if (expr.kind == RelAlgExpr::Kind::kLimit) {
        expr.limit = std::min(expr.limit, n);
      } else {
        RelAlgExpr node;
        node.kind = RelAlgExpr::Kind::kLimit;
        node.limit = n;
        node.children.push_back(std::move(expr));
        expr = std::move(node);
      }
    }
    return expr;
  }

  RelAlgExpr ParseTerm() {
    RelAlgExpr expr = ParseCore();
    while (AcceptKeyword("intersect")) {
      RelAlgExpr node;
      node.kind = RelAlgExpr::Kind::kIntersect;
      node.children.push_back(std::move(expr));
      node.children.push_back(ParseCore());
      expr = std::move(node);
    }
    return expr;
  }

  RawColumn ParseColumn() {
    RawColumn column;
    column.name = ExpectIdent();
    if (AcceptSymbol(".")) {
      column.qualifier = column.name;
      column.name = ExpectIdent();
    }
    return column;
  }

  RawOperand ParseOperand() {
    RawOperand operand;
    const Token& token = Peek();
    if (token.kind == Token::Kind::kInt) {
      operand.literal = Value(Take().number);
    } else if (token.kind == Token::Kind::kString) {
      operand.literal = Value(Take().text);
    } else if (AcceptKeyword("true")) {
      operand.literal = Value(true);
    } else if (AcceptKeyword("false")) {
      operand.literal = Value(false);
    } else {
      operand.is_column = true;
      operand.column = ParseColumn();
    }
    return operand;
  }

  RawCond ParseCond() {
    RawCond first = ParseConj();
    if (!PeekKeyword("or"))
      return first;
    RawCond node;
    node.kind = RawCond::Kind::kOr;
    node.children.push_back(std::move(first));
    while (AcceptKeyword("or"))
      node.children.push_back(ParseConj());
    return node;
  }

  RawCond ParseConj() {
    RawCond first = ParseNeg();
    if (!PeekKeyword("and"))
      return first;
    RawCond node;
    node.kind = RawCond::Kind::kAnd;
    node.children.push_back(std::move(first));
    while (AcceptKeyword("and"))
      node.children.push_back(ParseNeg());
    return node;
  }

  RawCond ParseNeg() {
    if (AcceptKeyword("not")) {
      RawCond node;
      node.kind = RawCond::Kind::kNot;
      node.children.push_back(ParseNeg());
      return node;
    }
    if (AcceptSymbol("(")) {
      RawCond inner = ParseCond();
      ExpectSymbol(")");
      return inner;
    }
    RawCond cmp;
    cmp.lhs = ParseOperand();
    const Token& op = Peek();
    if (op.kind != Token::Kind::kSymbol)
      Fail("expected comparison operator");
    if (op.text == "=")
      cmp.op = CmpOp::kEq;
    else if (op.text == "!=" || op.text == "<>")
      cmp.op = CmpOp::kNe;
    else if (op.text == "<")
      cmp.op = CmpOp::kLt;
    else if (op.text == "<=")
      cmp.op = CmpOp::kLe;
    else if (op.text == ">")
      cmp.op = CmpOp::kGt;
    else if (op.text == ">=")
      cmp.op = CmpOp::kGe;
    else
      Fail("expected comparison operator");
    ++pos_;
    cmp.rhs = ParseOperand();
    return cmp;
  }

  RelAlgExpr ParseCore() {
    if (AcceptSymbol("(")) {
      RelAlgExpr inner = ParseQuery();
      ExpectSymbol(")");
      return inner;
    }
    ExpectKeyword("select");

    bool wildcard = false;
    bool is_count = false;
    std::vector<std::pair<RawColumn, std::string>> items;  // column, alias
    if (AcceptSymbol("*")) {
      wildcard = true;
    } else if (PeekKeyword("count")) {
      ++pos_;
      ExpectSymbol("(");
      RawColumn column = ParseColumn();
      ExpectSymbol(")");
      std::string alias;
      if (AcceptKeyword("as"))
        alias = ExpectIdent();
      items.emplace_back(std::move(column), std::move(alias));
      is_count = true;
    } else {
      do {
        if (PeekKeyword("count"))
          Fail("COUNT must be the only projection item");
        RawColumn column = ParseColumn();
        std::string alias;
        if (AcceptKeyword("as"))
          alias = ExpectIdent();
        items.emplace_back(std::move(column), std::move(alias));
      } while (AcceptSymbol(","));
    }
    if (is_count && PeekSymbol(","))
      Fail("COUNT must be the only projection item");

    ExpectKeyword("from");
    std::string table = ExpectIdent();
    if (PeekSymbol(","))
      Fail("joins are not supported");
    std::string alias;
    if (AcceptKeyword("as"))
      alias = ExpectIdent();
    else if (Peek().kind == Token::Kind::kIdent && !IsKeyword(Peek().text))
      alias = Take().text;

    if (!tables_.insert(table).second)
      Fail("table '" + table + "' appears more than once");

    auto resolve = [&](const RawColumn& column) {
      if (!column.qualifier.empty() && column.qualifier != table &&
          column.qualifier != alias) {
        Fail("unknown table qualifier '" + column.qualifier + "'");
      }
      return FieldRef{table, column.name};
    };

    RelAlgExpr expr;
    expr.kind = RelAlgExpr::Kind::kBaseTable;
    expr.table = table;
    if (!alias.empty()) {
      RelAlgExpr node;
      node.kind = RelAlgExpr::Kind::kRename;
      node.alias = alias;
      node.children.push_back(std::move(expr));
      expr = std::move(node);
    }
    if (AcceptKeyword("where")) {
      RawCond cond = ParseCond();
      RelAlgExpr node;
      node.kind = RelAlgExpr::Kind::kSelect;
      node.condition = Resolve(cond, resolve);
      node.children.push_back(std::move(expr));
      expr = std::move(node);
    }
    if (!wildcard) {
      RelAlgExpr project;
      project.kind = RelAlgExpr::Kind::kProject;
      std::vector<std::pair<std::string, std::string>> renames;
      std::set<std::string> names;
      for (const auto& [column, item_alias] : items) {
        FieldRef ref = resolve(column);
        std::string out =
            is_count ? "count(" + ref.field + ")" : ref.field;
        if (!item_alias.empty()) {
          renames.emplace_back(out, item_alias);
          out = item_alias;
        }
        if (!names.insert(out).second)
          Fail("duplicate output column '" + out + "'");
        project.items.push_back({ref, is_count});
      }
      project.children.push_back(std::move(expr));
      expr = std::move(project);
      if (!renames.empty()) {
        RelAlgExpr node;
        node.kind = RelAlgExpr::Kind::kRename;
        node.renames = std::move(renames);
        node.children.push_back(std::move(expr));
        expr = std::move(node);
      }
    }
    return expr;
  }

  template <typename ResolveFn>
  Formula Resolve(const RawCond& cond, ResolveFn& resolve) {
    switch (cond.kind) {
      case RawCond::Kind::kAnd:
      case RawCond::Kind::kOr: {
        std::vector<Formula> parts;
        for (const RawCond& child : cond.children)
          parts.push_back(Resolve(child, resolve));
        return cond.kind == RawCond::Kind::kAnd ? Formula::And(std::move(parts))
                                                : Formula::Or(std::move(parts));
      }
      case RawCond::Kind::kNot:
        return Formula::Not(Resolve(cond.children.front(), resolve));
      case RawCond::Kind::kCmp: {
        auto term = [&](const RawOperand& operand) {
          return operand.is_column
                     ? Term::Var(resolve(operand.column).VarName())
                     : Term::Lit(operand.literal);
        };
        if (!cond.lhs.is_column && !cond.rhs.is_column) {
          return StrictCompare(cond.lhs.literal, cond.op, cond.rhs.literal)
                     ? Formula::True()
                     : Formula::False();
        }
        return Formula::Cmp(term(cond.lhs), cond.op, term(cond.rhs));
      }
    }
    return Formula::True();
  }

  std::vector<Token> tokens_;
  std::string query_;
  size_t pos_ = 0;
  std::set<std::string> tables_;
};

FieldRef FieldFromVar(const std::string& var) {
  size_t hash = var.find('#');
  return FieldRef{var.substr(0, hash), var.substr(hash + 1)};
}

void CollectFields(const RelAlgExpr& ra, std::set<FieldRef>& out) {
  switch (ra.kind) {
    case RelAlgExpr::Kind::kSelect: {
      std::set<std::string> vars;
      ra.condition.CollectVars(vars);
      for (const std::string& var : vars)
        out.insert(FieldFromVar(var));
      break;
    }
    case RelAlgExpr::Kind::kProject:
      for (const ProjectItem& item : ra.items)
        out.insert(item.field);
      break;
    default:
      break;
  }
  for (const RelAlgExpr& child : ra.children)
    CollectFields(child, out);
}

void CollectConditions(const RelAlgExpr& ra, std::vector<Formula>& out) {
  if (ra.kind == RelAlgExpr::Kind::kSelect)
    out.push_back(ra.condition);
  for (const RelAlgExpr& child : ra.children)
    CollectConditions(child, out);
}

void PinTypes(const Formula& f, std::map<FieldRef, ValueType>& pins) {
  std::vector<const Formula*> atoms;
  f.CollectAtoms(atoms);
  for (const Formula* atom : atoms) {
    if (atom->kind() != Formula::Kind::kCmp)
      continue;
    const Term& lhs = atom->lhs();
    const Term& rhs = atom->rhs();
    if (lhs.is_var && !rhs.is_var)
      pins.emplace(FieldFromVar(lhs.var), rhs.literal.type());
    else if (!lhs.is_var && rhs.is_var)
      pins.emplace(FieldFromVar(rhs.var), lhs.literal.type());
  }
}

void PinCounts(const RelAlgExpr& ra, std::map<FieldRef, ValueType>& pins) {
  if (auto core = DescribeCore(ra); core && core->is_count) {
    pins[FieldRef{core->table, core->outputs.front().first}] = ValueType::kInt;
    return;
  }
  for (const RelAlgExpr& child : ra.children)
    PinCounts(child, pins);
}

}  // namespace

RelAlgExpr ParseSql(std::string_view query) {
  std::string text(query);
  Lexer lexer(text, text);
  Parser parser(lexer.Run(), text);
  RelAlgExpr ra = parser.ParseTop();

  // Set operators need explicit projections of equal width, no COUNT.
  std::vector<size_t> widths;
  std::function<void(const RelAlgExpr&)> check_set_ops =
      [&](const RelAlgExpr& node) {
        if (node.kind == RelAlgExpr::Kind::kUnion ||
            node.kind == RelAlgExpr::Kind::kIntersect) {
          for (const RelAlgExpr& child : node.children) {
            if (auto core = DescribeCore(child)) {
              if (core->wildcard)
                throw UnsupportedSql(text, "set operators need explicit columns");
              if (core->is_count)
                throw UnsupportedSql(text, "COUNT inside a set operator");
              widths.push_back(core->outputs.size());
            }
          }
        }
        for (const RelAlgExpr& child : node.children)
          check_set_ops(child);
      };
  check_set_ops(ra);
  for (size_t w : widths) {
    if (w != widths.front())
      throw UnsupportedSql(text, "set operator branches differ in width");
  }
  return ra;
}

RowBound MaxRow(const RelAlgExpr& ra) {
  switch (ra.kind) {
    case RelAlgExpr::Kind::kBaseTable:
      return std::nullopt;
    case RelAlgExpr::Kind::kRename:
    case RelAlgExpr::Kind::kSelect:
      return MaxRow(ra.children.front());
    case RelAlgExpr::Kind::kProject:
      if (!ra.items.empty() && ra.items.front().is_count)
        return 1;
      return MaxRow(ra.children.front());
    case RelAlgExpr::Kind::kLimit: {
      RowBound child = MaxRow(ra.children.front());
      return child ? std::min(*child, ra.limit) : ra.limit;
    }
    case RelAlgExpr::Kind::kUnion: {
      std::uint64_t total = 0;
      for (const RelAlgExpr& child : ra.children) {
        RowBound bound = MaxRow(child);
        if (!bound)
          return std::nullopt;
        total += *bound;
      }
      return total;
    }
    case RelAlgExpr::Kind::kIntersect: {
      RowBound best;
      for (const RelAlgExpr& child : ra.children) {
        RowBound bound = MaxRow(child);
        if (bound && (!best || *bound < *best))
          best = bound;
      }
      return best;
    }
  }
  return std::nullopt;
}

std::set<FieldRef> Fields(const RelAlgExpr& ra) {
  std::set<FieldRef> out;
  CollectFields(ra, out);
  return out;
}

Formula Constraints(const RelAlgExpr& ra, std::map<FieldRef, ValueType>* pins) {
  std::vector<Formula> conditions;
  CollectConditions(ra, conditions);
  Formula result = Formula::And(std::move(conditions));
  if (pins) {
    PinTypes(result, *pins);
    PinCounts(ra, *pins);
  }
  return result;
}

std::optional<SelectCore> DescribeCore(const RelAlgExpr& ra) {
  SelectCore core;
  const RelAlgExpr* node = &ra;
  if (node->kind == RelAlgExpr::Kind::kLimit) {
    core.limit = node->limit;
    node = &node->children.front();
  }
  std::vector<std::pair<std::string, std::string>> renames;
  if (node->kind == RelAlgExpr::Kind::kRename && node->alias.empty()) {
    renames = node->renames;
    node = &node->children.front();
  }
  const RelAlgExpr* project = nullptr;
  if (node->kind == RelAlgExpr::Kind::kProject) {
    project = node;
    node = &node->children.front();
  }
  if (node->kind == RelAlgExpr::Kind::kSelect) {
    core.condition = node->condition;
    node = &node->children.front();
  }
  if (node->kind == RelAlgExpr::Kind::kRename && !node->alias.empty())
    node = &node->children.front();
  if (node->kind != RelAlgExpr::Kind::kBaseTable)
    return std::nullopt;
  core.table = node->table;
  if (project) {
    core.wildcard = false;
    for (const ProjectItem& item : project->items) {
      std::string name =
          item.is_count ? "count(" + item.field.field + ")" : item.field.field;
      for (const auto& [from, to] : renames) {
        if (from == name) {
          name = to;
          break;
        }
      }
      core.is_count = core.is_count || item.is_count;
      core.outputs.emplace_back(name, item.field);
    }
  }
  return core;
}

std::vector<std::string> Tables(const RelAlgExpr& ra) {
  std::vector<std::string> out;
  if (ra.kind == RelAlgExpr::Kind::kBaseTable)
    out.push_back(ra.table);
  for (const RelAlgExpr& child : ra.children) {
    for (std::string& t : Tables(child))
      out.push_back(std::move(t));
  }
  return out;
}

bool HasSetOperator(const RelAlgExpr& ra) {
  if (ra.kind == RelAlgExpr::Kind::kUnion ||
      ra.kind == RelAlgExpr::Kind::kIntersect) {
    return true;
  }
  for (const RelAlgExpr& child : ra.children) {
    if (HasSetOperator(child))
      return true;
  }
  return false;
}

std::string RelAlgExpr::ToString() const {
  auto child_string = [this]() {
    std::string out;
    for (size_t i = 0; i < children.size(); ++i) {
      if (i)
        out += ", ";
      out += children[i].ToString();
    }
    return out;
  };
  switch (kind) {
    case Kind::kBaseTable:
      return table;
    case Kind::kRename: {
      std::string label = alias;
      for (const auto& [from, to] : renames) {
        if (!label.empty())
          label += ",";
        label += from + "->" + to;
      }
      return "RENAME_{" + label + "}(" + child_string() + ")";
    }
    case Kind::kSelect:
      return "SELECT_{" + condition.ToString() + "}(" + child_string() + ")";
    case Kind::kProject: {
      std::string label;
      for (const ProjectItem& item : items) {
        if (!label.empty())
          label += ",";
        std::string ref = item.field.table + "." + item.field.field;
        label += item.is_count ? "COUNT(" + ref + ")" : ref;
      }
      return "PROJECT_{" + label + "}(" + child_string() + ")";
    }
    case Kind::kLimit:
      return "LIMIT_" + std::to_string(limit) + "(" + child_string() + ")";
    case Kind::kUnion:
      return "UNION(" + child_string() + ")";
    case Kind::kIntersect:
      return "INTERSECT(" + child_string() + ")";
  }
  return "";
}

}  // namespace corbfuzz::sql
