#include <cctype>
#include <charconv>

#include "corbfuzz/appscript.h"

namespace corbfuzz::appscript {

SyntaxError::SyntaxError(int line, int column, const std::string& expected)
    : std::runtime_error("syntax error at " + std::to_string(line) + ":" +
                         std::to_string(column) + ": expected " + expected),
      line_(line),
      column_(column) {}

const std::vector<InternalFunction>& InternalFunctions() {
  static const std::vector<InternalFunction> kFunctions = {
      {"count", ValueType::kNull, true},
      {"strlen", ValueType::kStr, false},
      {"intval", ValueType::kNull, false},
      {"serialize", ValueType::kNull, false},
      {"lower", ValueType::kStr, false},
      {"abs", ValueType::kInt, false},
  };
  return kFunctions;
}

const InternalFunction* FindInternalFunction(std::string_view name) {
  for (const InternalFunction& f : InternalFunctions()) {
    if (f.name == name)
      return &f;
  }
  return nullptr;
}

namespace {

struct Token {
  enum class Kind { kIdent, kVar, kInt, kString, kSymbol, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;
  std::int64_t number = 0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> Run() {
    std::vector<Token> out;
    while (true) {
      SkipSpaceAndComments();
      Token token;
      token.line = line_;
      token.column = column_;
      if (pos_ >= src_.size()) {
        out.push_back(token);
        return out;
      }
      char c = src_[pos_];
      if (c == '$') {
        Advance();
        token.kind = Token::Kind::kVar;
        token.text = Word();
        if (token.text.empty())
          throw SyntaxError(token.line, token.column, "variable name");
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        token.kind = Token::Kind::kIdent;
        token.text = Word();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        token.kind = Token::Kind::kInt;
        size_t start = pos_;
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          Advance();
        }
        token.text = std::string(src_.substr(start, pos_ - start));
        auto [ptr, ec] = std::from_chars(
            token.text.data(), token.text.data() + token.text.size(),
            token.number);
        if (ec != std::errc())
          throw SyntaxError(token.line, token.column, "integer in range");
      } else if (c == '"') {
        token.kind = Token::Kind::kString;
        token.text = StringBody(token);
      } else {
        static constexpr std::string_view kTwoChar[] = {"==", "!=", "<=", ">=",
                                                        ".."};
        token.kind = Token::Kind::kSymbol;
        token.text = std::string(1, c);
        for (std::string_view two : kTwoChar) {
          if (src_.substr(pos_, 2) == two)
            token.text = std::string(two);
        }
        if (token.text.size() == 1 &&
            std::string_view("(){}[];,.<>=-").find(c) == std::string_view::npos) {
          throw SyntaxError(token.line, token.column, "a valid character");
        }
        for (size_t i = 0; i < token.text.size(); ++i)
          Advance();
      }
      out.push_back(std::move(token));
    }
  }

 private:
  void Advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void SkipSpaceAndComments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        Advance();
      } else if (c == '#' || (c == '/' && pos_ + 1 < src_.size() &&
                              src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          Advance();
      } else {
        break;
      }
    }
  }

  std::string Word() {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_')) {
      Advance();
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  static int HexValue(char c) {
    if (c >= '0' && c <= '9')
      return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f')
      return c - 'a' + 10;
    return -1;
  }

  std::string StringBody(const Token& token) {
    std::string out;
    Advance();  // opening quote
    while (true) {
      if (pos_ >= src_.size())
        throw SyntaxError(token.line, token.column, "closing quote");
      char c = src_[pos_];
      if (c == '"') {
        Advance();
        return out;
      }
      if (c != '\\') {
        out.push_back(c);
        Advance();
        continue;
      }
      Advance();
      if (pos_ >= src_.size())
        throw SyntaxError(line_, column_, "escape sequence");
      char e = src_[pos_];
      Advance();
      switch (e) {
        case 'n':
          out.push_back('\n');
          break;
        case 't':
          out.push_back('\t');
          break;
        case 'r':
          out.push_back('\r');
          break;
        case '"':
        case '\\':
          out.push_back(e);
          break;
        case 'x': {
          int hi = pos_ < src_.size() ? HexValue(src_[pos_]) : -1;
          int lo = pos_ + 1 < src_.size() ? HexValue(src_[pos_ + 1]) : -1;
          if (hi < 0 || lo < 0)
            throw SyntaxError(line_, column_, "two hex digits");
          Advance();
          Advance();
          out.push_back(static_cast<char>(hi * 16 + lo));
          break;
        }
        default:
          throw SyntaxError(line_, column_, "escape sequence");
      }
    }
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<Stmt> ParseAll() {
    std::vector<Stmt> out;
    while (Peek().kind != Token::Kind::kEnd)
      out.push_back(ParseStmt());
    return out;
  }

  std::set<std::string> literals;
  std::set<std::string> params;

 private:
  const Token& Peek() const { return tokens_[pos_]; }
  Token Take() { return tokens_[pos_++]; }

  [[noreturn]] void Fail(const std::string& expected) const {
    throw SyntaxError(Peek().line, Peek().column, expected);
  }

  bool IsSymbol(std::string_view s) const {
    return Peek().kind == Token::Kind::kSymbol && Peek().text == s;
  }
  bool IsIdent(std::string_view s) const {
    return Peek().kind == Token::Kind::kIdent && Peek().text == s;
  }
  void Expect(std::string_view s) {
    if (!IsSymbol(s))
      Fail("'" + std::string(s) + "'");
    ++pos_;
  }
  void ExpectIdent(std::string_view s) {
    if (!IsIdent(s))
      Fail(std::string(s));
    ++pos_;
  }

  std::vector<Stmt> ParseBlock() {
    Expect("{");
    std::vector<Stmt> out;
    while (!IsSymbol("}")) {
      if (Peek().kind == Token::Kind::kEnd)
        Fail("'}'");
      out.push_back(ParseStmt());
    }
    Expect("}");
    return out;
  }

  Stmt ParseStmt() {
    Stmt stmt;
    stmt.line = Peek().line;
    if (Peek().kind == Token::Kind::kVar) {
      stmt.kind = Stmt::Kind::kAssign;
      stmt.var = Take().text;
      Expect("=");
      stmt.exprs.push_back(ParseExpr());
      Expect(";");
      return stmt;
    }
    if (Peek().kind != Token::Kind::kIdent)
      Fail("statement");
    const std::string word = Peek().text;
    if (word == "if") {
      ++pos_;
      stmt.kind = Stmt::Kind::kIf;
      Expect("(");
      stmt.exprs.push_back(ParseExpr());
      Expect(")");
      stmt.then_body = ParseBlock();
      if (IsIdent("else")) {
        ++pos_;
        if (IsIdent("if"))
          stmt.else_body.push_back(ParseStmt());
        else
          stmt.else_body = ParseBlock();
      }
      return stmt;
    }
    if (word == "for") {
      ++pos_;
      stmt.kind = Stmt::Kind::kFor;
      Expect("(");
      if (Peek().kind != Token::Kind::kVar)
        Fail("loop variable");
      stmt.var = Take().text;
      ExpectIdent("in");
      stmt.lo = ParseIntLiteral();
      Expect("..");
      stmt.hi = ParseIntLiteral();
      if (stmt.hi - stmt.lo > 1000)
        Fail("a loop range of at most 1000");
      Expect(")");
      stmt.then_body = ParseBlock();
      return stmt;
    }
    ++pos_;
    if (word == "echo") {
      stmt.kind = Stmt::Kind::kEcho;
      stmt.exprs.push_back(ParseExpr());
    } else if (word == "header") {
      stmt.kind = Stmt::Kind::kHeader;
      Expect("(");
      stmt.exprs.push_back(ParseExpr());
      Expect(",");
      stmt.exprs.push_back(ParseExpr());
      Expect(")");
    } else if (word == "session_start" || word == "abort") {
      stmt.kind = word == "abort" ? Stmt::Kind::kAbort
                                  : Stmt::Kind::kSessionStart;
      Expect("(");
      Expect(")");
    } else {
      --pos_;
      Fail("statement");
    }
    Expect(";");
    return stmt;
  }

  std::int64_t ParseIntLiteral() {
    bool negative = false;
    if (IsSymbol("-")) {
      negative = true;
      ++pos_;
    }
    if (Peek().kind != Token::Kind::kInt)
      Fail("integer");
    std::int64_t n = Take().number;
    return negative ? -n : n;
  }

  Expr Make(Expr::Kind kind, const Token& at) {
    Expr e;
    e.kind = kind;
    e.line = at.line;
    e.column = at.column;
    return e;
  }

  Expr ParseExpr() {
    Expr lhs = ParseConcat();
    if (Peek().kind != Token::Kind::kSymbol)
      return lhs;
    static const std::map<std::string, CmpOp> kOps = {
        {"==", CmpOp::kEq}, {"!=", CmpOp::kNe}, {"<", CmpOp::kLt},
        {"<=", CmpOp::kLe}, {">", CmpOp::kGt},  {">=", CmpOp::kGe}};
    auto it = kOps.find(Peek().text);
    if (it == kOps.end())
      return lhs;
    Expr cmp = Make(Expr::Kind::kCmp, Take());
    cmp.op = it->second;
    cmp.args.push_back(std::move(lhs));
    cmp.args.push_back(ParseConcat());
    return cmp;
  }

  Expr ParseConcat() {
    Expr first = ParsePostfix();
    if (!IsSymbol("."))
      return first;
    Expr concat = Make(Expr::Kind::kConcat, Peek());
    concat.args.push_back(std::move(first));
    while (IsSymbol(".")) {
      ++pos_;
      concat.args.push_back(ParsePostfix());
    }
    return concat;
  }

  Expr ParsePostfix() {
    Expr e = ParsePrimary();
    while (IsSymbol("[")) {
      Expr index = Make(Expr::Kind::kIndex, Take());
      index.args.push_back(std::move(e));
      index.args.push_back(ParseExpr());
      Expect("]");
      e = std::move(index);
    }
    return e;
  }

  bool IsSourceWord() const {
    return IsIdent("session") || IsIdent("cookie") || IsIdent("param");
  }

  Expr ParseSourceRef() {
    Expr ref = Make(Expr::Kind::kSourceRef, Peek());
    std::string word = Take().text;
    ref.source = word == "session"  ? Source::kSession
                 : word == "cookie" ? Source::kCookie
                                    : Source::kParam;
    Expect("[");
    ref.args.push_back(ParseExpr());
    Expect("]");
    if (ref.source == Source::kParam &&
        ref.args.front().kind == Expr::Kind::kLiteral &&
        ref.args.front().literal.is_str()) {
      params.insert(ref.args.front().literal.as_str());
    }
    return ref;
  }

  Expr ParsePrimary() {
    const Token& t = Peek();
    switch (t.kind) {
      case Token::Kind::kInt: {
        Expr e = Make(Expr::Kind::kLiteral, t);
        e.literal = Value(Take().number);
        return e;
      }
      case Token::Kind::kString: {
        Expr e = Make(Expr::Kind::kLiteral, t);
        e.literal = Value(t.text);
        literals.insert(t.text);
        ++pos_;
        return e;
      }
      case Token::Kind::kVar: {
        Expr e = Make(Expr::Kind::kVar, t);
        e.name = Take().text;
        return e;
      }
      case Token::Kind::kSymbol:
        if (t.text == "(") {
          ++pos_;
          Expr inner = ParseExpr();
          Expect(")");
          return inner;
        }
        if (t.text == "-") {
          Expr e = Make(Expr::Kind::kLiteral, t);
          e.literal = Value(ParseIntLiteral());
          return e;
        }
        Fail("expression");
      case Token::Kind::kIdent:
        break;
      case Token::Kind::kEnd:
        Fail("expression");
    }
    const std::string word = t.text;
    if (word == "true" || word == "false" || word == "null") {
      Expr e = Make(Expr::Kind::kLiteral, Take());
      if (word != "null")
        e.literal = Value(word == "true");
      return e;
    }
    if (IsSourceWord())
      return ParseSourceRef();
    if (word == "isset") {
      Expr e = Make(Expr::Kind::kIsSet, Take());
      Expect("(");
      if (!IsSourceWord())
        Fail("session, cookie or param");
      Expr ref = ParseSourceRef();
      e.source = ref.source;
      e.args = std::move(ref.args);
      Expect(")");
      return e;
    }
    Expr::Kind kind = word == "query"   ? Expr::Kind::kQuery
                      : word == "fetch" ? Expr::Kind::kFetch
                                        : Expr::Kind::kCall;
    Expr e = Make(kind, Take());
    e.name = word;
    Expect("(");
    if (!IsSymbol(")")) {
      e.args.push_back(ParseExpr());
      while (IsSymbol(",")) {
        ++pos_;
        e.args.push_back(ParseExpr());
      }
    }
    Expect(")");
    if (kind != Expr::Kind::kCall && e.args.size() != 1) {
      throw SyntaxError(e.line, e.column, word + "() with one argument");
    }
    return e;
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

class BlockBuilder {
 public:
  explicit BlockBuilder(std::set<Edge>& edges) : edges_(edges) {}

  // Assigns blocks to |list| starting in |block|; returns the blocks control
  // can be in once the list finishes.
  std::set<int> Assign(std::vector<Stmt>& list, int block) {
    std::set<int> exits = {block};
    int current = block;
    for (size_t i = 0; i < list.size(); ++i) {
      Stmt& s = list[i];
      s.block = current;
      bool more = i + 1 < list.size();
      if (s.kind == Stmt::Kind::kIf) {
        s.then_block = next_++;
        s.else_block = next_++;
        edges_.insert({current, s.then_block});
        edges_.insert({current, s.else_block});
        std::set<int> arm_exits = Assign(s.then_body, s.then_block);
        for (int e : Assign(s.else_body, s.else_block))
          arm_exits.insert(e);
        if (more) {
          s.cont_block = next_++;
          for (int e : arm_exits)
            edges_.insert({e, s.cont_block});
          current = s.cont_block;
          exits = {current};
        } else {
          exits = arm_exits;
        }
      } else if (s.kind == Stmt::Kind::kFor) {
        s.then_block = next_++;
        edges_.insert({current, s.then_block});
        std::set<int> body_exits = Assign(s.then_body, s.then_block);
        for (int e : body_exits)
          edges_.insert({e, s.then_block});
        if (more) {
          s.cont_block = next_++;
          edges_.insert({current, s.cont_block});
          for (int e : body_exits)
            edges_.insert({e, s.cont_block});
          current = s.cont_block;
          exits = {current};
        } else {
          exits = body_exits;
          exits.insert(current);
        }
      }
    }
    return exits;
  }

  int count() const { return next_; }

 private:
  std::set<Edge>& edges_;
  int next_ = 1;
};

}  // namespace

Program ParseProgram(std::string_view source, std::string source_path) {
  Program program;
  program.source_path_ = std::move(source_path);
  Parser parser(Lexer(source).Run());
  program.statements_ = parser.ParseAll();
  program.literals_ = std::move(parser.literals);
  program.param_names_ = std::move(parser.params);
  program.static_edges_.insert({kEntryBlock, 0});
  BlockBuilder builder(program.static_edges_);
  builder.Assign(program.statements_, 0);
  program.block_count_ = builder.count();
  return program;
}

}  // namespace corbfuzz::appscript
