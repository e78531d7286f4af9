#ifndef CORBFUZZ_APPSCRIPT_H_
#define CORBFUZZ_APPSCRIPT_H_

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corbfuzz/value.h"

namespace corbfuzz::appscript {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int column, const std::string& expected);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class Source { kSession, kCookie, kParam };

struct Expr {
  enum class Kind {
    kLiteral,
    kVar,
    kConcat,
    kCmp,
    kIsSet,      // isset(source[key])
    kSourceRef,  // source[key]
    kQuery,
    kFetch,
    kIndex,
    kCall,
  };

  Kind kind = Kind::kLiteral;
  Value literal;
  std::string name;  // variable or internal function
  CmpOp op = CmpOp::kEq;
  Source source = Source::kParam;
  std::vector<Expr> args;
  int line = 0;
  int column = 0;
};

struct Stmt {
  enum class Kind { kAssign, kIf, kEcho, kHeader, kSessionStart, kAbort, kFor };

  Kind kind = Kind::kEcho;
  std::string var;          // kAssign, kFor
  std::vector<Expr> exprs;  // operands
  std::vector<Stmt> then_body;
  std::vector<Stmt> else_body;
  std::int64_t lo = 0;  // kFor: half-open range [lo, hi)
  std::int64_t hi = 0;
  int line = 0;

  int block = 0;
  int then_block = -1;  // kIf then arm, kFor body
  int else_block = -1;
  int cont_block = -1;  // block of the following statement, if any
};

struct Edge {
  int from = 0;
  int to = 0;
  auto operator<=>(const Edge&) const = default;
};

inline constexpr int kEntryBlock = -1;

class Program {
 public:
  const std::vector<Stmt>& statements() const { return statements_; }
  const std::string& source_path() const { return source_path_; }
  int block_count() const { return block_count_; }
  // Every (from, to) block transition the control flow graph allows,
  // including the entry edge (kEntryBlock, 0).
  const std::set<Edge>& static_edges() const { return static_edges_; }
  // String literals and parameter names, used as a mutation dictionary.
  const std::set<std::string>& literals() const { return literals_; }
  const std::set<std::string>& param_names() const { return param_names_; }

 private:
  friend Program ParseProgram(std::string_view, std::string);

  std::vector<Stmt> statements_;
  std::string source_path_;
  int block_count_ = 1;
  std::set<Edge> static_edges_;
  std::set<std::string> literals_;
  std::set<std::string> param_names_;
};

// Throws SyntaxError.
Program ParseProgram(std::string_view source, std::string source_path = "");

// Internal function table: name -> declared argument type. kNull stands for
// "any"; "count" takes a result set or row.
struct InternalFunction {
  std::string name;
  ValueType arg_type;
  bool takes_collection = false;
};
const std::vector<InternalFunction>& InternalFunctions();
const InternalFunction* FindInternalFunction(std::string_view name);

}  // namespace corbfuzz::appscript

#endif  // CORBFUZZ_APPSCRIPT_H_
