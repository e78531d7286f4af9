#ifndef CORBFUZZ_SQL_H_
#define CORBFUZZ_SQL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "corbfuzz/formula.h"
#include "corbfuzz/value.h"

namespace corbfuzz::sql {

class UnsupportedSql : public std::runtime_error {
 public:
  UnsupportedSql(const std::string& query, const std::string& why)
      : std::runtime_error("unsupported SQL (" + why + "): " + query) {}
};

// Canonical lowercase (table, field) pair.
struct FieldRef {
  std::string table;
  std::string field;

  // Solver/formula variable name, "table#field".
  std::string VarName() const { return table + "#" + field; }

  auto operator<=>(const FieldRef&) const = default;
  bool operator==(const FieldRef&) const = default;
};

struct ProjectItem {
  FieldRef field;
  bool is_count = false;
};

// Relational algebra over a single-table-per-core fragment of SQL.
//
//   BaseTable(t)            leaf
//   Rename                  table alias (alias set) or column renames
//   Select(condition)       WHERE; condition variables are "table#field"
//   Project(items)          explicit projection list or COUNT(field)
//   Limit(n)
//   Union / Intersect       set semantics (duplicates removed)
//
// A wildcard projection produces no Project node.
struct RelAlgExpr {
  enum class Kind { kBaseTable, kRename, kSelect, kProject, kLimit, kUnion,
                    kIntersect };

  Kind kind = Kind::kBaseTable;
  std::string table;                                      // kBaseTable
  std::string alias;                                      // kRename (table)
  std::vector<std::pair<std::string, std::string>> renames;  // kRename (cols)
  Formula condition;                                      // kSelect
  std::vector<ProjectItem> items;                         // kProject
  std::uint64_t limit = 0;                                // kLimit
  std::vector<RelAlgExpr> children;

  // e.g. LIMIT_3(PROJECT_{t.a}(t)) or SELECT_{(= a#c 1)}(a)
  std::string ToString() const;
};

// Grammar (keywords case-insensitive):
//   query   := term { UNION term } [LIMIT int] [';']
//   term    := core { INTERSECT core }
//   core    := '(' query ')' | SELECT proj FROM ident [[AS] ident]
//              [WHERE cond]
//   proj    := '*' | COUNT '(' col ')' [AS ident] | col [AS ident] {, ...}
//   cond    := conj { OR conj } ; conj := neg { AND neg }
//   neg     := NOT neg | '(' cond ')' | operand cmp operand
//   operand := col | int | 'string' | TRUE | FALSE
// A trailing LIMIT applies to the whole set expression, as in standard SQL;
// per-branch limits need parentheses. Nested limits collapse to the smaller.
// Restrictions: every base table appears at most once per query; set
// operators need explicit (non-COUNT) projections of equal width; COUNT must
// be the only projection item and cannot be combined with set operators.
RelAlgExpr ParseSql(std::string_view query);

// nullopt is unbounded.
using RowBound = std::optional<std::uint64_t>;
RowBound MaxRow(const RelAlgExpr& ra);

std::set<FieldRef> Fields(const RelAlgExpr& ra);

// Conjunction of every Select condition. Each field compared with a literal
// is pinned to that literal's type (first comparison wins); COUNT output
// columns are pinned to int under the pseudo field (table, output name).
Formula Constraints(const RelAlgExpr& ra,
                    std::map<FieldRef, ValueType>* pins = nullptr);

// One SELECT ... FROM ... core, flattened out of the algebra tree.
struct SelectCore {
  std::string table;
  Formula condition;
  bool wildcard = true;
  bool is_count = false;
  // Output column name -> source field (explicit projections only).
  std::vector<std::pair<std::string, FieldRef>> outputs;
  RowBound limit;
};

// Returns the core when |ra| is a single select core (possibly with LIMIT).
std::optional<SelectCore> DescribeCore(const RelAlgExpr& ra);

// Tables referenced by the query, in order of appearance.
std::vector<std::string> Tables(const RelAlgExpr& ra);

bool HasSetOperator(const RelAlgExpr& ra);

}  // namespace corbfuzz::sql

#endif  // CORBFUZZ_SQL_H_
