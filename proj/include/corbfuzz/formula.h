#ifndef CORBFUZZ_FORMULA_H_
#define CORBFUZZ_FORMULA_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corbfuzz/value.h"

namespace corbfuzz {

// Operand of a comparison atom: a named variable or a literal.
struct Term {
  static Term Var(std::string name) { return Term{true, std::move(name), {}}; }
  static Term Lit(Value value) { return Term{false, {}, std::move(value)}; }

  bool is_var = false;
  std::string var;
  Value literal;

  bool operator==(const Term&) const = default;
};

using Assignment = std::map<std::string, Value>;

// Boolean combination of comparison atoms and definedness atoms. Variables
// are plain names: "table#field" for query fields, "session#key.phi" style
// names for session items.
class Formula {
 public:
  enum class Kind { kTrue, kFalse, kCmp, kDefined, kAnd, kOr, kNot };

  static Formula True();
  static Formula False();
  static Formula Cmp(Term lhs, CmpOp op, Term rhs);
  // Boolean variable |var| is true.
  static Formula Defined(std::string var);
  // Flattens nested conjunctions; And({}) is true.
  static Formula And(std::vector<Formula> parts);
  static Formula Or(std::vector<Formula> parts);
  static Formula Not(Formula inner);

  Kind kind() const { return kind_; }
  const Term& lhs() const { return lhs_; }
  const Term& rhs() const { return rhs_; }
  CmpOp op() const { return op_; }
  const std::string& var() const { return lhs_.var; }
  const std::vector<Formula>& children() const { return children_; }

  // Three-valued evaluation over a partial assignment: nullopt means some
  // needed variable is unassigned. Atoms compare with StrictCompare.
  std::optional<bool> Evaluate(const Assignment& assignment) const;

  void CollectVars(std::set<std::string>& out) const;
  // All atoms (kCmp/kDefined), in order of appearance.
  void CollectAtoms(std::vector<const Formula*>& out) const;

  // SMT-LIB flavoured rendering, e.g. (and (= A#c 1) (not phi)).
  std::string ToString() const;

  // Replaces variable names via |rename| (names not in the map are kept).
  Formula Rename(const std::map<std::string, std::string>& rename) const;

  bool operator==(const Formula&) const = default;

 private:
  Kind kind_ = Kind::kTrue;
  Term lhs_;
  CmpOp op_ = CmpOp::kEq;
  Term rhs_;
  std::vector<Formula> children_;
};

}  // namespace corbfuzz

#endif  // CORBFUZZ_FORMULA_H_
