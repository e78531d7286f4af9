#ifndef CORBFUZZ_VALUE_H_
#define CORBFUZZ_VALUE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace corbfuzz {

// Inherent types tracked by type domains. kNull is only a runtime type and is
// never sampled.
enum class ValueType { kNull, kInt, kStr, kBool };

std::string_view TypeName(ValueType type);
std::optional<ValueType> ParseTypeName(std::string_view name);

// A scalar runtime value: null, 64-bit integer, byte string or boolean.
class Value {
 public:
  Value() = default;
  Value(std::int64_t v) : data_(v) {}
  Value(int v) : data_(static_cast<std::int64_t>(v)) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(const char* v) : data_(std::string(v)) {}
  Value(bool v) : data_(v) {}

  ValueType type() const;
  bool is_null() const { return type() == ValueType::kNull; }
  bool is_int() const { return type() == ValueType::kInt; }
  bool is_str() const { return type() == ValueType::kStr; }
  bool is_bool() const { return type() == ValueType::kBool; }

  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  const std::string& as_str() const { return std::get<std::string>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }

  // Output conversion used by echo/concatenation: true -> "1",
  // false/null -> "".
  std::string ToOutputString() const;
  // Typed rendering: 42, "text" (escaped), true, null.
  std::string DebugString() const;
  bool Truthy() const;

  bool operator==(const Value&) const = default;
  bool operator<(const Value& other) const { return data_ < other.data_; }

 private:
  std::variant<std::monostate, std::int64_t, std::string, bool> data_;
};

enum class CmpOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view CmpOpSymbol(CmpOp op);
// Operator with swapped operands: a < b  <=>  b > a.
CmpOp MirrorOp(CmpOp op);
CmpOp NegateOp(CmpOp op);

// Constraint semantics: values of different types never compare true under
// any operator. Same-typed values compare naturally (strings bytewise,
// false < true).
bool StrictCompare(const Value& lhs, CmpOp op, const Value& rhs);

// Runtime (type-juggling) semantics: an int and a numeric string compare
// numerically, null == null; any other cross-type pair is unequal and
// unordered. != is the negation of ==.
bool LooseCompare(const Value& lhs, CmpOp op, const Value& rhs);

// Parses a base-10 integer occupying the whole string (optional sign).
std::optional<std::int64_t> ParseNumericString(std::string_view text);

}  // namespace corbfuzz

#endif  // CORBFUZZ_VALUE_H_
