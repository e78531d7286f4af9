#include "corbfuzz/value.h"

#include <charconv>

#include "corbfuzz/strings.h"

namespace corbfuzz {

std::string_view TypeName(ValueType type) {
  switch (type) {
    case ValueType::kNull:
      return "null";
    case ValueType::kInt:
      return "int";
    case ValueType::kStr:
      return "str";
    case ValueType::kBool:
      return "bool";
  }
  return "null";
}

std::optional<ValueType> ParseTypeName(std::string_view name) {
  std::string lower = AsciiLower(name);
  if (lower == "int" || lower == "integer")
    return ValueType::kInt;
  if (lower == "str" || lower == "string")
    return ValueType::kStr;
  if (lower == "bool" || lower == "boolean")
    return ValueType::kBool;
  if (lower == "null")
    return ValueType::kNull;
  return std::nullopt;
}

ValueType Value::type() const {
  switch (data_.index()) {
    case 1:
      return ValueType::kInt;
    case 2:
      return ValueType::kStr;
    case 3:
      return ValueType::kBool;
    default:
      return ValueType::kNull;
  }
}

std::string Value::ToOutputString() const {
  switch (type()) {
    case ValueType::kInt:
      return std::to_string(as_int());
    case ValueType::kStr:
      return as_str();
    case ValueType::kBool:
      return as_bool() ? "1" : "";
    case ValueType::kNull:
      return "";
  }
  return "";
}

std::string Value::DebugString() const {
  switch (type()) {
    case ValueType::kInt:
      return std::to_string(as_int());
    case ValueType::kStr: {
      std::string escaped;
      for (char c : EscapeBytes(as_str())) {
        if (c == '"')
          escaped += "\\\"";
        else
          escaped.push_back(c);
      }
      return "\"" + escaped + "\"";
    }
    case ValueType::kBool:
      return as_bool() ? "true" : "false";
    case ValueType::kNull:
      return "null";
  }
  return "null";
}

bool Value::Truthy() const {
  switch (type()) {
    case ValueType::kInt:
      return as_int() != 0;
    case ValueType::kStr:
      return !as_str().empty() && as_str() != "0";
    case ValueType::kBool:
      return as_bool();
    case ValueType::kNull:
      return false;
  }
  return false;
}

std::string_view CmpOpSymbol(CmpOp op) {
  switch (op) {
    case CmpOp::kEq:
      return "=";
    case CmpOp::kNe:
      return "!=";
    case CmpOp::kLt:
      return "<";
    case CmpOp::kLe:
      return "<=";
    case CmpOp::kGt:
      return ">";
    case CmpOp::kGe:
      return ">=";
  }
  return "=";
}

CmpOp MirrorOp(CmpOp op) {
  switch (op) {
    case CmpOp::kLt:
      return CmpOp::kGt;
    case CmpOp::kLe:
      return CmpOp::kGe;
    case CmpOp::kGt:
      return CmpOp::kLt;
    case CmpOp::kGe:
      return CmpOp::kLe;
    default:
      return op;
  }
}

CmpOp NegateOp(CmpOp op) {
  switch (op) {
    case CmpOp::kEq:
      return CmpOp::kNe;
    case CmpOp::kNe:
      return CmpOp::kEq;
    case CmpOp::kLt:
      return CmpOp::kGe;
    case CmpOp::kLe:
      return CmpOp::kGt;
    case CmpOp::kGt:
      return CmpOp::kLe;
    case CmpOp::kGe:
      return CmpOp::kLt;
  }
  return op;
}

namespace {

template <typename T>
bool Ordered(const T& a, CmpOp op, const T& b) {
  switch (op) {
    case CmpOp::kEq:
      return a == b;
    case CmpOp::kNe:
      return a != b;
    case CmpOp::kLt:
      return a < b;
    case CmpOp::kLe:
      return a <= b;
    case CmpOp::kGt:
      return a > b;
    case CmpOp::kGe:
      return a >= b;
  }
  return false;
}

}  // namespace

bool StrictCompare(const Value& lhs, CmpOp op, const Value& rhs) {
  if (lhs.type() != rhs.type())
    return false;
  switch (lhs.type()) {
    case ValueType::kInt:
      return Ordered(lhs.as_int(), op, rhs.as_int());
    case ValueType::kStr:
      return Ordered(lhs.as_str(), op, rhs.as_str());
    case ValueType::kBool:
      return Ordered(lhs.as_bool(), op, rhs.as_bool());
    case ValueType::kNull:
      return op == CmpOp::kEq || op == CmpOp::kLe || op == CmpOp::kGe;
  }
  return false;
}

std::optional<std::int64_t> ParseNumericString(std::string_view text) {
  if (text.empty())
    return std::nullopt;
  std::string_view digits = text;
  if (digits.front() == '+')
    digits.remove_prefix(1);
  std::int64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() ||
      digits.empty()) {
    return std::nullopt;
  }
  return value;
}

bool LooseCompare(const Value& lhs, CmpOp op, const Value& rhs) {
  if (op == CmpOp::kNe)
    return !LooseCompare(lhs, CmpOp::kEq, rhs);
  if (lhs.type() == rhs.type())
    return StrictCompare(lhs, op, rhs);
  if (lhs.is_int() && rhs.is_str()) {
    if (auto n = ParseNumericString(rhs.as_str()))
      return Ordered(lhs.as_int(), op, *n);
  } else if (lhs.is_str() && rhs.is_int()) {
    if (auto n = ParseNumericString(lhs.as_str()))
      return Ordered(*n, op, rhs.as_int());
  }
  return false;
}

}  // namespace corbfuzz
