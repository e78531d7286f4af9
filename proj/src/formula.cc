#include "corbfuzz/formula.h"

namespace corbfuzz {

Formula Formula::True() {
  return Formula();
}

Formula Formula::False() {
  Formula f;
  f.kind_ = Kind::kFalse;
  return f;
}

Formula Formula::Cmp(Term lhs, CmpOp op, Term rhs) {
  Formula f;
  f.kind_ = Kind::kCmp;
  f.lhs_ = std::move(lhs);
  f.op_ = op;
  f.rhs_ = std::move(rhs);
  return f;
}

Formula Formula::Defined(std::string var) {
  Formula f;
  f.kind_ = Kind::kDefined;
  f.lhs_ = Term::Var(std::move(var));
  return f;
}

Formula Formula::And(std::vector<Formula> parts) {
  Formula f;
  f.kind_ = Kind::kAnd;
  for (Formula& part : parts) {
    if (part.kind_ == Kind::kTrue)
      continue;
    if (part.kind_ == Kind::kAnd) {
      for (Formula& child : part.children_)
        f.children_.push_back(std::move(child));
    } else {
      f.children_.push_back(std::move(part));
    }
  }
  if (f.children_.empty())
    return True();
  if (f.children_.size() == 1)
    return std::move(f.children_.front());
  return f;
}

Formula Formula::Or(std::vector<Formula> parts) {
  Formula f;
  f.kind_ = Kind::kOr;
  for (Formula& part : parts) {
    if (part.kind_ == Kind::kFalse)
      continue;
    if (part.kind_ == Kind::kOr) {
      for (Formula& child : part.children_)
        f.children_.push_back(std::move(child));
    } else {
      f.children_.push_back(std::move(part));
    }
  }
  if (f.children_.empty())
    return False();
  if (f.children_.size() == 1)
    return std::move(f.children_.front());
  return f;
}

Formula Formula::Not(Formula inner) {
  if (inner.kind_ == Kind::kTrue)
    return False();
  if (inner.kind_ == Kind::kFalse)
    return True();
  Formula f;
  f.kind_ = Kind::kNot;
  f.children_.push_back(std::move(inner));
  return f;
}

namespace {

const Value* Lookup(const Term& term, const Assignment& assignment) {
  if (!term.is_var)
    return &term.literal;
  auto it = assignment.find(term.var);
  return it == assignment.end() ? nullptr : &it->second;
}

}  // namespace

std::optional<bool> Formula::Evaluate(const Assignment& assignment) const {
  switch (kind_) {
    case Kind::kTrue:
      return true;
    case Kind::kFalse:
      return false;
    case Kind::kCmp: {
      const Value* lhs = Lookup(lhs_, assignment);
      const Value* rhs = Lookup(rhs_, assignment);
      if (!lhs || !rhs)
        return std::nullopt;
      return StrictCompare(*lhs, op_, *rhs);
    }
    case Kind::kDefined: {
      const Value* value = Lookup(lhs_, assignment);
      if (!value)
        return std::nullopt;
      return value->is_bool() && value->as_bool();
    }
    case Kind::kAnd: {
      bool unknown = false;
      for (const Formula& child : children_) {
        auto r = child.Evaluate(assignment);
        if (!r)
          unknown = true;
        else if (!*r)
          return false;
      }
      if (unknown)
        return std::nullopt;
      return true;
    }
    case Kind::kOr: {
      bool unknown = false;
      for (const Formula& child : children_) {
        auto r = child.Evaluate(assignment);
        if (!r)
          unknown = true;
        else if (*r)
          return true;
      }
      if (unknown)
        return std::nullopt;
      return false;
    }
    case Kind::kNot: {
      auto r = children_.front().Evaluate(assignment);
      if (!r)
        return std::nullopt;
      return !*r;
    }
  }
  return std::nullopt;
}

void Formula::CollectVars(std::set<std::string>& out) const {
  if (kind_ == Kind::kCmp) {
    if (lhs_.is_var)
      out.insert(lhs_.var);
    if (rhs_.is_var)
      out.insert(rhs_.var);
  } else if (kind_ == Kind::kDefined) {
    out.insert(lhs_.var);
  }
  for (const Formula& child : children_)
    child.CollectVars(out);
}

void Formula::CollectAtoms(std::vector<const Formula*>& out) const {
  if (kind_ == Kind::kCmp || kind_ == Kind::kDefined)
    out.push_back(this);
  for (const Formula& child : children_)
    child.CollectAtoms(out);
}

namespace {

std::string TermString(const Term& term) {
  return term.is_var ? term.var : term.literal.DebugString();
}

}  // namespace

std::string Formula::ToString() const {
  switch (kind_) {
    case Kind::kTrue:
      return "true";
    case Kind::kFalse:
      return "false";
    case Kind::kCmp:
      if (op_ == CmpOp::kNe) {
        return "(not (= " + TermString(lhs_) + " " + TermString(rhs_) + "))";
      }
      return "(" + std::string(CmpOpSymbol(op_)) + " " + TermString(lhs_) +
             " " + TermString(rhs_) + ")";
    case Kind::kDefined:
      return lhs_.var;
    case Kind::kAnd:
    case Kind::kOr: {
      std::string out = kind_ == Kind::kAnd ? "(and" : "(or";
      for (const Formula& child : children_)
        out += " " + child.ToString();
      return out + ")";
    }
    case Kind::kNot:
      return "(not " + children_.front().ToString() + ")";
  }
  return "";
}

Formula Formula::Rename(const std::map<std::string, std::string>& rename) const {
  Formula out = *this;
  auto apply = [&rename](Term& term) {
    if (!term.is_var)
      return;
    auto it = rename.find(term.var);
    if (it != rename.end())
      term.var = it->second;
  };
  apply(out.lhs_);
  apply(out.rhs_);
  for (Formula& child : out.children_)
    child = child.Rename(rename);
  return out;
}

}  // namespace corbfuzz
