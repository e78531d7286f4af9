#include "corbfuzz/solver.h"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace corbfuzz {

namespace {

constexpr std::int64_t kIntMin = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kIntMax = std::numeric_limits<std::int64_t>::max();
constexpr std::int64_t kRandomSpan = 1000;

// A comparison of one variable against a literal, normalised so the
// variable is on the left.
struct UnitAtom {
  CmpOp op;
  Value literal;
  bool negated = false;

  bool Admits(const Value& value) const {
    bool r = StrictCompare(value, op, literal);
    return negated ? !r : r;
  }
};

struct VarPlan {
  SolverVariable var;
  std::vector<UnitAtom> units;
  std::vector<Value> candidates;
  // Same-typed variables this one is compared with.
  std::vector<std::string> partners;
};

void CollectUnits(const Formula& f,
                  bool negated,
                  std::map<std::string, std::vector<UnitAtom>>& units) {
  switch (f.kind()) {
    case Formula::Kind::kAnd:
      if (!negated) {
        for (const Formula& child : f.children())
          CollectUnits(child, false, units);
      }
      return;
    case Formula::Kind::kNot:
      CollectUnits(f.children().front(), !negated, units);
      return;
    case Formula::Kind::kOr:
      // not (a or b) == (not a) and (not b)
      if (negated) {
        for (const Formula& child : f.children())
          CollectUnits(child, true, units);
      }
      return;
    case Formula::Kind::kDefined:
      units[f.var()].push_back({CmpOp::kEq, Value(true), negated});
      return;
    case Formula::Kind::kCmp: {
      const Term& lhs = f.lhs();
      const Term& rhs = f.rhs();
      if (lhs.is_var && !rhs.is_var)
        units[lhs.var].push_back({f.op(), rhs.literal, negated});
      else if (!lhs.is_var && rhs.is_var)
        units[rhs.var].push_back({MirrorOp(f.op()), lhs.literal, negated});
      return;
    }
    default:
      return;
  }
}

bool AdmitsAll(const std::vector<UnitAtom>& units, const Value& value) {
  return std::all_of(units.begin(), units.end(),
                     [&value](const UnitAtom& u) { return u.Admits(value); });
}

std::int64_t SaturatingAdd(std::int64_t a, std::int64_t b) {
  if (b > 0 && a > kIntMax - b)
    return kIntMax;
  if (b < 0 && a < kIntMin - b)
    return kIntMin;
  return a + b;
}

void IntBounds(const std::vector<UnitAtom>& units,
               std::int64_t& lo,
               std::int64_t& hi) {
  lo = kIntMin;
  hi = kIntMax;
  for (const UnitAtom& u : units) {
    if (!u.literal.is_int())
      continue;
    std::int64_t v = u.literal.as_int();
    CmpOp op = u.negated ? NegateOp(u.op) : u.op;
    switch (op) {
      case CmpOp::kEq:
        lo = std::max(lo, v);
        hi = std::min(hi, v);
        break;
      case CmpOp::kLt:
        hi = std::min(hi, SaturatingAdd(v, -1));
        break;
      case CmpOp::kLe:
        hi = std::min(hi, v);
        break;
      case CmpOp::kGt:
        lo = std::max(lo, SaturatingAdd(v, 1));
        break;
      case CmpOp::kGe:
        lo = std::max(lo, v);
        break;
      case CmpOp::kNe:
        break;
    }
  }
}

void AddUnique(std::vector<Value>& out, std::set<Value>& seen, Value v) {
  if (seen.insert(v).second)
    out.push_back(std::move(v));
}

void IntCandidates(VarPlan& plan,
                   const std::vector<Value>& literals,
                   Rng& rng,
                   size_t random_count) {
  std::int64_t lo, hi;
  IntBounds(plan.units, lo, hi);
  std::vector<Value> raw;
  if (lo <= hi) {
    std::int64_t rlo = lo, rhi = hi;
    if (lo == kIntMin && hi == kIntMax) {
      rlo = -kRandomSpan;
      rhi = kRandomSpan;
    } else if (lo == kIntMin) {
      rlo = SaturatingAdd(hi, -kRandomSpan);
    } else if (hi == kIntMax) {
      rhi = SaturatingAdd(lo, kRandomSpan);
    }
    for (size_t i = 0; i < random_count; ++i)
      raw.emplace_back(rng.Range(rlo, rhi));
    for (std::int64_t v : {lo, hi, SaturatingAdd(lo, 1), SaturatingAdd(hi, -1)})
      raw.emplace_back(v);
  }
  for (const Value& lit : literals) {
    if (!lit.is_int())
      continue;
    raw.push_back(lit);
    raw.emplace_back(SaturatingAdd(lit.as_int(), 1));
    raw.emplace_back(SaturatingAdd(lit.as_int(), -1));
  }
  for (std::int64_t v : {0, 1, -1})
    raw.emplace_back(v);
  std::set<Value> seen;
  for (Value& v : raw) {
    if (AdmitsAll(plan.units, v))
      AddUnique(plan.candidates, seen, std::move(v));
  }
}

void StrCandidates(VarPlan& plan,
                   const std::vector<Value>& literals,
                   Rng& rng,
                   size_t random_count) {
  std::vector<Value> raw;
  for (size_t i = 0; i < random_count; ++i)
    raw.emplace_back(RandomSynthString(rng));
  for (const Value& lit : literals) {
    if (!lit.is_str())
      continue;
    const std::string& s = lit.as_str();
    raw.push_back(lit);
    std::string suffix = RandomSynthString(rng);
    raw.emplace_back(s + (suffix.empty() ? std::string("a") : suffix));
    raw.emplace_back(s + " ");
    if (!s.empty())
      raw.emplace_back(s.substr(0, s.size() - 1));
  }
  raw.emplace_back(std::string());
  raw.emplace_back(std::string("a"));
  std::set<Value> seen;
  for (Value& v : raw) {
    if (v.as_str().size() > kMaxSynthStringLength)
      v = Value(v.as_str().substr(0, kMaxSynthStringLength));
    if (AdmitsAll(plan.units, v))
      AddUnique(plan.candidates, seen, std::move(v));
  }
}

void BoolCandidates(VarPlan& plan, Rng& rng) {
  bool first = rng.Chance(1, 2);
  std::set<Value> seen;
  for (bool b : {first, !first}) {
    if (AdmitsAll(plan.units, Value(b)))
      AddUnique(plan.candidates, seen, Value(b));
  }
}

class Search {
 public:
  Search(const Formula& formula,
         std::vector<VarPlan> plans,
         Assignment fixed,
         size_t budget,
         const RejectFn& reject)
      : formula_(formula),
        plans_(std::move(plans)),
        assignment_(std::move(fixed)),
        budget_(budget),
        reject_(reject) {}

  std::optional<Assignment> Run() {
    if (Descend(0))
      return assignment_;
    return std::nullopt;
  }

 private:
  bool Descend(size_t index) {
    if (index == plans_.size()) {
      auto r = formula_.Evaluate(assignment_);
      if (!r || !*r)
        return false;
      return !(reject_ && reject_(assignment_));
    }
    const VarPlan& plan = plans_[index];
    for (const Value& candidate : Candidates(plan)) {
      if (++nodes_ > budget_)
        return false;
      assignment_[plan.var.name] = candidate;
      auto r = formula_.Evaluate(assignment_);
      if (r.has_value() && !*r)
        continue;
      if (Descend(index + 1))
        return true;
      if (nodes_ > budget_)
        return false;
    }
    assignment_.erase(plan.var.name);
    return false;
  }

  std::vector<Value> Candidates(const VarPlan& plan) const {
    if (plan.partners.empty())
      return plan.candidates;
    std::vector<Value> dynamic;
    for (const std::string& partner : plan.partners) {
      auto it = assignment_.find(partner);
      if (it == assignment_.end() || it->second.type() != plan.var.type)
        continue;
      const Value& v = it->second;
      dynamic.push_back(v);
      if (v.is_int()) {
        dynamic.emplace_back(SaturatingAdd(v.as_int(), 1));
        dynamic.emplace_back(SaturatingAdd(v.as_int(), -1));
      } else if (v.is_str()) {
        if (v.as_str().size() < kMaxSynthStringLength)
          dynamic.emplace_back(v.as_str() + "a");
        if (!v.as_str().empty())
          dynamic.emplace_back(v.as_str().substr(0, v.as_str().size() - 1));
      } else if (v.is_bool()) {
        dynamic.emplace_back(!v.as_bool());
      }
    }
    std::vector<Value> out;
    std::set<Value> seen;
    // One random candidate first keeps results varied; partner-derived
    // values follow so equalities between variables are reachable.
    size_t head = std::min<size_t>(1, plan.candidates.size());
    for (size_t i = 0; i < head; ++i)
      AddUnique(out, seen, plan.candidates[i]);
    for (Value& v : dynamic) {
      if (AdmitsAll(plan.units, v))
        AddUnique(out, seen, std::move(v));
    }
    for (size_t i = head; i < plan.candidates.size(); ++i)
      AddUnique(out, seen, plan.candidates[i]);
    return out;
  }

  const Formula& formula_;
  std::vector<VarPlan> plans_;
  Assignment assignment_;
  size_t budget_;
  size_t nodes_ = 0;
  const RejectFn& reject_;
};

}  // namespace

std::string RandomSynthString(Rng& rng) {
  size_t length = rng.Below(13);
  std::string out;
  out.reserve(length);
  for (size_t i = 0; i < length; ++i) {
    if (rng.Chance(1, 16))
      out.push_back(static_cast<char>(rng.Below(0x20)));
    else
      out.push_back(static_cast<char>(0x20 + rng.Below(0x7f - 0x20)));
  }
  return out;
}

std::optional<Assignment> Solve(const Formula& formula,
                                const std::vector<SolverVariable>& variables,
                                const Assignment& fixed,
                                const SolveOptions& options,
                                const RejectFn& reject) {
  std::set<std::string> formula_vars;
  formula.CollectVars(formula_vars);
  std::set<std::string> declared;
  for (const SolverVariable& v : variables)
    declared.insert(v.name);
  for (const std::string& name : formula_vars) {
    if (!declared.count(name) && !fixed.count(name))
      throw std::invalid_argument("undeclared solver variable: " + name);
  }

  std::map<std::string, std::vector<UnitAtom>> units;
  CollectUnits(formula, false, units);

  std::map<std::string, std::vector<Value>> literals;
  std::map<std::string, std::set<std::string>> partners;
  std::vector<const Formula*> atoms;
  formula.CollectAtoms(atoms);
  for (const Formula* atom : atoms) {
    if (atom->kind() != Formula::Kind::kCmp)
      continue;
    const Term& lhs = atom->lhs();
    const Term& rhs = atom->rhs();
    if (lhs.is_var && !rhs.is_var)
      literals[lhs.var].push_back(rhs.literal);
    else if (!lhs.is_var && rhs.is_var)
      literals[rhs.var].push_back(lhs.literal);
    else if (lhs.is_var && rhs.is_var) {
      partners[lhs.var].insert(rhs.var);
      partners[rhs.var].insert(lhs.var);
    }
  }

  Rng rng(options.seed);
  std::vector<VarPlan> plans;
  for (const SolverVariable& v : variables) {
    if (fixed.count(v.name))
      continue;
    VarPlan plan;
    plan.var = v;
    plan.units = units[v.name];
    const auto& lits = literals[v.name];
    switch (v.type) {
      case ValueType::kInt:
        IntCandidates(plan, lits, rng, options.random_candidates);
        break;
      case ValueType::kStr:
        StrCandidates(plan, lits, rng, options.random_candidates);
        break;
      case ValueType::kBool:
        BoolCandidates(plan, rng);
        break;
      case ValueType::kNull:
        if (AdmitsAll(plan.units, Value()))
          plan.candidates.emplace_back();
        break;
    }
    if (plan.candidates.empty())
      return std::nullopt;
    plan.partners.assign(partners[v.name].begin(), partners[v.name].end());
    plans.push_back(std::move(plan));
  }

  Search search(formula, std::move(plans), fixed, options.node_budget, reject);
  return search.Run();
}

bool IsSatisfiable(const Formula& formula,
                   const std::vector<SolverVariable>& variables) {
  SolveOptions options;
  options.seed = 0x5a7;
  return Solve(formula, variables, {}, options).has_value();
}

}  // namespace corbfuzz
