#include "corbfuzz/session_synthesis.h"

#include "corbfuzz/rng.h"
#include "corbfuzz/strings.h"

namespace corbfuzz::synth {

std::string ItemKey::Name() const {
  return (kind == ItemKind::kSession ? "session#" : "cookie#") + key;
}

std::optional<Value> GlobalSessionCache::Lookup(std::uint32_t seed,
                                                const ItemKey& item) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = values_.find({seed, item});
  if (it == values_.end())
    return std::nullopt;
  return it->second;
}

Value GlobalSessionCache::Store(std::uint32_t seed, const ItemKey& item,
                                const Value& value) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = values_.emplace(std::make_pair(seed, item), value);
  if (inserted)
    solved_[item].push_back(value);
  return it->second;
}

std::vector<Value> GlobalSessionCache::SolvedValues(const ItemKey& item) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = solved_.find(item);
  return it == solved_.end() ? std::vector<Value>{} : it->second;
}

size_t GlobalSessionCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return values_.size();
}

SessionContext::SessionContext(GlobalSessionCache* cache, std::uint32_t seed,
                               SessionSynthOptions options)
    : cache_(cache), seed_(seed), bits_(seed), options_(options) {}

ValueType SessionContext::AlphaType(const ItemKey& item) {
  auto it = alpha_types_.find(item);
  if (it != alpha_types_.end())
    return it->second;
  Rng rng(MixSeed({seed_, Fnv1a64(item.Name()), 0xa1fULL}));
  static constexpr ValueType kTypes[] = {ValueType::kInt, ValueType::kStr,
                                         ValueType::kBool};
  ValueType type = kTypes[rng.Below(3)];
  alpha_types_[item] = type;
  return type;
}

std::vector<SolverVariable> SessionContext::VariablesOf(
    const ItemKey& item) const {
  auto it = alpha_types_.find(item);
  ValueType alpha = it == alpha_types_.end() ? ValueType::kInt : it->second;
  return {{item.PhiVar(), ValueType::kBool}, {item.AlphaVar(), alpha}};
}

Formula SessionContext::Translate(const ItemKey& item, CmpOp op,
                                  const Value& literal) {
  // Defined branch compares alpha; undefined branch compares null.
  Formula defined_branch =
      literal.is_null()
          ? (op == CmpOp::kNe ? Formula::True() : Formula::False())
          : Formula::Cmp(Term::Var(item.AlphaVar()), op, Term::Lit(literal));
  Formula undefined_branch = LooseCompare(Value(), op, literal)
                                 ? Formula::True()
                                 : Formula::False();
  Formula phi = Formula::Defined(item.PhiVar());
  return Formula::Or({Formula::And({phi, defined_branch}),
                      Formula::And({Formula::Not(phi), undefined_branch})});
}

bool SessionContext::Decide(const ItemKey& item, const Formula& when_true) {
  auto it = rcache_.find(item);
  Formula current = it == rcache_.end() ? Formula::True() : it->second;
  while (true) {
    if (bits_used_ >= kSeedBits)
      throw SessionAbort("decision bits exhausted at " + item.Name());
    bool bit = (bits_ & 1U) != 0;
    bits_ >>= 1;
    ++bits_used_;
    Formula candidate =
        Formula::And({current, bit ? when_true : Formula::Not(when_true)});
    bool sat = IsSatisfiable(candidate, VariablesOf(item));
    trace_.push_back({item.Name(), bit, sat});
    if (sat) {
      rcache_[item] = candidate;
      return bit;
    }
  }
}

bool SessionContext::IsSet(const ItemKey& item) {
  if (!options_.enabled)
    return false;
  if (auto value = cache_->Lookup(seed_, item))
    return !value->is_null();
  return Decide(item, Formula::Defined(item.PhiVar()));
}

bool SessionContext::Compare(const ItemKey& item, CmpOp op,
                             const Value& literal) {
  if (!options_.enabled)
    return LooseCompare(Value(), op, literal);
  if (auto value = cache_->Lookup(seed_, item))
    return LooseCompare(*value, op, literal);
  if (!literal.is_null() && !alpha_types_.count(item))
    alpha_types_[item] = literal.type();
  return Decide(item, Translate(item, op, literal));
}

bool SessionContext::CompareItems(const ItemKey& lhs, CmpOp op,
                                  const ItemKey& rhs) {
  Value left = Concretize(lhs);
  return Compare(rhs, MirrorOp(op), left);
}

Value SessionContext::Concretize(const ItemKey& item) {
  if (!options_.enabled)
    return Value();
  if (auto value = cache_->Lookup(seed_, item))
    return *value;
  concretized_.insert(item);
  ValueType alpha = AlphaType(item);
  auto it = rcache_.find(item);
  Formula base = it == rcache_.end() ? Formula::True() : it->second;

  Rng rng(MixSeed({seed_, Fnv1a64(item.Name()), 0xc0ULL}));
  std::vector<Formula> exclusions;
  for (const Value& prior : cache_->SolvedValues(item)) {
    if (exclusions.size() >= options_.max_exclusions)
      break;
    if (!rng.Chance(1, 2))
      continue;
    if (prior.is_null()) {
      exclusions.push_back(Formula::Defined(item.PhiVar()));
    } else if (prior.type() == alpha) {
      exclusions.push_back(Formula::Or(
          {Formula::Not(Formula::Defined(item.PhiVar())),
           Formula::Cmp(Term::Var(item.AlphaVar()), CmpOp::kNe,
                        Term::Lit(prior))}));
    }
  }

  SolveOptions solve_options;
  solve_options.seed = MixSeed({seed_, Fnv1a64(item.Name())});
  solve_options.node_budget = options_.node_budget;
  std::vector<SolverVariable> vars = VariablesOf(item);
  exclusions.insert(exclusions.begin(), base);
  std::optional<Assignment> model =
      Solve(Formula::And(exclusions), vars, {}, solve_options);
  if (!model)  // the excluded subset may cover every model; drop it
    model = Solve(base, vars, {}, solve_options);
  if (!model)
    throw SessionAbort("unsatisfiable session constraints for " + item.Name());

  const Value& phi = model->at(item.PhiVar());
  Value value = phi.as_bool() ? model->at(item.AlphaVar()) : Value();
  return cache_->Store(seed_, item, value);
}

bool SessionContext::AllSatisfiable() const {
  for (const auto& [item, formula] : rcache_) {
    if (!IsSatisfiable(formula, VariablesOf(item)))
      return false;
  }
  return true;
}

}  // namespace corbfuzz::synth
