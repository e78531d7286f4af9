#ifndef CORBFUZZ_SESSION_SYNTHESIS_H_
#define CORBFUZZ_SESSION_SYNTHESIS_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "corbfuzz/formula.h"
#include "corbfuzz/solver.h"
#include "corbfuzz/value.h"

namespace corbfuzz::synth {

enum class ItemKind { kSession, kCookie };

struct ItemKey {
  ItemKind kind = ItemKind::kSession;
  std::string key;

  // "session#key" / "cookie#key"
  std::string Name() const;
  std::string PhiVar() const { return Name() + ".phi"; }
  std::string AlphaVar() const { return Name() + ".alpha"; }

  auto operator<=>(const ItemKey&) const = default;
};

class SessionAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seed -> concrete session values, shared by all workers. Entries are write
// once; null records an item that is undefined under that seed.
class GlobalSessionCache {
 public:
  std::optional<Value> Lookup(std::uint32_t seed, const ItemKey& item) const;
  // Stores |value| unless an entry exists; returns the entry's value.
  Value Store(std::uint32_t seed, const ItemKey& item, const Value& value);
  std::vector<Value> SolvedValues(const ItemKey& item) const;
  size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::uint32_t, ItemKey>, Value> values_;
  std::map<ItemKey, std::vector<Value>> solved_;
};

struct SessionSynthOptions {
  bool enabled = true;
  size_t max_exclusions = 16;
  size_t node_budget = 20000;
};

struct DecisionRecord {
  std::string item;
  bool bit = false;
  bool accepted = false;
};

// Per-request symbolic session state: decision bits drawn from a copy of the
// seed, accumulated constraints per item (RCache) and lazy concretization
// through the shared cache.
class SessionContext {
 public:
  static constexpr int kSeedBits = 32;

  SessionContext(GlobalSessionCache* cache, std::uint32_t seed,
                 SessionSynthOptions options = {});

  bool enabled() const { return options_.enabled; }

  // isset(item).
  bool IsSet(const ItemKey& item);
  // item <op> literal.
  bool Compare(const ItemKey& item, CmpOp op, const Value& literal);
  // lhs <op> rhs with both sides symbolic: lhs is concretized first.
  bool CompareItems(const ItemKey& lhs, CmpOp op, const ItemKey& rhs);
  // Any other use of the item's value.
  Value Concretize(const ItemKey& item);

  const std::map<ItemKey, Formula>& rcache() const { return rcache_; }
  std::vector<SolverVariable> VariablesOf(const ItemKey& item) const;
  bool AllSatisfiable() const;
  int bits_used() const { return bits_used_; }
  const std::vector<DecisionRecord>& trace() const { return trace_; }
  // Items concretized by this request.
  const std::set<ItemKey>& concretized() const { return concretized_; }

 private:
  bool Decide(const ItemKey& item, const Formula& when_true);
  ValueType AlphaType(const ItemKey& item);
  Formula Translate(const ItemKey& item, CmpOp op, const Value& literal);

  GlobalSessionCache* cache_;
  std::uint32_t seed_;
  std::uint32_t bits_;
  int bits_used_ = 0;
  SessionSynthOptions options_;
  std::map<ItemKey, Formula> rcache_;
  std::map<ItemKey, ValueType> alpha_types_;
  std::vector<DecisionRecord> trace_;
  std::set<ItemKey> concretized_;
};

}  // namespace corbfuzz::synth

#endif  // CORBFUZZ_SESSION_SYNTHESIS_H_
