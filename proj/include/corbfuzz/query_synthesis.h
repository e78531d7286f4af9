#ifndef CORBFUZZ_QUERY_SYNTHESIS_H_
#define CORBFUZZ_QUERY_SYNTHESIS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corbfuzz/formula.h"
#include "corbfuzz/rng.h"
#include "corbfuzz/sql.h"
#include "corbfuzz/value.h"

namespace corbfuzz::synth {

// Raised when a query's constraints cannot be met; the interpreter turns it
// into an aborted request.
class SynthesisAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Weighted candidate types of one field.
class TypeDomain {
 public:
  explicit TypeDomain(std::uint64_t initial_weight = 1);

  void AddWeight(ValueType type, std::uint64_t amount);
  void Pin(ValueType type) { pinned_ = type; }
  const std::optional<ValueType>& pinned() const { return pinned_; }
  std::uint64_t weight(ValueType type) const;

  // Pinned type if any, else a weighted draw (A-Res with a sample of one).
  ValueType Sample(Rng& rng) const;

 private:
  std::uint64_t int_weight_;
  std::uint64_t str_weight_;
  std::uint64_t bool_weight_;
  std::optional<ValueType> pinned_;
};

// A-Res draw over (type, weight) pairs; zero weights are never chosen.
ValueType SampleWeighted(const std::vector<std::pair<ValueType, std::uint64_t>>&
                             weights,
                         Rng& rng);

struct WitnessTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
};

// Concrete answer to one query under one seed. Output rows are backed by
// witness rows of the base tables; materializing |tables| as a database and
// running the query yields |rows| again.
struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  std::map<std::string, WitnessTable> tables;
  // Per output row, the (table, witness row index) pairs it was built from.
  std::vector<std::vector<std::pair<std::string, size_t>>> witnesses;
  // "table#field" -> sampled type.
  std::map<std::string, ValueType> types;
  Assignment assignment;
  std::uint64_t digest = 0;
  // Row placement draw the result was built with.
  std::uint64_t structure = 0;

  size_t size() const { return rows.size(); }
  // Value of output column |name| in |row|; nullopt when either is absent.
  std::optional<Value> Get(size_t row, const std::string& name) const;
  // Resource identity of one witness row: table plus sorted field=value list.
  std::string RowDigest(const std::string& table, size_t index) const;
};

struct QuerySynthOptions {
  bool type_inference = true;
  std::uint64_t initial_weight = 1;
  std::uint64_t hint_weight = 4;
  // Row count used in place of an unbounded (or larger) MaxRow.
  std::uint64_t row_cap = 8;
  size_t node_budget = 200000;
};

// Shared query cache, type domains and concrete results. Thread-safe; solving
// runs outside the lock.
class QuerySynthesizer {
 public:
  explicit QuerySynthesizer(QuerySynthOptions options = {});

  // Parses and caches the query on first sight. Returns the cached result for
  // (query, seed) if one was already solved. Throws sql::UnsupportedSql.
  std::shared_ptr<const ResultSet> Add(const std::string& query,
                                       std::uint64_t seed);

  // Result covering at least the current field set, solving if needed.
  std::shared_ptr<const ResultSet> Rows(const std::string& query,
                                        std::uint64_t seed);

  // Makes |name| readable (extending F for wildcard projections) and returns
  // the result that covers it. Unknown names of explicit projections leave
  // the result unchanged. Throws SynthesisAbort when unsatisfiable.
  std::shared_ptr<const ResultSet> Field(const std::string& query,
                                         std::uint64_t seed,
                                         const std::string& name);

  // Type hint for output column |name| of |query|.
  void Notify(const std::string& query, const std::string& name,
              ValueType type);

  // Source field of an output column, when it has one.
  std::optional<sql::FieldRef> Resolve(const std::string& query,
                                       const std::string& name) const;

  std::vector<std::string> TablesOf(const std::string& query) const;
  std::optional<sql::RowBound> MaxRowOf(const std::string& query) const;
  std::vector<sql::FieldRef> FieldsOf(const std::string& query) const;
  Formula ConstraintsOf(const std::string& query) const;
  std::optional<TypeDomain> DomainOf(const std::string& query,
                                     const sql::FieldRef& field) const;

  const QuerySynthOptions& options() const { return options_; }

 private:
  struct Entry {
    sql::RelAlgExpr ra;
    sql::RowBound max_row;
    std::vector<sql::FieldRef> fields;  // F, insertion order
    Formula constraints;
    std::map<sql::FieldRef, TypeDomain> domains;
    std::optional<sql::SelectCore> single_core;
    bool has_set_operator = false;
    bool is_count = false;
    // (typed field vector, len) -> digests of emitted results.
    std::map<std::string, std::set<std::uint64_t>> solved;
  };

  Entry& EntryLocked(const std::string& query);
  std::shared_ptr<const ResultSet> Materialize(
      const std::string& query, std::uint64_t seed,
      std::shared_ptr<const ResultSet> previous);

  QuerySynthOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
  std::map<std::pair<std::string, std::uint64_t>,
           std::shared_ptr<const ResultSet>>
      results_;
};

}  // namespace corbfuzz::synth

#endif  // CORBFUZZ_QUERY_SYNTHESIS_H_
