#include "corbfuzz/query_synthesis.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "corbfuzz/solver.h"
#include "corbfuzz/strings.h"

namespace corbfuzz::synth {

TypeDomain::TypeDomain(std::uint64_t initial_weight)
    : int_weight_(initial_weight),
      str_weight_(initial_weight),
      bool_weight_(initial_weight) {}

void TypeDomain::AddWeight(ValueType type, std::uint64_t amount) {
  switch (type) {
    case ValueType::kInt:
      int_weight_ += amount;
      break;
    case ValueType::kStr:
      str_weight_ += amount;
      break;
    case ValueType::kBool:
      bool_weight_ += amount;
      break;
    case ValueType::kNull:
      break;  // not a member of the domain
  }
}

std::uint64_t TypeDomain::weight(ValueType type) const {
  switch (type) {
    case ValueType::kInt:
      return int_weight_;
    case ValueType::kStr:
      return str_weight_;
    case ValueType::kBool:
      return bool_weight_;
    case ValueType::kNull:
      return 0;
  }
  return 0;
}

ValueType TypeDomain::Sample(Rng& rng) const {
  if (pinned_)
    return *pinned_;
  return SampleWeighted({{ValueType::kInt, int_weight_},
                         {ValueType::kStr, str_weight_},
                         {ValueType::kBool, bool_weight_}},
                        rng);
}

ValueType SampleWeighted(
    const std::vector<std::pair<ValueType, std::uint64_t>>& weights, Rng& rng) {
  // Key u^(1/w), compared in log space: log(u)/w.
  ValueType best = ValueType::kInt;
  double best_key = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& [type, weight] : weights) {
    double u = rng.UnitOpen();
    if (weight == 0)
      continue;
    double key = std::log(u) / static_cast<double>(weight);
    if (!any || key > best_key) {
      best = type;
      best_key = key;
      any = true;
    }
  }
  return best;
}

std::optional<Value> ResultSet::Get(size_t row, const std::string& name) const {
  if (row >= rows.size())
    return std::nullopt;
  std::string key = AsciiLower(name);
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == key)
      return rows[row][i];
  }
  return std::nullopt;
}

std::string ResultSet::RowDigest(const std::string& table, size_t index) const {
  const WitnessTable& t = tables.at(table);
  std::vector<std::pair<std::string, std::string>> cells;
  for (size_t c = 0; c < t.columns.size(); ++c)
    cells.emplace_back(t.columns[c], t.rows[index][c].DebugString());
  std::sort(cells.begin(), cells.end());
  std::string text = table;
  for (const auto& [column, value] : cells)
    text += "\x1f" + column + "=" + value;
  return HexDigest(Fnv1a64(text));
}

namespace {

constexpr std::uint64_t kStructureDraws = 4;

using sql::FieldRef;
using sql::RelAlgExpr;

// Plan tree mirroring the algebra with select cores as leaves.
struct PlanNode {
  enum class Kind { kCore, kUnion, kIntersect, kLimit } kind = Kind::kCore;
  std::uint64_t cap = 0;
  std::uint64_t assigned = 0;
  size_t core = 0;
  std::vector<PlanNode> children;
};

struct CoreInfo {
  sql::SelectCore core;
  std::vector<FieldRef> outputs;  // source fields of the output columns
};

std::uint64_t CapOf(const sql::RowBound& bound, std::uint64_t row_cap) {
  return bound ? std::min(*bound, row_cap) : row_cap;
}

PlanNode BuildPlan(const RelAlgExpr& ra, std::uint64_t row_cap,
                   std::vector<CoreInfo>& cores) {
  PlanNode node;
  if (auto core = sql::DescribeCore(ra)) {
    node.kind = PlanNode::Kind::kCore;
    node.cap = CapOf(sql::MaxRow(ra), row_cap);
    node.core = cores.size();
    CoreInfo info;
    info.core = std::move(*core);
    for (const auto& [name, field] : info.core.outputs)
      info.outputs.push_back(field);
    cores.push_back(std::move(info));
    return node;
  }
  for (const RelAlgExpr& child : ra.children)
    node.children.push_back(BuildPlan(child, row_cap, cores));
  switch (ra.kind) {
    case RelAlgExpr::Kind::kUnion:
      node.kind = PlanNode::Kind::kUnion;
      for (const PlanNode& child : node.children)
        node.cap += child.cap;
      break;
    case RelAlgExpr::Kind::kIntersect:
      node.kind = PlanNode::Kind::kIntersect;
      node.cap = node.children.front().cap;
      for (const PlanNode& child : node.children)
        node.cap = std::min(node.cap, child.cap);
      break;
    case RelAlgExpr::Kind::kLimit:
      node.kind = PlanNode::Kind::kLimit;
      node.cap = std::min(ra.limit, node.children.front().cap);
      break;
    default:
      throw std::logic_error("unexpected algebra node in plan");
  }
  return node;
}

bool CanAccept(const PlanNode& node) {
  if (node.assigned >= node.cap)
    return false;
  switch (node.kind) {
    case PlanNode::Kind::kCore:
      return true;
    case PlanNode::Kind::kLimit:
      return CanAccept(node.children.front());
    case PlanNode::Kind::kUnion:
      return std::any_of(node.children.begin(), node.children.end(),
                         [](const PlanNode& c) { return CanAccept(c); });
    case PlanNode::Kind::kIntersect:
      return std::all_of(node.children.begin(), node.children.end(),
                         [](const PlanNode& c) { return CanAccept(c); });
  }
  return false;
}

void CollectCores(const PlanNode& node, std::vector<size_t>& out) {
  if (node.kind == PlanNode::Kind::kCore)
    out.push_back(node.core);
  for (const PlanNode& child : node.children)
    CollectCores(child, out);
}

class UnionFind {
 public:
  std::string Find(const std::string& x) {
    auto it = parent_.find(x);
    if (it == parent_.end() || it->second == x)
      return x;
    std::string root = Find(it->second);
    parent_[x] = root;
    return root;
  }
  void Link(const std::string& a, const std::string& b) {
    std::string ra = Find(a);
    std::string rb = Find(b);
    if (ra != rb)
      parent_[std::max(ra, rb)] = std::min(ra, rb);
  }

 private:
  std::map<std::string, std::string> parent_;
};

void LinkIntersections(const PlanNode& node, const std::vector<CoreInfo>& cores,
                       UnionFind& classes) {
  if (node.kind == PlanNode::Kind::kIntersect) {
    std::vector<size_t> under;
    CollectCores(node, under);
    for (size_t c : under) {
      const auto& first = cores[under.front()].outputs;
      const auto& other = cores[c].outputs;
      for (size_t k = 0; k < std::min(first.size(), other.size()); ++k)
        classes.Link(first[k].VarName(), other[k].VarName());
    }
  }
  for (const PlanNode& child : node.children)
    LinkIntersections(child, cores, classes);
}

std::string WitnessVar(size_t index, const FieldRef& field) {
  return "w" + std::to_string(index) + ":" + field.VarName();
}

std::string FieldOfWitnessVar(const std::string& var) {
  return var.substr(var.find(':') + 1);
}

// Structure of one concrete result before solving.
struct Skeleton {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> row_terms;  // witness var per column
  std::vector<std::vector<std::pair<std::string, size_t>>> witnesses;
  std::map<std::string, size_t> table_rows;
  std::map<std::string, std::vector<FieldRef>> table_fields;
  std::vector<Formula> constraints;
  std::vector<SolverVariable> variables;
  std::optional<std::string> count_column;
  std::uint64_t count_value = 0;
  std::string count_table;
};

class SkeletonBuilder {
 public:
  SkeletonBuilder(std::vector<CoreInfo>& cores,
                  const std::map<std::string, ValueType>& types,
                  Skeleton& out)
      : cores_(cores), types_(types), out_(out) {}

  std::vector<std::string> Witness(size_t core_index) {
    CoreInfo& info = cores_[core_index];
    const std::string& table = info.core.table;
    size_t index = out_.table_rows[table]++;
    std::map<std::string, std::string> rename;
    for (const FieldRef& field : out_.table_fields[table]) {
      std::string var = WitnessVar(index, field);
      rename[field.VarName()] = var;
      out_.variables.push_back({var, types_.at(field.VarName())});
    }
    out_.constraints.push_back(info.core.condition.Rename(rename));
    current_witnesses_.emplace_back(table, index);
    std::vector<std::string> terms;
    for (const FieldRef& field : info.outputs)
      terms.push_back(rename.at(field.VarName()));
    return terms;
  }

  std::vector<std::string> Assign(PlanNode& node, Rng& rng) {
    ++node.assigned;
    switch (node.kind) {
      case PlanNode::Kind::kCore:
        return Witness(node.core);
      case PlanNode::Kind::kLimit:
        return Assign(node.children.front(), rng);
      case PlanNode::Kind::kUnion: {
        std::vector<PlanNode*> open;
        for (PlanNode& child : node.children) {
          if (CanAccept(child))
            open.push_back(&child);
        }
        return Assign(*open[rng.Below(open.size())], rng);
      }
      case PlanNode::Kind::kIntersect: {
        std::vector<std::string> first;
        for (size_t c = 0; c < node.children.size(); ++c) {
          std::vector<std::string> terms = Assign(node.children[c], rng);
          if (c == 0) {
            first = std::move(terms);
            continue;
          }
          for (size_t k = 0; k < std::min(first.size(), terms.size()); ++k) {
            out_.constraints.push_back(Formula::Cmp(
                Term::Var(first[k]), CmpOp::kEq, Term::Var(terms[k])));
          }
        }
        return first;
      }
    }
    return {};
  }

  void AddRow(PlanNode& root, Rng& rng) {
    current_witnesses_.clear();
    out_.row_terms.push_back(Assign(root, rng));
    out_.witnesses.push_back(current_witnesses_);
  }

 private:
  std::vector<CoreInfo>& cores_;
  const std::map<std::string, ValueType>& types_;
  Skeleton& out_;
  std::vector<std::pair<std::string, size_t>> current_witnesses_;
};

ResultSet BuildResult(const Skeleton& skeleton,
                      const std::map<std::string, ValueType>& types,
                      const Assignment& assignment) {
  ResultSet result;
  result.columns = skeleton.columns;
  result.witnesses = skeleton.witnesses;
  result.types = types;
  result.assignment = assignment;
  for (const auto& [table, fields] : skeleton.table_fields) {
    WitnessTable& t = result.tables[table];
    for (const FieldRef& field : fields)
      t.columns.push_back(field.field);
    size_t count = skeleton.table_rows.count(table)
                       ? skeleton.table_rows.at(table)
                       : 0;
    for (size_t i = 0; i < count; ++i) {
      std::vector<Value> row;
      for (const FieldRef& field : fields)
        row.push_back(assignment.at(WitnessVar(i, field)));
      t.rows.push_back(std::move(row));
    }
  }
  if (skeleton.count_column) {
    for (size_t i = 0; i < skeleton.row_terms.size(); ++i)
      result.rows.push_back({Value(static_cast<std::int64_t>(skeleton.count_value))});
  } else {
    for (const std::vector<std::string>& terms : skeleton.row_terms) {
      std::vector<Value> row;
      for (const std::string& var : terms)
        row.push_back(assignment.at(var));
      result.rows.push_back(std::move(row));
    }
  }
  std::string text;
  for (const auto& row : result.rows) {
    for (const Value& v : row)
      text += v.DebugString() + "\x1f";
    text += "\x1e";
  }
  for (const auto& [table, t] : result.tables) {
    text += table + "\x1d";
    for (const auto& row : t.rows) {
      for (const Value& v : row)
        text += v.DebugString() + "\x1f";
      text += "\x1e";
    }
  }
  result.digest = Fnv1a64(text);
  return result;
}

}  // namespace

QuerySynthesizer::QuerySynthesizer(QuerySynthOptions options)
    : options_(options) {}

QuerySynthesizer::Entry& QuerySynthesizer::EntryLocked(
    const std::string& query) {
  auto it = entries_.find(query);
  if (it != entries_.end())
    return it->second;
  Entry entry;
  entry.ra = sql::ParseSql(query);
  entry.max_row = sql::MaxRow(entry.ra);
  std::map<FieldRef, ValueType> pins;
  entry.constraints = sql::Constraints(entry.ra, &pins);
  for (const FieldRef& field : sql::Fields(entry.ra)) {
    entry.fields.push_back(field);
    TypeDomain domain(options_.initial_weight);
    if (auto pin = pins.find(field); pin != pins.end())
      domain.Pin(pin->second);
    entry.domains.emplace(field, domain);
  }
  entry.single_core = sql::DescribeCore(entry.ra);
  entry.has_set_operator = sql::HasSetOperator(entry.ra);
  entry.is_count = entry.single_core && entry.single_core->is_count;
  return entries_.emplace(query, std::move(entry)).first->second;
}

std::shared_ptr<const ResultSet> QuerySynthesizer::Add(const std::string& query,
                                                       std::uint64_t seed) {
  std::lock_guard<std::mutex> lock(mutex_);
  EntryLocked(query);
  auto it = results_.find({query, seed});
  return it == results_.end() ? nullptr : it->second;
}

std::shared_ptr<const ResultSet> QuerySynthesizer::Rows(const std::string& query,
                                                        std::uint64_t seed) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    EntryLocked(query);
    auto it = results_.find({query, seed});
    if (it != results_.end())
      return it->second;
  }
  return Materialize(query, seed, nullptr);
}

std::shared_ptr<const ResultSet> QuerySynthesizer::Field(
    const std::string& query, std::uint64_t seed, const std::string& name) {
  std::shared_ptr<const ResultSet> previous;
  std::optional<FieldRef> needed;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    Entry& entry = EntryLocked(query);
    std::string key = AsciiLower(name);
    if (entry.single_core && entry.single_core->wildcard) {
      FieldRef ref{entry.single_core->table, key};
      if (std::find(entry.fields.begin(), entry.fields.end(), ref) ==
          entry.fields.end()) {
        entry.fields.push_back(ref);
        entry.domains.try_emplace(ref, TypeDomain(options_.initial_weight));
      }
      needed = ref;
    }
    auto it = results_.find({query, seed});
    if (it != results_.end()) {
      previous = it->second;
      if (!needed || previous->types.count(needed->VarName()))
        return previous;
    }
  }
  return Materialize(query, seed, previous);
}

std::shared_ptr<const ResultSet> QuerySynthesizer::Materialize(
    const std::string& query, std::uint64_t seed,
    std::shared_ptr<const ResultSet> previous) {
  // Snapshot the cache entry.
  RelAlgExpr ra;
  std::vector<FieldRef> fields;
  std::map<FieldRef, TypeDomain> domains;
  bool has_set_operator = false;
  bool is_count = false;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    Entry& entry = EntryLocked(query);
    ra = entry.ra;
    fields = entry.fields;
    domains = entry.domains;
    has_set_operator = entry.has_set_operator;
    is_count = entry.is_count;
  }
  const std::uint64_t qhash = Fnv1a64(query);

  std::vector<CoreInfo> cores;
  const PlanNode plan = BuildPlan(ra, options_.row_cap, cores);
  for (CoreInfo& info : cores) {
    if (info.core.wildcard) {
      for (const FieldRef& field : fields) {
        if (field.table == info.core.table)
          info.outputs.push_back(field);
      }
    }
  }

  // Type classes: fields compared with each other or aligned by INTERSECT
  // share one sampled type.
  UnionFind classes;
  for (const CoreInfo& info : cores) {
    std::vector<const Formula*> atoms;
    info.core.condition.CollectAtoms(atoms);
    for (const Formula* atom : atoms) {
      if (atom->kind() == Formula::Kind::kCmp && atom->lhs().is_var &&
          atom->rhs().is_var) {
        classes.Link(atom->lhs().var, atom->rhs().var);
      }
    }
  }
  LinkIntersections(plan, cores, classes);

  std::map<std::string, std::vector<FieldRef>> members;
  for (const FieldRef& field : fields)
    members[classes.Find(field.VarName())].push_back(field);
  std::map<std::string, ValueType> class_type;
  for (const auto& [rep, group] : members) {
    std::optional<ValueType> chosen;
    if (previous) {
      for (const FieldRef& field : group) {
        auto it = previous->types.find(field.VarName());
        if (it != previous->types.end()) {
          chosen = it->second;
          break;
        }
      }
    }
    if (!chosen) {
      for (const FieldRef& field : group) {
        if (domains.at(field).pinned()) {
          chosen = *domains.at(field).pinned();
          break;
        }
      }
    }
    if (!chosen) {
      std::vector<std::pair<ValueType, std::uint64_t>> weights;
      for (ValueType type : {ValueType::kInt, ValueType::kStr, ValueType::kBool}) {
        std::uint64_t total = 0;
        for (const FieldRef& field : group)
          total += domains.at(field).weight(type);
        weights.emplace_back(type, total);
      }
      Rng rng(MixSeed({seed, qhash, Fnv1a64(rep)}));
      chosen = SampleWeighted(weights, rng);
    }
    class_type[rep] = *chosen;
  }
  std::map<std::string, ValueType> types;
  for (const FieldRef& field : fields)
    types[field.VarName()] = class_type.at(classes.Find(field.VarName()));

  // Row placement into union branches is random; a placement can be
  // unsatisfiable (two rows in a branch pinned to one value) where another is
  // not, so fresh placements are tried before giving up. Extensions reuse the
  // placement of the result they extend.
  auto attempt = [&](std::uint64_t draw) -> std::shared_ptr<const ResultSet> {
    Skeleton skeleton;
    for (const FieldRef& field : fields)
      skeleton.table_fields[field.table].push_back(field);
    for (const CoreInfo& info : cores)
      skeleton.table_fields[info.core.table];  // tables without fields
    if (is_count) {
      const auto& [name, field] = cores.front().core.outputs.front();
      skeleton.columns = {name};
      skeleton.count_column = name;
      types[FieldRef{field.table, name}.VarName()] = ValueType::kInt;
    } else if (cores.front().core.wildcard) {
      for (const FieldRef& field : cores.front().outputs)
        skeleton.columns.push_back(field.field);
    } else {
      for (const auto& [name, field] : cores.front().core.outputs)
        skeleton.columns.push_back(name);
    }

    PlanNode root = plan;
    Rng structure(draw == 0 ? MixSeed({seed, qhash, 0x5eedULL})
                            : MixSeed({seed, qhash, 0x5eedULL, draw}));
    SkeletonBuilder builder(cores, types, skeleton);
    std::uint64_t len = 0;
    if (is_count) {
      len = root.cap > 0 ? 1 : 0;
      skeleton.count_value = structure.Below(options_.row_cap + 1);
      for (std::uint64_t i = 0; i < skeleton.count_value; ++i)
        builder.Witness(0);
      std::vector<std::pair<std::string, size_t>> all;
      for (std::uint64_t i = 0; i < skeleton.count_value; ++i)
        all.emplace_back(cores.front().core.table, i);
      for (std::uint64_t i = 0; i < len; ++i) {
        skeleton.row_terms.emplace_back();
        skeleton.witnesses.push_back(all);
      }
    } else {
      len = seed % (std::min(root.cap, options_.row_cap) + 1);
      for (std::uint64_t i = 0; i < len; ++i)
        builder.AddRow(root, structure);
    }

    if (has_set_operator) {
      // Set semantics: output rows must be pairwise distinct.
      for (size_t i = 0; i < skeleton.row_terms.size(); ++i) {
        for (size_t j = i + 1; j < skeleton.row_terms.size(); ++j) {
          std::vector<Formula> differ;
          bool type_differs = false;
          const auto& a = skeleton.row_terms[i];
          const auto& b = skeleton.row_terms[j];
          for (size_t k = 0; k < a.size(); ++k) {
            if (types.at(FieldOfWitnessVar(a[k])) !=
                types.at(FieldOfWitnessVar(b[k]))) {
              type_differs = true;
              break;
            }
            differ.push_back(
                Formula::Cmp(Term::Var(a[k]), CmpOp::kNe, Term::Var(b[k])));
          }
          if (!type_differs)
            skeleton.constraints.push_back(Formula::Or(std::move(differ)));
        }
      }
    }

    std::string key;
    for (const FieldRef& field : fields)
      key += field.VarName() + ":" + std::string(TypeName(types.at(field.VarName()))) + ",";
    key += "|" + std::to_string(len);

    Formula formula = Formula::And(skeleton.constraints);
    Assignment fixed;
    std::vector<SolverVariable> free_vars;
    for (const SolverVariable& var : skeleton.variables) {
      if (previous) {
        auto it = previous->assignment.find(var.name);
        if (it != previous->assignment.end()) {
          fixed.emplace(var.name, it->second);
          continue;
        }
      }
      free_vars.push_back(var);
    }

    // An empty result cannot differ from an earlier empty result.
    const bool empty = len == 0 || (is_count && skeleton.count_value == 0);
    const bool distinct = !fields.empty() && !empty;
    for (int attempt = 0; attempt < 4; ++attempt) {
      std::set<std::uint64_t> seen;
      if (distinct) {
        std::lock_guard<std::mutex> lock(mutex_);
        seen = entries_.at(query).solved[key];
      }
      RejectFn reject;
      if (distinct) {
        reject = [&](const Assignment& model) {
          return seen.count(BuildResult(skeleton, types, model).digest) > 0;
        };
      }
      SolveOptions solve_options;
      solve_options.seed = MixSeed({seed, qhash, fields.size(),
                                    static_cast<std::uint64_t>(attempt)});
      solve_options.node_budget = options_.node_budget;
      std::optional<Assignment> model =
          Solve(formula, free_vars, fixed, solve_options, reject);
      if (!model)
        throw SynthesisAbort("unsatisfiable query constraints: " + query);
      auto result = std::make_shared<ResultSet>(BuildResult(skeleton, types, *model));
      result->structure = draw;

      std::lock_guard<std::mutex> lock(mutex_);
      auto cached = results_.find({query, seed});
      if (cached != results_.end() && cached->second != previous)
        return cached->second;  // another worker got there first
      if (distinct && !entries_.at(query).solved[key].insert(result->digest).second)
        continue;
      results_[{query, seed}] = result;
      return result;
    }
    throw SynthesisAbort("could not produce a fresh result: " + query);
  };

  const std::uint64_t first = previous ? previous->structure : 0;
  const std::uint64_t last =
      previous || !has_set_operator ? first : kStructureDraws - 1;
  for (std::uint64_t draw = first;; ++draw) {
    try {
      return attempt(draw);
    } catch (const SynthesisAbort&) {
      if (draw >= last)
        throw;
    }
  }
}

namespace {

std::optional<FieldRef> ResolveIn(const sql::SelectCore& core,
                                  const std::string& name) {
  std::string key = AsciiLower(name);
  if (core.is_count)
    return std::nullopt;
  if (core.wildcard)
    return FieldRef{core.table, key};
  for (const auto& [output, field] : core.outputs) {
    if (output == key)
      return field;
  }
  return std::nullopt;
}

}  // namespace

std::optional<sql::FieldRef> QuerySynthesizer::Resolve(
    const std::string& query, const std::string& name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(query);
  if (it == entries_.end())
    return std::nullopt;
  const Entry& entry = it->second;
  if (entry.single_core)
    return ResolveIn(*entry.single_core, name);
  // Set operators: output names follow the leftmost core.
  const RelAlgExpr* node = &entry.ra;
  while (!sql::DescribeCore(*node))
    node = &node->children.front();
  return ResolveIn(*sql::DescribeCore(*node), name);
}

void QuerySynthesizer::Notify(const std::string& query, const std::string& name,
                              ValueType type) {
  if (!options_.type_inference || type == ValueType::kNull)
    return;
  std::optional<FieldRef> field = Resolve(query, name);
  if (!field)
    return;
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(query);
  if (it == entries_.end())
    return;
  auto [domain, inserted] =
      it->second.domains.try_emplace(*field, TypeDomain(options_.initial_weight));
  domain->second.AddWeight(type, options_.hint_weight);
}

std::vector<std::string> QuerySynthesizer::TablesOf(
    const std::string& query) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(query);
  return it == entries_.end() ? std::vector<std::string>{}
                              : sql::Tables(it->second.ra);
}

std::optional<sql::RowBound> QuerySynthesizer::MaxRowOf(
    const std::string& query) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(query);
  if (it == entries_.end())
    return std::nullopt;
  return it->second.max_row;
}

std::vector<sql::FieldRef> QuerySynthesizer::FieldsOf(
    const std::string& query) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(query);
  return it == entries_.end() ? std::vector<FieldRef>{} : it->second.fields;
}

Formula QuerySynthesizer::ConstraintsOf(const std::string& query) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(query);
  return it == entries_.end() ? Formula::True() : it->second.constraints;
}

std::optional<TypeDomain> QuerySynthesizer::DomainOf(
    const std::string& query, const sql::FieldRef& field) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(query);
  if (it == entries_.end())
    return std::nullopt;
  auto d = it->second.domains.find(field);
  if (d == it->second.domains.end())
    return std::nullopt;
  return d->second;
}

}  // namespace corbfuzz::synth
