#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "eerq/constant.hpp"

namespace eerq {

// Predicate alphabet with arities. Predicate names are unique; ids are dense.
class RelationalSchema {
public:
    int32_t addPredicate(std::string_view name, int arity);
    std::optional<int32_t> find(std::string_view name) const;
    const std::string& name(int32_t pred) const { return preds_[static_cast<size_t>(pred)].name; }
    int arity(int32_t pred) const { return preds_[static_cast<size_t>(pred)].arity; }
    size_t size() const { return preds_.size(); }
    int maxArity() const;

    bool operator==(const RelationalSchema&) const = default;

private:
    struct Pred {
        std::string name;
        int arity;
        bool operator==(const Pred&) const = default;
    };
    std::vector<Pred> preds_;
    std::unordered_map<std::string, int32_t> index_;
};

struct Fact {
    int32_t pred = -1;
    std::vector<Constant> args;
    uint64_t level = 0; // ignored for identity

    bool sameTuple(const Fact& o) const { return pred == o.pred && args == o.args; }
};

struct FactTupleHash {
    size_t operator()(const Fact& f) const;
};
struct FactTupleEq {
    bool operator()(const Fact& a, const Fact& b) const { return a.sameTuple(b); }
};

// Orders facts by predicate name, then argument-wise by the constant order.
// This is the lexicographic fact order the chase scheduler relies on.
struct FactOrder {
    const SymbolTable* syms;
    const RelationalSchema* schema;
    bool operator()(const Fact& a, const Fact& b) const;
};

// Finite set of facts, duplicate-free under (predicate, args).
class Database {
public:
    Database() = default;

    // Returns false when the tuple was already present (level kept as-is).
    bool insert(Fact f);
    bool contains(const Fact& f) const { return index_.count(f) != 0; }
    const std::vector<Fact>& facts() const { return facts_; }
    size_t size() const { return facts_.size(); }

private:
    std::vector<Fact> facts_;
    std::unordered_set<Fact, FactTupleHash, FactTupleEq> index_;
};

std::string renderFact(const SymbolTable& syms, const RelationalSchema& schema, const Fact& f);

// r1[lhsCols] <= r2[rhsCols]; positions are 1-based as in the usual notation.
struct InclusionDependency {
    int32_t lhsPred = -1;
    std::vector<int> lhsCols;
    int32_t rhsPred = -1;
    std::vector<int> rhsCols;
    std::optional<int> ruleTag; // EER translation rule (1..11) when derived

    bool operator==(const InclusionDependency& o) const {
        return lhsPred == o.lhsPred && lhsCols == o.lhsCols && rhsPred == o.rhsPred &&
               rhsCols == o.rhsCols;
    }
};

// key(pred) = keyCols; keyCols sorted ascending, a proper nonempty subset.
struct KeyDependency {
    int32_t pred = -1;
    std::vector<int> keyCols;
    std::optional<int> ruleTag;

    bool operator==(const KeyDependency& o) const { return pred == o.pred && keyCols == o.keyCols; }
};

using Dependency = std::variant<InclusionDependency, KeyDependency>;

// Throws SemanticError when the dependency is malformed for the schema.
void validateDependency(const RelationalSchema& schema, const InclusionDependency& id);
void validateDependency(const RelationalSchema& schema, const KeyDependency& kd);

// Every attribute of each side occurs in its column list exactly once.
bool isFullWidth(const RelationalSchema& schema, const InclusionDependency& id);

// Canonical renderings; dependency order everywhere is the byte order of these.
std::string renderId(const RelationalSchema& schema, const InclusionDependency& id);
std::string renderKd(const RelationalSchema& schema, const KeyDependency& kd);
std::string renderDependency(const RelationalSchema& schema, const Dependency& dep);

// Fresh-aware satisfaction: fresh constants act as unique unknowns, so the
// check is plain syntactic matching over Constant values.
bool satisfies(const RelationalSchema& schema, const Database& db, const InclusionDependency& id);
bool satisfies(const RelationalSchema& schema, const Database& db, const KeyDependency& kd);

struct JoinGraphResult {
    std::vector<std::vector<size_t>> components; // indices into db.facts()
    uint64_t largestComponent = 0;               // c_D: fact count of the largest component
};

// Components of the undirected graph on facts with edges between facts
// sharing a constant.
JoinGraphResult joinGraphComponents(const Database& db);

} // namespace eerq
