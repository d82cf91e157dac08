#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eerq/cds.hpp"
#include "eerq/relational.hpp"

namespace eerq {

// Dependencies plus their display names for step logs and Skolem naming.
struct DependencySet {
    std::vector<InclusionDependency> ids;
    std::vector<KeyDependency> kds;
    std::vector<std::string> idNames;
    std::vector<std::string> kdNames;

    static DependencySet fromCds(const CDSet& cds);
    static DependencySet raw(const RelationalSchema& schema, std::vector<InclusionDependency> ids,
                             std::vector<KeyDependency> kds);
};

struct KdFailure {
    size_t atStep = 0;
    std::string kdName;
    KeyDependency kd;
    Fact first, second; // the witness pair, ordered lexicographically
};

struct ChaseArc {
    size_t parent = 0, child = 0; // indices into ChaseResult::facts
    std::string idName;
};

struct ChaseResult {
    enum class Status { Completed, Truncated, Failed };
    Status status = Status::Completed;
    std::optional<uint64_t> truncatedAt;
    std::optional<KdFailure> failure;
    std::vector<Fact> facts; // levels attached; canonical (level, lex) order
    std::vector<ChaseArc> forest;
    std::vector<std::string> appliedSteps;
    int32_t freshUsed = 0;
};

struct EqAtom {
    Constant a, b;
    uint64_t level = 0;
};

struct EqChaseResult {
    ChaseResult::Status status = ChaseResult::Status::Completed;
    std::optional<uint64_t> truncatedAt;
    std::optional<KdFailure> failure;
    std::vector<Fact> facts;    // non-eq facts
    std::vector<EqAtom> eqFacts;
    std::vector<ChaseArc> forest;
    std::vector<std::string> appliedSteps;
    int32_t freshUsed = 0;
};

struct ChaseOptions {
    std::optional<uint64_t> maxLevel; // IDs fire only on facts strictly below this level
    uint64_t maxFacts = 5'000'000;
};

// Deterministic chase: KD rule exhausted first (pair with minimal min-level,
// then lexicographically least pair; KD chosen lexicographically), then one ID
// application on the most recent applicable fact (highest level, then
// lexicographically least), full-width IDs preferred. Fresh constants are
// allocated in application order.
ChaseResult buildChase(SymbolTable& syms, const RelationalSchema& schema,
                       const DependencySet& deps, const Database& db,
                       const ChaseOptions& opts = {});

// Chase with equalities: same scheduling, tuples are never merged; the KD rule
// emits eq atoms (with symmetric/transitive closure) and fails on an eq link
// between distinct non-fresh constants; the ID rule blocks modulo eq.
EqChaseResult buildEqChase(SymbolTable& syms, const RelationalSchema& schema,
                           const DependencySet& deps, const Database& db,
                           const ChaseOptions& opts = {});

// Drops eq atoms and rewrites every eq class to its representative (least
// member in the constant order, hence non-fresh when one exists).
// Precondition: eqResult did not fail.
ChaseResult equalityEliminate(const SymbolTable& syms, const RelationalSchema& schema,
                              const EqChaseResult& eqResult);

struct ChaseExistence {
    bool exists = true;
    std::optional<KdFailure> witness;
    size_t restrictedChaseSize = 0; // facts examined in the decision chase
};

// Decision procedure: chases db under the full-width relationship-isa IDs plus
// all KDs (a provably finite chase); the full chase exists iff this one does.
ChaseExistence chaseExists(SymbolTable& syms, const CDSet& cds, const Database& db);

struct LevelBound {
    uint64_t deltaC = 0, deltaD = 0, deltaM = 0, stopLevel = 0;
    uint64_t numPredicates = 0, maxArity = 0, cD = 0, queryAtoms = 0;
};

// deltaC = |R|*(1+|R|*W!), deltaD = deltaC*c_D, deltaM = deltaD+deltaC*(|q|-1),
// stopLevel = deltaM + deltaC. Throws OverflowError when the arithmetic
// overflows (advice: cap the maximum arity W).
LevelBound computeLevelBound(const RelationalSchema& schema, size_t queryAtoms, uint64_t cD);

std::string renderChaseFacts(const SymbolTable& syms, const RelationalSchema& schema,
                             const std::vector<Fact>& facts);

} // namespace eerq
