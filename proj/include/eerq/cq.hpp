#pragma once

#include <string>
#include <vector>

#include "eerq/relational.hpp"

namespace eerq {

struct CqTerm {
    bool isVar = false;
    int32_t var = -1; // index into ConjunctiveQuery::varNames
    Constant constant{};

    static CqTerm variable(int32_t v) { return {true, v, {}}; }
    static CqTerm constantTerm(Constant c) { return {false, -1, c}; }
    bool operator==(const CqTerm&) const = default;
};

struct CqAtom {
    int32_t pred = -1;
    std::vector<CqTerm> terms;
    bool operator==(const CqAtom&) const = default;
};

// Single-rule conjunctive query. Head variables are distinct and occur in the
// body; body constants are non-fresh.
struct ConjunctiveQuery {
    std::string headName = "q";
    std::vector<int32_t> headVars;
    std::vector<CqAtom> body;
    std::vector<std::string> varNames;

    int32_t varId(const std::string& name);
};

// Throws SemanticError when a query invariant fails against the schema.
void validateQuery(const RelationalSchema& schema, const ConjunctiveQuery& q);

std::string renderQuery(const SymbolTable& syms, const RelationalSchema& schema,
                        const ConjunctiveQuery& q);

using AnswerTuple = std::vector<Constant>;

// All head bindings from homomorphisms of the body into db. Constants map to
// themselves; fresh constants in db unify only with identical fresh ids.
// With dropFresh, tuples containing a fresh constant are removed.
// Result is sorted by the constant order, duplicate-free.
std::vector<AnswerTuple> evaluateCq(const SymbolTable& syms, const RelationalSchema& schema,
                                    const ConjunctiveQuery& q, const Database& db, bool dropFresh);

std::vector<AnswerTuple> sortTuples(const SymbolTable& syms, std::vector<AnswerTuple> tuples);

std::string renderTuple(const SymbolTable& syms, const AnswerTuple& t);

} // namespace eerq
