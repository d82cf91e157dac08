#pragma once

#include <string>

#include "eerq/cds.hpp"
#include "eerq/chase.hpp"
#include "eerq/cq.hpp"
#include "eerq/pipeline.hpp"
#include "eerq/relational.hpp"

namespace eerq {

// Fact files: one fact per line, `pred(c1,...,cn).`, `#` comments; constants
// are bare identifiers, integers, or single-quoted strings. The fresh-constant
// marker is rejected everywhere. Unknown predicates are an error unless
// allowNewPredicates (then they extend the schema with the observed arity).
Database parseFacts(const std::string& text, SymbolTable& syms, RelationalSchema& schema,
                    bool allowNewPredicates = false, const std::string& filename = "<facts>");

std::string renderFacts(const SymbolTable& syms, const RelationalSchema& schema,
                        const Database& db);

// Query files: exactly one rule, `q(X,Y) :- p(X,Z), r(Z,Y,'c').`; variables
// start with an uppercase letter or underscore.
ConjunctiveQuery parseQuery(const std::string& text, SymbolTable& syms,
                            const RelationalSchema& schema,
                            const std::string& filename = "<query>");

// Dependency files: `pred name/arity`, `id: r1[1,2] <= r2[2,1]`,
// `kd: key(r) = {1}`; a trailing `# ... by rule N` records the translation
// rule tag.
struct CdsFile {
    RelationalSchema schema;
    std::vector<InclusionDependency> ids;
    std::vector<KeyDependency> kds;
};
CdsFile parseCdsFile(const std::string& text, const std::string& filename = "<cds>");

std::string renderCdsFile(const CDSet& cds);

std::string chaseForestToDot(const SymbolTable& syms, const RelationalSchema& schema,
                             const ChaseResult& chase);

// JSON envelopes ({"command", "status", ...}), documented in docs/formats.md.
std::string answerToJson(const SymbolTable& syms, const RelationalSchema& schema,
                         const AnswerResult& result);
std::string checkToJson(const SymbolTable& syms, const RelationalSchema& schema,
                        const ChaseExistence& ex);
std::string chaseToJson(const SymbolTable& syms, const RelationalSchema& schema,
                        const ChaseResult& chase);
std::string validateToJson(const std::vector<EerViolation>& report);
std::string translateToJson(const CDSet& cds);
std::string rewriteToJson(const RewriteBundle& bundle, const Program& piFin,
                          const SymbolTable& syms);

} // namespace eerq
