#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eerq/cds.hpp"
#include "eerq/chase.hpp"
#include "eerq/cq.hpp"
#include "eerq/datalog.hpp"

namespace eerq {

// Marker predicate id for eq atoms inside a maquillaged query, which is not a
// schema predicate.
inline constexpr int32_t kEqMarker = -2;

struct RewriteOptions {
    bool conservativeAttrFree = false; // refuse schemas with attribute predicates
    uint64_t materializeRuleCap = 250'000;
    uint64_t dummyChaseMaxFacts = 500'000;
};

// An annotation element is a chain of unary function symbols applied to the
// placeholder; the empty chain is the bare placeholder.
using AnnElem = std::vector<int32_t>; // outermost first
using Annotation = std::vector<AnnElem>;

std::string renderAnnElem(const DlSymbols& syms, const AnnElem& e);
std::string annotatedPredName(const DlSymbols& syms, const std::string& base,
                              const Annotation& ann);

// Dummy chase: IDs-only chase of the one-fact-per-predicate database, with
// fresh constants carried directly as Skolem terms over opaque root tags.
struct DummyChase {
    std::shared_ptr<TermPool> pool;
    std::shared_ptr<DlSymbols> symbols;
    struct Node {
        int32_t pred = -1;
        std::vector<TermId> terms;
        uint64_t level = 0;
    };
    std::vector<Node> nodes;
    std::vector<std::tuple<size_t, size_t, size_t>> arcs; // parent, child, id index
    bool completed = true; // saturated before the level cap

    // Annotation and innermost root tags of a node.
    Annotation annotationOf(size_t node) const;
    std::vector<int32_t> rootTagsOf(size_t node) const;
};

struct RewriteBundle {
    std::shared_ptr<DlSymbols> symbols;
    RelationalSchema schema;
    Program piEq;        // equality axioms over the schema predicates
    Program piKd;        // eq-deriving key-dependency rules
    Program piId;        // inclusion-dependency rules with Skolem heads
    ConjunctiveQuery qEq; // maquillaged query (eq atoms use kEqMarker)
    Rule qEqRule;        // the same query as an unannotated rule over `symbols`
    DummyChase dummy;
    Program piDc;        // dummy chase rules, annotated predicates
    Program piBase;      // base annotation rules
    Program piFolded;    // evaluation form of piFin (annotation-as-argument)
    std::string qEqName;          // base name of the maquillaged query predicate
    std::string queryPredName;    // annotated all-placeholder query predicate
    std::vector<AnnElem> annotationElements; // allowed elements (includes the bare one)
    LevelBound bound;
};

// Why the rewriting refuses a dependency set, if it does.
std::optional<std::string> rewriteRefusalReason(const CDSet& cds, const RewriteOptions& opts);

Program buildPiEq(const RelationalSchema& schema, std::shared_ptr<DlSymbols> symbols);
Program buildPiKd(const RelationalSchema& schema, const DependencySet& deps,
                  std::shared_ptr<DlSymbols> symbols);
Program buildPiId(const RelationalSchema& schema, const DependencySet& deps,
                  std::shared_ptr<DlSymbols> symbols);

// Replaces every body term occurrence with a new variable linked by an eq
// conjunct; the head is unchanged.
ConjunctiveQuery maquillage(const ConjunctiveQuery& q);

std::string renderMaquillaged(const SymbolTable& syms, const RelationalSchema& schema,
                              const ConjunctiveQuery& qEq);

DummyChase buildDummyChase(const RelationalSchema& schema, const DependencySet& deps,
                           uint64_t maxLevel, std::shared_ptr<DlSymbols> symbols,
                           uint64_t maxFacts);

Program buildPiDc(const RelationalSchema& schema, const DummyChase& dummy,
                  const DependencySet& deps, std::shared_ptr<DlSymbols> symbols);

Program buildPiBase(const RelationalSchema& schema, std::shared_ptr<DlSymbols> symbols);

// Full compilation of (q, cds, bound).
RewriteBundle buildRewrite(const SymbolTable& syms, const CDSet& cds, const ConjunctiveQuery& q,
                           const LevelBound& bound, const RewriteOptions& opts = {});

// The literal function-free program: piDc + piBase + every annotated variant
// of the key/equality/query rules whose elements occur in piDc (the bare
// placeholder always allowed) with shared terms sharing annotations. Throws
// ResourceError when the variant count would exceed ruleCap.
Program materializePiFin(const RewriteBundle& bundle, uint64_t ruleCap);

// Certain answers through the folded program; equivalent to evaluating the
// materialized piFin and reading the all-placeholder query predicate.
std::vector<AnswerTuple> answerViaRewriting(const RewriteBundle& bundle, const SymbolTable& syms,
                                            const RelationalSchema& schema, const Database& db,
                                            uint64_t maxAtoms = 50'000'000);

// The Skolem-term program q_eq + piEq + piKd + piId used as a bounded-depth
// oracle; answers are the function-free tuples of the query predicate.
Program oracleProgram(const RewriteBundle& bundle);

} // namespace eerq
