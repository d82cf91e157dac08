#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "eerq/cq.hpp"
#include "eerq/relational.hpp"

namespace eerq {

// Name spaces for one program (or one family of programs sharing symbols):
// predicates (annotated predicates are distinct entries with their full
// rendered name), unary function symbols, variables, and opaque tags used by
// the folded annotation encoding.
class DlSymbols {
public:
    int32_t pred(std::string_view name, int arity);
    std::optional<int32_t> findPred(std::string_view name) const;
    const std::string& predName(int32_t id) const { return preds_[static_cast<size_t>(id)].name; }
    int predArity(int32_t id) const { return preds_[static_cast<size_t>(id)].arity; }
    size_t predCount() const { return preds_.size(); }

    int32_t fsym(std::string_view name);
    const std::string& fsymName(int32_t id) const { return fsyms_[static_cast<size_t>(id)]; }
    size_t fsymCount() const { return fsyms_.size(); }

    int32_t var(std::string_view name);
    const std::string& varName(int32_t id) const { return vars_[static_cast<size_t>(id)]; }

    int32_t tag(std::string_view name);
    const std::string& tagName(int32_t id) const { return tags_[static_cast<size_t>(id)]; }

private:
    struct P {
        std::string name;
        int arity;
    };
    std::vector<P> preds_;
    std::unordered_map<std::string, int32_t> predIndex_;
    std::vector<std::string> fsyms_, vars_, tags_;
    std::unordered_map<std::string, int32_t> fsymIndex_, varIndex_, tagIndex_;
};

// Rule terms are chains of unary function symbols over a variable, a constant,
// or an opaque tag; bodies may only use bare variables and constants.
struct RuleTerm {
    enum class Base { Var, Const, Tag };
    std::vector<int32_t> fsyms; // outermost first; empty for a bare term
    Base base = Base::Var;
    int32_t var = -1;
    Constant constant{};
    int32_t tagId = -1;

    static RuleTerm variable(int32_t v) {
        RuleTerm t;
        t.base = Base::Var;
        t.var = v;
        return t;
    }
    static RuleTerm constantTerm(Constant c) {
        RuleTerm t;
        t.base = Base::Const;
        t.constant = c;
        return t;
    }
    static RuleTerm tagTerm(int32_t id) {
        RuleTerm t;
        t.base = Base::Tag;
        t.tagId = id;
        return t;
    }
    bool operator==(const RuleTerm&) const = default;
};

struct RuleAtom {
    int32_t pred = -1;
    std::vector<RuleTerm> terms;
    bool operator==(const RuleAtom&) const = default;
};

struct Rule {
    RuleAtom head;
    std::vector<RuleAtom> body;
    bool operator==(const Rule&) const = default;
};

struct Program {
    std::shared_ptr<DlSymbols> symbols;
    std::vector<Rule> rules;
    int32_t queryPred = -1;

    Program() : symbols(std::make_shared<DlSymbols>()) {}
    explicit Program(std::shared_ptr<DlSymbols> syms) : symbols(std::move(syms)) {}
};

// Load-time validation: range restriction, no function symbols in bodies, and
// (when functionFree) none in heads either. Throws SemanticError.
void validateProgram(const Program& p, bool functionFree);

std::string renderTermText(const DlSymbols& syms, const SymbolTable& constSyms, const RuleTerm& t);
std::string renderRule(const DlSymbols& syms, const SymbolTable& constSyms, const Rule& r);
std::string renderProgram(const Program& p, const SymbolTable& constSyms);

// Parses the textual rule format: `head :- b1, ..., bn.` with annotated
// predicates `pred@[*,f(g(*))]`, variables starting with an uppercase letter
// or underscore, and constants as lowercase identifiers or quoted strings.
Program parseProgram(const std::string& text, SymbolTable& constSyms,
                     const std::string& filename = "<program>");

// --------------------------------------------------------------------------
// Ground term pool and fixpoint evaluation.
// --------------------------------------------------------------------------

using TermId = int32_t;

class TermPool {
public:
    TermId constant(Constant c);
    TermId applied(int32_t fsym, TermId child);
    TermId tagged(int32_t tagId);

    bool isConst(TermId t) const { return nodes_[static_cast<size_t>(t)].kind == 0; }
    bool isApp(TermId t) const { return nodes_[static_cast<size_t>(t)].kind == 1; }
    bool isTag(TermId t) const { return nodes_[static_cast<size_t>(t)].kind == 2; }
    Constant constantOf(TermId t) const { return Constant{nodes_[static_cast<size_t>(t)].a}; }
    int32_t fsymOf(TermId t) const { return nodes_[static_cast<size_t>(t)].a; }
    int32_t tagOf(TermId t) const { return nodes_[static_cast<size_t>(t)].a; }
    TermId childOf(TermId t) const { return nodes_[static_cast<size_t>(t)].child; }
    uint32_t depth(TermId t) const { return nodes_[static_cast<size_t>(t)].depth; }
    size_t size() const { return nodes_.size(); }

    std::string render(const DlSymbols& syms, const SymbolTable& constSyms, TermId t) const;

private:
    struct Node {
        int8_t kind; // 0 const, 1 app, 2 tag
        int32_t a;
        TermId child;
        uint32_t depth;
    };
    std::vector<Node> nodes_;
    std::unordered_map<uint64_t, TermId> index_;
};

struct EvalLimits {
    std::optional<uint32_t> depthCap; // max function nesting; nullopt = function-free only
    uint64_t maxAtoms = 50'000'000;
};

struct FixpointResult {
    std::shared_ptr<TermPool> pool;
    std::shared_ptr<DlSymbols> symbols;
    std::map<std::string, std::vector<std::vector<TermId>>> atoms; // by predicate name

    size_t totalAtoms() const;
    bool contains(const std::string& predName, const std::vector<TermId>& row) const;
    std::vector<std::string> renderedAtoms(const SymbolTable& constSyms) const; // sorted
};

// Least fixpoint of a function-free range-restricted program over db.
FixpointResult seminaiveFixpoint(const Program& p, const SymbolTable& constSyms,
                                 const RelationalSchema& schema, const Database& db,
                                 uint64_t maxAtoms = 50'000'000);

// Least fixpoint restricted to atoms whose maximum function nesting is at most
// depthCap; test oracle mirroring an initial chase segment.
FixpointResult boundedHerbrandFixpoint(const Program& p, const SymbolTable& constSyms,
                                       const RelationalSchema& schema, const Database& db,
                                       uint32_t depthCap, uint64_t maxAtoms = 50'000'000);

struct ProgramAnswer {
    std::vector<AnswerTuple> groundTuples;       // sorted, duplicate-free
    std::vector<std::string> skolemTuples;       // rendered tuples containing Skolem terms
};

// Fixpoint + projection onto the query predicate. With dropSkolem, tuples
// containing any Skolem term are reported separately instead of being decoded.
ProgramAnswer answerProgram(const Program& p, const SymbolTable& constSyms,
                            const RelationalSchema& schema, const Database& db,
                            std::optional<uint32_t> depthCap = std::nullopt,
                            uint64_t maxAtoms = 50'000'000);

} // namespace eerq
