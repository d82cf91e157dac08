#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "eerq/datalog.hpp"

namespace eerq::testing {

// Renders a rule with variables renamed V1, V2, ... by first occurrence
// (body left to right, then head), so structurally equal rules compare equal.
inline std::string alphaNormalizedRule(const DlSymbols& syms, const SymbolTable& constSyms,
                                       const Rule& r) {
    std::map<int32_t, std::string> names;
    auto visit = [&](const RuleAtom& a) {
        for (const RuleTerm& t : a.terms)
            if (t.base == RuleTerm::Base::Var)
                names.emplace(t.var, "V" + std::to_string(names.size() + 1));
    };
    for (const RuleAtom& a : r.body) visit(a);
    visit(r.head);
    auto term = [&](const RuleTerm& t) {
        std::string base;
        switch (t.base) {
            case RuleTerm::Base::Var: base = names.at(t.var); break;
            case RuleTerm::Base::Const: base = renderConstant(constSyms, t.constant); break;
            case RuleTerm::Base::Tag: base = "{" + syms.tagName(t.tagId) + "}"; break;
        }
        for (auto it = t.fsyms.rbegin(); it != t.fsyms.rend(); ++it)
            base = syms.fsymName(*it) + "(" + base + ")";
        return base;
    };
    auto atom = [&](const RuleAtom& a) {
        std::string s = syms.predName(a.pred);
        s += '(';
        for (size_t i = 0; i < a.terms.size(); ++i) {
            if (i) s += ',';
            s += term(a.terms[i]);
        }
        s += ')';
        return s;
    };
    std::string out = atom(r.head) + " :- ";
    for (size_t i = 0; i < r.body.size(); ++i) {
        if (i) out += ", ";
        out += atom(r.body[i]);
    }
    out += '.';
    return out;
}

inline std::vector<std::string> alphaNormalizedRules(const Program& p,
                                                     const SymbolTable& constSyms) {
    std::vector<std::string> out;
    for (const Rule& r : p.rules) out.push_back(alphaNormalizedRule(*p.symbols, constSyms, r));
    std::sort(out.begin(), out.end());
    return out;
}

inline bool containsRule(const Program& p, const SymbolTable& constSyms,
                         const std::string& alphaNormalized) {
    for (const Rule& r : p.rules)
        if (alphaNormalizedRule(*p.symbols, constSyms, r) == alphaNormalized) return true;
    return false;
}

inline std::vector<std::string> renderedFactSet(const SymbolTable& syms,
                                                const RelationalSchema& schema,
                                                const std::vector<Fact>& facts) {
    std::vector<std::string> out;
    for (const Fact& f : facts) out.push_back(renderFact(syms, schema, f));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace eerq::testing
