#include "eerq/rewrite.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "eerq/error.hpp"

namespace eerq {

std::string renderAnnElem(const DlSymbols& syms, const AnnElem& e) {
    std::string out = "*";
    for (auto it = e.rbegin(); it != e.rend(); ++it) out = syms.fsymName(*it) + "(" + out + ")";
    return out;
}

std::string annotatedPredName(const DlSymbols& syms, const std::string& base,
                              const Annotation& ann) {
    std::string out = base + "@[";
    for (size_t i = 0; i < ann.size(); ++i) {
        if (i) out += ',';
        out += renderAnnElem(syms, ann[i]);
    }
    out += ']';
    return out;
}

std::optional<std::string> rewriteRefusalReason(const CDSet& cds, const RewriteOptions& opts) {
    if (opts.conservativeAttrFree) {
        for (size_t p = 0; p < cds.schema.size(); ++p)
            if (cds.kind[p] == PredKind::Attribute)
                return "conservative mode compiles the attribute-free fragment only, but '" +
                       cds.schema.name(static_cast<int32_t>(p)) + "' is an attribute predicate";
    }
    for (const auto& id : cds.ids) {
        size_t covered = id.rhsCols.size();
        if (covered < static_cast<size_t>(cds.schema.arity(id.rhsPred)) && id.lhsCols.size() != 1)
            return "dependency " + renderId(cds.schema, id) +
                   " needs a non-unary Skolem function (mandatory relationship attribute); "
                   "use the bounded-chase path";
    }
    return std::nullopt;
}

Program buildPiEq(const RelationalSchema& schema, std::shared_ptr<DlSymbols> symbols) {
    Program p(symbols);
    int32_t eq = symbols->pred("eq", 2);
    for (size_t pi = 0; pi < schema.size(); ++pi) {
        int32_t pred = symbols->pred(schema.name(static_cast<int32_t>(pi)),
                                     schema.arity(static_cast<int32_t>(pi)));
        int n = schema.arity(static_cast<int32_t>(pi));
        for (int i = 1; i <= n; ++i) {
            Rule r;
            RuleAtom body;
            body.pred = pred;
            for (int j = 1; j <= n; ++j)
                body.terms.push_back(RuleTerm::variable(symbols->var("X" + std::to_string(j))));
            r.body.push_back(body);
            r.head.pred = eq;
            r.head.terms = {body.terms[static_cast<size_t>(i - 1)],
                            body.terms[static_cast<size_t>(i - 1)]};
            p.rules.push_back(std::move(r));
        }
    }
    {
        Rule sym;
        int32_t x = symbols->var("X"), y = symbols->var("Y");
        sym.head = {eq, {RuleTerm::variable(y), RuleTerm::variable(x)}};
        sym.body = {{eq, {RuleTerm::variable(x), RuleTerm::variable(y)}}};
        p.rules.push_back(std::move(sym));
        Rule trans;
        int32_t z = symbols->var("Z");
        trans.head = {eq, {RuleTerm::variable(x), RuleTerm::variable(z)}};
        trans.body = {{eq, {RuleTerm::variable(x), RuleTerm::variable(y)}},
                      {eq, {RuleTerm::variable(y), RuleTerm::variable(z)}}};
        p.rules.push_back(std::move(trans));
    }
    p.queryPred = eq;
    return p;
}

Program buildPiKd(const RelationalSchema& schema, const DependencySet& deps,
                  std::shared_ptr<DlSymbols> symbols) {
    Program p(symbols);
    int32_t eq = symbols->pred("eq", 2);
    for (const KeyDependency& kd : deps.kds) {
        int n = schema.arity(kd.pred);
        int32_t pred = symbols->pred(schema.name(kd.pred), n);
        RuleAtom first, second;
        first.pred = second.pred = pred;
        for (int j = 1; j <= n; ++j) {
            first.terms.push_back(RuleTerm::variable(symbols->var("X" + std::to_string(j))));
            second.terms.push_back(RuleTerm::variable(symbols->var("Y" + std::to_string(j))));
        }
        for (int i = 1; i <= n; ++i) {
            if (std::find(kd.keyCols.begin(), kd.keyCols.end(), i) != kd.keyCols.end()) continue;
            Rule r;
            r.head = {eq, {first.terms[static_cast<size_t>(i - 1)],
                           second.terms[static_cast<size_t>(i - 1)]}};
            r.body = {first, second};
            for (int k : kd.keyCols)
                r.body.push_back({eq, {first.terms[static_cast<size_t>(k - 1)],
                                       second.terms[static_cast<size_t>(k - 1)]}});
            p.rules.push_back(std::move(r));
        }
    }
    p.queryPred = eq;
    return p;
}

Program buildPiId(const RelationalSchema& schema, const DependencySet& deps,
                  std::shared_ptr<DlSymbols> symbols) {
    Program p(symbols);
    for (size_t di = 0; di < deps.ids.size(); ++di) {
        const InclusionDependency& id = deps.ids[di];
        int ln = schema.arity(id.lhsPred), rn = schema.arity(id.rhsPred);
        int32_t lhs = symbols->pred(schema.name(id.lhsPred), ln);
        int32_t rhs = symbols->pred(schema.name(id.rhsPred), rn);
        Rule r;
        RuleAtom body;
        body.pred = lhs;
        for (int j = 1; j <= ln; ++j)
            body.terms.push_back(RuleTerm::variable(symbols->var("X" + std::to_string(j))));
        r.body.push_back(body);
        r.head.pred = rhs;
        r.head.terms.assign(static_cast<size_t>(rn), RuleTerm{});
        std::vector<bool> covered(static_cast<size_t>(rn), false);
        for (size_t k = 0; k < id.rhsCols.size(); ++k) {
            r.head.terms[static_cast<size_t>(id.rhsCols[k] - 1)] =
                body.terms[static_cast<size_t>(id.lhsCols[k] - 1)];
            covered[static_cast<size_t>(id.rhsCols[k] - 1)] = true;
        }
        for (int ppos = 1; ppos <= rn; ++ppos) {
            if (covered[static_cast<size_t>(ppos - 1)]) continue;
            if (id.lhsCols.size() != 1)
                throw SemanticError("dependency " + renderId(schema, id) +
                                    " needs a non-unary Skolem function; the rewriting refuses it");
            RuleTerm t = body.terms[static_cast<size_t>(id.lhsCols[0] - 1)];
            t.fsyms = {symbols->fsym("f_" + deps.idNames[di] + "_" + std::to_string(ppos))};
            r.head.terms[static_cast<size_t>(ppos - 1)] = t;
        }
        p.rules.push_back(std::move(r));
    }
    if (!p.rules.empty()) p.queryPred = p.rules.front().head.pred;
    return p;
}

ConjunctiveQuery maquillage(const ConjunctiveQuery& q) {
    ConjunctiveQuery out;
    out.headName = q.headName + "_eq";
    out.headVars = q.headVars;
    out.varNames = q.varNames;
    std::set<std::string> used(q.varNames.begin(), q.varNames.end());
    int counter = 0;
    std::vector<CqAtom> eqAtoms;
    for (const CqAtom& atom : q.body) {
        CqAtom renamed;
        renamed.pred = atom.pred;
        for (const CqTerm& t : atom.terms) {
            std::string name;
            do {
                name = "_M" + std::to_string(++counter);
            } while (used.count(name));
            used.insert(name);
            int32_t v = out.varId(name);
            renamed.terms.push_back(CqTerm::variable(v));
            eqAtoms.push_back({kEqMarker, {CqTerm::variable(v), t}});
        }
        out.body.push_back(std::move(renamed));
    }
    for (auto& a : eqAtoms) out.body.push_back(std::move(a));
    return out;
}

std::string renderMaquillaged(const SymbolTable& syms, const RelationalSchema& schema,
                              const ConjunctiveQuery& qEq) {
    std::string out = qEq.headName + "(";
    for (size_t i = 0; i < qEq.headVars.size(); ++i) {
        if (i) out += ',';
        out += qEq.varNames[static_cast<size_t>(qEq.headVars[i])];
    }
    out += ") :- ";
    for (size_t a = 0; a < qEq.body.size(); ++a) {
        if (a) out += ", ";
        const CqAtom& atom = qEq.body[a];
        out += atom.pred == kEqMarker ? "eq" : schema.name(atom.pred);
        out += '(';
        for (size_t i = 0; i < atom.terms.size(); ++i) {
            if (i) out += ',';
            const CqTerm& t = atom.terms[i];
            out += t.isVar ? qEq.varNames[static_cast<size_t>(t.var)]
                           : renderConstant(syms, t.constant);
        }
        out += ')';
    }
    out += '.';
    return out;
}

// ---------------------------------------------------------------------------
// Dummy chase.
// ---------------------------------------------------------------------------

Annotation DummyChase::annotationOf(size_t node) const {
    Annotation ann;
    for (TermId t : nodes[node].terms) {
        AnnElem e;
        TermId cur = t;
        while (pool->isApp(cur)) {
            e.push_back(pool->fsymOf(cur));
            cur = pool->childOf(cur);
        }
        ann.push_back(std::move(e));
    }
    return ann;
}

std::vector<int32_t> DummyChase::rootTagsOf(size_t node) const {
    std::vector<int32_t> tags;
    for (TermId t : nodes[node].terms) {
        TermId cur = t;
        while (pool->isApp(cur)) cur = pool->childOf(cur);
        tags.push_back(pool->tagOf(cur));
    }
    return tags;
}

DummyChase buildDummyChase(const RelationalSchema& schema, const DependencySet& deps,
                           uint64_t maxLevel, std::shared_ptr<DlSymbols> symbols,
                           uint64_t maxFacts) {
    DummyChase dc;
    dc.pool = std::make_shared<TermPool>();
    dc.symbols = symbols;

    int tagCounter = 0;
    for (size_t p = 0; p < schema.size(); ++p) {
        DummyChase::Node node;
        node.pred = static_cast<int32_t>(p);
        node.level = 0;
        for (int i = 0; i < schema.arity(static_cast<int32_t>(p)); ++i)
            node.terms.push_back(
                dc.pool->tagged(symbols->tag("d" + std::to_string(++tagCounter))));
        dc.nodes.push_back(std::move(node));
    }

    std::vector<size_t> idOrder(deps.ids.size());
    for (size_t i = 0; i < idOrder.size(); ++i) idOrder[i] = i;
    std::sort(idOrder.begin(), idOrder.end(), [&](size_t a, size_t b) {
        return renderId(schema, deps.ids[a]) < renderId(schema, deps.ids[b]);
    });

    auto applicable = [&](size_t node, size_t idIdx) {
        const InclusionDependency& id = deps.ids[idIdx];
        if (dc.nodes[node].pred != id.lhsPred) return false;
        for (const auto& other : dc.nodes) {
            if (other.pred != id.rhsPred) continue;
            bool match = true;
            for (size_t k = 0; k < id.lhsCols.size() && match; ++k)
                match = dc.nodes[node].terms[static_cast<size_t>(id.lhsCols[k] - 1)] ==
                        other.terms[static_cast<size_t>(id.rhsCols[k] - 1)];
            if (match) return false;
        }
        return true;
    };

    auto nodeLex = [&](size_t n) {
        std::string s = schema.name(dc.nodes[n].pred);
        for (TermId t : dc.nodes[n].terms) {
            s += '|';
            s += std::to_string(t);
        }
        return s;
    };

    while (true) {
        bool appliedOne = false;
        for (bool fwOnly : {true, false}) {
            size_t best = dc.nodes.size();
            size_t bestId = deps.ids.size();
            std::string bestLex;
            for (size_t n = 0; n < dc.nodes.size(); ++n) {
                if (dc.nodes[n].level >= maxLevel) continue;
                size_t chosen = deps.ids.size();
                for (size_t oi : idOrder) {
                    if (fwOnly && !isFullWidth(schema, deps.ids[oi])) continue;
                    if (applicable(n, oi)) {
                        chosen = oi;
                        break;
                    }
                }
                if (chosen == deps.ids.size()) continue;
                std::string lex = nodeLex(n);
                if (best == dc.nodes.size() || dc.nodes[n].level > dc.nodes[best].level ||
                    (dc.nodes[n].level == dc.nodes[best].level && lex < bestLex)) {
                    best = n;
                    bestId = chosen;
                    bestLex = lex;
                }
            }
            if (best == dc.nodes.size()) continue;
            const InclusionDependency& id = deps.ids[bestId];
            DummyChase::Node child;
            child.pred = id.rhsPred;
            child.level = dc.nodes[best].level + 1;
            int rn = schema.arity(id.rhsPred);
            child.terms.assign(static_cast<size_t>(rn), -1);
            std::vector<bool> covered(static_cast<size_t>(rn), false);
            for (size_t k = 0; k < id.rhsCols.size(); ++k) {
                child.terms[static_cast<size_t>(id.rhsCols[k] - 1)] =
                    dc.nodes[best].terms[static_cast<size_t>(id.lhsCols[k] - 1)];
                covered[static_cast<size_t>(id.rhsCols[k] - 1)] = true;
            }
            for (int ppos = 1; ppos <= rn; ++ppos) {
                if (covered[static_cast<size_t>(ppos - 1)]) continue;
                if (id.lhsCols.size() != 1)
                    throw SemanticError("dependency " + renderId(schema, id) +
                                        " needs a non-unary Skolem function");
                int32_t f = symbols->fsym("f_" + deps.idNames[bestId] + "_" + std::to_string(ppos));
                child.terms[static_cast<size_t>(ppos - 1)] = dc.pool->applied(
                    f, dc.nodes[best].terms[static_cast<size_t>(id.lhsCols[0] - 1)]);
            }
            if (dc.nodes.size() >= maxFacts)
                throw ResourceError("dummy chase fact budget exceeded (" +
                                    std::to_string(maxFacts) + ")");
            dc.nodes.push_back(std::move(child));
            dc.arcs.emplace_back(best, dc.nodes.size() - 1, bestId);
            appliedOne = true;
            break;
        }
        if (!appliedOne) break;
    }

    dc.completed = true;
    for (size_t n = 0; n < dc.nodes.size() && dc.completed; ++n) {
        if (dc.nodes[n].level < maxLevel) continue;
        for (size_t i = 0; i < deps.ids.size() && dc.completed; ++i)
            if (applicable(n, i)) dc.completed = false;
    }
    return dc;
}

namespace {

// A dummy-chase arc generalized to variables: annotation plus variable slots
// per distinct root tag, first-occurrence order over parent-then-child.
struct GeneralizedArc {
    int32_t parentPred, childPred;
    Annotation parentAnn, childAnn;
    std::vector<int> parentVars, childVars; // dense variable indices
    size_t idIdx;
};

std::vector<GeneralizedArc> generalizeArcs(const DummyChase& dummy) {
    std::vector<GeneralizedArc> out;
    std::set<std::string> seen;
    for (const auto& [p, c, idIdx] : dummy.arcs) {
        GeneralizedArc g;
        g.parentPred = dummy.nodes[p].pred;
        g.childPred = dummy.nodes[c].pred;
        g.parentAnn = dummy.annotationOf(p);
        g.childAnn = dummy.annotationOf(c);
        g.idIdx = idIdx;
        std::map<int32_t, int> varOf;
        auto assign = [&](const std::vector<int32_t>& tags, std::vector<int>& slot) {
            for (int32_t t : tags) {
                auto [it, inserted] = varOf.emplace(t, static_cast<int>(varOf.size()));
                slot.push_back(it->second);
            }
        };
        assign(dummy.rootTagsOf(p), g.parentVars);
        assign(dummy.rootTagsOf(c), g.childVars);

        std::string key = std::to_string(g.parentPred) + "|" + std::to_string(g.childPred) + "|";
        for (const auto& e : g.parentAnn) key += renderAnnElem(*dummy.symbols, e) + ",";
        key += "|";
        for (const auto& e : g.childAnn) key += renderAnnElem(*dummy.symbols, e) + ",";
        key += "|";
        for (int v : g.parentVars) key += std::to_string(v) + ",";
        key += "|";
        for (int v : g.childVars) key += std::to_string(v) + ",";
        if (seen.insert(key).second) out.push_back(std::move(g));
    }
    return out;
}

} // namespace

Program buildPiDc(const RelationalSchema& schema, const DummyChase& dummy,
                  const DependencySet& deps, std::shared_ptr<DlSymbols> symbols) {
    (void)deps;
    Program p(symbols);
    for (const GeneralizedArc& g : generalizeArcs(dummy)) {
        Rule r;
        RuleAtom body;
        body.pred = symbols->pred(
            annotatedPredName(*symbols, schema.name(g.parentPred), g.parentAnn),
            schema.arity(g.parentPred));
        for (int v : g.parentVars)
            body.terms.push_back(RuleTerm::variable(symbols->var("X" + std::to_string(v + 1))));
        RuleAtom head;
        head.pred =
            symbols->pred(annotatedPredName(*symbols, schema.name(g.childPred), g.childAnn),
                          schema.arity(g.childPred));
        for (int v : g.childVars)
            head.terms.push_back(RuleTerm::variable(symbols->var("X" + std::to_string(v + 1))));
        r.head = std::move(head);
        r.body.push_back(std::move(body));
        p.rules.push_back(std::move(r));
    }
    if (!p.rules.empty()) p.queryPred = p.rules.front().head.pred;
    return p;
}

Program buildPiBase(const RelationalSchema& schema, std::shared_ptr<DlSymbols> symbols) {
    Program p(symbols);
    auto baseRule = [&](const std::string& name, int arity) {
        Rule r;
        RuleAtom body;
        body.pred = symbols->pred(name, arity);
        for (int j = 1; j <= arity; ++j)
            body.terms.push_back(RuleTerm::variable(symbols->var("X" + std::to_string(j))));
        RuleAtom head;
        head.pred = symbols->pred(
            annotatedPredName(*symbols, name, Annotation(static_cast<size_t>(arity))), arity);
        head.terms = body.terms;
        r.head = std::move(head);
        r.body.push_back(std::move(body));
        p.rules.push_back(std::move(r));
    };
    for (size_t pi = 0; pi < schema.size(); ++pi)
        baseRule(schema.name(static_cast<int32_t>(pi)), schema.arity(static_cast<int32_t>(pi)));
    baseRule("eq", 2);
    if (!p.rules.empty()) p.queryPred = p.rules.front().head.pred;
    return p;
}

namespace {

std::vector<AnnElem> collectAllowedElements(const DummyChase& dummy) {
    std::set<std::string> seen;
    std::vector<AnnElem> out;
    auto add = [&](const AnnElem& e) {
        if (seen.insert(renderAnnElem(*dummy.symbols, e)).second) out.push_back(e);
    };
    add({}); // the bare placeholder is always allowed
    for (const GeneralizedArc& g : generalizeArcs(dummy)) {
        for (const auto& e : g.parentAnn) add(e);
        for (const auto& e : g.childAnn) add(e);
    }
    std::sort(out.begin(), out.end(), [&](const AnnElem& a, const AnnElem& b) {
        return renderAnnElem(*dummy.symbols, a) < renderAnnElem(*dummy.symbols, b);
    });
    return out;
}

// The maquillaged query as an (unannotated) rule over shared symbols.
Rule qEqAsRule(const RelationalSchema& schema, const ConjunctiveQuery& qEq,
               DlSymbols& symbols) {
    Rule r;
    r.head.pred = symbols.pred(qEq.headName, static_cast<int>(qEq.headVars.size()));
    for (int32_t v : qEq.headVars)
        r.head.terms.push_back(
            RuleTerm::variable(symbols.var(qEq.varNames[static_cast<size_t>(v)])));
    for (const CqAtom& atom : qEq.body) {
        RuleAtom a;
        a.pred = atom.pred == kEqMarker
                     ? symbols.pred("eq", 2)
                     : symbols.pred(schema.name(atom.pred), schema.arity(atom.pred));
        for (const CqTerm& t : atom.terms)
            a.terms.push_back(t.isVar ? RuleTerm::variable(
                                            symbols.var(qEq.varNames[static_cast<size_t>(t.var)]))
                                      : RuleTerm::constantTerm(t.constant));
        r.body.push_back(std::move(a));
    }
    return r;
}

int32_t foldedPred(DlSymbols& symbols, const std::string& base, int arity) {
    return symbols.pred(base + "@folded", arity * 2);
}

// Folded form of an unannotated rule: every position is paired with an
// annotation slot; variables share an annotation variable, constants are
// annotated with the bare placeholder.
Rule foldRule(const Rule& r, DlSymbols& symbols, int32_t starTag) {
    auto foldAtom = [&](const RuleAtom& a) {
        RuleAtom out;
        out.pred = foldedPred(symbols, symbols.predName(a.pred),
                              static_cast<int>(a.terms.size()));
        for (const RuleTerm& t : a.terms) {
            if (t.base == RuleTerm::Base::Var) {
                out.terms.push_back(RuleTerm::variable(
                    symbols.var("A$" + symbols.varName(t.var))));
                out.terms.push_back(t);
            } else {
                out.terms.push_back(RuleTerm::tagTerm(starTag));
                out.terms.push_back(t);
            }
        }
        return out;
    };
    Rule out;
    out.head = foldAtom(r.head);
    for (const RuleAtom& a : r.body) out.body.push_back(foldAtom(a));
    return out;
}

} // namespace

RewriteBundle buildRewrite(const SymbolTable& syms, const CDSet& cds, const ConjunctiveQuery& q,
                           const LevelBound& bound, const RewriteOptions& opts) {
    (void)syms;
    if (auto reason = rewriteRefusalReason(cds, opts)) throw SemanticError(*reason);
    validateQuery(cds.schema, q);

    RewriteBundle b;
    b.symbols = std::make_shared<DlSymbols>();
    b.schema = cds.schema;
    b.bound = bound;
    DependencySet deps = DependencySet::fromCds(cds);

    b.piEq = buildPiEq(cds.schema, b.symbols);
    b.piKd = buildPiKd(cds.schema, deps, b.symbols);
    b.piId = buildPiId(cds.schema, deps, b.symbols);
    b.qEq = maquillage(q);
    b.qEqName = b.qEq.headName;
    if (cds.schema.find(b.qEqName))
        throw SemanticError("query predicate '" + b.qEqName + "' collides with a schema predicate");

    b.dummy = buildDummyChase(cds.schema, deps, bound.deltaM, b.symbols, opts.dummyChaseMaxFacts);
    b.piDc = buildPiDc(cds.schema, b.dummy, deps, b.symbols);
    b.piBase = buildPiBase(cds.schema, b.symbols);
    b.annotationElements = collectAllowedElements(b.dummy);
    b.queryPredName = annotatedPredName(
        *b.symbols, b.qEqName, Annotation(b.qEq.headVars.size()));
    b.symbols->pred(b.queryPredName, static_cast<int>(b.qEq.headVars.size()));

    // Folded evaluation program.
    int32_t star = b.symbols->tag("*");
    Program folded(b.symbols);
    auto foldBaseLikeRule = [&](const std::string& name, int arity) {
        Rule r;
        RuleAtom body;
        body.pred = b.symbols->pred(name, arity);
        for (int j = 1; j <= arity; ++j)
            body.terms.push_back(RuleTerm::variable(b.symbols->var("X" + std::to_string(j))));
        RuleAtom head;
        head.pred = foldedPred(*b.symbols, name, arity);
        for (const RuleTerm& t : body.terms) {
            head.terms.push_back(RuleTerm::tagTerm(star));
            head.terms.push_back(t);
        }
        r.head = std::move(head);
        r.body.push_back(std::move(body));
        folded.rules.push_back(std::move(r));
    };
    for (size_t pi = 0; pi < cds.schema.size(); ++pi)
        foldBaseLikeRule(cds.schema.name(static_cast<int32_t>(pi)),
                         cds.schema.arity(static_cast<int32_t>(pi)));
    foldBaseLikeRule("eq", 2);

    for (const GeneralizedArc& g : generalizeArcs(b.dummy)) {
        Rule r;
        RuleAtom body;
        body.pred = foldedPred(*b.symbols, cds.schema.name(g.parentPred),
                               cds.schema.arity(g.parentPred));
        for (size_t i = 0; i < g.parentVars.size(); ++i) {
            body.terms.push_back(RuleTerm::tagTerm(
                b.symbols->tag(renderAnnElem(*b.symbols, g.parentAnn[i]))));
            body.terms.push_back(RuleTerm::variable(
                b.symbols->var("X" + std::to_string(g.parentVars[i] + 1))));
        }
        RuleAtom head;
        head.pred = foldedPred(*b.symbols, cds.schema.name(g.childPred),
                               cds.schema.arity(g.childPred));
        for (size_t i = 0; i < g.childVars.size(); ++i) {
            head.terms.push_back(RuleTerm::tagTerm(
                b.symbols->tag(renderAnnElem(*b.symbols, g.childAnn[i]))));
            head.terms.push_back(RuleTerm::variable(
                b.symbols->var("X" + std::to_string(g.childVars[i] + 1))));
        }
        r.head = std::move(head);
        r.body.push_back(std::move(body));
        folded.rules.push_back(std::move(r));
    }

    for (const Rule& r : b.piKd.rules) folded.rules.push_back(foldRule(r, *b.symbols, star));
    for (const Rule& r : b.piEq.rules) folded.rules.push_back(foldRule(r, *b.symbols, star));
    b.qEqRule = qEqAsRule(cds.schema, b.qEq, *b.symbols);
    folded.rules.push_back(foldRule(b.qEqRule, *b.symbols, star));
    folded.queryPred = foldedPred(*b.symbols, b.qEqName,
                                  static_cast<int>(b.qEq.headVars.size()));
    b.piFolded = std::move(folded);
    return b;
}

Program materializePiFin(const RewriteBundle& bundle, uint64_t ruleCap) {
    const auto& allowed = bundle.annotationElements;
    Program fin(bundle.symbols);
    for (const Rule& r : bundle.piDc.rules) fin.rules.push_back(r);
    for (const Rule& r : bundle.piBase.rules) fin.rules.push_back(r);

    std::vector<Rule> sources;
    for (const Rule& r : bundle.piKd.rules) sources.push_back(r);
    for (const Rule& r : bundle.piEq.rules) sources.push_back(r);
    sources.push_back(bundle.qEqRule);

    uint64_t total = fin.rules.size();
    std::vector<std::vector<int32_t>> ruleVars;
    for (const Rule& r : sources) {
        std::vector<int32_t> vars;
        auto collect = [&](const RuleAtom& a) {
            for (const RuleTerm& t : a.terms)
                if (t.base == RuleTerm::Base::Var &&
                    std::find(vars.begin(), vars.end(), t.var) == vars.end())
                    vars.push_back(t.var);
        };
        for (const RuleAtom& a : r.body) collect(a);
        collect(r.head);
        ruleVars.push_back(vars);
        uint64_t count = 1;
        for (size_t i = 0; i < vars.size() && count <= ruleCap; ++i)
            count *= std::max<uint64_t>(allowed.size(), 1);
        total += count;
        if (total > ruleCap)
            throw ResourceError("pi_fin rule budget exceeded: the annotated variant set is larger "
                                "than the configured bound of " +
                                std::to_string(ruleCap) + " rules");
    }

    for (size_t ri = 0; ri < sources.size(); ++ri) {
        const Rule& r = sources[ri];
        const auto& vars = ruleVars[ri];
        std::vector<size_t> odo(vars.size(), 0);
        while (true) {
            auto elemOf = [&](const RuleTerm& t) -> const AnnElem& {
                static const AnnElem bare{};
                if (t.base != RuleTerm::Base::Var) return bare;
                size_t vi = static_cast<size_t>(
                    std::find(vars.begin(), vars.end(), t.var) - vars.begin());
                return allowed[odo[vi]];
            };
            auto annotate = [&](const RuleAtom& a) {
                Annotation ann;
                for (const RuleTerm& t : a.terms) ann.push_back(elemOf(t));
                RuleAtom out;
                out.pred = bundle.symbols->pred(
                    annotatedPredName(*bundle.symbols, bundle.symbols->predName(a.pred), ann),
                    static_cast<int>(a.terms.size()));
                out.terms = a.terms;
                return out;
            };
            Rule variant;
            variant.head = annotate(r.head);
            for (const RuleAtom& a : r.body) variant.body.push_back(annotate(a));
            fin.rules.push_back(std::move(variant));

            size_t k = 0;
            for (; k < odo.size(); ++k) {
                if (++odo[k] < allowed.size()) break;
                odo[k] = 0;
            }
            if (k == odo.size()) break;
        }
    }
    fin.queryPred = *bundle.symbols->findPred(bundle.queryPredName);
    return fin;
}

std::vector<AnswerTuple> answerViaRewriting(const RewriteBundle& bundle, const SymbolTable& syms,
                                            const RelationalSchema& schema, const Database& db,
                                            uint64_t maxAtoms) {
    FixpointResult fp = seminaiveFixpoint(bundle.piFolded, syms, schema, db, maxAtoms);
    std::vector<AnswerTuple> tuples;
    const std::string qname =
        bundle.symbols->predName(bundle.piFolded.queryPred);
    auto it = fp.atoms.find(qname);
    if (it == fp.atoms.end()) return tuples;
    int32_t starTag = bundle.symbols->tag("*");
    TermId star = fp.pool->tagged(starTag);
    for (const auto& row : it->second) {
        bool allStar = true;
        AnswerTuple t;
        for (size_t i = 0; i < row.size(); i += 2) {
            if (row[i] != star) {
                allStar = false;
                break;
            }
            TermId theta = row[i + 1];
            if (!fp.pool->isConst(theta)) {
                allStar = false;
                break;
            }
            Constant c = fp.pool->constantOf(theta);
            if (c.isFresh()) {
                allStar = false;
                break;
            }
            t.push_back(c);
        }
        if (allStar) tuples.push_back(std::move(t));
    }
    return sortTuples(syms, std::move(tuples));
}

Program oracleProgram(const RewriteBundle& bundle) {
    Program p(bundle.symbols);
    p.rules.push_back(bundle.qEqRule);
    for (const Rule& r : bundle.piEq.rules) p.rules.push_back(r);
    for (const Rule& r : bundle.piKd.rules) p.rules.push_back(r);
    for (const Rule& r : bundle.piId.rules) p.rules.push_back(r);
    p.queryPred = *bundle.symbols->findPred(bundle.qEqName);
    return p;
}

} // namespace eerq
