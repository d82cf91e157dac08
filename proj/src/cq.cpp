#include "eerq/cq.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "eerq/error.hpp"

namespace eerq {

int32_t ConjunctiveQuery::varId(const std::string& name) {
    for (size_t i = 0; i < varNames.size(); ++i)
        if (varNames[i] == name) return static_cast<int32_t>(i);
    varNames.push_back(name);
    return static_cast<int32_t>(varNames.size() - 1);
}

void validateQuery(const RelationalSchema& schema, const ConjunctiveQuery& q) {
    std::set<int32_t> headSeen;
    for (int32_t v : q.headVars)
        if (!headSeen.insert(v).second)
            throw SemanticError("query head variables must be distinct");
    std::set<int32_t> bodyVars;
    for (const auto& atom : q.body) {
        if (atom.pred < 0 || static_cast<size_t>(atom.pred) >= schema.size())
            throw SemanticError("query body references an unknown predicate");
        if (atom.terms.size() != static_cast<size_t>(schema.arity(atom.pred)))
            throw SemanticError("query atom arity mismatch for " + schema.name(atom.pred));
        for (const auto& t : atom.terms) {
            if (t.isVar)
                bodyVars.insert(t.var);
            else if (t.constant.isFresh())
                throw SemanticError("query constants must be non-fresh");
        }
    }
    for (int32_t v : q.headVars)
        if (!bodyVars.count(v))
            throw SemanticError("head variable " + q.varNames[static_cast<size_t>(v)] +
                                " does not occur in the body");
}

std::string renderQuery(const SymbolTable& syms, const RelationalSchema& schema,
                        const ConjunctiveQuery& q) {
    std::string out = q.headName + "(";
    for (size_t i = 0; i < q.headVars.size(); ++i) {
        if (i) out += ',';
        out += q.varNames[static_cast<size_t>(q.headVars[i])];
    }
    out += ") :- ";
    for (size_t a = 0; a < q.body.size(); ++a) {
        if (a) out += ", ";
        out += schema.name(q.body[a].pred);
        out += '(';
        for (size_t i = 0; i < q.body[a].terms.size(); ++i) {
            if (i) out += ',';
            const auto& t = q.body[a].terms[i];
            out += t.isVar ? q.varNames[static_cast<size_t>(t.var)]
                           : renderConstant(syms, t.constant);
        }
        out += ')';
    }
    out += '.';
    return out;
}

std::vector<AnswerTuple> sortTuples(const SymbolTable& syms, std::vector<AnswerTuple> tuples) {
    ConstantOrder lt{&syms};
    std::sort(tuples.begin(), tuples.end(), [&](const AnswerTuple& a, const AnswerTuple& b) {
        for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
            if (a[i] == b[i]) continue;
            return lt(a[i], b[i]);
        }
        return a.size() < b.size();
    });
    tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
    return tuples;
}

std::string renderTuple(const SymbolTable& syms, const AnswerTuple& t) {
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) out += ", ";
        out += renderConstant(syms, t[i]);
    }
    return out;
}

namespace {

// Backtracking homomorphism search with a per-(pred, bound-mask) hash index.
struct CqEval {
    const ConjunctiveQuery& q;
    const Database& db;
    std::vector<std::vector<size_t>> byPred;          // pred -> fact indices
    std::unordered_map<std::string, std::vector<size_t>> index; // "pred|mask|key"
    std::vector<Constant> binding;
    std::vector<bool> bound;
    std::vector<AnswerTuple> out;
    std::vector<size_t> atomOrder;

    CqEval(const RelationalSchema& schema, const ConjunctiveQuery& query, const Database& database)
        : q(query), db(database) {
        byPred.resize(schema.size());
        for (size_t i = 0; i < db.facts().size(); ++i)
            byPred[static_cast<size_t>(db.facts()[i].pred)].push_back(i);
        binding.assign(q.varNames.size(), Constant{});
        bound.assign(q.varNames.size(), false);
        // Greedy atom order: next atom is the one with most already-bound vars.
        std::vector<bool> used(q.body.size(), false);
        std::set<int32_t> seen;
        for (size_t step = 0; step < q.body.size(); ++step) {
            size_t best = q.body.size();
            int bestScore = -1;
            for (size_t a = 0; a < q.body.size(); ++a) {
                if (used[a]) continue;
                int score = 0;
                for (const auto& t : q.body[a].terms)
                    if (!t.isVar || seen.count(t.var)) ++score;
                if (score > bestScore) {
                    bestScore = score;
                    best = a;
                }
            }
            used[best] = true;
            atomOrder.push_back(best);
            for (const auto& t : q.body[best].terms)
                if (t.isVar) seen.insert(t.var);
        }
    }

    const std::vector<size_t>& candidates(const CqAtom& atom) {
        std::string key = std::to_string(atom.pred) + "|";
        std::string vals;
        bool any = false;
        for (size_t i = 0; i < atom.terms.size(); ++i) {
            const auto& t = atom.terms[i];
            Constant c;
            if (!t.isVar)
                c = t.constant;
            else if (bound[static_cast<size_t>(t.var)])
                c = binding[static_cast<size_t>(t.var)];
            else {
                key += '.';
                continue;
            }
            any = true;
            key += 'x';
            vals += std::to_string(c.code);
            vals += ',';
        }
        if (!any) return byPred[static_cast<size_t>(atom.pred)];
        key += '|';
        key += vals;
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        // Build the full index for this (pred, mask) in one pass.
        std::string maskKey = key.substr(0, key.find('|', key.find('|') + 1) + 1);
        std::vector<size_t> maskPositions;
        {
            size_t bar = key.find('|');
            for (size_t i = 0; i < atom.terms.size(); ++i)
                if (key[bar + 1 + i] == 'x') maskPositions.push_back(i);
        }
        for (size_t fi : byPred[static_cast<size_t>(atom.pred)]) {
            const Fact& f = db.facts()[fi];
            std::string k = maskKey;
            for (size_t p : maskPositions) {
                k += std::to_string(f.args[p].code);
                k += ',';
            }
            index[k].push_back(fi);
        }
        return index[key]; // may create an empty entry
    }

    void search(size_t step) {
        if (step == atomOrder.size()) {
            AnswerTuple t;
            t.reserve(q.headVars.size());
            for (int32_t v : q.headVars) t.push_back(binding[static_cast<size_t>(v)]);
            out.push_back(std::move(t));
            return;
        }
        const CqAtom& atom = q.body[atomOrder[step]];
        std::vector<size_t> cands = candidates(atom); // copy: index may rehash below
        for (size_t fi : cands) {
            const Fact& f = db.facts()[fi];
            std::vector<int32_t> newlyBound;
            bool okMatch = true;
            for (size_t i = 0; i < atom.terms.size() && okMatch; ++i) {
                const auto& t = atom.terms[i];
                if (!t.isVar) {
                    okMatch = f.args[i] == t.constant;
                } else if (bound[static_cast<size_t>(t.var)]) {
                    okMatch = f.args[i] == binding[static_cast<size_t>(t.var)];
                } else {
                    bound[static_cast<size_t>(t.var)] = true;
                    binding[static_cast<size_t>(t.var)] = f.args[i];
                    newlyBound.push_back(t.var);
                }
            }
            if (okMatch) search(step + 1);
            for (int32_t v : newlyBound) bound[static_cast<size_t>(v)] = false;
        }
    }
};

} // namespace

std::vector<AnswerTuple> evaluateCq(const SymbolTable& syms, const RelationalSchema& schema,
                                    const ConjunctiveQuery& q, const Database& db, bool dropFresh) {
    validateQuery(schema, q);
    CqEval eval(schema, q, db);
    eval.search(0);
    std::vector<AnswerTuple> tuples;
    for (auto& t : eval.out) {
        if (dropFresh) {
            bool anyFresh = false;
            for (Constant c : t) anyFresh = anyFresh || c.isFresh();
            if (anyFresh) continue;
        }
        tuples.push_back(std::move(t));
    }
    return sortTuples(syms, std::move(tuples));
}

} // namespace eerq
