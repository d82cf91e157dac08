#include "eerq/chase.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "eerq/error.hpp"

namespace eerq {

DependencySet DependencySet::fromCds(const CDSet& cds) {
    DependencySet out;
    out.ids = cds.ids;
    out.kds = cds.kds;
    for (size_t i = 0; i < cds.ids.size(); ++i) out.idNames.push_back(cds.sigmaNameOfId(i));
    for (size_t i = 0; i < cds.kds.size(); ++i) out.kdNames.push_back(cds.sigmaNameOfKd(i));
    return out;
}

DependencySet DependencySet::raw(const RelationalSchema& schema,
                                 std::vector<InclusionDependency> ids,
                                 std::vector<KeyDependency> kds) {
    DependencySet out;
    out.ids = std::move(ids);
    out.kds = std::move(kds);
    std::vector<int> idSigma, kdSigma;
    canonicalizeDependencies(schema, out.ids, out.kds, idSigma, kdSigma);
    for (int s : idSigma) out.idNames.push_back("sigma" + std::to_string(s));
    for (int s : kdSigma) out.kdNames.push_back("sigma" + std::to_string(s));
    return out;
}

namespace {

std::string projKey(const Fact& f, const std::vector<int>& cols) {
    std::string k;
    for (int c : cols) {
        k += std::to_string(f.args[static_cast<size_t>(c - 1)].code);
        k += ',';
    }
    return k;
}

uint64_t factorialClamped(int n) {
    uint64_t r = 1;
    for (int i = 2; i <= n; ++i) {
        if (r > UINT64_MAX / static_cast<uint64_t>(i)) return UINT64_MAX;
        r *= static_cast<uint64_t>(i);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Plain chase engine. Facts are mutable records (KD merges rewrite constants
// globally); identity is the record index, with a generation counter so that
// worklist entries can be invalidated cheaply.
// ---------------------------------------------------------------------------
class ChaseEngine {
public:
    ChaseEngine(SymbolTable& syms, const RelationalSchema& schema, const DependencySet& deps,
                const ChaseOptions& opts)
        : syms_(syms), schema_(schema), deps_(deps), opts_(opts) {
        idsByLhs_.resize(schema.size());
        fwByLhs_.resize(schema.size());
        kdsByPred_.resize(schema.size());
        std::vector<size_t> idOrder(deps.ids.size());
        for (size_t i = 0; i < idOrder.size(); ++i) idOrder[i] = i;
        std::sort(idOrder.begin(), idOrder.end(), [&](size_t a, size_t b) {
            return renderId(schema, deps.ids[a]) < renderId(schema, deps.ids[b]);
        });
        for (size_t i : idOrder) {
            idsByLhs_[static_cast<size_t>(deps.ids[i].lhsPred)].push_back(i);
            if (isFullWidth(schema, deps.ids[i]))
                fwByLhs_[static_cast<size_t>(deps.ids[i].lhsPred)].push_back(i);
        }
        kdOrder_.resize(deps.kds.size());
        for (size_t i = 0; i < kdOrder_.size(); ++i) kdOrder_[i] = i;
        std::sort(kdOrder_.begin(), kdOrder_.end(), [&](size_t a, size_t b) {
            return renderKd(schema, deps.kds[a]) < renderKd(schema, deps.kds[b]);
        });
        for (size_t k = 0; k < deps.kds.size(); ++k)
            kdsByPred_[static_cast<size_t>(deps.kds[k].pred)].push_back(k);
        rhsCount_.resize(deps.ids.size());
        kdBuckets_.resize(deps.kds.size());
    }

    ChaseResult run(const Database& db) {
        for (const Fact& f : db.facts()) {
            for (Constant c : f.args)
                if (c.isFresh()) {
                    warnFresh_ = true;
                    freshFloor_ = std::max(freshFloor_, c.ordinal());
                }
        }
        for (int i = 0; i < freshFloor_; ++i) fresh_.next();
        if (warnFresh_) log_.push_back("# warning: fresh constants present in the initial database");

        for (const Fact& f : db.facts()) {
            Fact g = f;
            g.level = 0;
            insertFact(std::move(g));
        }

        ChaseResult out;
        while (true) {
            if (!exhaustKds(out)) return finish(out); // KD failure
            if (!applyOneId()) break;
        }
        out.status = ChaseResult::Status::Completed;
        if (opts_.maxLevel) {
            for (size_t i = 0; i < recs_.size(); ++i) {
                if (!recs_[i].alive || recs_[i].fact.level < *opts_.maxLevel) continue;
                if (anyIdApplicableIgnoringLevel(i)) {
                    out.status = ChaseResult::Status::Truncated;
                    out.truncatedAt = *opts_.maxLevel;
                    break;
                }
            }
        }
        return finish(out);
    }

private:
    struct Rec {
        Fact fact;
        bool alive = true;
        uint32_t gen = 0;
    };

    struct Work {
        uint64_t level;
        std::string lex;
        size_t idx;
        uint32_t gen;
        bool operator<(const Work& o) const {
            if (level != o.level) return level > o.level; // newest first
            if (lex != o.lex) return lex < o.lex;
            if (idx != o.idx) return idx < o.idx;
            return gen < o.gen;
        }
    };

    SymbolTable& syms_;
    const RelationalSchema& schema_;
    const DependencySet& deps_;
    ChaseOptions opts_;
    FreshGen fresh_;
    int32_t freshFloor_ = 0;
    bool warnFresh_ = false;

    std::vector<Rec> recs_;
    std::unordered_map<Fact, size_t, FactTupleHash, FactTupleEq> tupleIndex_;
    std::unordered_map<int32_t, std::vector<size_t>> occ_; // constant code -> rec indices
    std::vector<std::unordered_map<std::string, int>> rhsCount_;           // per ID
    std::vector<std::unordered_map<std::string, std::set<size_t>>> kdBuckets_; // per KD
    std::set<std::pair<size_t, std::string>> violating_; // (kd, bucket key), >= 2 members
    std::vector<std::vector<size_t>> idsByLhs_, fwByLhs_, kdsByPred_;
    std::vector<size_t> kdOrder_;
    std::set<Work> wlGeneral_, wlFullWidth_;
    std::vector<size_t> redirect_; // rec -> surviving rec
    struct RawArc {
        size_t parent, child;
        size_t idIdx;
    };
    std::vector<RawArc> arcs_;
    std::vector<std::string> log_;
    size_t steps_ = 0;

    size_t find(size_t i) {
        while (redirect_[i] != i) {
            redirect_[i] = redirect_[redirect_[i]];
            i = redirect_[i];
        }
        return i;
    }

    std::string lexOf(const Fact& f) const { return renderFact(syms_, schema_, f); }

    void push(size_t idx) {
        const Rec& r = recs_[idx];
        if (opts_.maxLevel && r.fact.level >= *opts_.maxLevel) return;
        int32_t pred = r.fact.pred;
        if (!idsByLhs_[static_cast<size_t>(pred)].empty())
            wlGeneral_.insert({r.fact.level, lexOf(r.fact), idx, r.gen});
        if (!fwByLhs_[static_cast<size_t>(pred)].empty())
            wlFullWidth_.insert({r.fact.level, lexOf(r.fact), idx, r.gen});
    }

    void addToIndexes(size_t idx) {
        const Fact& f = recs_[idx].fact;
        tupleIndex_.emplace(f, idx);
        for (Constant c : f.args) occ_[c.code].push_back(idx);
        for (size_t i = 0; i < deps_.ids.size(); ++i)
            if (deps_.ids[i].rhsPred == f.pred) ++rhsCount_[i][projKey(f, deps_.ids[i].rhsCols)];
        for (size_t k : kdsByPred_[static_cast<size_t>(f.pred)]) {
            std::string key = projKey(f, deps_.kds[k].keyCols);
            auto& bucket = kdBuckets_[k][key];
            bucket.insert(idx);
            if (bucket.size() >= 2) violating_.insert({k, key});
        }
    }

    void removeFromIndexes(size_t idx) {
        const Fact& f = recs_[idx].fact;
        tupleIndex_.erase(f);
        for (size_t i = 0; i < deps_.ids.size(); ++i)
            if (deps_.ids[i].rhsPred == f.pred) --rhsCount_[i][projKey(f, deps_.ids[i].rhsCols)];
        for (size_t k : kdsByPred_[static_cast<size_t>(f.pred)]) {
            std::string key = projKey(f, deps_.kds[k].keyCols);
            auto it = kdBuckets_[k].find(key);
            if (it != kdBuckets_[k].end()) {
                it->second.erase(idx);
                if (it->second.size() < 2) violating_.erase({k, key});
            }
        }
    }

    size_t insertFact(Fact f) {
        if (recs_.size() >= opts_.maxFacts)
            throw ResourceError("chase fact budget exceeded (" + std::to_string(opts_.maxFacts) +
                                " facts)");
        size_t idx = recs_.size();
        recs_.push_back({std::move(f), true, 0});
        redirect_.push_back(idx);
        addToIndexes(idx);
        push(idx);
        return idx;
    }

    bool idApplicable(const Fact& f, size_t idIdx) const {
        const InclusionDependency& id = deps_.ids[idIdx];
        auto& counts = rhsCount_[idIdx];
        auto it = counts.find(projKey(f, id.lhsCols));
        return it == counts.end() || it->second == 0;
    }

    bool anyIdApplicableIgnoringLevel(size_t idx) const {
        const Fact& f = recs_[idx].fact;
        for (size_t i : idsByLhs_[static_cast<size_t>(f.pred)])
            if (idApplicable(f, i)) return true;
        return false;
    }

    // Global substitution from -> to over every fact containing `from`.
    void substitute(Constant from, Constant to) {
        auto it = occ_.find(from.code);
        if (it == occ_.end()) return;
        std::vector<size_t> affected = it->second;
        occ_.erase(from.code);
        // Deterministic processing order; duplicates/stale entries filtered.
        std::sort(affected.begin(), affected.end());
        affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
        for (size_t idx : affected) {
            Rec& r = recs_[idx];
            if (!r.alive) continue;
            bool contains = false;
            for (Constant c : r.fact.args) contains = contains || c == from;
            if (!contains) continue;
            removeFromIndexes(idx);
            for (Constant& c : r.fact.args)
                if (c == from) c = to;
            ++r.gen;
            auto hit = tupleIndex_.find(r.fact);
            if (hit != tupleIndex_.end()) {
                size_t survivor = hit->second;
                Rec& s = recs_[survivor];
                r.alive = false;
                redirect_[find(idx)] = find(survivor);
                if (r.fact.level < s.fact.level) {
                    // Level decreases: reindex the KD buckets are unaffected
                    // (key unchanged) but the worklist ordering is, so repush.
                    s.fact.level = r.fact.level;
                    ++s.gen;
                    removeFromIndexes(survivor);
                    addToIndexes(survivor);
                }
                push(survivor);
            } else {
                addToIndexes(idx);
                push(idx);
            }
        }
    }

    // Returns false on KD failure (out.failure filled).
    bool exhaustKds(ChaseResult& out) {
        while (true) {
            // Best pair across all violating buckets: minimal min-level, then
            // lexicographically least pair.
            bool found = false;
            size_t bi = 0, bj = 0;
            uint64_t bestLevel = 0;
            std::pair<std::string, std::string> bestLex;
            for (const auto& [k, key] : violating_) {
                const auto& bucket = kdBuckets_[k].at(key);
                std::vector<size_t> members(bucket.begin(), bucket.end());
                for (size_t x = 0; x < members.size(); ++x) {
                    for (size_t y = x + 1; y < members.size(); ++y) {
                        size_t i = members[x], j = members[y];
                        const Fact& fi = recs_[i].fact;
                        const Fact& fj = recs_[j].fact;
                        uint64_t lvl = std::min(fi.level, fj.level);
                        std::string li = lexOf(fi), lj = lexOf(fj);
                        if (lj < li) {
                            std::swap(li, lj);
                        }
                        std::pair<std::string, std::string> plex{li, lj};
                        if (!found || lvl < bestLevel || (lvl == bestLevel && plex < bestLex)) {
                            found = true;
                            bestLevel = lvl;
                            bestLex = plex;
                            bi = i;
                            bj = j;
                        }
                    }
                }
            }
            if (!found) return true;

            // Order the chosen pair lexicographically, then pick the KD.
            if (lexOf(recs_[bj].fact) < lexOf(recs_[bi].fact)) std::swap(bi, bj);
            size_t chosenKd = deps_.kds.size();
            for (size_t k : kdOrder_) {
                const KeyDependency& kd = deps_.kds[k];
                const Fact& fi = recs_[bi].fact;
                const Fact& fj = recs_[bj].fact;
                if (fi.pred != kd.pred || fj.pred != kd.pred) continue;
                if (projKey(fi, kd.keyCols) != projKey(fj, kd.keyCols)) continue;
                chosenKd = k;
                break;
            }
            const KeyDependency& kd = deps_.kds[chosenKd];
            Fact before1 = recs_[bi].fact, before2 = recs_[bj].fact;
            ++steps_;

            // Merge non-key positions left to right; each replacement is
            // global, so re-read the current tuples at every position.
            for (int p = 1; p <= schema_.arity(kd.pred); ++p) {
                if (std::find(kd.keyCols.begin(), kd.keyCols.end(), p) != kd.keyCols.end())
                    continue;
                size_t ci = find(bi), cj = find(bj);
                Constant va = recs_[ci].fact.args[static_cast<size_t>(p - 1)];
                Constant vb = recs_[cj].fact.args[static_cast<size_t>(p - 1)];
                if (va == vb) continue;
                if (!va.isFresh() && !vb.isFresh()) {
                    out.status = ChaseResult::Status::Failed;
                    out.failure = KdFailure{steps_, deps_.kdNames[chosenKd], kd, before1, before2};
                    log_.push_back("kd " + deps_.kdNames[chosenKd] + ": " +
                                   lexOf(before1) + " + " + lexOf(before2) + " -> FAIL");
                    return false;
                }
                Constant from, to;
                if (!va.isFresh()) {
                    from = vb;
                    to = va;
                } else if (!vb.isFresh()) {
                    from = va;
                    to = vb;
                } else {
                    ConstantOrder lt{&syms_};
                    if (lt(va, vb)) {
                        from = vb;
                        to = va;
                    } else {
                        from = va;
                        to = vb;
                    }
                }
                substitute(from, to);
            }
            size_t merged = find(bi);
            log_.push_back("kd " + deps_.kdNames[chosenKd] + ": " + lexOf(before1) + " + " +
                           lexOf(before2) + " -> " + lexOf(recs_[merged].fact) + " [level " +
                           std::to_string(recs_[merged].fact.level) + "]");
        }
    }

    bool tryApplyFrom(std::set<Work>& wl, const std::vector<std::vector<size_t>>& table) {
        while (!wl.empty()) {
            Work w = *wl.begin();
            wl.erase(wl.begin());
            const Rec& r = recs_[w.idx];
            if (!r.alive || r.gen != w.gen) continue;
            if (opts_.maxLevel && r.fact.level >= *opts_.maxLevel) continue;
            for (size_t idIdx : table[static_cast<size_t>(r.fact.pred)]) {
                if (!idApplicable(r.fact, idIdx)) continue;
                applyId(w.idx, idIdx);
                wl.insert({recs_[w.idx].fact.level, lexOf(recs_[w.idx].fact), w.idx, recs_[w.idx].gen});
                return true;
            }
            // No ID applicable now; blocking is monotone, so drop permanently.
        }
        return false;
    }

    bool applyOneId() {
        if (tryApplyFrom(wlFullWidth_, fwByLhs_)) return true;
        return tryApplyFrom(wlGeneral_, idsByLhs_);
    }

    void applyId(size_t idx, size_t idIdx) {
        const InclusionDependency& id = deps_.ids[idIdx];
        const Fact& f = recs_[idx].fact;
        Fact child;
        child.pred = id.rhsPred;
        child.level = f.level + 1;
        child.args.assign(static_cast<size_t>(schema_.arity(id.rhsPred)), Constant{});
        std::vector<bool> covered(child.args.size(), false);
        for (size_t k = 0; k < id.rhsCols.size(); ++k) {
            child.args[static_cast<size_t>(id.rhsCols[k] - 1)] =
                f.args[static_cast<size_t>(id.lhsCols[k] - 1)];
            covered[static_cast<size_t>(id.rhsCols[k] - 1)] = true;
        }
        for (size_t p = 0; p < child.args.size(); ++p)
            if (!covered[p]) child.args[p] = fresh_.next();
        ++steps_;
        std::string parentLex = lexOf(f);
        size_t childIdx = insertFact(std::move(child));
        arcs_.push_back({idx, childIdx, idIdx});
        log_.push_back("id " + deps_.idNames[idIdx] + ": " + parentLex + " -> " +
                       lexOf(recs_[childIdx].fact) + " [level " +
                       std::to_string(recs_[childIdx].fact.level) + "]");
    }

    ChaseResult finish(ChaseResult out) {
        std::vector<size_t> aliveIdx;
        for (size_t i = 0; i < recs_.size(); ++i)
            if (recs_[i].alive) aliveIdx.push_back(i);
        FactOrder lt{&syms_, &schema_};
        std::sort(aliveIdx.begin(), aliveIdx.end(), [&](size_t a, size_t b) {
            const Fact& fa = recs_[a].fact;
            const Fact& fb = recs_[b].fact;
            if (fa.level != fb.level) return fa.level < fb.level;
            return lt(fa, fb);
        });
        std::vector<size_t> pos(recs_.size(), SIZE_MAX);
        for (size_t i = 0; i < aliveIdx.size(); ++i) pos[aliveIdx[i]] = i;
        for (size_t i : aliveIdx) out.facts.push_back(recs_[i].fact);
        std::set<std::tuple<size_t, size_t, std::string>> seen;
        for (const RawArc& a : arcs_) {
            size_t p = pos[find(a.parent)], c = pos[find(a.child)];
            if (p == SIZE_MAX || c == SIZE_MAX || p == c) continue;
            if (seen.insert({p, c, deps_.idNames[a.idIdx]}).second)
                out.forest.push_back({p, c, deps_.idNames[a.idIdx]});
        }
        out.appliedSteps = std::move(log_);
        out.freshUsed = fresh_.allocated() - freshFloor_;
        return out;
    }
};

// ---------------------------------------------------------------------------
// Chase with equalities: no merging, eq-class bookkeeping instead. Scan-based;
// this variant is used on small instances (goldens, oracles).
// ---------------------------------------------------------------------------
class EqChaseEngine {
public:
    EqChaseEngine(SymbolTable& syms, const RelationalSchema& schema, const DependencySet& deps,
                  const ChaseOptions& opts)
        : syms_(syms), schema_(schema), deps_(deps), opts_(opts) {
        idOrder_.resize(deps.ids.size());
        for (size_t i = 0; i < idOrder_.size(); ++i) idOrder_[i] = i;
        std::sort(idOrder_.begin(), idOrder_.end(), [&](size_t a, size_t b) {
            return renderId(schema, deps.ids[a]) < renderId(schema, deps.ids[b]);
        });
        kdOrder_.resize(deps.kds.size());
        for (size_t i = 0; i < kdOrder_.size(); ++i) kdOrder_[i] = i;
        std::sort(kdOrder_.begin(), kdOrder_.end(), [&](size_t a, size_t b) {
            return renderKd(schema, deps.kds[a]) < renderKd(schema, deps.kds[b]);
        });
    }

    EqChaseResult run(const Database& db) {
        EqChaseResult out;
        byPred_.resize(schema_.size());
        for (const Fact& f : db.facts()) {
            for (Constant c : f.args)
                if (c.isFresh()) freshFloor_ = std::max(freshFloor_, c.ordinal());
        }
        for (int i = 0; i < freshFloor_; ++i) fresh_.next();
        for (const Fact& f : db.facts()) {
            Fact g = f;
            g.level = 0;
            facts_.push_back(std::move(g));
            byPred_[static_cast<size_t>(facts_.back().pred)].push_back(facts_.size() - 1);
            for (Constant c : facts_.back().args) registerConstant(c, 0);
        }
        while (true) {
            if (!exhaustKds(out)) return finish(std::move(out));
            if (!applyOneId()) break;
        }
        out.status = ChaseResult::Status::Completed;
        if (opts_.maxLevel) {
            for (size_t i = 0; i < facts_.size(); ++i) {
                if (facts_[i].level < *opts_.maxLevel) continue;
                if (applicableIdOn(i, false, true) != deps_.ids.size() ||
                    applicableIdOn(i, true, true) != deps_.ids.size()) {
                    out.status = ChaseResult::Status::Truncated;
                    out.truncatedAt = *opts_.maxLevel;
                    break;
                }
            }
        }
        return finish(std::move(out));
    }

private:
    SymbolTable& syms_;
    const RelationalSchema& schema_;
    const DependencySet& deps_;
    ChaseOptions opts_;
    FreshGen fresh_;
    int32_t freshFloor_ = 0;

    std::vector<Fact> facts_;
    std::vector<std::vector<size_t>> byPred_;
    std::vector<ChaseArc> arcs_;
    std::vector<EqAtom> eqAtoms_;
    std::unordered_map<int32_t, int32_t> dsu_;            // constant code -> parent code
    std::unordered_map<int32_t, std::vector<Constant>> members_; // root -> class members
    std::unordered_map<int32_t, std::optional<Constant>> nonFreshIn_; // root -> non-fresh member
    std::vector<size_t> idOrder_, kdOrder_;
    std::vector<std::string> log_;
    size_t steps_ = 0;

    int32_t findRoot(int32_t code) {
        auto it = dsu_.find(code);
        if (it == dsu_.end() || it->second == code) return code;
        int32_t r = findRoot(it->second);
        it->second = r;
        return r;
    }
    bool sameClass(Constant a, Constant b) { return findRoot(a.code) == findRoot(b.code); }

    void registerConstant(Constant c, uint64_t level) {
        if (dsu_.count(c.code)) return;
        dsu_[c.code] = c.code;
        members_[c.code] = {c};
        nonFreshIn_[c.code] = c.isFresh() ? std::optional<Constant>{} : std::optional<Constant>{c};
        eqAtoms_.push_back({c, c, level});
    }

    std::string lexOf(const Fact& f) const { return renderFact(syms_, schema_, f); }

    // Returns the index into idOrder_-ordered ids of the first applicable ID,
    // or deps_.ids.size() when none. fwOnly restricts to full-width IDs.
    size_t applicableIdOn(size_t factIdx, bool fwOnly, bool ignoreLevel = false) {
        const Fact& f = facts_[factIdx];
        if (!ignoreLevel && opts_.maxLevel && f.level >= *opts_.maxLevel) return deps_.ids.size();
        for (size_t oi = 0; oi < idOrder_.size(); ++oi) {
            const InclusionDependency& id = deps_.ids[idOrder_[oi]];
            if (id.lhsPred != f.pred) continue;
            if (fwOnly && !isFullWidth(schema_, id)) continue;
            bool blocked = false;
            for (size_t gi : byPred_[static_cast<size_t>(id.rhsPred)]) {
                const Fact& g = facts_[gi];
                bool match = true;
                for (size_t k = 0; k < id.lhsCols.size() && match; ++k)
                    match = sameClass(f.args[static_cast<size_t>(id.lhsCols[k] - 1)],
                                      g.args[static_cast<size_t>(id.rhsCols[k] - 1)]);
                if (match) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) return idOrder_[oi];
        }
        return deps_.ids.size();
    }

    bool applyOneId() {
        for (bool fwOnly : {true, false}) {
            size_t best = facts_.size();
            size_t bestId = deps_.ids.size();
            std::string bestLex;
            for (size_t i = 0; i < facts_.size(); ++i) {
                size_t idIdx = applicableIdOn(i, fwOnly);
                if (idIdx == deps_.ids.size()) continue;
                std::string lex = lexOf(facts_[i]);
                if (best == facts_.size() || facts_[i].level > facts_[best].level ||
                    (facts_[i].level == facts_[best].level && lex < bestLex)) {
                    best = i;
                    bestId = idIdx;
                    bestLex = lex;
                }
            }
            if (best == facts_.size()) continue;
            const InclusionDependency& id = deps_.ids[bestId];
            const Fact& f = facts_[best];
            Fact child;
            child.pred = id.rhsPred;
            child.level = f.level + 1;
            child.args.assign(static_cast<size_t>(schema_.arity(id.rhsPred)), Constant{});
            std::vector<bool> covered(child.args.size(), false);
            for (size_t k = 0; k < id.rhsCols.size(); ++k) {
                child.args[static_cast<size_t>(id.rhsCols[k] - 1)] =
                    f.args[static_cast<size_t>(id.lhsCols[k] - 1)];
                covered[static_cast<size_t>(id.rhsCols[k] - 1)] = true;
            }
            for (size_t p = 0; p < child.args.size(); ++p)
                if (!covered[p]) child.args[p] = fresh_.next();
            ++steps_;
            if (facts_.size() >= opts_.maxFacts)
                throw ResourceError("eq-chase fact budget exceeded");
            std::string parentLex = lexOf(f);
            facts_.push_back(child);
            byPred_[static_cast<size_t>(child.pred)].push_back(facts_.size() - 1);
            for (Constant c : child.args) registerConstant(c, child.level);
            arcs_.push_back({best, facts_.size() - 1, deps_.idNames[bestId]});
            log_.push_back("id " + deps_.idNames[bestId] + ": " + parentLex + " -> " +
                           lexOf(child) + " [level " + std::to_string(child.level) + "]");
            return true;
        }
        return false;
    }

    // Applicable iff the pair agrees (mod eq) on the key and at least one new
    // eq atom would be added; without the second clause the rule would remain
    // applicable forever.
    bool kdApplicable(const KeyDependency& kd, const Fact& a, const Fact& b) {
        if (a.pred != kd.pred || b.pred != kd.pred) return false;
        for (int c : kd.keyCols)
            if (!sameClass(a.args[static_cast<size_t>(c - 1)], b.args[static_cast<size_t>(c - 1)]))
                return false;
        for (int p = 1; p <= schema_.arity(kd.pred); ++p) {
            if (std::find(kd.keyCols.begin(), kd.keyCols.end(), p) != kd.keyCols.end()) continue;
            if (!sameClass(a.args[static_cast<size_t>(p - 1)], b.args[static_cast<size_t>(p - 1)]))
                return true;
        }
        return false;
    }

    bool exhaustKds(EqChaseResult& out) {
        std::set<int32_t> kdPreds;
        for (const KeyDependency& kd : deps_.kds) kdPreds.insert(kd.pred);
        while (true) {
            bool found = false;
            size_t bi = 0, bj = 0;
            uint64_t bestLevel = 0;
            std::pair<std::string, std::string> bestLex;
            for (int32_t pred : kdPreds) {
                const auto& rows = byPred_[static_cast<size_t>(pred)];
                for (size_t x = 0; x < rows.size(); ++x) {
                    for (size_t y = x + 1; y < rows.size(); ++y) {
                        size_t i = rows[x], j = rows[y];
                        bool anyKd = false;
                        for (size_t k = 0; k < deps_.kds.size() && !anyKd; ++k)
                            anyKd = kdApplicable(deps_.kds[k], facts_[i], facts_[j]);
                        if (!anyKd) continue;
                        uint64_t lvl = std::min(facts_[i].level, facts_[j].level);
                        std::string li = lexOf(facts_[i]), lj = lexOf(facts_[j]);
                        if (lj < li) std::swap(li, lj);
                        std::pair<std::string, std::string> plex{li, lj};
                        if (!found || lvl < bestLevel || (lvl == bestLevel && plex < bestLex)) {
                            found = true;
                            bestLevel = lvl;
                            bestLex = plex;
                            bi = i;
                            bj = j;
                        }
                    }
                }
            }
            if (!found) return true;
            if (lexOf(facts_[bj]) < lexOf(facts_[bi])) std::swap(bi, bj);
            size_t chosen = deps_.kds.size();
            for (size_t k : kdOrder_)
                if (kdApplicable(deps_.kds[k], facts_[bi], facts_[bj])) {
                    chosen = k;
                    break;
                }
            const KeyDependency& kd = deps_.kds[chosen];
            const Fact& a = facts_[bi];
            const Fact& b = facts_[bj];
            uint64_t lvl = std::min(a.level, b.level);
            ++steps_;
            std::string added;
            for (int p = 1; p <= schema_.arity(kd.pred); ++p) {
                if (std::find(kd.keyCols.begin(), kd.keyCols.end(), p) != kd.keyCols.end()) continue;
                Constant x = a.args[static_cast<size_t>(p - 1)];
                Constant y = b.args[static_cast<size_t>(p - 1)];
                int32_t rx = findRoot(x.code), ry = findRoot(y.code);
                if (rx == ry) continue;
                const auto& nfx = nonFreshIn_[rx];
                const auto& nfy = nonFreshIn_[ry];
                if (nfx && nfy && !(*nfx == *nfy)) {
                    out.status = ChaseResult::Status::Failed;
                    out.failure = KdFailure{steps_, deps_.kdNames[chosen], kd, a, b};
                    log_.push_back("kd " + deps_.kdNames[chosen] + ": " + lexOf(a) + " + " +
                                   lexOf(b) + " => eq(" + renderConstant(syms_, *nfx) + "," +
                                   renderConstant(syms_, *nfy) + ") -> FAIL");
                    return false;
                }
                // All cross pairs: the direct atoms plus everything derivable
                // by symmetry/transitivity from the existing class atoms.
                for (Constant u : members_[rx])
                    for (Constant v : members_[ry]) {
                        eqAtoms_.push_back({u, v, lvl});
                        eqAtoms_.push_back({v, u, lvl});
                        if (!added.empty()) added += ", ";
                        added += "eq(" + renderConstant(syms_, u) + "," +
                                 renderConstant(syms_, v) + ")";
                    }
                dsu_[ry] = rx;
                auto& mx = members_[rx];
                auto& my = members_[ry];
                mx.insert(mx.end(), my.begin(), my.end());
                members_.erase(ry);
                if (!nonFreshIn_[rx]) nonFreshIn_[rx] = nfy;
                nonFreshIn_.erase(ry);
            }
            log_.push_back("kd " + deps_.kdNames[chosen] + ": " + lexOf(a) + " + " + lexOf(b) +
                           " => " + added + " [level " + std::to_string(lvl) + "]");
        }
    }

    EqChaseResult finish(EqChaseResult out) {
        std::vector<size_t> order(facts_.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        FactOrder lt{&syms_, &schema_};
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (facts_[a].level != facts_[b].level) return facts_[a].level < facts_[b].level;
            return lt(facts_[a], facts_[b]);
        });
        std::vector<size_t> pos(facts_.size());
        for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        for (size_t i : order) out.facts.push_back(facts_[i]);
        for (const ChaseArc& a : arcs_)
            out.forest.push_back({pos[a.parent], pos[a.child], a.idName});
        // Deduplicate eq atoms keeping the first (lowest-step) level.
        std::set<std::pair<int32_t, int32_t>> seen;
        for (const EqAtom& e : eqAtoms_)
            if (seen.insert({e.a.code, e.b.code}).second) out.eqFacts.push_back(e);
        ConstantOrder clt{&syms_};
        std::sort(out.eqFacts.begin(), out.eqFacts.end(), [&](const EqAtom& x, const EqAtom& y) {
            if (x.level != y.level) return x.level < y.level;
            if (!(x.a == y.a)) return clt(x.a, y.a);
            return clt(x.b, y.b);
        });
        out.appliedSteps = std::move(log_);
        out.freshUsed = fresh_.allocated() - freshFloor_;
        return out;
    }
};

} // namespace

ChaseResult buildChase(SymbolTable& syms, const RelationalSchema& schema, const DependencySet& deps,
                       const Database& db, const ChaseOptions& opts) {
    for (const auto& id : deps.ids) validateDependency(schema, id);
    for (const auto& kd : deps.kds) validateDependency(schema, kd);
    return ChaseEngine(syms, schema, deps, opts).run(db);
}

EqChaseResult buildEqChase(SymbolTable& syms, const RelationalSchema& schema,
                           const DependencySet& deps, const Database& db,
                           const ChaseOptions& opts) {
    for (const auto& id : deps.ids) validateDependency(schema, id);
    for (const auto& kd : deps.kds) validateDependency(schema, kd);
    return EqChaseEngine(syms, schema, deps, opts).run(db);
}

ChaseResult equalityEliminate(const SymbolTable& syms, const RelationalSchema& schema,
                              const EqChaseResult& eqResult) {
    if (eqResult.status == ChaseResult::Status::Failed)
        throw SemanticError("equality elimination requires a non-failed eq-chase");
    std::unordered_map<int32_t, int32_t> dsu;
    std::function<int32_t(int32_t)> findRoot = [&](int32_t c) -> int32_t {
        auto it = dsu.find(c);
        if (it == dsu.end() || it->second == c) return c;
        int32_t r = findRoot(it->second);
        it->second = r;
        return r;
    };
    auto unite = [&](int32_t a, int32_t b) {
        a = findRoot(a);
        b = findRoot(b);
        if (a != b) {
            dsu.emplace(a, a);
            dsu.emplace(b, b);
            dsu[b] = a;
        }
    };
    for (const EqAtom& e : eqResult.eqFacts) unite(e.a.code, e.b.code);

    // Representative: class minimum in the constant order (non-fresh first).
    std::unordered_map<int32_t, Constant> rep;
    ConstantOrder lt{&syms};
    auto consider = [&](Constant c) {
        int32_t r = findRoot(c.code);
        auto [it, inserted] = rep.emplace(r, c);
        if (!inserted && lt(c, it->second)) it->second = c;
    };
    for (const EqAtom& e : eqResult.eqFacts) {
        consider(e.a);
        consider(e.b);
    }
    for (const Fact& f : eqResult.facts)
        for (Constant c : f.args) consider(c);

    // Two distinct non-fresh constants in one class would contradict the
    // non-failed status.
    {
        std::unordered_map<int32_t, Constant> nonFresh;
        auto checkNf = [&](Constant c) {
            if (c.isFresh()) return;
            int32_t r = findRoot(c.code);
            auto [it, inserted] = nonFresh.emplace(r, c);
            if (!inserted && !(it->second == c))
                throw SemanticError("eq class contains two distinct non-fresh constants");
        };
        for (const EqAtom& e : eqResult.eqFacts) {
            checkNf(e.a);
            checkNf(e.b);
        }
    }

    std::unordered_map<Fact, uint64_t, FactTupleHash, FactTupleEq> merged;
    for (const Fact& f : eqResult.facts) {
        Fact g = f;
        for (Constant& c : g.args) {
            auto it = rep.find(findRoot(c.code));
            if (it != rep.end()) c = it->second;
        }
        auto [it, inserted] = merged.emplace(g, g.level);
        if (!inserted) it->second = std::min(it->second, g.level);
    }

    ChaseResult out;
    out.status = eqResult.status;
    out.truncatedAt = eqResult.truncatedAt;
    out.freshUsed = eqResult.freshUsed;
    for (auto& [f, lvl] : merged) {
        Fact g = f;
        g.level = lvl;
        out.facts.push_back(std::move(g));
    }
    FactOrder flt{&syms, &schema};
    std::sort(out.facts.begin(), out.facts.end(), [&](const Fact& a, const Fact& b) {
        if (a.level != b.level) return a.level < b.level;
        return flt(a, b);
    });
    return out;
}

ChaseExistence chaseExists(SymbolTable& syms, const CDSet& cds, const Database& db) {
    DependencySet full = DependencySet::fromCds(cds);
    DependencySet restricted;
    for (size_t i = 0; i < full.ids.size(); ++i) {
        const auto& id = full.ids[i];
        PredKind lk = cds.kind[static_cast<size_t>(id.lhsPred)];
        PredKind rk = cds.kind[static_cast<size_t>(id.rhsPred)];
        // Full-width relationship is-a IDs permute complete tuples; attribute
        // typing IDs project the leading columns of an attribute fact into a
        // relationship, which can also introduce a tuple of non-fresh
        // constants. These are the only rules that can manufacture the
        // all-non-fresh tuples a non-repairable key violation needs.
        bool relIsa = lk == PredKind::Relationship && rk == PredKind::Relationship &&
                      isFullWidth(cds.schema, id);
        bool attrTyping = lk == PredKind::Attribute && rk == PredKind::Relationship;
        if (relIsa || attrTyping) {
            restricted.ids.push_back(id);
            restricted.idNames.push_back(full.idNames[i]);
        }
    }
    restricted.kds = full.kds;
    restricted.kdNames = full.kdNames;

    ChaseOptions opts;
    uint64_t wFact = factorialClamped(cds.schema.maxArity());
    uint64_t cap = wFact > UINT64_MAX / (cds.schema.size() + 2)
                       ? UINT64_MAX
                       : wFact * (cds.schema.size() + 2);
    opts.maxLevel = cap;
    ChaseResult r = buildChase(syms, cds.schema, restricted, db, opts);
    ChaseExistence out;
    out.restrictedChaseSize = r.facts.size();
    if (r.status == ChaseResult::Status::Failed) {
        out.exists = false;
        out.witness = r.failure;
    }
    return out;
}

namespace {
uint64_t checkedMul(uint64_t a, uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a)
        throw OverflowError("level bound overflow; cap the maximum predicate arity W");
    return a * b;
}
uint64_t checkedAdd(uint64_t a, uint64_t b) {
    if (b > UINT64_MAX - a)
        throw OverflowError("level bound overflow; cap the maximum predicate arity W");
    return a + b;
}
} // namespace

LevelBound computeLevelBound(const RelationalSchema& schema, size_t queryAtoms, uint64_t cD) {
    LevelBound lb;
    lb.numPredicates = schema.size();
    lb.maxArity = static_cast<uint64_t>(schema.maxArity());
    lb.cD = cD;
    lb.queryAtoms = queryAtoms;
    uint64_t wFact = 1;
    for (uint64_t i = 2; i <= lb.maxArity; ++i) wFact = checkedMul(wFact, i);
    lb.deltaC = checkedMul(lb.numPredicates, checkedAdd(1, checkedMul(lb.numPredicates, wFact)));
    lb.deltaD = checkedMul(lb.deltaC, cD);
    uint64_t qMinus1 = queryAtoms == 0 ? 0 : static_cast<uint64_t>(queryAtoms) - 1;
    lb.deltaM = checkedAdd(lb.deltaD, checkedMul(lb.deltaC, qMinus1));
    lb.stopLevel = checkedAdd(lb.deltaM, lb.deltaC);
    return lb;
}

std::string renderChaseFacts(const SymbolTable& syms, const RelationalSchema& schema,
                             const std::vector<Fact>& facts) {
    std::string out;
    for (const Fact& f : facts) {
        out += renderFact(syms, schema, f);
        out += ".  # level ";
        out += std::to_string(f.level);
        out += '\n';
    }
    return out;
}

} // namespace eerq
