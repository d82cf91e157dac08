#include "eerq/cds.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "eerq/error.hpp"

namespace eerq {

const char* predKindName(PredKind k) {
    switch (k) {
        case PredKind::Entity: return "entity";
        case PredKind::Relationship: return "relationship";
        case PredKind::Attribute: return "attribute";
    }
    return "?";
}

void canonicalizeDependencies(const RelationalSchema& schema,
                              std::vector<InclusionDependency>& ids,
                              std::vector<KeyDependency>& kds,
                              std::vector<int>& idSigma, std::vector<int>& kdSigma) {
    struct Entry {
        int tag;
        std::string text;
        bool isId;
        size_t pos;
    };
    auto sortKey = [&](const Entry& e) { return std::tie(e.tag, e.text); };

    auto sortDeps = [&](auto& deps) {
        std::sort(deps.begin(), deps.end(), [&](const auto& a, const auto& b) {
            int ta = a.ruleTag.value_or(100), tb = b.ruleTag.value_or(100);
            if (ta != tb) return ta < tb;
            return renderDependency(schema, Dependency(a)) < renderDependency(schema, Dependency(b));
        });
        deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    };
    sortDeps(ids);
    sortDeps(kds);

    std::vector<Entry> all;
    for (size_t i = 0; i < ids.size(); ++i)
        all.push_back({ids[i].ruleTag.value_or(100), renderId(schema, ids[i]), true, i});
    for (size_t i = 0; i < kds.size(); ++i)
        all.push_back({kds[i].ruleTag.value_or(100), renderKd(schema, kds[i]), false, i});
    std::sort(all.begin(), all.end(),
              [&](const Entry& a, const Entry& b) { return sortKey(a) < sortKey(b); });

    idSigma.assign(ids.size(), 0);
    kdSigma.assign(kds.size(), 0);
    for (size_t i = 0; i < all.size(); ++i) {
        if (all[i].isId)
            idSigma[all[i].pos] = static_cast<int>(i + 1);
        else
            kdSigma[all[i].pos] = static_cast<int>(i + 1);
    }
}

namespace {

// Shape tests relative to a partition. Positions are 1-based.
bool isIdentityPrefix(const std::vector<int>& cols, int n) {
    if (cols.size() != static_cast<size_t>(n)) return false;
    for (int i = 0; i < n; ++i)
        if (cols[static_cast<size_t>(i)] != i + 1) return false;
    return true;
}

bool isPermutationOf1toN(const std::vector<int>& cols, int n) {
    if (cols.size() != static_cast<size_t>(n)) return false;
    std::vector<bool> seen(static_cast<size_t>(n) + 1, false);
    for (int c : cols) {
        if (c < 1 || c > n || seen[static_cast<size_t>(c)]) return false;
        seen[static_cast<size_t>(c)] = true;
    }
    return true;
}

} // namespace

RecognizeResult recognizeCds(const RelationalSchema& schema,
                             std::vector<InclusionDependency> ids,
                             std::vector<KeyDependency> kds) {
    RecognizeResult result;
    for (const auto& id : ids) validateDependency(schema, id);
    for (const auto& kd : kds) validateDependency(schema, kd);

    // Deterministic partition.
    std::vector<PredKind> kind(schema.size(), PredKind::Relationship);
    for (size_t p = 0; p < schema.size(); ++p) {
        int32_t pid = static_cast<int32_t>(p);
        if (schema.arity(pid) == 1) {
            kind[p] = PredKind::Entity;
            continue;
        }
        bool lastTyping = false, attrTyping = false;
        for (const auto& id : ids) {
            if (id.lhsPred != pid) continue;
            int n = schema.arity(pid);
            if (id.lhsCols == std::vector<int>{n} && schema.arity(id.rhsPred) == 1)
                lastTyping = true;
            if (isIdentityPrefix(id.lhsCols, n - 1) && isIdentityPrefix(id.rhsCols, n - 1) &&
                schema.arity(id.rhsPred) == n - 1)
                attrTyping = true;
        }
        kind[p] = (attrTyping && !lastTyping) ? PredKind::Attribute : PredKind::Relationship;
    }

    auto& violations = result.violations;
    std::set<std::string> seenConditions; // (condition, detail) dedup
    auto report = [&](char cond, std::string detail) {
        if (seenConditions.insert(std::string(1, cond) + "|" + detail).second)
            violations.push_back({cond, std::move(detail)});
    };

    auto K = [&](int32_t p) { return kind[static_cast<size_t>(p)]; };

    // (c) KD shapes.
    for (const auto& kd : kds) {
        int n = schema.arity(kd.pred);
        bool shape1 = K(kd.pred) == PredKind::Relationship && kd.keyCols.size() == 1;
        bool shape2 = K(kd.pred) == PredKind::Attribute && isIdentityPrefix(kd.keyCols, n - 1);
        if (!shape1 && !shape2)
            report('c', renderKd(schema, kd) + " matches no CD key shape for " +
                            predKindName(K(kd.pred)) + " predicate " + schema.name(kd.pred));
    }

    // (d) ID shapes.
    for (const auto& id : ids) {
        PredKind lk = K(id.lhsPred), rk = K(id.rhsPred);
        int la = schema.arity(id.lhsPred), ra = schema.arity(id.rhsPred);
        bool ok = false;
        if (lk == PredKind::Entity && rk == PredKind::Entity) // (d.1)
            ok = id.lhsCols == std::vector<int>{1} && id.rhsCols == std::vector<int>{1};
        else if (lk == PredKind::Entity && rk == PredKind::Relationship) // (d.2)
            ok = id.lhsCols == std::vector<int>{1} && id.rhsCols.size() == 1;
        else if (lk == PredKind::Relationship && rk == PredKind::Entity) // (d.3)
            ok = id.lhsCols.size() == 1 && id.rhsCols == std::vector<int>{1};
        else if (lk == PredKind::Relationship && rk == PredKind::Relationship) // (d.4)
            ok = la == ra && isIdentityPrefix(id.lhsCols, la) && isPermutationOf1toN(id.rhsCols, la);
        else if (lk == PredKind::Attribute && rk == PredKind::Entity) // (d.5)
            ok = id.lhsCols == std::vector<int>{1} && id.rhsCols == std::vector<int>{1};
        else if (lk == PredKind::Attribute && rk == PredKind::Relationship) // (d.6)
            ok = ra == la - 1 && isIdentityPrefix(id.lhsCols, la - 1) &&
                 isIdentityPrefix(id.rhsCols, la - 1);
        else if (lk == PredKind::Entity && rk == PredKind::Attribute) // (d.7)
            ok = ra == 2 && id.lhsCols == std::vector<int>{1} && id.rhsCols == std::vector<int>{1};
        else if (lk == PredKind::Relationship && rk == PredKind::Attribute) // (d.8)
            ok = ra == la + 1 && isIdentityPrefix(id.lhsCols, la) && isIdentityPrefix(id.rhsCols, la);
        if (!ok)
            report('d', renderId(schema, id) + " matches no CD inclusion shape (" +
                            predKindName(lk) + " -> " + predKindName(rk) + ")");
    }

    // (e) typing IDs for relationships: existence and uniqueness per position.
    for (size_t p = 0; p < schema.size(); ++p) {
        int32_t pid = static_cast<int32_t>(p);
        if (K(pid) != PredKind::Relationship) continue;
        for (int i = 1; i <= schema.arity(pid); ++i) {
            std::set<int32_t> targets;
            for (const auto& id : ids)
                if (id.lhsPred == pid && id.lhsCols == std::vector<int>{i} &&
                    K(id.rhsPred) == PredKind::Entity && id.rhsCols == std::vector<int>{1})
                    targets.insert(id.rhsPred);
            if (targets.empty())
                report('e', schema.name(pid) + " position " + std::to_string(i) +
                                " has no typing ID into an entity predicate");
            else if (targets.size() > 1)
                report('e', schema.name(pid) + " position " + std::to_string(i) +
                                " has more than one typing ID");
        }
    }

    // (f) typing IDs for attributes.
    for (size_t p = 0; p < schema.size(); ++p) {
        int32_t pid = static_cast<int32_t>(p);
        if (K(pid) != PredKind::Attribute) continue;
        int n = schema.arity(pid) - 1;
        std::set<int32_t> targets;
        for (const auto& id : ids)
            if (id.lhsPred == pid && isIdentityPrefix(id.lhsCols, n) &&
                isIdentityPrefix(id.rhsCols, n) && schema.arity(id.rhsPred) == n &&
                K(id.rhsPred) != PredKind::Attribute)
                targets.insert(id.rhsPred);
        if (targets.empty())
            report('f', schema.name(pid) + " has no typing ID onto its owner predicate");
        else if (targets.size() > 1)
            report('f', schema.name(pid) + " has more than one typing ID");
    }

    auto hasId = [&](int32_t lp, const std::vector<int>& lc, int32_t rp, const std::vector<int>& rc) {
        for (const auto& id : ids)
            if (id.lhsPred == lp && id.lhsCols == lc && id.rhsPred == rp && id.rhsCols == rc)
                return true;
        return false;
    };

    // (g)-(i) converse IDs.
    for (const auto& id : ids) {
        if (K(id.lhsPred) == PredKind::Entity && K(id.rhsPred) == PredKind::Relationship &&
            id.lhsCols == std::vector<int>{1} && id.rhsCols.size() == 1) {
            if (!hasId(id.rhsPred, id.rhsCols, id.lhsPred, {1}))
                report('g', renderId(schema, id) + " lacks its converse typing ID");
        }
        if (K(id.lhsPred) == PredKind::Relationship && K(id.rhsPred) == PredKind::Attribute) {
            if (!hasId(id.rhsPred, id.rhsCols, id.lhsPred, id.lhsCols))
                report('h', renderId(schema, id) + " lacks its converse attribute typing ID");
        }
        if (K(id.lhsPred) == PredKind::Entity && K(id.rhsPred) == PredKind::Attribute &&
            schema.arity(id.rhsPred) == 2) {
            if (!hasId(id.rhsPred, {1}, id.lhsPred, {1}))
                report('i', renderId(schema, id) + " lacks its converse attribute typing ID");
        }
    }

    if (!violations.empty()) return result;

    result.ok = true;
    result.cds.schema = schema;
    result.cds.kind = std::move(kind);
    result.cds.ids = std::move(ids);
    result.cds.kds = std::move(kds);
    canonicalizeDependencies(result.cds.schema, result.cds.ids, result.cds.kds, result.cds.idSigma,
                             result.cds.kdSigma);
    return result;
}

} // namespace eerq
