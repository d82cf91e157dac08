#include "eerq/translate.hpp"

#include <algorithm>
#include <map>

#include "eerq/error.hpp"

namespace eerq {

std::string lowercaseName(const std::string& name) {
    std::string out = name;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

RelationalSchema toRelational(const EERSchema& schema) {
    auto violations = validateEer(schema);
    if (!violations.empty()) throw SemanticError("invalid EER schema: " + violations[0].message);

    RelationalSchema rel;
    std::map<std::string, std::string> origin; // lowercased -> original
    auto add = [&](const std::string& name, int arity) {
        std::string low = lowercaseName(name);
        auto [it, inserted] = origin.emplace(low, name);
        if (!inserted)
            throw SemanticError("name collision after lowercasing: '" + it->second + "' and '" +
                                name + "' both map to predicate '" + low + "'");
        rel.addPredicate(low, arity);
    };
    for (const auto& e : schema.entities) add(e.name, 1);
    for (const auto& r : schema.relationships) add(r.name, r.arity());
    for (const auto& a : schema.attributes) {
        const RelationshipDef* r = schema.findRelationship(a.owner);
        add(a.name, r ? r->arity() + 1 : 2);
    }
    return rel;
}

CDSet toCds(const EERSchema& schema) {
    RelationalSchema rel = toRelational(schema);
    auto pred = [&](const std::string& name) { return *rel.find(lowercaseName(name)); };
    auto seq = [](int n) {
        std::vector<int> cols(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) cols[static_cast<size_t>(i)] = i + 1;
        return cols;
    };

    std::vector<InclusionDependency> ids;
    std::vector<KeyDependency> kds;
    auto addId = [&](int32_t lp, std::vector<int> lc, int32_t rp, std::vector<int> rc, int tag) {
        ids.push_back({lp, std::move(lc), rp, std::move(rc), tag});
    };

    for (const auto& a : schema.attributes) {
        const RelationshipDef* r = schema.findRelationship(a.owner);
        if (!r) {
            // rules 1, 4, 6: entity attribute
            addId(pred(a.name), {1}, pred(a.owner), {1}, 1);
            if (a.mandatory) addId(pred(a.owner), {1}, pred(a.name), {1}, 4);
            if (a.functional) kds.push_back({pred(a.name), {1}, 6});
        } else {
            // rules 2, 5, 7: relationship attribute
            int n = r->arity();
            addId(pred(a.name), seq(n), pred(a.owner), seq(n), 2);
            if (a.mandatory) addId(pred(a.owner), seq(n), pred(a.name), seq(n), 5);
            if (a.functional) kds.push_back({pred(a.name), seq(n), 7});
        }
    }
    for (const auto& r : schema.relationships) {
        for (int i = 1; i <= r.arity(); ++i) // rule 3
            addId(pred(r.name), {i}, pred(r.among[static_cast<size_t>(i - 1)]), {1}, 3);
        for (const auto& [target, perm] : r.isa) // rule 9
            addId(pred(r.name), seq(r.arity()), pred(target), perm, 9);
    }
    for (const auto& e : schema.entities) {
        for (const auto& target : e.isa) // rule 8
            addId(pred(e.name), {1}, pred(target), {1}, 8);
        for (const auto& [rel_, comp] : e.participatesAtLeastOnce) // rule 10
            addId(pred(e.name), {1}, pred(rel_), {comp}, 10);
        for (const auto& [rel_, comp] : e.participatesAtMostOnce) // rule 11
            kds.push_back({pred(rel_), {comp}, 11});
    }

    RecognizeResult rec = recognizeCds(rel, std::move(ids), std::move(kds));
    if (!rec.ok) {
        std::string msg = "translated dependencies are not a CD set:";
        for (const auto& v : rec.violations) msg += "\n  (" + std::string(1, v.condition) + ") " + v.detail;
        throw SemanticError(msg);
    }
    return std::move(rec.cds);
}

} // namespace eerq
