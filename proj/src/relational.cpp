#include "eerq/relational.hpp"

#include <algorithm>

#include "eerq/error.hpp"

namespace eerq {

int32_t RelationalSchema::addPredicate(std::string_view name, int arity) {
    if (arity < 1) throw SemanticError("predicate '" + std::string(name) + "' must have arity >= 1");
    std::string key(name);
    auto it = index_.find(key);
    if (it != index_.end()) {
        if (preds_[static_cast<size_t>(it->second)].arity != arity)
            throw SemanticError("predicate '" + key + "' redeclared with different arity");
        return it->second;
    }
    int32_t id = static_cast<int32_t>(preds_.size());
    preds_.push_back({std::move(key), arity});
    index_.emplace(preds_.back().name, id);
    return id;
}

std::optional<int32_t> RelationalSchema::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int RelationalSchema::maxArity() const {
    int w = 0;
    for (const auto& p : preds_) w = std::max(w, p.arity);
    return w;
}

size_t FactTupleHash::operator()(const Fact& f) const {
    size_t h = std::hash<int32_t>()(f.pred);
    for (Constant c : f.args) h = h * 1000003u + static_cast<size_t>(static_cast<uint32_t>(c.code));
    return h;
}

bool FactOrder::operator()(const Fact& a, const Fact& b) const {
    if (a.pred != b.pred) return schema->name(a.pred) < schema->name(b.pred);
    ConstantOrder lt{syms};
    for (size_t i = 0; i < a.args.size() && i < b.args.size(); ++i) {
        if (a.args[i] == b.args[i]) continue;
        return lt(a.args[i], b.args[i]);
    }
    return a.args.size() < b.args.size();
}

bool Database::insert(Fact f) {
    if (index_.count(f)) return false;
    facts_.push_back(f);
    index_.insert(std::move(f));
    return true;
}

std::string renderFact(const SymbolTable& syms, const RelationalSchema& schema, const Fact& f) {
    std::string out = schema.name(f.pred);
    out += '(';
    for (size_t i = 0; i < f.args.size(); ++i) {
        if (i) out += ',';
        out += renderConstant(syms, f.args[i]);
    }
    out += ')';
    return out;
}

void validateDependency(const RelationalSchema& schema, const InclusionDependency& id) {
    if (id.lhsPred < 0 || static_cast<size_t>(id.lhsPred) >= schema.size() || id.rhsPred < 0 ||
        static_cast<size_t>(id.rhsPred) >= schema.size())
        throw SemanticError("inclusion dependency references an unknown predicate");
    if (id.lhsCols.empty() || id.lhsCols.size() != id.rhsCols.size())
        throw SemanticError("inclusion dependency " + renderId(schema, id) +
                            ": column lists must be nonempty and of equal length");
    auto checkSide = [&](const std::vector<int>& cols, int32_t pred) {
        std::vector<int> seen;
        for (int c : cols) {
            if (c < 1 || c > schema.arity(pred))
                throw SemanticError("inclusion dependency " + renderId(schema, id) +
                                    ": position out of range for " + schema.name(pred));
            if (std::find(seen.begin(), seen.end(), c) != seen.end())
                throw SemanticError("inclusion dependency " + renderId(schema, id) +
                                    ": repeated position in one side");
            seen.push_back(c);
        }
    };
    checkSide(id.lhsCols, id.lhsPred);
    checkSide(id.rhsCols, id.rhsPred);
}

void validateDependency(const RelationalSchema& schema, const KeyDependency& kd) {
    if (kd.pred < 0 || static_cast<size_t>(kd.pred) >= schema.size())
        throw SemanticError("key dependency references an unknown predicate");
    if (schema.arity(kd.pred) < 2)
        throw SemanticError("key dependency on '" + schema.name(kd.pred) +
                            "': keys are only defined for arity >= 2");
    if (kd.keyCols.empty())
        throw SemanticError("key dependency on '" + schema.name(kd.pred) + "': empty key");
    if (!std::is_sorted(kd.keyCols.begin(), kd.keyCols.end()) ||
        std::adjacent_find(kd.keyCols.begin(), kd.keyCols.end()) != kd.keyCols.end())
        throw SemanticError("key dependency on '" + schema.name(kd.pred) +
                            "': key positions must be sorted and distinct");
    for (int c : kd.keyCols)
        if (c < 1 || c > schema.arity(kd.pred))
            throw SemanticError("key dependency on '" + schema.name(kd.pred) +
                                "': position out of range");
    if (kd.keyCols.size() >= static_cast<size_t>(schema.arity(kd.pred)))
        throw SemanticError("key dependency on '" + schema.name(kd.pred) +
                            "': key must be a proper subset of the positions");
}

bool isFullWidth(const RelationalSchema& schema, const InclusionDependency& id) {
    return id.lhsCols.size() == static_cast<size_t>(schema.arity(id.lhsPred)) &&
           id.rhsCols.size() == static_cast<size_t>(schema.arity(id.rhsPred));
}

static void renderCols(std::string& out, const std::vector<int>& cols) {
    out += '[';
    for (size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(cols[i]);
    }
    out += ']';
}

std::string renderId(const RelationalSchema& schema, const InclusionDependency& id) {
    std::string out = schema.name(id.lhsPred);
    renderCols(out, id.lhsCols);
    out += " <= ";
    out += schema.name(id.rhsPred);
    renderCols(out, id.rhsCols);
    return out;
}

std::string renderKd(const RelationalSchema& schema, const KeyDependency& kd) {
    std::string out = "key(";
    out += schema.name(kd.pred);
    out += ") = {";
    for (size_t i = 0; i < kd.keyCols.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(kd.keyCols[i]);
    }
    out += '}';
    return out;
}

std::string renderDependency(const RelationalSchema& schema, const Dependency& dep) {
    if (std::holds_alternative<InclusionDependency>(dep))
        return renderId(schema, std::get<InclusionDependency>(dep));
    return renderKd(schema, std::get<KeyDependency>(dep));
}

bool satisfies(const RelationalSchema& schema, const Database& db, const InclusionDependency& id) {
    validateDependency(schema, id);
    // Index rhs projections for the membership test.
    std::unordered_set<std::string> rhs;
    auto key = [](const Fact& f, const std::vector<int>& cols) {
        std::string k;
        for (int c : cols) {
            k += std::to_string(f.args[static_cast<size_t>(c - 1)].code);
            k += ',';
        }
        return k;
    };
    for (const Fact& f : db.facts())
        if (f.pred == id.rhsPred) rhs.insert(key(f, id.rhsCols));
    for (const Fact& f : db.facts())
        if (f.pred == id.lhsPred && !rhs.count(key(f, id.lhsCols))) return false;
    return true;
}

bool satisfies(const RelationalSchema& schema, const Database& db, const KeyDependency& kd) {
    validateDependency(schema, kd);
    std::unordered_map<std::string, const Fact*> seen;
    for (const Fact& f : db.facts()) {
        if (f.pred != kd.pred) continue;
        std::string k;
        for (int c : kd.keyCols) {
            k += std::to_string(f.args[static_cast<size_t>(c - 1)].code);
            k += ',';
        }
        auto [it, inserted] = seen.emplace(std::move(k), &f);
        if (!inserted && !it->second->sameTuple(f)) return false;
    }
    return true;
}

JoinGraphResult joinGraphComponents(const Database& db) {
    const auto& facts = db.facts();
    std::vector<size_t> parent(facts.size());
    for (size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](size_t a, size_t b) { parent[find(a)] = find(b); };

    std::unordered_map<int32_t, size_t> firstWith; // constant code -> first fact index
    for (size_t i = 0; i < facts.size(); ++i) {
        for (Constant c : facts[i].args) {
            auto [it, inserted] = firstWith.emplace(c.code, i);
            if (!inserted) unite(i, it->second);
        }
    }

    JoinGraphResult result;
    std::unordered_map<size_t, size_t> compOf;
    for (size_t i = 0; i < facts.size(); ++i) {
        size_t root = find(i);
        auto [it, inserted] = compOf.emplace(root, result.components.size());
        if (inserted) result.components.emplace_back();
        result.components[it->second].push_back(i);
    }
    for (const auto& comp : result.components)
        result.largestComponent = std::max(result.largestComponent, static_cast<uint64_t>(comp.size()));
    return result;
}

} // namespace eerq
