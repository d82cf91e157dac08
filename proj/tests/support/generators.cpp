#include "support/generators.hpp"

#include <algorithm>
#include <set>

#include "eerq/chase.hpp"
#include "eerq/error.hpp"
#include "eerq/rewrite.hpp"
#include "eerq/translate.hpp"

namespace eerq::testing {

const char* const kExampleEer = R"(
entity Employee
  participates(>=1): Works_in:1
  participates(<=1): Works_in:1
entity Manager
  isa: Employee
  participates(>=1): Manages:1
  participates(<=1): Manages:1
entity Dept
relationship Works_in among Employee, Dept
relationship Manages among Manager, Dept
  isa: Works_in[1,2]
attribute emp_name of Employee
attribute dept_name of Dept
attribute since of Works_in
)";

const char* const kInfiniteModelEer = R"(
entity B
  participates(>=1): R:2
entity A
  isa: B
  participates(<=1): R:1
relationship R among A, B
)";

Fact fact(SymbolTable& syms, const RelationalSchema& schema, const std::string& pred,
          const std::vector<std::string>& args, uint64_t level) {
    Fact f;
    f.pred = *schema.find(pred);
    for (const auto& a : args) f.args.push_back(Constant::nonFresh(syms.intern(a)));
    f.level = level;
    return f;
}

Fact factWith(const RelationalSchema& schema, const std::string& pred, std::vector<Constant> args,
              uint64_t level) {
    Fact f;
    f.pred = *schema.find(pred);
    f.args = std::move(args);
    f.level = level;
    return f;
}

Constant c(SymbolTable& syms, const std::string& name) {
    return Constant::nonFresh(syms.intern(name));
}

AnswerTuple tuple(SymbolTable& syms, const std::vector<std::string>& names) {
    AnswerTuple t;
    for (const auto& n : names) t.push_back(c(syms, n));
    return t;
}

namespace {

int randInt(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}
bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
}

} // namespace

EERSchema randomEerSchema(Rng& rng, const GenOptions& opts) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        EERSchema s;
        int ne = randInt(rng, 1, opts.maxEntities);
        for (int i = 0; i < ne; ++i) s.entities.push_back({"E" + std::to_string(i + 1), {}, {}, {}});
        int nr = randInt(rng, 0, opts.maxRelationships);
        for (int i = 0; i < nr; ++i) {
            RelationshipDef r;
            r.name = "R" + std::to_string(i + 1);
            int arity = (opts.allowTernary && chance(rng, 0.25)) ? 3 : 2;
            for (int k = 0; k < arity; ++k)
                r.among.push_back(s.entities[static_cast<size_t>(randInt(rng, 0, ne - 1))].name);
            s.relationships.push_back(std::move(r));
        }
        // Relationship is-a between same-arity relationships (possibly cyclic).
        for (size_t i = 0; i < s.relationships.size(); ++i) {
            for (size_t j = 0; j < s.relationships.size(); ++j) {
                if (i == j || !chance(rng, 0.2)) continue;
                auto& ri = s.relationships[i];
                auto& rj = s.relationships[j];
                if (ri.arity() != rj.arity()) continue;
                std::vector<int> perm(static_cast<size_t>(ri.arity()));
                for (int k = 0; k < ri.arity(); ++k) perm[static_cast<size_t>(k)] = k + 1;
                std::shuffle(perm.begin(), perm.end(), rng);
                ri.isa.insert({rj.name, perm});
            }
        }
        // Entity is-a (possibly cyclic).
        for (int i = 0; i < ne; ++i)
            for (int j = 0; j < ne; ++j)
                if (i != j && chance(rng, 0.2))
                    s.entities[static_cast<size_t>(i)].isa.insert(
                        s.entities[static_cast<size_t>(j)].name);
        // Participation constraints. For Skolem-acyclicity, allow a
        // participates(>=1) from entity E into relationship R only when every
        // entity of R is strictly later in the declaration order than E
        // (is-a edges may point anywhere: they never introduce Skolems, but a
        // Skolem cycle needs a >=1 edge back into an earlier typing class, so
        // we keep >=1 edges strictly forward and is-a cycles confined to
        // declaration-order cycles without >=1 participation).
        auto entityIndex = [&](const std::string& name) {
            for (size_t k = 0; k < s.entities.size(); ++k)
                if (s.entities[k].name == name) return static_cast<int>(k);
            return -1;
        };
        for (auto& e : s.entities) {
            for (auto& r : s.relationships) {
                for (int comp = 1; comp <= r.arity(); ++comp) {
                    if (r.among[static_cast<size_t>(comp - 1)] != e.name) continue;
                    if (chance(rng, 0.35)) {
                        bool ok = true;
                        if (opts.skolemAcyclic) {
                            int self = entityIndex(e.name);
                            for (const auto& other : r.among)
                                ok = ok && entityIndex(other) >= self;
                        }
                        if (ok) e.participatesAtLeastOnce.insert({r.name, comp});
                    }
                    if (chance(rng, 0.35)) e.participatesAtMostOnce.insert({r.name, comp});
                }
            }
        }
        if (opts.skolemAcyclic) {
            // Entity is-a must not route a Skolem chain backwards either:
            // restrict is-a edges to targets declared no earlier.
            for (size_t i = 0; i < s.entities.size(); ++i) {
                auto& e = s.entities[i];
                std::set<std::string> keep;
                for (const auto& target : e.isa)
                    if (entityIndex(target) >= static_cast<int>(i)) keep.insert(target);
                e.isa = std::move(keep);
            }
        }
        int na = randInt(rng, 0, opts.maxAttributes);
        for (int i = 0; i < na; ++i) {
            AttributeDef a;
            a.name = "att" + std::to_string(i + 1);
            bool ofRel = !s.relationships.empty() && chance(rng, 0.4);
            if (ofRel) {
                a.owner = s.relationships[static_cast<size_t>(
                                              randInt(rng, 0, static_cast<int>(s.relationships.size()) - 1))]
                              .name;
                a.functional = chance(rng, 0.5);
                a.mandatory = opts.allowMandatoryRelationshipAttrs && chance(rng, 0.3);
            } else {
                a.owner = s.entities[static_cast<size_t>(randInt(rng, 0, ne - 1))].name;
                a.functional = chance(rng, 0.5);
                a.mandatory = chance(rng, 0.3);
            }
            s.attributes.push_back(std::move(a));
        }
        if (!validateEer(s).empty()) continue;
        try {
            CDSet cds = toCds(s);
            if (opts.skolemAcyclic) {
                // The structural bias above is only a heuristic (relationship
                // is-a can reroute Skolem chains); the dummy chase probe is
                // the authoritative finiteness check.
                DependencySet deps = DependencySet::fromCds(cds);
                auto symbols = std::make_shared<DlSymbols>();
                DummyChase probe = buildDummyChase(cds.schema, deps, 100, symbols, 600);
                if (!probe.completed) continue;
            }
        } catch (...) {
            continue;
        }
        return s;
    }
    // Fallback: a minimal schema always works.
    EERSchema s;
    s.entities.push_back({"E1", {}, {}, {}});
    return s;
}

Database randomDatabase(Rng& rng, SymbolTable& syms, const RelationalSchema& schema, int maxFacts,
                        int poolSize) {
    Database db;
    if (schema.size() == 0) return db;
    int n = randInt(rng, 0, maxFacts);
    for (int i = 0; i < n; ++i) {
        int32_t pred = static_cast<int32_t>(randInt(rng, 0, static_cast<int>(schema.size()) - 1));
        Fact f;
        f.pred = pred;
        for (int k = 0; k < schema.arity(pred); ++k)
            f.args.push_back(
                Constant::nonFresh(syms.intern("k" + std::to_string(randInt(rng, 1, poolSize)))));
        db.insert(std::move(f));
    }
    return db;
}

ConjunctiveQuery randomQuery(Rng& rng, SymbolTable& syms, const RelationalSchema& schema,
                             int maxAtoms, int poolSize) {
    ConjunctiveQuery q;
    if (schema.size() == 0) return q;
    int atoms = randInt(rng, 1, maxAtoms);
    std::vector<int32_t> bodyVars;
    for (int a = 0; a < atoms; ++a) {
        int32_t pred = static_cast<int32_t>(randInt(rng, 0, static_cast<int>(schema.size()) - 1));
        CqAtom atom;
        atom.pred = pred;
        for (int k = 0; k < schema.arity(pred); ++k) {
            if (chance(rng, 0.2)) {
                atom.terms.push_back(CqTerm::constantTerm(
                    Constant::nonFresh(syms.intern("k" + std::to_string(randInt(rng, 1, poolSize))))));
            } else {
                int32_t v = q.varId("V" + std::to_string(randInt(rng, 1, 4)));
                atom.terms.push_back(CqTerm::variable(v));
                bodyVars.push_back(v);
            }
        }
        q.body.push_back(std::move(atom));
    }
    std::sort(bodyVars.begin(), bodyVars.end());
    bodyVars.erase(std::unique(bodyVars.begin(), bodyVars.end()), bodyVars.end());
    for (int32_t v : bodyVars)
        if (chance(rng, 0.5)) q.headVars.push_back(v);
    return q;
}

} // namespace eerq::testing
