#pragma once

#include <string>
#include <vector>

#include "eerq/relational.hpp"

namespace eerq {

enum class PredKind { Entity, Relationship, Attribute };

// A recognized conceptual-dependency set: partitioned schema plus IDs/KDs in
// the shapes the EER translation can produce. Dependencies are kept in
// canonical order ((rule tag, rendering), tagless last), and sigma names
// (sigma1, sigma2, ...) follow that order.
struct CDSet {
    RelationalSchema schema;
    std::vector<PredKind> kind; // indexed by predicate id
    std::vector<InclusionDependency> ids;
    std::vector<KeyDependency> kds;
    std::vector<int> idSigma; // ids[i] is sigma<idSigma[i]>
    std::vector<int> kdSigma;

    std::string sigmaNameOfId(size_t i) const { return "sigma" + std::to_string(idSigma[i]); }
    std::string sigmaNameOfKd(size_t i) const { return "sigma" + std::to_string(kdSigma[i]); }
};

struct CdViolation {
    char condition;      // 'a'..'i' of the CD-shape characterization
    std::string detail;
};

struct RecognizeResult {
    bool ok = false;
    CDSet cds;                          // valid when ok
    std::vector<CdViolation> violations; // nonempty when !ok
};

// Deterministic partition + full condition check. Unary predicates go to the
// entity class; an arity >= 2 predicate goes to the attribute class exactly
// when it has a typing ID over its first arity-1 positions into a predicate
// of arity-1 fewer positions and no last-position typing into a unary
// predicate; everything else is a relationship.
RecognizeResult recognizeCds(const RelationalSchema& schema,
                             std::vector<InclusionDependency> ids,
                             std::vector<KeyDependency> kds);

// Sorts ids/kds canonically and assigns sigma indices. Used by recognizeCds
// and by the translation; exposed for .cds file loading.
void canonicalizeDependencies(const RelationalSchema& schema,
                              std::vector<InclusionDependency>& ids,
                              std::vector<KeyDependency>& kds,
                              std::vector<int>& idSigma, std::vector<int>& kdSigma);

const char* predKindName(PredKind k);

} // namespace eerq
