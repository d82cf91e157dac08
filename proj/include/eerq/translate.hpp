#pragma once

#include "eerq/cds.hpp"
#include "eerq/eer.hpp"

namespace eerq {

// Relational encoding: one unary predicate per entity, an n-ary predicate per
// n-ary relationship, arity-2 per entity attribute, arity-(n+1) per
// relationship attribute. Names are the lowercased EER names; collisions after
// lowercasing are an error.
RelationalSchema toRelational(const EERSchema& schema);

// Emits exactly the dependencies mandated by the translation rules (1)-(11),
// tagged with their generating rule; the result passes recognizeCds.
CDSet toCds(const EERSchema& schema);

std::string lowercaseName(const std::string& name);

} // namespace eerq
