#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace eerq {

struct EntityDef {
    std::string name;
    std::set<std::string> isa;
    std::set<std::pair<std::string, int>> participatesAtLeastOnce; // (relationship, component)
    std::set<std::pair<std::string, int>> participatesAtMostOnce;

    bool operator==(const EntityDef&) const = default;
};

struct RelationshipDef {
    std::string name;
    std::vector<std::string> among;                          // length n >= 2
    std::set<std::pair<std::string, std::vector<int>>> isa; // (relationship, permutation of 1..n)

    int arity() const { return static_cast<int>(among.size()); }
    bool operator==(const RelationshipDef&) const = default;
};

struct AttributeDef {
    std::string name;
    std::string owner; // entity or relationship name
    bool functional = false;
    bool mandatory = false;

    bool operator==(const AttributeDef&) const = default;
};

struct EERSchema {
    std::vector<EntityDef> entities;
    std::vector<RelationshipDef> relationships;
    std::vector<AttributeDef> attributes;

    const EntityDef* findEntity(const std::string& name) const;
    const RelationshipDef* findRelationship(const std::string& name) const;
    const AttributeDef* findAttribute(const std::string& name) const;

    bool operator==(const EERSchema&) const = default;
};

struct EerViolation {
    std::string message;
};

// Parses the textual definition language; throws ParseError on syntax errors
// and SemanticError (all violations joined) on invariant failures.
EERSchema parseEer(const std::string& text, const std::string& filename = "<input>");

// Syntax-only parse; callers run validateEer separately.
EERSchema parseEerSyntax(const std::string& text, const std::string& filename = "<input>");

// Empty report iff all schema invariants hold; one entry per violation.
std::vector<EerViolation> validateEer(const EERSchema& schema);

// Round-trips through parseEer up to whitespace and clause ordering.
std::string printEer(const EERSchema& schema);

} // namespace eerq
