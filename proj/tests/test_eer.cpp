#include <doctest.h>

#include <random>

#include "eerq/eer.hpp"
#include "eerq/error.hpp"
#include "support/generators.hpp"

using namespace eerq;
using namespace eerq::testing;

TEST_CASE("parsing the running example") {
    EERSchema s = parseEer(kExampleEer);
    CHECK(s.entities.size() == 3);
    CHECK(s.relationships.size() == 2);
    CHECK(s.attributes.size() == 3);
    for (const auto& r : s.relationships) CHECK(r.arity() == 2);
    const EntityDef* mgr = s.findEntity("Manager");
    REQUIRE(mgr != nullptr);
    CHECK(mgr->isa.count("Employee") == 1);
    CHECK(mgr->participatesAtLeastOnce.count({"Manages", 1}) == 1);
    const RelationshipDef* man = s.findRelationship("Manages");
    REQUIRE(man != nullptr);
    CHECK(man->isa.count({"Works_in", {1, 2}}) == 1);
}

TEST_CASE("empty input is a valid empty schema") {
    EERSchema s = parseEer("");
    CHECK(s.entities.empty());
    CHECK(s.relationships.empty());
    CHECK(s.attributes.empty());
    CHECK(validateEer(s).empty());
}

TEST_CASE("a relationship isa with a repeated index is not a permutation") {
    const char* text = R"(
entity A
entity B
relationship R among A, B
relationship S among A, B
  isa: R[1,1]
)";
    CHECK_THROWS_WITH_AS(parseEer(text), doctest::Contains("not a permutation"), SemanticError);
}

TEST_CASE("validate reports undefined references") {
    const char* text = R"(
entity A
  participates(>=1): Missing:1
)";
    EERSchema s = parseEerSyntax(text);
    auto report = validateEer(s);
    REQUIRE(report.size() == 1);
    CHECK(report[0].message.find("Missing") != std::string::npos);
}

TEST_CASE("entity isa cycles are legal") {
    const char* text = R"(
entity A
  isa: B
entity B
  isa: A
)";
    EERSchema s = parseEerSyntax(text);
    CHECK(validateEer(s).empty());
}

TEST_CASE("unknown qualification keywords are errors") {
    CHECK_THROWS_AS(parseEer("entity X\nattribute a of X optional\n"), ParseError);
}

TEST_CASE("duplicate clauses of one kind are merged") {
    const char* text = R"(
entity A
  isa: B
  isa: C
entity B
entity C
)";
    EERSchema s = parseEer(text);
    CHECK(s.findEntity("A")->isa == std::set<std::string>{"B", "C"});
}

TEST_CASE("duplicate and cross-kind name clashes are violations") {
    EERSchema dupEnt = parseEerSyntax("entity A\nentity A\n");
    CHECK(validateEer(dupEnt).size() == 1);
    EERSchema cross = parseEerSyntax("entity A\nentity B\nrelationship A among A, B\n");
    CHECK(!validateEer(cross).empty());
    EERSchema dupAttr = parseEerSyntax("entity A\nattribute n of A\nattribute n of A\n");
    CHECK(!validateEer(dupAttr).empty());
}

TEST_CASE("participation must match the among clause component") {
    const char* text = R"(
entity A
  participates(<=1): R:2
entity B
relationship R among A, B
)";
    EERSchema s = parseEerSyntax(text);
    auto report = validateEer(s);
    REQUIRE(report.size() == 1);
    CHECK(report[0].message.find("component 2") != std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parseEer("entity 123\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.col() == 8);
        CHECK(std::string(e.what()).find("expected a name") != std::string::npos);
    }
}

TEST_CASE("parse then print then parse is idempotent") {
    EERSchema a = parseEer(kExampleEer);
    EERSchema b = parseEer(printEer(a));
    CHECK(a == b);

    std::mt19937_64 rng(5);
    for (int round = 0; round < 40; ++round) {
        EERSchema s = randomEerSchema(rng);
        EERSchema t = parseEer(printEer(s));
        CHECK(s == t);
    }
}
