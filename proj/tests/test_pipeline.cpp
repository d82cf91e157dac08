#include <doctest.h>

#include <random>
#include <thread>

#include "eerq/error.hpp"
#include "eerq/pipeline.hpp"
#include "eerq/translate.hpp"
#include "support/generators.hpp"

using namespace eerq;
using namespace eerq::testing;

namespace {

PipelineInput exampleInput() { return PipelineInput::fromEer(parseEer(kExampleEer)); }

ConjunctiveQuery exampleQuery(const RelationalSchema& schema) {
    ConjunctiveQuery q;
    int32_t x = q.varId("X"), y = q.varId("Y");
    q.headVars = {x};
    q.body = {{*schema.find("manages"), {CqTerm::variable(x), CqTerm::variable(y)}},
              {*schema.find("dept"), {CqTerm::variable(y)}}};
    return q;
}

} // namespace

TEST_CASE("player/team: general IDs answered through the chase path") {
    SymbolTable syms;
    PipelineInput input;
    input.schema.addPredicate("player", 2);
    input.schema.addPredicate("team", 2);
    input.ids = {{*input.schema.find("player"), {2}, *input.schema.find("team"), {1}, {}}};

    Database db;
    db.insert(fact(syms, input.schema, "player", {"pirlo", "acMilan"}));
    db.insert(fact(syms, input.schema, "player", {"totti", "roma"}));
    db.insert(fact(syms, input.schema, "team", {"acMilan", "milan"}));

    ConjunctiveQuery q;
    int32_t x = q.varId("X"), y = q.varId("Y");
    q.headVars = {x};
    q.body = {{*input.schema.find("team"), {CqTerm::variable(x), CqTerm::variable(y)}}};

    PipelineOptions opts;
    opts.path = AnswerPath::Chase;
    AnswerResult r = certainAnswers(syms, input, db, q, opts);
    CHECK(r.status == AnswerResult::Status::Consistent);
    CHECK(!r.diagnostics.cdsRecognized);
    CHECK(r.tuples == std::vector<AnswerTuple>{tuple(syms, {"acMilan"}), tuple(syms, {"roma"})});
}

TEST_CASE("the running example answers {m} on every path") {
    for (AnswerPath path : {AnswerPath::Chase, AnswerPath::Rewrite, AnswerPath::Both}) {
        SymbolTable syms;
        PipelineInput input = exampleInput();
        Database db;
        db.insert(fact(syms, input.schema, "manager", {"m"}));
        db.insert(fact(syms, input.schema, "works_in", {"m", "d"}));
        ConjunctiveQuery q = exampleQuery(input.schema);
        PipelineOptions opts;
        opts.path = path;
        AnswerResult r = certainAnswers(syms, input, db, q, opts);
        CHECK(r.status == AnswerResult::Status::Consistent);
        CHECK(r.tuples == std::vector<AnswerTuple>{tuple(syms, {"m"})});
        CHECK(r.diagnostics.note.empty());
    }
}

TEST_CASE("the infinite-model instance answers empty on both paths") {
    for (AnswerPath path : {AnswerPath::Chase, AnswerPath::Rewrite}) {
        SymbolTable syms;
        PipelineInput input = PipelineInput::fromEer(parseEer(kInfiniteModelEer));
        Database db;
        db.insert(fact(syms, input.schema, "b", {"c"}));
        ConjunctiveQuery q;
        int32_t x = q.varId("X");
        q.headVars = {x};
        q.body = {{*input.schema.find("a"), {CqTerm::variable(x)}}};
        PipelineOptions opts;
        opts.path = path;
        AnswerResult r = certainAnswers(syms, input, db, q, opts);
        CHECK(r.status == AnswerResult::Status::Consistent);
        CHECK(r.tuples.empty());
    }
}

TEST_CASE("a failing chase is reported as trivially inconsistent with a witness") {
    SymbolTable syms;
    RelationalSchema s;
    int32_t e1 = s.addPredicate("e1", 1);
    int32_t e2 = s.addPredicate("e2", 1);
    int32_t r = s.addPredicate("r", 2);
    int32_t sp = s.addPredicate("s", 2);
    PipelineInput input;
    input.schema = s;
    input.ids = {{r, {1}, e1, {1}, {}},  {r, {2}, e2, {1}, {}}, {sp, {1}, e1, {1}, {}},
                 {sp, {2}, e2, {1}, {}}, {r, {1, 2}, sp, {1, 2}, {}}};
    input.kds = {{sp, {1}, {}}};
    Database db;
    db.insert(fact(syms, input.schema, "r", {"a", "b"}));
    db.insert(fact(syms, input.schema, "s", {"a", "c"}));
    ConjunctiveQuery q;
    int32_t x = q.varId("X");
    q.headVars = {x};
    q.body = {{e1, {CqTerm::variable(x)}}};
    AnswerResult res = certainAnswers(syms, input, db, q, {});
    CHECK(res.status == AnswerResult::Status::TriviallyInconsistent);
    REQUIRE(res.witness.has_value());
    CHECK(renderFact(syms, input.schema, res.witness->first) == "s(a,b)");

    auto rec = recognizeCds(input.schema, input.ids, input.kds);
    REQUIRE(rec.ok);
    CrossValidation cv = crossValidate(syms, rec.cds, db, q, {});
    CHECK(cv.agree);
    for (const auto& p : cv.paths)
        CHECK(p.status == AnswerResult::Status::TriviallyInconsistent);
}

TEST_CASE("three-way cross-validation agrees on random CD instances") {
    std::mt19937_64 rng(113);
    int ran = 0;
    for (int round = 0; round < 30; ++round) {
        SymbolTable syms;
        CDSet cds = toCds(randomEerSchema(rng));
        if (cds.schema.size() == 0) continue;
        Database db = randomDatabase(rng, syms, cds.schema, 8, 4);
        ConjunctiveQuery q = randomQuery(rng, syms, cds.schema, 3, 4);
        CrossValidation cv = crossValidate(syms, cds, db, q, {});
        CHECK(cv.agree);
        if (!cv.agree) {
            CAPTURE(cv.detail);
            CAPTURE(renderQuery(syms, cds.schema, q));
        }
        ++ran;
    }
    CHECK(ran >= 20);
}

TEST_CASE("certain answers are monotone under consistent extension") {
    std::mt19937_64 rng(127);
    int compared = 0;
    for (int round = 0; round < 30 && compared < 12; ++round) {
        SymbolTable syms;
        PipelineInput input = PipelineInput::fromCds(toCds(randomEerSchema(rng)));
        if (input.schema.size() == 0) continue;
        Database small = randomDatabase(rng, syms, input.schema, 5, 4);
        Database big;
        for (const Fact& f : small.facts()) big.insert(f);
        Database extra = randomDatabase(rng, syms, input.schema, 3, 4);
        for (const Fact& f : extra.facts()) big.insert(f);
        ConjunctiveQuery q = randomQuery(rng, syms, input.schema, 3, 4);
        AnswerResult a = certainAnswers(syms, input, small, q, {});
        AnswerResult b = certainAnswers(syms, input, big, q, {});
        if (a.status != AnswerResult::Status::Consistent ||
            b.status != AnswerResult::Status::Consistent)
            continue;
        for (const auto& t : a.tuples)
            CHECK(std::find(b.tuples.begin(), b.tuples.end(), t) != b.tuples.end());
        ++compared;
    }
    CHECK(compared >= 5);
}

TEST_CASE("answers never contain fresh constants") {
    std::mt19937_64 rng(131);
    for (int round = 0; round < 20; ++round) {
        SymbolTable syms;
        PipelineInput input = PipelineInput::fromCds(toCds(randomEerSchema(rng)));
        if (input.schema.size() == 0) continue;
        Database db = randomDatabase(rng, syms, input.schema, 6, 4);
        ConjunctiveQuery q = randomQuery(rng, syms, input.schema, 3, 4);
        AnswerResult r = certainAnswers(syms, input, db, q, {});
        for (const auto& t : r.tuples)
            for (Constant cst : t) CHECK(!cst.isFresh());
    }
}

TEST_CASE("the rewrite cache compiles once per key") {
    SymbolTable syms;
    PipelineInput input = exampleInput();
    Database db;
    db.insert(fact(syms, input.schema, "manager", {"m"}));
    db.insert(fact(syms, input.schema, "works_in", {"m", "d"}));
    ConjunctiveQuery q = exampleQuery(input.schema);
    PipelineOptions opts;
    opts.path = AnswerPath::Rewrite;
    RewriteCache cache;
    AnswerResult a = certainAnswers(syms, input, db, q, opts, &cache);
    AnswerResult b = certainAnswers(syms, input, db, q, opts, &cache);
    CHECK(a.tuples == b.tuples);
    CHECK(cache.buildCount() == 1);
}

TEST_CASE("strict mode refuses non-CD dependency sets") {
    SymbolTable syms;
    PipelineInput input;
    input.schema.addPredicate("player", 2);
    input.schema.addPredicate("team", 2);
    input.ids = {{*input.schema.find("player"), {2}, *input.schema.find("team"), {1}, {}}};
    Database db;
    ConjunctiveQuery q;
    int32_t x = q.varId("X"), y = q.varId("Y");
    q.headVars = {x};
    q.body = {{*input.schema.find("team"), {CqTerm::variable(x), CqTerm::variable(y)}}};
    PipelineOptions opts;
    opts.strictCds = true;
    CHECK_THROWS_AS(certainAnswers(syms, input, db, q, opts), SemanticError);
    PipelineOptions rewriteOpts;
    rewriteOpts.path = AnswerPath::Rewrite;
    CHECK_THROWS_AS(certainAnswers(syms, input, db, q, rewriteOpts), SemanticError);
}

TEST_CASE("an overridden level bound below the stop level is flagged sound-only") {
    SymbolTable syms;
    PipelineInput input = PipelineInput::fromEer(parseEer(kInfiniteModelEer));
    Database db;
    db.insert(fact(syms, input.schema, "b", {"c"}));
    ConjunctiveQuery q;
    int32_t x = q.varId("X");
    q.headVars = {x};
    q.body = {{*input.schema.find("b"), {CqTerm::variable(x)}}};
    PipelineOptions opts;
    opts.path = AnswerPath::Chase;
    opts.maxLevelOverride = 2;
    AnswerResult r = certainAnswers(syms, input, db, q, opts);
    CHECK(r.diagnostics.truncated);
    CHECK(r.diagnostics.soundOnly);
    CHECK(!r.diagnostics.note.empty());
}

TEST_CASE("three-way agreement on the running example") {
    SymbolTable syms;
    CDSet cds = toCds(parseEer(kExampleEer));
    Database db;
    db.insert(fact(syms, cds.schema, "manager", {"m"}));
    db.insert(fact(syms, cds.schema, "works_in", {"m", "d"}));
    ConjunctiveQuery q = exampleQuery(cds.schema);
    CrossValidation cv = crossValidate(syms, cds, db, q, {});
    CHECK(cv.agree);
    REQUIRE(cv.paths.size() == 3);
    for (const auto& p : cv.paths) {
        CHECK(p.ran);
        CHECK(p.tuples == std::vector<AnswerTuple>{tuple(syms, {"m"})});
    }
}

TEST_CASE("concurrent pipeline invocations agree") {
    // Pure functions over immutable inputs; the cache is the only shared
    // state and must behave as an atomic get-or-compute map.
    SymbolTable syms;
    PipelineInput input = exampleInput();
    Database db;
    db.insert(fact(syms, input.schema, "manager", {"m"}));
    db.insert(fact(syms, input.schema, "works_in", {"m", "d"}));
    ConjunctiveQuery q = exampleQuery(input.schema);
    PipelineOptions opts;
    opts.path = AnswerPath::Rewrite;
    RewriteCache cache;
    std::vector<std::vector<AnswerTuple>> results(4);
    std::vector<std::thread> threads;
    for (int i = 0; i < 4; ++i)
        threads.emplace_back([&, i] {
            results[static_cast<size_t>(i)] =
                certainAnswers(syms, input, db, q, opts, &cache).tuples;
        });
    for (auto& t : threads) t.join();
    for (const auto& r : results) CHECK(r == std::vector<AnswerTuple>{tuple(syms, {"m"})});
    CHECK(cache.buildCount() >= 1);
}
