#include "eerq/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "eerq/error.hpp"

namespace eerq {

std::shared_ptr<const RewriteBundle> RewriteCache::getOrBuild(
    const std::string& key, const std::function<RewriteBundle()>& build) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
    }
    auto bundle = std::make_shared<const RewriteBundle>(build());
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = map_.emplace(key, bundle);
    if (inserted) ++builds_;
    return it->second;
}

std::string rewriteCacheKey(const SymbolTable& syms, const RelationalSchema& schema,
                            const std::vector<InclusionDependency>& ids,
                            const std::vector<KeyDependency>& kds, const ConjunctiveQuery& q,
                            uint64_t cD) {
    std::string key;
    for (size_t p = 0; p < schema.size(); ++p) {
        key += schema.name(static_cast<int32_t>(p));
        key += '/';
        key += std::to_string(schema.arity(static_cast<int32_t>(p)));
        key += ';';
    }
    std::vector<std::string> deps;
    for (const auto& id : ids) deps.push_back(renderId(schema, id));
    for (const auto& kd : kds) deps.push_back(renderKd(schema, kd));
    std::sort(deps.begin(), deps.end());
    for (const auto& d : deps) {
        key += d;
        key += ';';
    }
    key += renderQuery(syms, schema, q);
    key += ";cD=";
    key += std::to_string(cD);
    return key;
}

namespace {

std::vector<AnswerTuple> chasePathAnswers(SymbolTable& syms, const RelationalSchema& schema,
                                          const DependencySet& deps, const Database& db,
                                          const ConjunctiveQuery& q, uint64_t maxLevel,
                                          uint64_t chaseMaxFacts, bool& truncated,
                                          std::optional<KdFailure>& failure) {
    ChaseOptions copts;
    copts.maxLevel = maxLevel;
    copts.maxFacts = chaseMaxFacts;
    ChaseResult chase = buildChase(syms, schema, deps, db, copts);
    if (chase.status == ChaseResult::Status::Failed) {
        failure = chase.failure;
        return {};
    }
    truncated = chase.status == ChaseResult::Status::Truncated;
    Database chased;
    for (const Fact& f : chase.facts) chased.insert(f);
    return evaluateCq(syms, schema, q, chased, /*dropFresh=*/true);
}

} // namespace

AnswerResult certainAnswers(SymbolTable& syms, const PipelineInput& input, const Database& db,
                            const ConjunctiveQuery& q, const PipelineOptions& opts,
                            RewriteCache* cache) {
    auto started = std::chrono::steady_clock::now();
    AnswerResult result;
    auto finish = [&]() -> AnswerResult& {
        result.diagnostics.elapsedMs =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                .count();
        return result;
    };

    validateQuery(input.schema, q);
    RecognizeResult rec = recognizeCds(input.schema, input.ids, input.kds);
    result.diagnostics.cdsRecognized = rec.ok;
    if (!rec.ok && opts.strictCds) {
        std::string msg = "dependencies are not a CD set:";
        for (const auto& v : rec.violations)
            msg += "\n  (" + std::string(1, v.condition) + ") " + v.detail;
        throw SemanticError(msg);
    }

    // Step 2: decide chase existence (CD sets only; the procedure is justified
    // by the decidability lemma for CDs).
    if (rec.ok) {
        ChaseExistence ex = chaseExists(syms, rec.cds, db);
        if (!ex.exists) {
            result.status = AnswerResult::Status::TriviallyInconsistent;
            result.witness = ex.witness;
            result.diagnostics.pathUsed = "existence-check";
            return finish();
        }
    }

    // Step 3: level bound from the join graph.
    uint64_t cD = opts.cdBoundOverride.value_or(joinGraphComponents(db).largestComponent);
    result.diagnostics.cD = cD;
    result.diagnostics.bound = computeLevelBound(input.schema, q.body.size(), cD);
    uint64_t maxLevel = opts.maxLevelOverride.value_or(result.diagnostics.bound.stopLevel);

    // Step 4: pick the path.
    RewriteOptions ropts;
    ropts.conservativeAttrFree = opts.conservativeAttrFree;
    ropts.dummyChaseMaxFacts = opts.dummyChaseMaxFacts;
    std::string refusal;
    bool rewriteEligible = rec.ok;
    if (rec.ok) {
        if (auto r = rewriteRefusalReason(rec.cds, ropts)) {
            rewriteEligible = false;
            refusal = *r;
        }
    } else {
        refusal = "dependencies are not a CD set";
    }

    AnswerPath path = opts.path;
    if (path == AnswerPath::Auto)
        path = (rewriteEligible && db.size() > opts.autoChaseThreshold) ? AnswerPath::Rewrite
                                                                        : AnswerPath::Chase;
    if ((path == AnswerPath::Rewrite || path == AnswerPath::Both) && !rewriteEligible)
        throw SemanticError("rewriting path unavailable: " + refusal);

    DependencySet deps = rec.ok
                             ? DependencySet::fromCds(rec.cds)
                             : DependencySet::raw(input.schema, input.ids, input.kds);

    auto runRewrite = [&]() {
        LevelBound bound = result.diagnostics.bound;
        auto build = [&]() { return buildRewrite(syms, rec.cds, q, bound, ropts); };
        std::shared_ptr<const RewriteBundle> bundle;
        if (cache) {
            bundle = cache->getOrBuild(
                rewriteCacheKey(syms, input.schema, input.ids, input.kds, q, cD), build);
        } else {
            bundle = std::make_shared<const RewriteBundle>(build());
        }
        return answerViaRewriting(*bundle, syms, input.schema, db, opts.maxAtoms);
    };

    if (path == AnswerPath::Rewrite) {
        result.tuples = runRewrite();
        result.diagnostics.pathUsed = "rewriting";
        return finish();
    }

    bool truncated = false;
    std::optional<KdFailure> failure;
    std::vector<AnswerTuple> chaseTuples = chasePathAnswers(
        syms, input.schema, deps, db, q, maxLevel, opts.chaseMaxFacts, truncated, failure);
    if (failure) {
        result.status = AnswerResult::Status::TriviallyInconsistent;
        result.witness = failure;
        result.diagnostics.pathUsed = "bounded-chase";
        return finish();
    }
    result.diagnostics.truncated = truncated;
    // A truncated run is still complete for CD sets at the stop level; it is
    // only best-effort when the input is not a CD set or the level bound was
    // overridden below the stop level.
    result.diagnostics.soundOnly =
        truncated && (!rec.ok || maxLevel < result.diagnostics.bound.stopLevel);
    if (result.diagnostics.soundOnly)
        result.diagnostics.note = "answers are sound but possibly incomplete";

    if (path == AnswerPath::Both) {
        std::vector<AnswerTuple> rewriteTuples = runRewrite();
        if (rewriteTuples != chaseTuples) {
            result.diagnostics.note =
                "path disagreement: bounded-chase and rewriting answers differ";
        }
        result.diagnostics.pathUsed = "both";
    } else {
        result.diagnostics.pathUsed = "bounded-chase";
    }
    result.tuples = std::move(chaseTuples);
    return finish();
}

CrossValidation crossValidate(SymbolTable& syms, const CDSet& cds, const Database& db,
                              const ConjunctiveQuery& q, const PipelineOptions& opts) {
    CrossValidation out;
    ChaseExistence ex = chaseExists(syms, cds, db);
    uint64_t cD = opts.cdBoundOverride.value_or(joinGraphComponents(db).largestComponent);
    LevelBound bound = computeLevelBound(cds.schema, q.body.size(), cD);

    if (!ex.exists) {
        for (const char* p : {"rewriting", "bounded-chase", "skolem-oracle"})
            out.paths.push_back(
                {p, AnswerResult::Status::TriviallyInconsistent, {}, true, ""});
        return out;
    }

    RewriteOptions ropts;
    ropts.conservativeAttrFree = opts.conservativeAttrFree;
    ropts.dummyChaseMaxFacts = opts.dummyChaseMaxFacts;
    std::optional<std::string> refusal = rewriteRefusalReason(cds, ropts);
    std::optional<RewriteBundle> bundle;
    if (!refusal) bundle.emplace(buildRewrite(syms, cds, q, bound, ropts));

    // Rewriting path.
    {
        PathReport r;
        r.path = "rewriting";
        if (refusal) {
            r.skippedReason = *refusal;
        } else {
            r.tuples = answerViaRewriting(*bundle, syms, cds.schema, db, opts.maxAtoms);
            r.ran = true;
        }
        out.paths.push_back(std::move(r));
    }
    // Bounded-chase path.
    {
        PathReport r;
        r.path = "bounded-chase";
        DependencySet deps = DependencySet::fromCds(cds);
        bool truncated = false;
        std::optional<KdFailure> failure;
        r.tuples = chasePathAnswers(syms, cds.schema, deps, db, q, bound.stopLevel,
                                    opts.chaseMaxFacts, truncated, failure);
        if (failure) r.status = AnswerResult::Status::TriviallyInconsistent;
        r.ran = true;
        out.paths.push_back(std::move(r));
    }
    // Skolem-term oracle path.
    {
        PathReport r;
        r.path = "skolem-oracle";
        if (refusal) {
            r.skippedReason = *refusal;
        } else {
            Program oracle = oracleProgram(*bundle);
            uint32_t cap = bound.stopLevel > UINT32_MAX ? UINT32_MAX
                                                        : static_cast<uint32_t>(bound.stopLevel);
            ProgramAnswer ans =
                answerProgram(oracle, syms, cds.schema, db, cap, opts.maxAtoms);
            r.tuples = std::move(ans.groundTuples);
            r.ran = true;
        }
        out.paths.push_back(std::move(r));
    }

    const PathReport* reference = nullptr;
    for (const auto& p : out.paths) {
        if (!p.ran) continue;
        if (!reference) {
            reference = &p;
            continue;
        }
        if (p.status != reference->status || p.tuples != reference->tuples) {
            out.agree = false;
            out.detail += "disagreement between " + reference->path + " and " + p.path + "; ";
        }
    }
    return out;
}

} // namespace eerq
