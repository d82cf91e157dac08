#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "eerq/chase.hpp"
#include "eerq/cq.hpp"
#include "eerq/eer.hpp"
#include "eerq/rewrite.hpp"
#include "eerq/translate.hpp"

namespace eerq {

enum class AnswerPath { Auto, Rewrite, Chase, Both };

struct PipelineOptions {
    AnswerPath path = AnswerPath::Auto;
    std::optional<uint64_t> maxLevelOverride;
    std::optional<uint64_t> cdBoundOverride;
    bool strictCds = false;            // refuse non-CD dependency sets outright
    bool conservativeAttrFree = false; // rewriting restricted to the attribute-free fragment
    uint64_t autoChaseThreshold = 5'000; // facts; at most this many -> chase path under Auto
    uint64_t maxAtoms = 200'000'000;
    uint64_t chaseMaxFacts = 5'000'000;
    uint64_t dummyChaseMaxFacts = 500'000;
};

struct AnswerDiagnostics {
    LevelBound bound;
    uint64_t cD = 0;
    std::string pathUsed;
    bool cdsRecognized = false;
    bool truncated = false;
    bool soundOnly = false; // truncated best-effort run: sound but possibly incomplete
    std::string note;
    double elapsedMs = 0;
};

struct AnswerResult {
    enum class Status { Consistent, TriviallyInconsistent };
    Status status = Status::Consistent;
    std::vector<AnswerTuple> tuples;
    std::optional<KdFailure> witness;
    AnswerDiagnostics diagnostics;
};

// Raw dependency input; CD recognition happens inside the pipeline.
struct PipelineInput {
    RelationalSchema schema;
    std::vector<InclusionDependency> ids;
    std::vector<KeyDependency> kds;

    static PipelineInput fromCds(const CDSet& cds) { return {cds.schema, cds.ids, cds.kds}; }
    static PipelineInput fromEer(const EERSchema& eer) { return fromCds(toCds(eer)); }
};

// Compiled-rewriting cache; key must capture schema, dependencies, query and
// c_D, and entries are only valid for the SymbolTable they were built against.
class RewriteCache {
public:
    std::shared_ptr<const RewriteBundle> getOrBuild(
        const std::string& key, const std::function<RewriteBundle()>& build);
    size_t buildCount() const { return builds_; }

private:
    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<const RewriteBundle>> map_;
    size_t builds_ = 0;
};

std::string rewriteCacheKey(const SymbolTable& syms, const RelationalSchema& schema,
                            const std::vector<InclusionDependency>& ids,
                            const std::vector<KeyDependency>& kds, const ConjunctiveQuery& q,
                            uint64_t cD);

// End-to-end certain answers: existence check, level bound, then the chosen
// evaluation path (both paths agree on CD inputs per the compilation theorem).
AnswerResult certainAnswers(SymbolTable& syms, const PipelineInput& input, const Database& db,
                            const ConjunctiveQuery& q, const PipelineOptions& opts = {},
                            RewriteCache* cache = nullptr);

struct PathReport {
    std::string path;
    AnswerResult::Status status = AnswerResult::Status::Consistent;
    std::vector<AnswerTuple> tuples;
    bool ran = false;
    std::string skippedReason;
};

struct CrossValidation {
    bool agree = true;
    std::vector<PathReport> paths;
    std::string detail;
};

// Runs the rewriting path, the bounded-chase path and the Skolem-term oracle
// and reports any disagreement.
CrossValidation crossValidate(SymbolTable& syms, const CDSet& cds, const Database& db,
                              const ConjunctiveQuery& q, const PipelineOptions& opts = {});

} // namespace eerq
