#include "eerq/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eerq/error.hpp"
#include "eerq/textio.hpp"

namespace eerq {

namespace {

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SemanticError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool endsWith(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct LoadedSchema {
    RelationalSchema schema;
    std::vector<InclusionDependency> ids;
    std::vector<KeyDependency> kds;
    std::optional<CDSet> cds; // set when recognition succeeds
};

// Loads either an EER schema (.eer, translated to CDs) or a raw dependency
// file (.cds).
LoadedSchema loadSchema(const std::string& path) {
    LoadedSchema out;
    std::string text = readFile(path);
    if (endsWith(path, ".cds")) {
        CdsFile f = parseCdsFile(text, path);
        out.schema = f.schema;
        out.ids = f.ids;
        out.kds = f.kds;
        RecognizeResult rec = recognizeCds(out.schema, out.ids, out.kds);
        if (rec.ok) out.cds = std::move(rec.cds);
        return out;
    }
    EERSchema eer = parseEer(text, path);
    CDSet cds = toCds(eer);
    out.schema = cds.schema;
    out.ids = cds.ids;
    out.kds = cds.kds;
    out.cds = std::move(cds);
    return out;
}

struct CommonArgs {
    std::string schemaPath, dataPath, queryPath;
    std::string emit = "text";
    std::optional<uint64_t> maxLevel, cdBound;
    std::string path = "auto";
    bool strictCds = false;
    bool conservative = false;
    bool stages = false;
    bool failOnInconsistent = false;
    uint64_t ruleCap = 250'000;
};

int cmdValidate(const CommonArgs& a, std::ostream& out) {
    EERSchema eer = parseEerSyntax(readFile(a.schemaPath), a.schemaPath);
    auto report = validateEer(eer);
    if (a.emit == "json") {
        out << validateToJson(report) << "\n";
    } else if (report.empty()) {
        out << "ok: " << eer.entities.size() << " entities, " << eer.relationships.size()
            << " relationships, " << eer.attributes.size() << " attributes\n";
    } else {
        for (const auto& v : report) out << "violation: " << v.message << "\n";
    }
    return report.empty() ? 0 : 1;
}

int cmdTranslate(const CommonArgs& a, std::ostream& out) {
    EERSchema eer = parseEer(readFile(a.schemaPath), a.schemaPath);
    CDSet cds = toCds(eer);
    if (a.emit == "json")
        out << translateToJson(cds) << "\n";
    else
        out << renderCdsFile(cds);
    return 0;
}

int cmdCheck(const CommonArgs& a, std::ostream& out) {
    LoadedSchema ls = loadSchema(a.schemaPath);
    if (!ls.cds) throw SemanticError("chase existence check requires a CD set");
    SymbolTable syms;
    Database db = parseFacts(readFile(a.dataPath), syms, ls.schema, false, a.dataPath);
    ChaseExistence ex = chaseExists(syms, *ls.cds, db);
    if (a.emit == "json") {
        out << checkToJson(syms, ls.schema, ex) << "\n";
    } else if (ex.exists) {
        out << "chase exists\n";
    } else {
        out << "chase does not exist: " << ex.witness->kdName << " ("
            << renderKd(ls.schema, ex.witness->kd) << ") fails on pair ("
            << renderFact(syms, ls.schema, ex.witness->first) << ", "
            << renderFact(syms, ls.schema, ex.witness->second) << ")\n";
    }
    return ex.exists ? 0 : 1;
}

int cmdChase(const CommonArgs& a, std::ostream& out) {
    LoadedSchema ls = loadSchema(a.schemaPath);
    SymbolTable syms;
    Database db = parseFacts(readFile(a.dataPath), syms, ls.schema, false, a.dataPath);
    uint64_t cD = a.cdBound.value_or(joinGraphComponents(db).largestComponent);
    // No query here; the single-atom bound is the documented default cutoff.
    LevelBound bound = computeLevelBound(ls.schema, 1, cD);
    ChaseOptions copts;
    copts.maxLevel = a.maxLevel.value_or(bound.stopLevel);
    DependencySet deps = ls.cds ? DependencySet::fromCds(*ls.cds)
                                : DependencySet::raw(ls.schema, ls.ids, ls.kds);
    ChaseResult chase = buildChase(syms, ls.schema, deps, db, copts);
    if (a.emit == "json") {
        out << chaseToJson(syms, ls.schema, chase) << "\n";
    } else if (a.emit == "dot") {
        out << chaseForestToDot(syms, ls.schema, chase);
    } else {
        switch (chase.status) {
            case ChaseResult::Status::Completed: out << "# status: completed\n"; break;
            case ChaseResult::Status::Truncated:
                out << "# status: truncated at level " << *chase.truncatedAt << "\n";
                break;
            case ChaseResult::Status::Failed: out << "# status: failed\n"; break;
        }
        out << renderChaseFacts(syms, ls.schema, chase.facts);
        if (a.stages)
            for (const auto& s : chase.appliedSteps) out << "# " << s << "\n";
    }
    return chase.status == ChaseResult::Status::Failed ? 1 : 0;
}

int cmdRewrite(const CommonArgs& a, std::ostream& out) {
    LoadedSchema ls = loadSchema(a.schemaPath);
    if (!ls.cds) throw SemanticError("the rewriting requires a CD set");
    SymbolTable syms;
    uint64_t cD;
    if (a.cdBound) {
        cD = *a.cdBound;
    } else if (!a.dataPath.empty()) {
        Database db = parseFacts(readFile(a.dataPath), syms, ls.schema, false, a.dataPath);
        cD = joinGraphComponents(db).largestComponent;
    } else {
        throw SemanticError("rewrite needs --cd-bound or --data to fix the level bound");
    }
    ConjunctiveQuery q = parseQuery(readFile(a.queryPath), syms, ls.schema, a.queryPath);
    LevelBound bound = computeLevelBound(ls.schema, q.body.size(), cD);
    RewriteOptions ropts;
    ropts.conservativeAttrFree = a.conservative;
    ropts.materializeRuleCap = a.ruleCap;
    RewriteBundle bundle = buildRewrite(syms, *ls.cds, q, bound, ropts);
    Program piFin = materializePiFin(bundle, a.ruleCap);
    if (a.emit == "json") {
        out << rewriteToJson(bundle, piFin, syms) << "\n";
        return 0;
    }
    if (a.stages) {
        out << "% pi_eq\n" << renderProgram(bundle.piEq, syms);
        out << "% pi_kd\n" << renderProgram(bundle.piKd, syms);
        out << "% pi_id\n" << renderProgram(bundle.piId, syms);
        out << "% q_eq\n" << renderMaquillaged(syms, ls.schema, bundle.qEq) << "\n";
        out << "% pi_dc\n" << renderProgram(bundle.piDc, syms);
        out << "% pi_base\n" << renderProgram(bundle.piBase, syms);
        out << "% pi_fin\n";
    }
    out << "% query predicate: " << bundle.queryPredName << "\n";
    out << renderProgram(piFin, syms);
    return 0;
}

int cmdAnswer(const CommonArgs& a, std::ostream& out, std::ostream& err) {
    LoadedSchema ls = loadSchema(a.schemaPath);
    SymbolTable syms;
    Database db = parseFacts(readFile(a.dataPath), syms, ls.schema, false, a.dataPath);
    ConjunctiveQuery q = parseQuery(readFile(a.queryPath), syms, ls.schema, a.queryPath);
    PipelineOptions popts;
    if (a.path == "rewrite")
        popts.path = AnswerPath::Rewrite;
    else if (a.path == "chase")
        popts.path = AnswerPath::Chase;
    else if (a.path == "both")
        popts.path = AnswerPath::Both;
    popts.maxLevelOverride = a.maxLevel;
    popts.cdBoundOverride = a.cdBound;
    popts.strictCds = a.strictCds;
    popts.conservativeAttrFree = a.conservative;
    PipelineInput input{ls.schema, ls.ids, ls.kds};
    AnswerResult result = certainAnswers(syms, input, db, q, popts);
    if (a.emit == "json") {
        out << answerToJson(syms, ls.schema, result) << "\n";
    } else if (result.status == AnswerResult::Status::TriviallyInconsistent) {
        err << "trivially inconsistent: " << result.witness->kdName << " fails on pair ("
            << renderFact(syms, ls.schema, result.witness->first) << ", "
            << renderFact(syms, ls.schema, result.witness->second) << ")\n";
    } else {
        if (q.headVars.empty()) {
            out << (result.tuples.empty() ? "false" : "true") << "\n";
        } else {
            for (const auto& t : result.tuples) out << renderTuple(syms, t) << "\n";
        }
        if (!result.diagnostics.note.empty()) err << "note: " << result.diagnostics.note << "\n";
    }
    if (result.status == AnswerResult::Status::TriviallyInconsistent && a.failOnInconsistent)
        return 1;
    return 0;
}

} // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"certain-answer computation over EER-constrained incomplete data"};
    app.require_subcommand(1);

    CommonArgs a;
    auto addCommon = [&](CLI::App* cmd, bool needData, bool needQuery) {
        cmd->add_option("--schema", a.schemaPath, "schema file (.eer or .cds)")->required();
        if (needData) cmd->add_option("--data", a.dataPath, "fact file (.facts)")->required();
        if (needQuery) cmd->add_option("--query", a.queryPath, "query file (.cq)")->required();
        cmd->add_option("--emit", a.emit, "output format: text, json or dot");
    };

    auto* validate = app.add_subcommand("validate", "check an EER schema");
    addCommon(validate, false, false);

    auto* translate = app.add_subcommand("translate", "emit the conceptual dependencies");
    addCommon(translate, false, false);

    auto* check = app.add_subcommand("check", "decide chase existence");
    addCommon(check, true, false);

    auto* chase = app.add_subcommand("chase", "construct the bounded chase");
    addCommon(chase, true, false);
    chase->add_option("--max-level", a.maxLevel, "level cutoff (default: the computed stop level)");
    chase->add_option("--cd-bound", a.cdBound, "assert the join-graph bound c_D");
    chase->add_flag("--stages", a.stages, "also print the applied-steps log");

    auto* rewrite = app.add_subcommand("rewrite", "compile the function-free rewriting");
    rewrite->add_option("--schema", a.schemaPath, "schema file (.eer or .cds)")->required();
    rewrite->add_option("--data", a.dataPath, "fact file (used only to compute c_D)");
    rewrite->add_option("--query", a.queryPath, "query file (.cq)")->required();
    rewrite->add_option("--emit", a.emit, "output format: text or json");
    rewrite->add_option("--cd-bound", a.cdBound, "assert the join-graph bound c_D");
    rewrite->add_option("--rule-cap", a.ruleCap, "materialized rule budget");
    rewrite->add_flag("--stages", a.stages, "emit the intermediate rule sets too");
    rewrite->add_flag("--conservative", a.conservative, "attribute-free fragment only");

    auto* answer = app.add_subcommand("answer", "compute the certain answers");
    addCommon(answer, true, true);
    answer->add_option("--path", a.path, "evaluation path: auto, rewrite, chase or both");
    answer->add_option("--max-level", a.maxLevel, "override the chase level cutoff");
    answer->add_option("--cd-bound", a.cdBound, "assert the join-graph bound c_D");
    answer->add_flag("--strict-cds", a.strictCds, "refuse non-CD dependency sets");
    answer->add_flag("--conservative", a.conservative, "attribute-free rewriting only");
    answer->add_flag("--fail-on-inconsistent", a.failOnInconsistent,
                     "exit 1 when trivially inconsistent");

    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "ERROR 2: " << e.what() << "\n";
        return 2;
    }

    try {
        if (validate->parsed()) return cmdValidate(a, out);
        if (translate->parsed()) return cmdTranslate(a, out);
        if (check->parsed()) return cmdCheck(a, out);
        if (chase->parsed()) return cmdChase(a, out);
        if (rewrite->parsed()) return cmdRewrite(a, out);
        if (answer->parsed()) return cmdAnswer(a, out, err);
    } catch (const ParseError& e) {
        err << "ERROR 2: parse error: " << e.what() << "\n";
        return 2;
    } catch (const SemanticError& e) {
        err << "ERROR 2: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        err << "ERROR 2: resource limit: " << e.what() << "\n";
        return 2;
    } catch (const OverflowError& e) {
        err << "ERROR 2: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace eerq
