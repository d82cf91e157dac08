#include "eerq/textio.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "eerq/error.hpp"
#include "eerq/eer.hpp"

namespace eerq {

namespace {

// Shared lexer for the fact/query/cds formats.
struct TTok {
    enum Kind {
        Ident,    // lowercase-led identifier
        VarIdent, // uppercase/underscore-led identifier
        Quoted,
        Int,
        LParen,
        RParen,
        LBracket,
        RBracket,
        LBrace,
        RBrace,
        Comma,
        Dot,
        ColonDash,
        Colon,
        Slash,
        Leq,
        Eq,
        End
    } kind;
    std::string text;
    int line = 1, col = 1;
};

class TLexer {
public:
    TLexer(const std::string& text, std::string file) : text_(text), file_(std::move(file)) {}

    // Comments starting with `#` run to end of line; a comment of the form
    // `# ... by rule N` is surfaced so dependency tags survive round-trips.
    TTok next() {
        skip();
        TTok t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.kind = TTok::End;
            return t;
        }
        char c = text_[pos_];
        auto lower = [](char ch) { return ch >= 'a' && ch <= 'z'; };
        auto upper = [](char ch) { return (ch >= 'A' && ch <= 'Z') || ch == '_'; };
        auto alnum = [&](char ch) { return lower(ch) || upper(ch) || (ch >= '0' && ch <= '9'); };
        if (lower(c) || upper(c)) {
            size_t start = pos_;
            while (pos_ < text_.size() && alnum(text_[pos_])) adv();
            t.kind = lower(c) ? TTok::Ident : TTok::VarIdent;
            t.text = text_.substr(start, pos_ - start);
            return t;
        }
        if (c >= '0' && c <= '9') {
            size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') adv();
            t.kind = TTok::Int;
            t.text = text_.substr(start, pos_ - start);
            return t;
        }
        if (c == '\'') {
            adv();
            size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] != '\'' && text_[pos_] != '\n') adv();
            if (pos_ >= text_.size() || text_[pos_] != '\'')
                throw ParseError(file_, t.line, t.col, "unterminated quoted constant");
            t.kind = TTok::Quoted;
            t.text = text_.substr(start, pos_ - start);
            adv();
            if (t.text.find(kFreshMarker) != std::string::npos)
                throw ParseError(file_, t.line, t.col,
                                 "constants may not contain the fresh-constant marker");
            if (t.text.empty())
                throw ParseError(file_, t.line, t.col, "empty quoted constant");
            return t;
        }
        switch (c) {
            case '(': adv(); t.kind = TTok::LParen; return t;
            case ')': adv(); t.kind = TTok::RParen; return t;
            case '[': adv(); t.kind = TTok::LBracket; return t;
            case ']': adv(); t.kind = TTok::RBracket; return t;
            case '{': adv(); t.kind = TTok::LBrace; return t;
            case '}': adv(); t.kind = TTok::RBrace; return t;
            case ',': adv(); t.kind = TTok::Comma; return t;
            case '.': adv(); t.kind = TTok::Dot; return t;
            case '/': adv(); t.kind = TTok::Slash; return t;
            case '=': adv(); t.kind = TTok::Eq; return t;
            case ':':
                adv();
                if (pos_ < text_.size() && text_[pos_] == '-') {
                    adv();
                    t.kind = TTok::ColonDash;
                    return t;
                }
                t.kind = TTok::Colon;
                return t;
            case '<':
                adv();
                if (pos_ < text_.size() && text_[pos_] == '=') {
                    adv();
                    t.kind = TTok::Leq;
                    return t;
                }
                throw ParseError(file_, t.line, t.col, "expected '<='");
            default:
                throw ParseError(file_, t.line, t.col,
                                 "unexpected character '" + std::string(1, c) + "'");
        }
    }

    // The most recent comment's rule tag, if it looked like `... by rule N`.
    std::optional<int> takeRuleTag() {
        auto t = pendingRuleTag_;
        pendingRuleTag_.reset();
        return t;
    }

    const std::string& file() const { return file_; }

private:
    void adv() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                size_t start = pos_;
                while (pos_ < text_.size() && text_[pos_] != '\n') adv();
                std::string comment = text_.substr(start, pos_ - start);
                size_t at = comment.find("by rule ");
                if (at != std::string::npos) {
                    int tag = 0;
                    size_t i = at + 8;
                    while (i < comment.size() && comment[i] >= '0' && comment[i] <= '9')
                        tag = tag * 10 + (comment[i++] - '0');
                    if (tag > 0) pendingRuleTag_ = tag;
                }
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                adv();
            } else {
                break;
            }
        }
    }
    const std::string& text_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    std::optional<int> pendingRuleTag_;
};

} // namespace

Database parseFacts(const std::string& text, SymbolTable& syms, RelationalSchema& schema,
                    bool allowNewPredicates, const std::string& filename) {
    TLexer lex(text, filename);
    Database db;
    TTok t = lex.next();
    while (t.kind != TTok::End) {
        if (t.kind != TTok::Ident)
            throw ParseError(filename, t.line, t.col, "expected a predicate name");
        std::string pred = t.text;
        int predLine = t.line, predCol = t.col;
        t = lex.next();
        if (t.kind != TTok::LParen) throw ParseError(filename, t.line, t.col, "expected '('");
        std::vector<Constant> args;
        t = lex.next();
        while (t.kind != TTok::RParen) {
            if (t.kind != TTok::Ident && t.kind != TTok::Quoted && t.kind != TTok::Int &&
                t.kind != TTok::VarIdent)
                throw ParseError(filename, t.line, t.col, "expected a constant");
            args.push_back(Constant::nonFresh(syms.intern(t.text)));
            t = lex.next();
            if (t.kind == TTok::Comma) t = lex.next();
        }
        t = lex.next();
        if (t.kind != TTok::Dot) throw ParseError(filename, t.line, t.col, "expected '.'");
        auto predId = schema.find(pred);
        if (!predId) {
            if (!allowNewPredicates)
                throw ParseError(filename, predLine, predCol,
                                 "unknown predicate '" + pred + "'");
            predId = schema.addPredicate(pred, static_cast<int>(args.size()));
        }
        if (schema.arity(*predId) != static_cast<int>(args.size()))
            throw ParseError(filename, predLine, predCol,
                             "arity mismatch for '" + pred + "': expected " +
                                 std::to_string(schema.arity(*predId)) + " arguments");
        db.insert({*predId, std::move(args), 0});
        t = lex.next();
    }
    return db;
}

std::string renderFacts(const SymbolTable& syms, const RelationalSchema& schema,
                        const Database& db) {
    std::vector<std::string> lines;
    for (const Fact& f : db.facts()) lines.push_back(renderFact(syms, schema, f) + ".");
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

ConjunctiveQuery parseQuery(const std::string& text, SymbolTable& syms,
                            const RelationalSchema& schema, const std::string& filename) {
    TLexer lex(text, filename);
    ConjunctiveQuery q;
    TTok t = lex.next();
    if (t.kind != TTok::Ident)
        throw ParseError(filename, t.line, t.col, "expected the query predicate name");
    q.headName = t.text;
    t = lex.next();
    if (t.kind != TTok::LParen) throw ParseError(filename, t.line, t.col, "expected '('");
    t = lex.next();
    while (t.kind != TTok::RParen) {
        if (t.kind != TTok::VarIdent)
            throw ParseError(filename, t.line, t.col, "head terms must be distinct variables");
        q.headVars.push_back(q.varId(t.text));
        t = lex.next();
        if (t.kind == TTok::Comma) t = lex.next();
    }
    t = lex.next();
    if (t.kind != TTok::ColonDash) throw ParseError(filename, t.line, t.col, "expected ':-'");
    t = lex.next();
    while (true) {
        if (t.kind != TTok::Ident)
            throw ParseError(filename, t.line, t.col, "expected a predicate name");
        auto predId = schema.find(t.text);
        if (!predId)
            throw ParseError(filename, t.line, t.col, "unknown predicate '" + t.text + "'");
        CqAtom atom;
        atom.pred = *predId;
        t = lex.next();
        if (t.kind != TTok::LParen) throw ParseError(filename, t.line, t.col, "expected '('");
        t = lex.next();
        while (t.kind != TTok::RParen) {
            if (t.kind == TTok::VarIdent) {
                atom.terms.push_back(CqTerm::variable(q.varId(t.text)));
            } else if (t.kind == TTok::Ident || t.kind == TTok::Quoted || t.kind == TTok::Int) {
                atom.terms.push_back(
                    CqTerm::constantTerm(Constant::nonFresh(syms.intern(t.text))));
            } else {
                throw ParseError(filename, t.line, t.col, "expected a term");
            }
            t = lex.next();
            if (t.kind == TTok::Comma) t = lex.next();
        }
        q.body.push_back(std::move(atom));
        t = lex.next();
        if (t.kind == TTok::Comma) {
            t = lex.next();
            continue;
        }
        if (t.kind == TTok::Dot) break;
        throw ParseError(filename, t.line, t.col, "expected ',' or '.'");
    }
    t = lex.next();
    if (t.kind != TTok::End)
        throw ParseError(filename, t.line, t.col, "query files contain exactly one rule");
    validateQuery(schema, q);
    return q;
}

CdsFile parseCdsFile(const std::string& text, const std::string& filename) {
    TLexer lex(text, filename);
    CdsFile out;
    TTok t = lex.next();
    auto expect = [&](TTok::Kind k, const char* what) {
        if (t.kind != k) throw ParseError(filename, t.line, t.col, std::string("expected ") + what);
        t = lex.next();
    };
    auto parseCols = [&]() {
        std::vector<int> cols;
        expect(TTok::LBracket, "'['");
        while (t.kind == TTok::Int) {
            cols.push_back(std::stoi(t.text));
            t = lex.next();
            if (t.kind == TTok::Comma) t = lex.next();
        }
        expect(TTok::RBracket, "']'");
        return cols;
    };
    while (t.kind != TTok::End) {
        if (t.kind != TTok::Ident)
            throw ParseError(filename, t.line, t.col, "expected 'pred', 'id' or 'kd'");
        std::string kw = t.text;
        if (kw == "pred") {
            t = lex.next();
            if (t.kind != TTok::Ident)
                throw ParseError(filename, t.line, t.col, "expected a predicate name");
            std::string name = t.text;
            t = lex.next();
            expect(TTok::Slash, "'/'");
            if (t.kind != TTok::Int) throw ParseError(filename, t.line, t.col, "expected an arity");
            out.schema.addPredicate(name, std::stoi(t.text));
            t = lex.next();
        } else if (kw == "id") {
            t = lex.next();
            expect(TTok::Colon, "':'");
            if (t.kind != TTok::Ident)
                throw ParseError(filename, t.line, t.col, "expected a predicate name");
            std::string lhs = t.text;
            t = lex.next();
            InclusionDependency id;
            auto lp = out.schema.find(lhs);
            if (!lp) throw ParseError(filename, t.line, t.col, "unknown predicate '" + lhs + "'");
            id.lhsPred = *lp;
            id.lhsCols = parseCols();
            expect(TTok::Leq, "'<='");
            if (t.kind != TTok::Ident)
                throw ParseError(filename, t.line, t.col, "expected a predicate name");
            auto rp = out.schema.find(t.text);
            if (!rp)
                throw ParseError(filename, t.line, t.col, "unknown predicate '" + t.text + "'");
            id.rhsPred = *rp;
            t = lex.next();
            id.rhsCols = parseCols();
            id.ruleTag = lex.takeRuleTag();
            validateDependency(out.schema, id);
            out.ids.push_back(std::move(id));
        } else if (kw == "kd") {
            t = lex.next();
            expect(TTok::Colon, "':'");
            if (t.kind != TTok::Ident || t.text != "key")
                throw ParseError(filename, t.line, t.col, "expected 'key'");
            t = lex.next();
            expect(TTok::LParen, "'('");
            if (t.kind != TTok::Ident)
                throw ParseError(filename, t.line, t.col, "expected a predicate name");
            auto p = out.schema.find(t.text);
            if (!p)
                throw ParseError(filename, t.line, t.col, "unknown predicate '" + t.text + "'");
            KeyDependency kd;
            kd.pred = *p;
            t = lex.next();
            expect(TTok::RParen, "')'");
            expect(TTok::Eq, "'='");
            expect(TTok::LBrace, "'{'");
            while (t.kind == TTok::Int) {
                kd.keyCols.push_back(std::stoi(t.text));
                t = lex.next();
                if (t.kind == TTok::Comma) t = lex.next();
            }
            expect(TTok::RBrace, "'}'");
            std::sort(kd.keyCols.begin(), kd.keyCols.end());
            kd.ruleTag = lex.takeRuleTag();
            validateDependency(out.schema, kd);
            out.kds.push_back(std::move(kd));
        } else {
            throw ParseError(filename, t.line, t.col, "expected 'pred', 'id' or 'kd'");
        }
    }
    return out;
}

std::string renderCdsFile(const CDSet& cds) {
    std::ostringstream out;
    for (size_t p = 0; p < cds.schema.size(); ++p)
        out << "pred " << cds.schema.name(static_cast<int32_t>(p)) << "/"
            << cds.schema.arity(static_cast<int32_t>(p)) << "\n";
    struct Line {
        int sigma;
        std::string text;
    };
    std::vector<Line> lines;
    for (size_t i = 0; i < cds.ids.size(); ++i) {
        std::string l = "id: " + renderId(cds.schema, cds.ids[i]) + "  # " +
                        cds.sigmaNameOfId(i);
        if (cds.ids[i].ruleTag) l += " (by rule " + std::to_string(*cds.ids[i].ruleTag) + ")";
        lines.push_back({cds.idSigma[i], std::move(l)});
    }
    for (size_t i = 0; i < cds.kds.size(); ++i) {
        std::string l = "kd: " + renderKd(cds.schema, cds.kds[i]) + "  # " +
                        cds.sigmaNameOfKd(i);
        if (cds.kds[i].ruleTag) l += " (by rule " + std::to_string(*cds.kds[i].ruleTag) + ")";
        lines.push_back({cds.kdSigma[i], std::move(l)});
    }
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return a.sigma < b.sigma;
    });
    for (const auto& l : lines) out << l.text << "\n";
    return out.str();
}

std::string chaseForestToDot(const SymbolTable& syms, const RelationalSchema& schema,
                             const ChaseResult& chase) {
    std::ostringstream out;
    out << "digraph chase {\n";
    for (size_t i = 0; i < chase.facts.size(); ++i)
        out << "  n" << i << " [label=\"" << renderFact(syms, schema, chase.facts[i]) << " @"
            << chase.facts[i].level << "\"];\n";
    for (const ChaseArc& a : chase.forest)
        out << "  n" << a.parent << " -> n" << a.child << " [label=\"" << a.idName << "\"];\n";
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON envelopes.
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json tuplesToJson(const SymbolTable& syms, const std::vector<AnswerTuple>& tuples) {
    json arr = json::array();
    for (const auto& t : tuples) {
        json row = json::array();
        for (Constant c : t) row.push_back(renderConstant(syms, c));
        arr.push_back(std::move(row));
    }
    return arr;
}

json witnessToJson(const SymbolTable& syms, const RelationalSchema& schema,
                   const KdFailure& w) {
    return json{{"kd", renderKd(schema, w.kd)},
                {"name", w.kdName},
                {"pair", {renderFact(syms, schema, w.first), renderFact(syms, schema, w.second)}}};
}

} // namespace

std::string answerToJson(const SymbolTable& syms, const RelationalSchema& schema,
                         const AnswerResult& result) {
    json j;
    j["command"] = "answer";
    j["status"] = result.status == AnswerResult::Status::Consistent ? "consistent"
                                                                    : "trivially_inconsistent";
    j["answers"] = tuplesToJson(syms, result.tuples);
    if (result.witness) j["witness"] = witnessToJson(syms, schema, *result.witness);
    j["diagnostics"] = {
        {"path", result.diagnostics.pathUsed},
        {"cds_recognized", result.diagnostics.cdsRecognized},
        {"c_d", result.diagnostics.cD},
        {"delta_c", result.diagnostics.bound.deltaC},
        {"delta_d", result.diagnostics.bound.deltaD},
        {"delta_m", result.diagnostics.bound.deltaM},
        {"stop_level", result.diagnostics.bound.stopLevel},
        {"truncated", result.diagnostics.truncated},
        {"sound_only", result.diagnostics.soundOnly},
        {"elapsed_ms", result.diagnostics.elapsedMs},
    };
    if (!result.diagnostics.note.empty()) j["diagnostics"]["note"] = result.diagnostics.note;
    return j.dump(2);
}

std::string checkToJson(const SymbolTable& syms, const RelationalSchema& schema,
                        const ChaseExistence& ex) {
    json j;
    j["command"] = "check";
    j["status"] = "ok";
    j["chase_exists"] = ex.exists;
    if (ex.witness) j["witness"] = witnessToJson(syms, schema, *ex.witness);
    j["diagnostics"] = {{"restricted_chase_facts", ex.restrictedChaseSize}};
    return j.dump(2);
}

std::string chaseToJson(const SymbolTable& syms, const RelationalSchema& schema,
                        const ChaseResult& chase) {
    json j;
    j["command"] = "chase";
    switch (chase.status) {
        case ChaseResult::Status::Completed: j["status"] = "completed"; break;
        case ChaseResult::Status::Truncated: j["status"] = "truncated"; break;
        case ChaseResult::Status::Failed: j["status"] = "failed"; break;
    }
    json facts = json::array();
    for (const Fact& f : chase.facts)
        facts.push_back({{"fact", renderFact(syms, schema, f)}, {"level", f.level}});
    j["facts"] = std::move(facts);
    if (chase.failure) j["witness"] = witnessToJson(syms, schema, *chase.failure);
    j["diagnostics"] = {{"steps", chase.appliedSteps.size()},
                        {"fresh_used", chase.freshUsed}};
    return j.dump(2);
}

std::string validateToJson(const std::vector<EerViolation>& report) {
    json j;
    j["command"] = "validate";
    j["status"] = report.empty() ? "ok" : "invalid";
    json arr = json::array();
    for (const auto& v : report) arr.push_back(v.message);
    j["violations"] = std::move(arr);
    return j.dump(2);
}

std::string translateToJson(const CDSet& cds) {
    json j;
    j["command"] = "translate";
    j["status"] = "ok";
    json preds = json::array();
    for (size_t p = 0; p < cds.schema.size(); ++p)
        preds.push_back({{"name", cds.schema.name(static_cast<int32_t>(p))},
                         {"arity", cds.schema.arity(static_cast<int32_t>(p))},
                         {"kind", predKindName(cds.kind[p])}});
    j["predicates"] = std::move(preds);
    json deps = json::array();
    for (size_t i = 0; i < cds.ids.size(); ++i) {
        json d{{"sigma", cds.sigmaNameOfId(i)}, {"text", renderId(cds.schema, cds.ids[i])}};
        if (cds.ids[i].ruleTag) d["rule"] = *cds.ids[i].ruleTag;
        deps.push_back(std::move(d));
    }
    for (size_t i = 0; i < cds.kds.size(); ++i) {
        json d{{"sigma", cds.sigmaNameOfKd(i)}, {"text", renderKd(cds.schema, cds.kds[i])}};
        if (cds.kds[i].ruleTag) d["rule"] = *cds.kds[i].ruleTag;
        deps.push_back(std::move(d));
    }
    std::sort(deps.begin(), deps.end(), [](const json& a, const json& b) {
        auto num = [](const json& x) {
            return std::stoi(x.at("sigma").get<std::string>().substr(5));
        };
        return num(a) < num(b);
    });
    j["dependencies"] = std::move(deps);
    return j.dump(2);
}

std::string rewriteToJson(const RewriteBundle& bundle, const Program& piFin,
                          const SymbolTable& syms) {
    json j;
    j["command"] = "rewrite";
    j["status"] = "ok";
    j["query_predicate"] = bundle.queryPredName;
    j["rule_count"] = piFin.rules.size();
    json rules = json::array();
    for (const Rule& r : piFin.rules) rules.push_back(renderRule(*piFin.symbols, syms, r));
    j["rules"] = std::move(rules);
    json elems = json::array();
    for (const auto& e : bundle.annotationElements)
        elems.push_back(renderAnnElem(*bundle.symbols, e));
    j["annotation_elements"] = std::move(elems);
    return j.dump(2);
}

} // namespace eerq
