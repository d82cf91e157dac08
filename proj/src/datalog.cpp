#include "eerq/datalog.hpp"

#include <algorithm>

#include "eerq/error.hpp"

namespace eerq {

int32_t DlSymbols::pred(std::string_view name, int arity) {
    auto it = predIndex_.find(std::string(name));
    if (it != predIndex_.end()) {
        if (preds_[static_cast<size_t>(it->second)].arity != arity)
            throw SemanticError("predicate '" + std::string(name) +
                                "' used with inconsistent arities");
        return it->second;
    }
    int32_t id = static_cast<int32_t>(preds_.size());
    preds_.push_back({std::string(name), arity});
    predIndex_.emplace(preds_.back().name, id);
    return id;
}

std::optional<int32_t> DlSymbols::findPred(std::string_view name) const {
    auto it = predIndex_.find(std::string(name));
    if (it == predIndex_.end()) return std::nullopt;
    return it->second;
}

int32_t DlSymbols::fsym(std::string_view name) {
    auto it = fsymIndex_.find(std::string(name));
    if (it != fsymIndex_.end()) return it->second;
    int32_t id = static_cast<int32_t>(fsyms_.size());
    fsyms_.emplace_back(name);
    fsymIndex_.emplace(fsyms_.back(), id);
    return id;
}

int32_t DlSymbols::var(std::string_view name) {
    auto it = varIndex_.find(std::string(name));
    if (it != varIndex_.end()) return it->second;
    int32_t id = static_cast<int32_t>(vars_.size());
    vars_.emplace_back(name);
    varIndex_.emplace(vars_.back(), id);
    return id;
}

int32_t DlSymbols::tag(std::string_view name) {
    auto it = tagIndex_.find(std::string(name));
    if (it != tagIndex_.end()) return it->second;
    int32_t id = static_cast<int32_t>(tags_.size());
    tags_.emplace_back(name);
    tagIndex_.emplace(tags_.back(), id);
    return id;
}

void validateProgram(const Program& p, bool functionFree) {
    for (const Rule& r : p.rules) {
        std::unordered_set<int32_t> bodyVars;
        for (const RuleAtom& a : r.body) {
            if (a.terms.size() != static_cast<size_t>(p.symbols->predArity(a.pred)))
                throw SemanticError("arity mismatch in rule body for " +
                                    p.symbols->predName(a.pred));
            for (const RuleTerm& t : a.terms) {
                if (!t.fsyms.empty())
                    throw SemanticError("function symbols are not allowed in rule bodies");
                if (t.base == RuleTerm::Base::Var) bodyVars.insert(t.var);
            }
        }
        if (r.head.terms.size() != static_cast<size_t>(p.symbols->predArity(r.head.pred)))
            throw SemanticError("arity mismatch in rule head for " +
                                p.symbols->predName(r.head.pred));
        for (const RuleTerm& t : r.head.terms) {
            if (functionFree && !t.fsyms.empty())
                throw SemanticError("function symbol in a function-free program (rule head " +
                                    p.symbols->predName(r.head.pred) + ")");
            if (t.base == RuleTerm::Base::Var && !bodyVars.count(t.var))
                throw SemanticError("rule is not range-restricted: head variable " +
                                    p.symbols->varName(t.var) + " does not occur in the body");
        }
        if (r.body.empty())
            throw SemanticError("facts are not allowed in programs; put data in the database");
    }
}

std::string renderTermText(const DlSymbols& syms, const SymbolTable& constSyms, const RuleTerm& t) {
    std::string base;
    switch (t.base) {
        case RuleTerm::Base::Var: base = syms.varName(t.var); break;
        case RuleTerm::Base::Const: base = renderConstant(constSyms, t.constant); break;
        case RuleTerm::Base::Tag: base = "{" + syms.tagName(t.tagId) + "}"; break;
    }
    std::string out = base;
    for (auto it = t.fsyms.rbegin(); it != t.fsyms.rend(); ++it)
        out = syms.fsymName(*it) + "(" + out + ")";
    return out;
}

static std::string renderAtom(const DlSymbols& syms, const SymbolTable& constSyms,
                              const RuleAtom& a) {
    std::string out = syms.predName(a.pred);
    out += '(';
    for (size_t i = 0; i < a.terms.size(); ++i) {
        if (i) out += ',';
        out += renderTermText(syms, constSyms, a.terms[i]);
    }
    out += ')';
    return out;
}

std::string renderRule(const DlSymbols& syms, const SymbolTable& constSyms, const Rule& r) {
    std::string out = renderAtom(syms, constSyms, r.head);
    out += " :- ";
    for (size_t i = 0; i < r.body.size(); ++i) {
        if (i) out += ", ";
        out += renderAtom(syms, constSyms, r.body[i]);
    }
    out += '.';
    return out;
}

std::string renderProgram(const Program& p, const SymbolTable& constSyms) {
    std::string out;
    for (const Rule& r : p.rules) {
        out += renderRule(*p.symbols, constSyms, r);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Program text parser.
// ---------------------------------------------------------------------------
namespace {

struct PTok {
    enum Kind { Ident, Var, Quoted, Int, ColonDash, Dot, Comma, LParen, RParen, At, LBracket,
                RBracket, Star, End } kind;
    std::string text;
    int line = 1, col = 1;
};

class PLexer {
public:
    PLexer(const std::string& text, std::string file) : text_(text), file_(std::move(file)) {}

    PTok next() {
        skip();
        PTok t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.kind = PTok::End;
            return t;
        }
        char c = text_[pos_];
        auto lower = [](char ch) { return ch >= 'a' && ch <= 'z'; };
        auto upper = [](char ch) { return (ch >= 'A' && ch <= 'Z') || ch == '_'; };
        auto alnum = [&](char ch) {
            return lower(ch) || upper(ch) || (ch >= '0' && ch <= '9');
        };
        if (lower(c) || upper(c)) {
            size_t start = pos_;
            while (pos_ < text_.size() && alnum(text_[pos_])) adv();
            t.kind = lower(c) ? PTok::Ident : PTok::Var;
            t.text = text_.substr(start, pos_ - start);
            return t;
        }
        if (c >= '0' && c <= '9') {
            size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') adv();
            t.kind = PTok::Int;
            t.text = text_.substr(start, pos_ - start);
            return t;
        }
        if (c == '\'') {
            adv();
            size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] != '\'') adv();
            if (pos_ >= text_.size()) throw ParseError(file_, t.line, t.col, "unterminated string");
            t.kind = PTok::Quoted;
            t.text = text_.substr(start, pos_ - start);
            adv();
            if (t.text.find(kFreshMarker) != std::string::npos)
                throw ParseError(file_, t.line, t.col,
                                 "constants may not contain the fresh-constant marker");
            return t;
        }
        switch (c) {
            case ':':
                adv();
                if (pos_ < text_.size() && text_[pos_] == '-') {
                    adv();
                    t.kind = PTok::ColonDash;
                    return t;
                }
                throw ParseError(file_, t.line, t.col, "expected ':-'");
            case '.': adv(); t.kind = PTok::Dot; return t;
            case ',': adv(); t.kind = PTok::Comma; return t;
            case '(': adv(); t.kind = PTok::LParen; return t;
            case ')': adv(); t.kind = PTok::RParen; return t;
            case '@': adv(); t.kind = PTok::At; return t;
            case '[': adv(); t.kind = PTok::LBracket; return t;
            case ']': adv(); t.kind = PTok::RBracket; return t;
            case '*': adv(); t.kind = PTok::Star; return t;
            default:
                throw ParseError(file_, t.line, t.col,
                                 "unexpected character '" + std::string(1, c) + "'");
        }
    }

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
            if (c == '%' || c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') adv();
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
};

class ProgramParser {
public:
    ProgramParser(const std::string& text, SymbolTable& constSyms, const std::string& file)
        : lexer_(text, file), constSyms_(constSyms), file_(file) {
        cur_ = lexer_.next();
    }

    Program parse() {
        Program p;
        while (cur_.kind != PTok::End) {
            Rule r;
            r.head = parseAtom(p);
            expect(PTok::ColonDash, "':-'");
            r.body.push_back(parseAtom(p));
            while (cur_.kind == PTok::Comma) {
                advance();
                r.body.push_back(parseAtom(p));
            }
            expect(PTok::Dot, "'.'");
            if (p.rules.empty()) p.queryPred = r.head.pred;
            p.rules.push_back(std::move(r));
        }
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& m) { throw ParseError(file_, cur_.line, cur_.col, m); }
    void advance() { cur_ = lexer_.next(); }
    void expect(PTok::Kind k, const char* what) {
        if (cur_.kind != k) fail(std::string("expected ") + what);
        advance();
    }

    std::string parseAnnItem() {
        if (cur_.kind == PTok::Star) {
            advance();
            return "*";
        }
        if (cur_.kind != PTok::Ident) fail("expected '*' or a function symbol");
        std::string f = cur_.text;
        advance();
        expect(PTok::LParen, "'('");
        std::string inner = parseAnnItem();
        expect(PTok::RParen, "')'");
        return f + "(" + inner + ")";
    }

    RuleAtom parseAtom(Program& p) {
        if (cur_.kind != PTok::Ident) fail("expected a predicate name");
        std::string name = cur_.text;
        advance();
        if (cur_.kind == PTok::At) {
            advance();
            expect(PTok::LBracket, "'['");
            name += "@[";
            name += parseAnnItem();
            while (cur_.kind == PTok::Comma) {
                advance();
                name += ",";
                name += parseAnnItem();
            }
            expect(PTok::RBracket, "']'");
            name += "]";
        }
        expect(PTok::LParen, "'('");
        RuleAtom atom;
        std::vector<RuleTerm> terms;
        if (cur_.kind != PTok::RParen) {
            terms.push_back(parseTerm(p));
            while (cur_.kind == PTok::Comma) {
                advance();
                terms.push_back(parseTerm(p));
            }
        }
        expect(PTok::RParen, "')'");
        atom.pred = p.symbols->pred(name, static_cast<int>(terms.size()));
        atom.terms = std::move(terms);
        return atom;
    }

    RuleTerm parseTerm(Program& p) {
        if (cur_.kind == PTok::Var) {
            RuleTerm t = RuleTerm::variable(p.symbols->var(cur_.text));
            advance();
            return t;
        }
        if (cur_.kind == PTok::Quoted || cur_.kind == PTok::Int) {
            RuleTerm t = RuleTerm::constantTerm(Constant::nonFresh(constSyms_.intern(cur_.text)));
            advance();
            return t;
        }
        if (cur_.kind != PTok::Ident) fail("expected a term");
        std::string name = cur_.text;
        advance();
        if (cur_.kind == PTok::LParen) {
            advance();
            RuleTerm inner = parseTerm(p);
            expect(PTok::RParen, "')'");
            inner.fsyms.insert(inner.fsyms.begin(), p.symbols->fsym(name));
            return inner;
        }
        return RuleTerm::constantTerm(Constant::nonFresh(constSyms_.intern(name)));
    }

    PLexer lexer_;
    SymbolTable& constSyms_;
    std::string file_;
    PTok cur_;
};

} // namespace

Program parseProgram(const std::string& text, SymbolTable& constSyms, const std::string& filename) {
    return ProgramParser(text, constSyms, filename).parse();
}

// ---------------------------------------------------------------------------
// Term pool.
// ---------------------------------------------------------------------------

TermId TermPool::constant(Constant c) {
    uint64_t key = (0ull << 62) | (static_cast<uint64_t>(static_cast<uint32_t>(c.code)) << 30);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    TermId id = static_cast<TermId>(nodes_.size());
    nodes_.push_back({0, c.code, -1, 0});
    index_.emplace(key, id);
    return id;
}

TermId TermPool::applied(int32_t fsym, TermId child) {
    uint64_t key = (1ull << 62) | (static_cast<uint64_t>(static_cast<uint32_t>(fsym)) << 30) |
                   static_cast<uint64_t>(static_cast<uint32_t>(child));
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    TermId id = static_cast<TermId>(nodes_.size());
    nodes_.push_back({1, fsym, child, depth(child) + 1});
    index_.emplace(key, id);
    return id;
}

TermId TermPool::tagged(int32_t tagId) {
    uint64_t key = (2ull << 62) | (static_cast<uint64_t>(static_cast<uint32_t>(tagId)) << 30);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    TermId id = static_cast<TermId>(nodes_.size());
    nodes_.push_back({2, tagId, -1, 0});
    index_.emplace(key, id);
    return id;
}

std::string TermPool::render(const DlSymbols& syms, const SymbolTable& constSyms, TermId t) const {
    const Node& n = nodes_[static_cast<size_t>(t)];
    switch (n.kind) {
        case 0: return renderConstant(constSyms, Constant{n.a});
        case 1: return syms.fsymName(n.a) + "(" + render(syms, constSyms, n.child) + ")";
        default: return "{" + syms.tagName(n.a) + "}";
    }
}

// ---------------------------------------------------------------------------
// Semi-naive evaluation.
// ---------------------------------------------------------------------------

namespace {

struct VecHash {
    size_t operator()(const std::vector<TermId>& v) const {
        size_t h = 1469598103934665603ull;
        for (TermId t : v) {
            h ^= static_cast<size_t>(static_cast<uint32_t>(t));
            h *= 1099511628211ull;
        }
        return h;
    }
};

struct Relation {
    int arity = 0;
    std::vector<std::vector<TermId>> rows;
    std::unordered_set<std::vector<TermId>, VecHash> present;
    size_t deltaStart = 0, deltaEnd = 0;
    // mask -> (key -> row indices); rebuilt incrementally
    struct Index {
        size_t builtUpTo = 0;
        std::unordered_map<std::vector<TermId>, std::vector<size_t>, VecHash> map;
    };
    std::unordered_map<uint32_t, Index> indexes;

    bool insert(std::vector<TermId> row) {
        if (present.count(row)) return false;
        present.insert(row);
        rows.push_back(std::move(row));
        return true;
    }
};

class Evaluator {
public:
    Evaluator(const Program& p, const SymbolTable& constSyms, const RelationalSchema& schema,
              const Database& db, EvalLimits limits)
        : p_(p), constSyms_(constSyms), limits_(limits), pool_(std::make_shared<TermPool>()) {
        validateProgram(p, !limits.depthCap.has_value());
        rels_.resize(p.symbols->predCount());
        for (size_t i = 0; i < rels_.size(); ++i)
            rels_[i].arity = p.symbols->predArity(static_cast<int32_t>(i));
        // Load the database; predicates unseen by the program are added so
        // their facts are representable (they simply never join).
        for (const Fact& f : db.facts()) {
            const std::string& name = schema.name(f.pred);
            int32_t pid;
            if (auto found = p.symbols->findPred(name)) {
                if (p.symbols->predArity(*found) != static_cast<int>(f.args.size()))
                    throw SemanticError("database fact arity mismatch for " + name);
                pid = *found;
            } else {
                pid = const_cast<DlSymbols&>(*p.symbols).pred(name, static_cast<int>(f.args.size()));
                rels_.push_back({});
                rels_.back().arity = static_cast<int>(f.args.size());
            }
            std::vector<TermId> row;
            row.reserve(f.args.size());
            for (Constant c : f.args) row.push_back(pool_->constant(c));
            if (rels_[static_cast<size_t>(pid)].insert(std::move(row))) ++atomCount_;
        }
        for (auto& r : rels_) {
            r.deltaStart = 0;
            r.deltaEnd = r.rows.size();
        }
        compileRules();
    }

    FixpointResult run() {
        bool any = true;
        while (any) {
            any = false;
            for (size_t ri = 0; ri < compiled_.size(); ++ri) {
                const CRule& cr = compiled_[ri];
                for (size_t d = 0; d < cr.body.size(); ++d) {
                    Relation& drel = rels_[static_cast<size_t>(cr.body[d].pred)];
                    if (drel.deltaStart == drel.deltaEnd) continue;
                    evalWithDelta(cr, d);
                }
            }
            for (auto& r : rels_) {
                r.deltaStart = r.deltaEnd;
                r.deltaEnd = r.rows.size();
                any = any || r.deltaStart != r.deltaEnd;
            }
        }
        FixpointResult out;
        out.pool = pool_;
        out.symbols = p_.symbols;
        for (size_t i = 0; i < rels_.size(); ++i)
            if (!rels_[i].rows.empty())
                out.atoms.emplace(p_.symbols->predName(static_cast<int32_t>(i)), rels_[i].rows);
        return out;
    }

private:
    struct Slot {
        bool isVar = false;
        int localVar = -1;   // dense per-rule variable index
        TermId ground = -1;  // resolved constant/tag when !isVar
    };
    struct CAtom {
        int32_t pred = -1;
        std::vector<Slot> slots;
    };
    struct HeadSlot {
        Slot base;
        std::vector<int32_t> fsyms; // outermost first
    };
    struct CRule {
        std::vector<CAtom> body;
        int32_t headPred = -1;
        std::vector<HeadSlot> head;
        int varCount = 0;
    };

    const Program& p_;
    const SymbolTable& constSyms_;
    EvalLimits limits_;
    std::shared_ptr<TermPool> pool_;
    std::vector<Relation> rels_;
    std::vector<CRule> compiled_;
    uint64_t atomCount_ = 0;

    void compileRules() {
        for (const Rule& r : p_.rules) {
            CRule cr;
            std::unordered_map<int32_t, int> varMap;
            auto slotOf = [&](const RuleTerm& t) {
                Slot s;
                if (t.base == RuleTerm::Base::Var) {
                    s.isVar = true;
                    auto [it, inserted] = varMap.emplace(t.var, static_cast<int>(varMap.size()));
                    s.localVar = it->second;
                } else if (t.base == RuleTerm::Base::Const) {
                    s.ground = pool_->constant(t.constant);
                } else {
                    s.ground = pool_->tagged(t.tagId);
                }
                return s;
            };
            for (const RuleAtom& a : r.body) {
                CAtom ca;
                ca.pred = a.pred;
                for (const RuleTerm& t : a.terms) ca.slots.push_back(slotOf(t));
                cr.body.push_back(std::move(ca));
            }
            cr.headPred = r.head.pred;
            for (const RuleTerm& t : r.head.terms) {
                HeadSlot hs;
                hs.base = slotOf(t);
                hs.fsyms = t.fsyms;
                cr.head.push_back(std::move(hs));
            }
            cr.varCount = static_cast<int>(varMap.size());
            compiled_.push_back(std::move(cr));
        }
    }

    // Match a row against an atom under the current binding; records newly
    // bound variables on the trail.
    static bool matchRow(const CAtom& atom, const std::vector<TermId>& row,
                         std::vector<TermId>& binding, std::vector<int>& trail) {
        for (size_t i = 0; i < atom.slots.size(); ++i) {
            const Slot& s = atom.slots[i];
            if (!s.isVar) {
                if (row[i] != s.ground) return false;
            } else if (binding[static_cast<size_t>(s.localVar)] != -1) {
                if (row[i] != binding[static_cast<size_t>(s.localVar)]) return false;
            } else {
                binding[static_cast<size_t>(s.localVar)] = row[i];
                trail.push_back(s.localVar);
            }
        }
        return true;
    }

    const std::vector<size_t>* lookup(const CAtom& atom, const std::vector<TermId>& binding,
                                      bool& fullScan) {
        Relation& rel = rels_[static_cast<size_t>(atom.pred)];
        uint32_t mask = 0;
        std::vector<TermId> key;
        for (size_t i = 0; i < atom.slots.size(); ++i) {
            const Slot& s = atom.slots[i];
            TermId v = -1;
            if (!s.isVar)
                v = s.ground;
            else if (binding[static_cast<size_t>(s.localVar)] != -1)
                v = binding[static_cast<size_t>(s.localVar)];
            if (v != -1) {
                mask |= 1u << i;
                key.push_back(v);
            }
        }
        if (mask == 0) {
            fullScan = true;
            return nullptr;
        }
        fullScan = false;
        auto& index = rel.indexes[mask];
        while (index.builtUpTo < rel.rows.size()) {
            const auto& row = rel.rows[index.builtUpTo];
            std::vector<TermId> k;
            for (size_t i = 0; i < row.size(); ++i)
                if (mask & (1u << i)) k.push_back(row[i]);
            index.map[std::move(k)].push_back(index.builtUpTo);
            ++index.builtUpTo;
        }
        auto it = index.map.find(key);
        if (it == index.map.end()) return nullptr;
        return &it->second;
    }

    void evalWithDelta(const CRule& cr, size_t d) {
        // Atom order: the delta atom first, then greedily by bound count.
        std::vector<size_t> order;
        order.push_back(d);
        std::vector<bool> used(cr.body.size(), false);
        used[d] = true;
        std::vector<bool> boundVar(static_cast<size_t>(cr.varCount), false);
        auto markAtom = [&](size_t a) {
            for (const Slot& s : cr.body[a].slots)
                if (s.isVar) boundVar[static_cast<size_t>(s.localVar)] = true;
        };
        markAtom(d);
        for (size_t step = 1; step < cr.body.size(); ++step) {
            size_t best = cr.body.size();
            int bestScore = -1;
            for (size_t a = 0; a < cr.body.size(); ++a) {
                if (used[a]) continue;
                int score = 0;
                for (const Slot& s : cr.body[a].slots)
                    if (!s.isVar || boundVar[static_cast<size_t>(s.localVar)]) ++score;
                if (score > bestScore) {
                    bestScore = score;
                    best = a;
                }
            }
            used[best] = true;
            order.push_back(best);
            markAtom(best);
        }

        Relation& drel = rels_[static_cast<size_t>(cr.body[d].pred)];
        size_t from = drel.deltaStart, to = drel.deltaEnd;
        std::vector<TermId> binding(static_cast<size_t>(cr.varCount), -1);

        std::function<void(size_t)> rec = [&](size_t step) {
            if (step == order.size()) {
                derive(cr, binding);
                return;
            }
            const CAtom& atom = cr.body[order[step]];
            bool fullScan = false;
            const std::vector<size_t>* cand = lookup(atom, binding, fullScan);
            Relation& rel = rels_[static_cast<size_t>(atom.pred)];
            auto tryRow = [&](const std::vector<TermId>& row) {
                std::vector<int> trail;
                if (matchRow(atom, row, binding, trail)) rec(step + 1);
                for (int v : trail) binding[static_cast<size_t>(v)] = -1;
            };
            if (fullScan) {
                size_t n = rel.rows.size();
                for (size_t i = 0; i < n; ++i) tryRow(rel.rows[i]);
            } else if (cand) {
                std::vector<size_t> copy = *cand; // derivations may grow the index
                for (size_t i : copy) tryRow(rel.rows[i]);
            }
        };

        for (size_t i = from; i < to; ++i) {
            std::vector<int> trail;
            if (matchRow(cr.body[d], drel.rows[i], binding, trail)) rec(1);
            for (int v : trail) binding[static_cast<size_t>(v)] = -1;
        }
    }

    void derive(const CRule& cr, const std::vector<TermId>& binding) {
        std::vector<TermId> row;
        row.reserve(cr.head.size());
        for (const HeadSlot& hs : cr.head) {
            TermId t = hs.base.isVar ? binding[static_cast<size_t>(hs.base.localVar)]
                                     : hs.base.ground;
            for (auto it = hs.fsyms.rbegin(); it != hs.fsyms.rend(); ++it)
                t = pool_->applied(*it, t);
            if (limits_.depthCap && pool_->depth(t) > *limits_.depthCap) return;
            row.push_back(t);
        }
        if (rels_[static_cast<size_t>(cr.headPred)].insert(std::move(row))) {
            if (++atomCount_ > limits_.maxAtoms)
                throw ResourceError("fixpoint atom budget exceeded (" +
                                    std::to_string(limits_.maxAtoms) + ")");
        }
    }
};

} // namespace

size_t FixpointResult::totalAtoms() const {
    size_t n = 0;
    for (const auto& [_, rows] : atoms) n += rows.size();
    return n;
}

bool FixpointResult::contains(const std::string& predName, const std::vector<TermId>& row) const {
    auto it = atoms.find(predName);
    if (it == atoms.end()) return false;
    return std::find(it->second.begin(), it->second.end(), row) != it->second.end();
}

std::vector<std::string> FixpointResult::renderedAtoms(const SymbolTable& constSyms) const {
    std::vector<std::string> out;
    for (const auto& [name, rows] : atoms) {
        for (const auto& row : rows) {
            std::string s = name;
            s += '(';
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) s += ',';
                s += pool->render(*symbols, constSyms, row[i]);
            }
            s += ')';
            out.push_back(std::move(s));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

FixpointResult seminaiveFixpoint(const Program& p, const SymbolTable& constSyms,
                                 const RelationalSchema& schema, const Database& db,
                                 uint64_t maxAtoms) {
    EvalLimits limits;
    limits.maxAtoms = maxAtoms;
    return Evaluator(p, constSyms, schema, db, limits).run();
}

FixpointResult boundedHerbrandFixpoint(const Program& p, const SymbolTable& constSyms,
                                       const RelationalSchema& schema, const Database& db,
                                       uint32_t depthCap, uint64_t maxAtoms) {
    EvalLimits limits;
    limits.depthCap = depthCap;
    limits.maxAtoms = maxAtoms;
    return Evaluator(p, constSyms, schema, db, limits).run();
}

ProgramAnswer answerProgram(const Program& p, const SymbolTable& constSyms,
                            const RelationalSchema& schema, const Database& db,
                            std::optional<uint32_t> depthCap, uint64_t maxAtoms) {
    if (p.queryPred < 0) throw SemanticError("program has no query predicate");
    EvalLimits limits;
    limits.depthCap = depthCap;
    limits.maxAtoms = maxAtoms;
    FixpointResult fp = Evaluator(p, constSyms, schema, db, limits).run();
    ProgramAnswer out;
    auto it = fp.atoms.find(p.symbols->predName(p.queryPred));
    if (it == fp.atoms.end()) return out;
    for (const auto& row : it->second) {
        bool ground = true;
        for (TermId t : row) ground = ground && fp.pool->isConst(t);
        if (ground) {
            AnswerTuple tuple;
            for (TermId t : row) tuple.push_back(fp.pool->constantOf(t));
            out.groundTuples.push_back(std::move(tuple));
        } else {
            std::string s = "(";
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) s += ", ";
                s += fp.pool->render(*fp.symbols, constSyms, row[i]);
            }
            s += ")";
            out.skolemTuples.push_back(std::move(s));
        }
    }
    out.groundTuples = sortTuples(constSyms, std::move(out.groundTuples));
    std::sort(out.skolemTuples.begin(), out.skolemTuples.end());
    out.skolemTuples.erase(std::unique(out.skolemTuples.begin(), out.skolemTuples.end()),
                           out.skolemTuples.end());
    return out;
}

} // namespace eerq
