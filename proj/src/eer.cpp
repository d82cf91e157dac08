#include "eerq/eer.hpp"

#include <algorithm>
#include <sstream>

#include "eerq/error.hpp"

namespace eerq {

const EntityDef* EERSchema::findEntity(const std::string& name) const {
    for (const auto& e : entities)
        if (e.name == name) return &e;
    return nullptr;
}

const RelationshipDef* EERSchema::findRelationship(const std::string& name) const {
    for (const auto& r : relationships)
        if (r.name == name) return &r;
    return nullptr;
}

const AttributeDef* EERSchema::findAttribute(const std::string& name) const {
    for (const auto& a : attributes)
        if (a.name == name) return &a;
    return nullptr;
}

namespace {

enum class Tok { Ident, Int, Colon, Comma, LParen, RParen, LBracket, RBracket, Geq, Leq, End };

struct Token {
    Tok kind;
    std::string text;
    long value = 0;
    int line = 1, col = 1;
};

const std::set<std::string> kKeywords = {"entity",       "relationship", "attribute",
                                         "isa",          "participates", "among",
                                         "of",           "functional",   "mandatory"};

class Lexer {
public:
    Lexer(const std::string& text, std::string filename)
        : text_(text), file_(std::move(filename)) {}

    Token next() {
        skipSpace();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = text_[pos_];
        auto alpha = [](char ch) {
            return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_';
        };
        if (alpha(c)) {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (alpha(text_[pos_]) || (text_[pos_] >= '0' && text_[pos_] <= '9')))
                advance();
            t.kind = Tok::Ident;
            t.text = text_.substr(start, pos_ - start);
            return t;
        }
        if (c >= '0' && c <= '9') {
            size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') advance();
            t.kind = Tok::Int;
            t.text = text_.substr(start, pos_ - start);
            t.value = std::stol(t.text);
            return t;
        }
        switch (c) {
            case ':': advance(); t.kind = Tok::Colon; return t;
            case ',': advance(); t.kind = Tok::Comma; return t;
            case '(': advance(); t.kind = Tok::LParen; return t;
            case ')': advance(); t.kind = Tok::RParen; return t;
            case '[': advance(); t.kind = Tok::LBracket; return t;
            case ']': advance(); t.kind = Tok::RBracket; return t;
            case '>':
            case '<': {
                char first = c;
                advance();
                if (pos_ < text_.size() && text_[pos_] == '=') {
                    advance();
                    t.kind = first == '>' ? Tok::Geq : Tok::Leq;
                    return t;
                }
                throw ParseError(file_, t.line, t.col, std::string("expected '=' after '") + first + "'");
            }
            default:
                throw ParseError(file_, t.line, t.col,
                                 "unexpected character '" + std::string(1, c) + "'");
        }
    }

    const std::string& file() const { return file_; }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skipSpace() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
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

class EerParser {
public:
    EerParser(const std::string& text, const std::string& filename)
        : lexer_(text, filename) {
        cur_ = lexer_.next();
    }

    EERSchema parse() {
        EERSchema schema;
        while (cur_.kind != Tok::End) {
            if (isKeyword("entity"))
                parseEntity(schema);
            else if (isKeyword("relationship"))
                parseRelationship(schema);
            else if (isKeyword("attribute"))
                parseAttribute(schema);
            else
                fail("expected 'entity', 'relationship' or 'attribute'");
        }
        return schema;
    }

private:
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(lexer_.file(), cur_.line, cur_.col, msg);
    }
    bool isKeyword(const char* kw) const { return cur_.kind == Tok::Ident && cur_.text == kw; }
    void advance() { cur_ = lexer_.next(); }
    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) fail(std::string("expected ") + what);
        advance();
    }
    std::string expectName() {
        if (cur_.kind != Tok::Ident) fail("expected a name");
        if (kKeywords.count(cur_.text)) fail("'" + cur_.text + "' is a reserved keyword");
        std::string n = cur_.text;
        advance();
        return n;
    }
    int expectInt() {
        if (cur_.kind != Tok::Int) fail("expected an integer");
        int v = static_cast<int>(cur_.value);
        advance();
        return v;
    }

    void parseEntity(EERSchema& schema) {
        advance();
        EntityDef def;
        def.name = expectName();
        while (true) {
            if (isKeyword("isa")) {
                advance();
                expect(Tok::Colon, "':'");
                def.isa.insert(expectName());
                while (cur_.kind == Tok::Comma) {
                    advance();
                    def.isa.insert(expectName());
                }
            } else if (isKeyword("participates")) {
                advance();
                expect(Tok::LParen, "'('");
                bool atLeast;
                if (cur_.kind == Tok::Geq)
                    atLeast = true;
                else if (cur_.kind == Tok::Leq)
                    atLeast = false;
                else
                    fail("expected '>=' or '<='");
                advance();
                if (cur_.kind != Tok::Int || cur_.value != 1) fail("expected '1'");
                advance();
                expect(Tok::RParen, "')'");
                expect(Tok::Colon, "':'");
                auto item = [&] {
                    std::string rel = expectName();
                    expect(Tok::Colon, "':' before the component index");
                    int comp = expectInt();
                    auto& target = atLeast ? def.participatesAtLeastOnce : def.participatesAtMostOnce;
                    target.insert({rel, comp});
                };
                item();
                while (cur_.kind == Tok::Comma) {
                    advance();
                    item();
                }
            } else {
                break;
            }
        }
        schema.entities.push_back(std::move(def));
    }

    void parseRelationship(EERSchema& schema) {
        advance();
        RelationshipDef def;
        def.name = expectName();
        if (!isKeyword("among")) fail("expected 'among'");
        advance();
        def.among.push_back(expectName());
        while (cur_.kind == Tok::Comma) {
            advance();
            def.among.push_back(expectName());
        }
        while (isKeyword("isa")) {
            advance();
            expect(Tok::Colon, "':'");
            auto item = [&] {
                std::string rel = expectName();
                expect(Tok::LBracket, "'['");
                std::vector<int> perm;
                perm.push_back(expectInt());
                while (cur_.kind == Tok::Comma) {
                    advance();
                    perm.push_back(expectInt());
                }
                expect(Tok::RBracket, "']'");
                def.isa.insert({rel, perm});
            };
            item();
            while (cur_.kind == Tok::Comma) {
                advance();
                item();
            }
        }
        schema.relationships.push_back(std::move(def));
    }

    void parseAttribute(EERSchema& schema) {
        advance();
        AttributeDef def;
        def.name = expectName();
        if (!isKeyword("of")) fail("expected 'of'");
        advance();
        def.owner = expectName();
        while (cur_.kind == Tok::Ident) {
            if (cur_.text == "functional") {
                def.functional = true;
                advance();
            } else if (cur_.text == "mandatory") {
                def.mandatory = true;
                advance();
            } else if (cur_.text == "entity" || cur_.text == "relationship" ||
                       cur_.text == "attribute") {
                break;
            } else {
                fail("unknown qualification keyword '" + cur_.text + "'");
            }
        }
        schema.attributes.push_back(std::move(def));
    }

    Lexer lexer_;
    Token cur_;
};

} // namespace

EERSchema parseEerSyntax(const std::string& text, const std::string& filename) {
    return EerParser(text, filename).parse();
}

EERSchema parseEer(const std::string& text, const std::string& filename) {
    EERSchema schema = parseEerSyntax(text, filename);
    auto violations = validateEer(schema);
    if (!violations.empty()) {
        std::string msg;
        for (const auto& v : violations) {
            if (!msg.empty()) msg += '\n';
            msg += v.message;
        }
        throw SemanticError(msg);
    }
    return schema;
}

std::vector<EerViolation> validateEer(const EERSchema& schema) {
    std::vector<EerViolation> report;
    auto add = [&](std::string msg) { report.push_back({std::move(msg)}); };

    std::map<std::string, std::string> nameKind; // name -> kind it was first declared as
    auto declare = [&](const std::string& name, const char* kindName) {
        auto [it, inserted] = nameKind.emplace(name, kindName);
        if (!inserted) {
            if (it->second == kindName)
                add("duplicate " + it->second + " name '" + name + "'");
            else
                add("name '" + name + "' declared both as " + it->second + " and as " + kindName);
        }
    };
    for (const auto& e : schema.entities) declare(e.name, "entity");
    for (const auto& r : schema.relationships) declare(r.name, "relationship");
    for (const auto& a : schema.attributes) declare(a.name, "attribute");

    for (const auto& r : schema.relationships) {
        if (r.arity() < 2)
            add("relationship '" + r.name + "' must have arity >= 2");
        for (const auto& e : r.among)
            if (!schema.findEntity(e))
                add("relationship '" + r.name + "' lists undefined entity '" + e + "'");
        for (const auto& [target, perm] : r.isa) {
            const RelationshipDef* t = schema.findRelationship(target);
            if (!t) {
                add("relationship '" + r.name + "' isa undefined relationship '" + target + "'");
                continue;
            }
            if (t->arity() != r.arity())
                add("relationship isa '" + r.name + "' -> '" + target + "': arity mismatch");
            if (perm.size() != static_cast<size_t>(r.arity())) {
                add("relationship isa '" + r.name + "' -> '" + target +
                    "': permutation length differs from the arity");
                continue;
            }
            std::vector<bool> seen(perm.size() + 1, false);
            bool bad = false;
            for (int p : perm) {
                if (p < 1 || static_cast<size_t>(p) > perm.size() || seen[static_cast<size_t>(p)])
                    bad = true;
                else
                    seen[static_cast<size_t>(p)] = true;
            }
            if (bad)
                add("relationship isa '" + r.name + "' -> '" + target + "': not a permutation");
        }
    }

    for (const auto& e : schema.entities) {
        for (const auto& target : e.isa)
            if (!schema.findEntity(target))
                add("entity '" + e.name + "' isa undefined entity '" + target + "'");
        auto checkPart = [&](const std::set<std::pair<std::string, int>>& items, const char* kind) {
            for (const auto& [rel, comp] : items) {
                const RelationshipDef* r = schema.findRelationship(rel);
                if (!r) {
                    add("entity '" + e.name + "' " + kind + " names undefined relationship '" +
                        rel + "'");
                    continue;
                }
                if (comp < 1 || comp > r->arity()) {
                    add("entity '" + e.name + "' " + kind + " component " + std::to_string(comp) +
                        " is out of range for '" + rel + "'");
                    continue;
                }
                if (r->among[static_cast<size_t>(comp - 1)] != e.name)
                    add("relationship '" + rel + "' does not list entity '" + e.name +
                        "' at component " + std::to_string(comp));
            }
        };
        checkPart(e.participatesAtLeastOnce, "participates(>=1)");
        checkPart(e.participatesAtMostOnce, "participates(<=1)");
    }

    for (const auto& a : schema.attributes) {
        if (!schema.findEntity(a.owner) && !schema.findRelationship(a.owner))
            add("attribute '" + a.name + "' of undefined entity or relationship '" + a.owner + "'");
    }

    return report;
}

std::string printEer(const EERSchema& schema) {
    std::ostringstream out;
    for (const auto& e : schema.entities) {
        out << "entity " << e.name << "\n";
        if (!e.isa.empty()) {
            out << "  isa: ";
            bool first = true;
            for (const auto& t : e.isa) out << (first ? "" : ", ") << t, first = false;
            out << "\n";
        }
        auto printPart = [&](const std::set<std::pair<std::string, int>>& items, const char* op) {
            if (items.empty()) return;
            out << "  participates(" << op << "1): ";
            bool first = true;
            for (const auto& [rel, comp] : items) {
                out << (first ? "" : ", ") << rel << ":" << comp;
                first = false;
            }
            out << "\n";
        };
        printPart(e.participatesAtLeastOnce, ">=");
        printPart(e.participatesAtMostOnce, "<=");
    }
    for (const auto& r : schema.relationships) {
        out << "relationship " << r.name << " among ";
        for (size_t i = 0; i < r.among.size(); ++i) out << (i ? ", " : "") << r.among[i];
        out << "\n";
        if (!r.isa.empty()) {
            out << "  isa: ";
            bool first = true;
            for (const auto& [target, perm] : r.isa) {
                out << (first ? "" : ", ") << target << "[";
                for (size_t i = 0; i < perm.size(); ++i) out << (i ? "," : "") << perm[i];
                out << "]";
                first = false;
            }
            out << "\n";
        }
    }
    for (const auto& a : schema.attributes) {
        out << "attribute " << a.name << " of " << a.owner;
        if (a.functional) out << " functional";
        if (a.mandatory) out << " mandatory";
        out << "\n";
    }
    return out.str();
}

} // namespace eerq
