#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eerq {

// Interning table for non-fresh constant names. One table per "universe";
// everything that renders or orders constants needs a reference to it.
class SymbolTable {
public:
    int32_t intern(std::string_view name);
    std::optional<int32_t> find(std::string_view name) const;
    const std::string& name(int32_t id) const { return names_[static_cast<size_t>(id)]; }
    size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int32_t> index_;
};

// A constant is either a named domain value (non-fresh) or a placeholder
// allocated during a chase run (fresh, identified by ordinal >= 1).
struct Constant {
    int32_t code = 0; // >= 0: symbol id; < 0: -ordinal of a fresh constant

    static Constant nonFresh(int32_t symbol) { return Constant{symbol}; }
    static Constant fresh(int32_t ordinal) { return Constant{-ordinal}; }

    bool isFresh() const { return code < 0; }
    int32_t symbol() const { return code; }
    int32_t ordinal() const { return -code; }

    bool operator==(const Constant&) const = default;
};

struct ConstantHash {
    size_t operator()(Constant c) const { return std::hash<int32_t>()(c.code); }
};

// Strict total order: every non-fresh constant precedes every fresh one;
// non-fresh ordered by name, fresh by ordinal.
struct ConstantOrder {
    const SymbolTable* syms;
    bool operator()(Constant a, Constant b) const {
        if (a.isFresh() != b.isFresh()) return !a.isFresh();
        if (a.isFresh()) return a.ordinal() < b.ordinal();
        return syms->name(a.symbol()) < syms->name(b.symbol());
    }
};

// Monotonic per-chase-run allocator; ordinals are never reused within a run,
// so freshly created constants follow all existing ones in the total order.
class FreshGen {
public:
    Constant next() { return Constant::fresh(++last_); }
    int32_t allocated() const { return last_; }

private:
    int32_t last_ = 0;
};

// Renders a constant for display: plain name, single-quoted name when it is
// not a bare identifier, or the fresh marker (U+03C6 followed by the ordinal).
// Parsers reject the fresh marker so freshness cannot be forged from files.
std::string renderConstant(const SymbolTable& syms, Constant c);

bool isBareIdentifier(std::string_view s);

inline constexpr std::string_view kFreshMarker = "\xCF\x86"; // "φ"

} // namespace eerq
