#include "eerq/constant.hpp"

namespace eerq {

int32_t SymbolTable::intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    int32_t id = static_cast<int32_t>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
}

std::optional<int32_t> SymbolTable::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool isBareIdentifier(std::string_view s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto alnum = [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); };
    if (!alpha(s[0])) return false;
    for (char c : s.substr(1))
        if (!alnum(c)) return false;
    return true;
}

std::string renderConstant(const SymbolTable& syms, Constant c) {
    if (c.isFresh()) return std::string(kFreshMarker) + std::to_string(c.ordinal());
    const std::string& n = syms.name(c.symbol());
    if (isBareIdentifier(n)) return n;
    std::string out = "'";
    out += n;
    out += '\'';
    return out;
}

} // namespace eerq
