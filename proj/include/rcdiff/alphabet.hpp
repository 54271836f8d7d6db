#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "rcdiff/error.hpp"

namespace rcdiff {

/// Ordered set of printable ASCII characters a regex, DFA and vocabulary share.
class Alphabet {
public:
    Alphabet() { index_.fill(-1); }

    explicit Alphabet(std::string_view chars) : Alphabet() {
        if (chars.empty()) throw ValidationError("alphabet must not be empty");
        for (char c : chars) {
            auto u = static_cast<unsigned char>(c);
            if (u < 0x20 || u > 0x7e)
                throw ValidationError("alphabet character is not printable ASCII: code " +
                                      std::to_string(u));
            if (index_[u] >= 0)
                throw ValidationError(std::string("duplicate alphabet character '") + c + "'");
            index_[u] = static_cast<int>(chars_.size());
            chars_.push_back(c);
        }
    }

    std::size_t size() const noexcept { return chars_.size(); }
    bool empty() const noexcept { return chars_.empty(); }
    const std::string& chars() const noexcept { return chars_; }
    char at(std::size_t i) const { return chars_.at(i); }

    bool contains(char c) const noexcept { return index_[static_cast<unsigned char>(c)] >= 0; }

    /// Position of `c` in declaration order, or nullopt when absent.
    std::optional<std::size_t> index_of(char c) const noexcept {
        int i = index_[static_cast<unsigned char>(c)];
        if (i < 0) return std::nullopt;
        return static_cast<std::size_t>(i);
    }

    std::size_t require_index(char c) const {
        auto i = index_of(c);
        if (!i) throw ValidationError(std::string("character '") + c + "' is outside the alphabet");
        return *i;
    }

    bool operator==(const Alphabet& other) const noexcept { return chars_ == other.chars_; }

private:
    std::string chars_;
    std::array<int, 256> index_{};
};

}  // namespace rcdiff
