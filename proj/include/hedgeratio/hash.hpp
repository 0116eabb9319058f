#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace hr {

/// FNV-1a 64-bit, used for basis identities. Not cryptographic.
class ContentHash {
public:
    void update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(std::uint64_t v) noexcept {
        for (int k = 0; k < 8; ++k) {
            state_ ^= static_cast<unsigned char>(v >> (8 * k));
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(std::span<const double> values) noexcept {
        for (double v : values) update(std::bit_cast<std::uint64_t>(v));
    }

    [[nodiscard]] std::uint64_t value() const noexcept { return state_; }
    [[nodiscard]] std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace hr
