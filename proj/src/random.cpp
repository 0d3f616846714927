#include "precisen/random.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace precisen {

std::mt19937_64 substream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(purpose), lo(index), hi(index)};
    return std::mt19937_64(seq);
}

std::optional<std::uint64_t> seed_from_environment() {
    const char* raw = std::getenv("PRECISEN_SEED");
    if (raw == nullptr) {
        return std::nullopt;
    }
    std::string_view text(raw);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

} // namespace precisen
