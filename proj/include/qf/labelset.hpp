#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace qf {

/// Fixed-width binary label vector. Doubles as a label mask: a set bit
/// marks a label that must be positive.
struct Labelset {
    std::vector<std::uint8_t> bits;

    Labelset() = default;
    explicit Labelset(std::size_t n_labels) : bits(n_labels, 0) {}
    Labelset(std::initializer_list<int> b) {
        bits.reserve(b.size());
        for (int v : b) bits.push_back(v ? 1 : 0);
    }

    std::size_t size() const { return bits.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits[i]; }
    std::uint8_t& operator[](std::size_t i) { return bits[i]; }

    int count() const {
        int c = 0;
        for (auto b : bits) c += b;
        return c;
    }
    bool any() const { return count() > 0; }

    /// True when every label set in `mask` is also set here.
    bool covers(const Labelset& mask) const {
        if (mask.size() != size()) return false;
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (mask.bits[i] && !bits[i]) return false;
        return true;
    }

    /// Indices of positive labels, ascending.
    std::vector<int> positives() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) out.push_back(static_cast<int>(i));
        return out;
    }

    bool operator==(const Labelset&) const = default;
};

} // namespace qf
