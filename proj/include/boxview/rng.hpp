#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "boxview/common.hpp"

namespace boxview {

/// 64-bit LCG; the output is the high half of the state. Portable by
/// construction, so instances are identical everywhere.
class SeededRng {
public:
    static constexpr std::uint64_t kMul = 6364136223846793005ULL;
    static constexpr std::uint64_t kInc = 1442695040888963407ULL;

    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint32_t next() {
        state_ = state_ * kMul + kInc;
        return static_cast<std::uint32_t>(state_ >> 32);
    }

    /// Value in [lo..hi] (modulo reduction).
    Int uniform(Int lo, Int hi) {
        if (lo > hi) throw std::invalid_argument("boxview: empty range");
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<Int>(next() % span);
    }

    /// Sorted k-subset of {0..n-1}; rejects draws with repeated indices.
    std::vector<int> subset(int n, int k) {
        if (k < 0 || k > n) throw std::invalid_argument("boxview: subset size out of range");
        std::vector<int> s(k);
        while (true) {
            for (auto& v : s) v = static_cast<int>(uniform(0, n - 1));
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) == s.end()) return s;
        }
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace boxview
