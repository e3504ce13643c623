#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace boxview {

/// All domain values and bound computations use 64-bit signed integers.
using Int = std::int64_t;

inline constexpr Int kIntMin = std::numeric_limits<Int>::min();
inline constexpr Int kIntMax = std::numeric_limits<Int>::max();

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

[[noreturn, gnu::cold, gnu::noinline]] inline void overflow(const char* what) { throw OverflowError(what); }

inline Int add_checked(Int a, Int b) {
    Int r;
    if (__builtin_add_overflow(a, b, &r)) overflow("boxview: overflow in addition");
    return r;
}

inline Int sub_checked(Int a, Int b) {
    Int r;
    if (__builtin_sub_overflow(a, b, &r)) overflow("boxview: overflow in subtraction");
    return r;
}

inline Int mul_checked(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r)) overflow("boxview: overflow in multiplication");
    return r;
}

inline Int neg_checked(Int a) {
    if (a == kIntMin) overflow("boxview: overflow in negation");
    return -a;
}

/// Floor of a/b for b != 0 (C++ division truncates toward zero).
inline Int floor_div(Int a, Int b) {
    if (b == -1) return neg_checked(a);
    Int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline Int ceil_div(Int a, Int b) {
    if (b == -1) return neg_checked(a);
    Int q = a / b;
    if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
    return q;
}

/// Largest r with r*r <= v, for v >= 0.
inline Int isqrt_floor(Int v) {
    if (v < 0) throw std::domain_error("boxview: isqrt of negative value");
    Int r = 0;
    Int hi = 3037000499;  // floor(sqrt(2^63 - 1))
    Int lo = 0;
    while (lo <= hi) {
        Int mid = lo + (hi - lo) / 2;
        if (mid * mid <= v) {
            r = mid;
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return r;
}

/// Smallest r >= 0 with r*r >= v, for v >= 0.
inline Int isqrt_ceil(Int v) {
    Int r = isqrt_floor(v);
    return r * r == v ? r : r + 1;
}

}  // namespace boxview
