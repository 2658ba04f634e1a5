#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace padicl {

using i64 = std::int64_t;
using i128 = __int128;

inline i64 ipow(i64 b, int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) {
        i128 t = (i128)r * b;
        if (t > INT64_MAX || t < INT64_MIN) throw Overflow("ipow");
        r = (i64)t;
    }
    return r;
}

inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 mod128(i128 a, i64 m) {
    i128 r = a % m;
    return (i64)(r < 0 ? r + m : r);
}

inline i64 mulmod(i64 a, i64 b, i64 m) { return mod128((i128)a * b, m); }

inline i64 powmod(i64 b, i64 e, i64 m) {
    i64 r = 1 % m;
    b = mod(b, m);
    while (e > 0) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

// Extended Euclid; throws if a is not invertible mod m.
inline i64 invmod(i64 a, i64 m) {
    i64 g = m, x = 0, x1 = 1, a1 = mod(a, m);
    while (a1 != 0) {
        i64 q = g / a1;
        i64 t = g - q * a1; g = a1; a1 = t;
        t = x - q * x1; x = x1; x1 = t;
    }
    if (g != 1) throw std::domain_error("invmod: not invertible");
    return mod(x, m);
}

// p-adic valuation of a nonzero integer; returns `cap` for zero.
inline int vp(i128 a, int p, int cap = 1 << 20) {
    if (a == 0) return cap;
    int v = 0;
    while (a % p == 0) { a /= p; ++v; }
    return v;
}

inline i64 checked_add(i64 a, i64 b) {
    i64 r;
    if (__builtin_add_overflow(a, b, &r)) throw Overflow("add");
    return r;
}

inline i64 checked_mul(i64 a, i64 b) {
    i64 r;
    if (__builtin_mul_overflow(a, b, &r)) throw Overflow("mul");
    return r;
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Returns (p, r) with q = p^r, or throws.
inline std::pair<int, int> prime_power(i64 q) {
    for (int p = 2; p <= q; ++p) {
        if (q % p) continue;
        if (!is_prime(p)) break;
        int r = 0;
        i64 t = q;
        while (t % p == 0) { t /= p; ++r; }
        if (t != 1) break;
        return {p, r};
    }
    throw std::invalid_argument("not a prime power: " + std::to_string(q));
}

// Largest K with p^K < 2^62; all reduced residues fit in an int64 and
// products of two fit in an int128 with room for accumulation.
inline int max_digits(int p) {
    int k = 0;
    i128 v = 1;
    while (v * p < ((i128)1 << 62)) { v *= p; ++k; }
    return k;
}

// Exact rational with i64 parts, always reduced with positive denominator.
struct Rational {
    i64 num = 0, den = 1;
    Rational() = default;
    Rational(i64 n, i64 d = 1) : num(n), den(d) { reduce(); }
    void reduce() {
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        i64 g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    friend Rational operator+(Rational a, Rational b) {
        return Rational(checked_add(checked_mul(a.num, b.den), checked_mul(b.num, a.den)),
                        checked_mul(a.den, b.den));
    }
    friend Rational operator-(Rational a, Rational b) { return a + Rational(-b.num, b.den); }
    friend Rational operator*(Rational a, Rational b) {
        return Rational(checked_mul(a.num, b.num), checked_mul(a.den, b.den));
    }
    friend Rational operator/(Rational a, Rational b) {
        return Rational(checked_mul(a.num, b.den), checked_mul(a.den, b.num));
    }
    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(Rational a, Rational b) { return (i128)a.num * b.den < (i128)b.num * a.den; }
    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

} // namespace padicl
