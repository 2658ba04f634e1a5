#pragma once

// Finite fields F_{p^n} (log/Zech tables) and polynomials over them.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "intmath.hpp"

namespace padicl {

// F_{p^n}. Elements are codes in [0, p^n): base-p digits are coordinates in
// the power basis of a fixed primitive root g. Multiplication uses log tables.
class GF {
public:
    GF(int p, int n) : p_(p), n_(n), q_(ipow(p, n)) {
        if (!is_prime(p) || n < 1) throw std::invalid_argument("GF: bad parameters");
        find_primitive();
    }

    int p() const { return p_; }
    int n() const { return n_; }
    i64 size() const { return q_; }
    const std::vector<int>& modulus() const { return prim_; }

    int add(int a, int b) const {
        if (n_ == 1) return (int)((a + b) % p_);
        int r = 0, mul = 1;
        for (int i = 0; i < n_; ++i) {
            r += ((a % p_ + b % p_) % p_) * mul;
            a /= p_; b /= p_; mul *= p_;
        }
        return r;
    }
    int neg(int a) const {
        if (n_ == 1) return a ? p_ - a : 0;
        int r = 0, mul = 1;
        for (int i = 0; i < n_; ++i) {
            r += ((p_ - a % p_) % p_) * mul;
            a /= p_; mul *= p_;
        }
        return r;
    }
    int sub(int a, int b) const { return add(a, neg(b)); }
    int mul(int a, int b) const {
        if (!a || !b) return 0;
        i64 e = (i64)log_[a] + log_[b];
        if (e >= q_ - 1) e -= q_ - 1;
        return exp_[(size_t)e];
    }
    int inv(int a) const {
        if (!a) throw std::domain_error("GF: inverse of 0");
        return exp_[(size_t)((q_ - 1 - log_[a]) % (q_ - 1))];
    }
    int div(int a, int b) const { return mul(a, inv(b)); }
    int pow(int a, i64 e) const {
        if (e == 0) return 1;
        if (!a) return 0;
        i64 l = mod((i128)log_[a] * mod(e, q_ - 1) % (q_ - 1), q_ - 1);
        return exp_[(size_t)l];
    }
    int from_int(i64 v) const { return (int)mod(v, p_); }
    int gen_pow(i64 k) const { return exp_[(size_t)mod(k, q_ - 1)]; }
    int log(int a) const { return log_[a]; }
    // Zech logarithm: log(1 + g^i), or -1 when 1 + g^i = 0.
    int zech(i64 i) const { return zech_[(size_t)i]; }
    // Quadratic character.
    int chi(int a) const { return a == 0 ? 0 : (log_[a] % 2 == 0 ? 1 : -1); }
    int frob(int a) const { return pow(a, p_); }

    const std::vector<int>& exp_table() const { return exp_; }
    const std::vector<int>& log_table() const { return log_; }

private:
    void find_primitive() {
        // first monic polynomial (lexicographic in low coefficients) whose root
        // generates the multiplicative group
        std::vector<int> c(n_, 0);
        for (i64 code = 1; code < q_; ++code) {
            i64 t = code;
            for (int i = 0; i < n_; ++i) { c[i] = (int)(t % p_); t /= p_; }
            if (c[0] == 0) continue;
            if (try_build(c)) { prim_ = c; prim_.push_back(1); return; }
        }
        if (n_ == 1 && p_ == 2) { prim_ = {1, 1}; try_build({1}); return; }
        throw std::logic_error("GF: no primitive polynomial found");
    }

    bool try_build(const std::vector<int>& c) {
        std::vector<int> ex((size_t)(q_ - 1));
        std::vector<int> lg((size_t)q_, -1);
        std::vector<int> digits(n_, 0);
        digits[0] = 1;
        for (i64 i = 0; i < q_ - 1; ++i) {
            int code = 0, mul = 1;
            for (int k = 0; k < n_; ++k) { code += digits[k] * mul; mul *= p_; }
            if (lg[code] != -1) return false;
            lg[code] = (int)i;
            ex[(size_t)i] = code;
            // multiply by x modulo x^n + c_{n-1}x^{n-1} + ... + c_0
            int top = digits[n_ - 1];
            for (int k = n_ - 1; k > 0; --k) digits[k] = digits[k - 1];
            digits[0] = 0;
            for (int k = 0; k < n_; ++k) digits[k] = (int)mod(digits[k] - (i64)top * c[k], p_);
        }
        exp_ = std::move(ex);
        log_ = std::move(lg);
        zech_.assign((size_t)(q_ - 1), -1);
        for (i64 i = 0; i < q_ - 1; ++i) {
            int s = add(1, exp_[(size_t)i]);
            zech_[(size_t)i] = s ? log_[s] : -1;
        }
        return true;
    }

    int p_, n_;
    i64 q_;
    std::vector<int> prim_;
    std::vector<int> exp_, log_, zech_;
};

// Shared cache of fields; construction of large fields is not free.
inline const GF& field(int p, int n) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<GF>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, n}];
    if (!slot) slot = std::make_unique<GF>(p, n);
    return *slot;
}

// Embedding F_{p^r} -> F_{p^{rk}} sending the generator of the small field to
// a root of its defining polynomial; returned as a code map.
inline const std::vector<int>& embedding(int p, int r, int k) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, std::vector<int>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({p, r, k});
        if (it != cache.end()) return it->second;
    }
    const GF& S = field(p, r);
    const GF& B = field(p, r * k);
    std::vector<int> map((size_t)S.size(), 0);
    if (r == 1) {
        for (int a = 0; a < p; ++a) map[a] = a;
    } else {
        const auto& f = S.modulus();
        i64 step = (B.size() - 1) / (S.size() - 1);
        int h = -1;
        for (i64 j = 1; j < S.size() - 1 && h < 0; ++j) {
            if (std::gcd(j, S.size() - 1) != 1) continue;
            int cand = B.gen_pow(j * step);
            int val = 0;
            for (int i = (int)f.size() - 1; i >= 0; --i) val = B.add(B.mul(val, cand), B.from_int(f[i]));
            if (val == 0) h = cand;
        }
        if (h < 0) throw std::logic_error("embedding: no root found");
        for (i64 code = 0; code < S.size(); ++code) {
            int acc = 0, pw = 1;
            i64 t = code;
            for (int i = 0; i < r; ++i) {
                acc = B.add(acc, B.mul(B.from_int(t % p), pw));
                pw = B.mul(pw, h);
                t /= p;
            }
            map[(size_t)code] = acc;
        }
    }
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(std::make_tuple(p, r, k), std::move(map)).first->second;
}

// ---- polynomials over a finite field ------------------------------------

using Poly = std::vector<int>;  // coefficients low -> high, no trailing zeros

namespace poly {

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}
inline int deg(const Poly& a) { return (int)a.size() - 1; }
inline Poly constant(int c) { return c ? Poly{c} : Poly{}; }
inline Poly x_minus(const GF& F, int a) { return {F.neg(a), 1}; }

inline Poly add(const GF& F, const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < r.size(); ++i)
        r[i] = F.add(i < a.size() ? a[i] : 0, i < b.size() ? b[i] : 0);
    trim(r);
    return r;
}
inline Poly neg(const GF& F, const Poly& a) {
    Poly r(a);
    for (auto& c : r) c = F.neg(c);
    return r;
}
inline Poly sub(const GF& F, const Poly& a, const Poly& b) { return add(F, a, neg(F, b)); }
inline Poly scale(const GF& F, const Poly& a, int c) {
    Poly r(a);
    for (auto& x : r) x = F.mul(x, c);
    trim(r);
    return r;
}
inline Poly mul(const GF& F, const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
    }
    trim(r);
    return r;
}
// a = q*b + r
inline std::pair<Poly, Poly> divmod(const GF& F, Poly a, const Poly& b) {
    if (b.empty()) throw std::domain_error("poly division by zero");
    trim(a);
    if (a.size() < b.size()) return {{}, a};
    Poly q(a.size() - b.size() + 1, 0);
    int inv_lc = F.inv(b.back());
    for (int k = (int)a.size() - (int)b.size(); k >= 0; --k) {
        int c = F.mul(a[k + b.size() - 1], inv_lc);
        q[k] = c;
        if (!c) continue;
        for (size_t j = 0; j < b.size(); ++j) a[k + j] = F.sub(a[k + j], F.mul(c, b[j]));
    }
    trim(a);
    trim(q);
    return {q, a};
}
inline Poly rem(const GF& F, const Poly& a, const Poly& b) { return divmod(F, a, b).second; }
inline Poly monic(const GF& F, const Poly& a) {
    if (a.empty()) return a;
    return scale(F, a, F.inv(a.back()));
}
inline Poly gcd(const GF& F, Poly a, Poly b) {
    while (!b.empty()) {
        Poly r = rem(F, a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(F, a);
}
// returns (g, s, t) with s*a + t*b = g monic
inline std::tuple<Poly, Poly, Poly> xgcd(const GF& F, Poly a, Poly b) {
    Poly s0{1}, s1{}, t0{}, t1{1};
    while (!b.empty()) {
        auto [q, r] = divmod(F, a, b);
        a = std::move(b);
        b = std::move(r);
        Poly s2 = sub(F, s0, mul(F, q, s1));
        Poly t2 = sub(F, t0, mul(F, q, t1));
        s0 = std::move(s1); s1 = std::move(s2);
        t0 = std::move(t1); t1 = std::move(t2);
    }
    if (a.empty()) return {a, s0, t0};
    int c = F.inv(a.back());
    return {scale(F, a, c), scale(F, s0, c), scale(F, t0, c)};
}
inline Poly mulmod(const GF& F, const Poly& a, const Poly& b, const Poly& m) { return rem(F, mul(F, a, b), m); }
inline Poly powmod(const GF& F, Poly a, i64 e, const Poly& m) {
    Poly r = rem(F, Poly{1}, m);
    a = rem(F, a, m);
    while (e > 0) {
        if (e & 1) r = mulmod(F, r, a, m);
        a = mulmod(F, a, a, m);
        e >>= 1;
    }
    return r;
}
inline Poly pow(const GF& F, const Poly& a, int e) {
    Poly r{1};
    for (int i = 0; i < e; ++i) r = mul(F, r, a);
    return r;
}
inline int eval(const GF& F, const Poly& a, int x) {
    int r = 0;
    for (int i = (int)a.size() - 1; i >= 0; --i) r = F.add(F.mul(r, x), a[i]);
    return r;
}
inline Poly derivative(const GF& F, const Poly& a) {
    Poly r;
    for (size_t i = 1; i < a.size(); ++i) r.push_back(F.mul(F.from_int((i64)i), a[i]));
    trim(r);
    return r;
}
// Rabin's test over F = F_q.
inline bool is_irreducible(const GF& F, const Poly& f) {
    int n = deg(f);
    if (n < 1) return false;
    if (n == 1) return true;
    Poly x{0, 1};
    i64 q = F.size();
    auto xqk = [&](int k) {
        Poly r = x;
        for (int i = 0; i < k; ++i) r = powmod(F, r, q, f);
        return r;
    };
    if (!rem(F, sub(F, xqk(n), x), f).empty()) return false;
    for (int d = 1; d < n; ++d) {
        if (n % d) continue;
        if (deg(gcd(F, f, sub(F, xqk(d), x))) > 0) return false;
    }
    return true;
}
inline std::string str(const Poly& a) {
    if (a.empty()) return "0";
    std::string s;
    for (int i = (int)a.size() - 1; i >= 0; --i) {
        if (!a[i]) continue;
        if (!s.empty()) s += "+";
        if (a[i] != 1 || i == 0) s += std::to_string(a[i]);
        if (i >= 1) s += "t";
        if (i >= 2) s += "^" + std::to_string(i);
    }
    return s;
}

} // namespace poly
} // namespace padicl
