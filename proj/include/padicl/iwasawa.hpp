#pragma once

// Finite levels of the Iwasawa algebra Z_p[[Z_p^d]]: group rings Z_p[(Z/p^n)^d]
// kept as p^{-aleph} times residues mod p^N, and truncated power series in
// t_i = sigma_i - 1.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "intmath.hpp"
#include "padic.hpp"
#include "rayclass.hpp"

namespace padicl {

// (Z/p^n)^d with elements and characters indexed in mixed radix, first coordinate lowest.
struct GroupShape {
    int p = 2, d = 0, n = 0;

    i64 pn() const { return ipow(p, n); }
    i64 size() const { return ipow(pn(), d); }
    i64 index(const std::vector<i64>& g) const {
        i64 idx = 0, P = pn();
        for (int i = d - 1; i >= 0; --i) idx = idx * P + mod(g[(size_t)i], P);
        return idx;
    }
    std::vector<i64> element(i64 idx) const {
        std::vector<i64> g((size_t)d);
        i64 P = pn();
        for (int i = 0; i < d; ++i) { g[(size_t)i] = idx % P; idx /= P; }
        return g;
    }
    i64 pair(const std::vector<i64>& c, const std::vector<i64>& g) const {
        i64 s = 0, P = pn();
        for (int i = 0; i < d; ++i) s = mod(s + mulmod(c[(size_t)i], g[(size_t)i], P), P);
        return s;
    }
    friend bool operator==(const GroupShape& a, const GroupShape& b) { return a.p == b.p && a.d == b.d && a.n == b.n; }
};

inline int default_digits(int p) { return max_digits(p) - 2; }

inline i64 symmetric(i64 c, i64 M) {
    c = mod(c, M);
    return c > M / 2 ? c - M : c;
}

class GroupRingElt {
public:
    GroupRingElt() = default;
    GroupRingElt(GroupShape s, int N = 0) : s_(s), N_(N ? N : default_digits(s.p)), c_((size_t)s.size(), 0) {}

    static GroupRingElt delta(GroupShape s, const std::vector<i64>& g, i64 coef = 1) {
        GroupRingElt f(s);
        f.c_[(size_t)s.index(g)] = mod(coef, f.modulus());
        return f;
    }
    static GroupRingElt one(GroupShape s) { return delta(s, std::vector<i64>((size_t)s.d, 0)); }
    // sigma_i - 1
    static GroupRingElt t(GroupShape s, int i) {
        std::vector<i64> g((size_t)s.d, 0);
        g[(size_t)i] = 1;
        return delta(s, g) - one(s);
    }
    static GroupRingElt from_coeffs(GroupShape s, const std::vector<i64>& c, int aleph = 0, int N = 0) {
        GroupRingElt f(s, N);
        if ((i64)c.size() != s.size()) throw std::invalid_argument("from_coeffs: wrong length");
        for (size_t i = 0; i < c.size(); ++i) f.c_[i] = mod(c[i], f.modulus());
        f.aleph_ = aleph;
        return f;
    }

    const GroupShape& shape() const { return s_; }
    int p() const { return s_.p; }
    int d() const { return s_.d; }
    int n() const { return s_.n; }
    // numerator digits and denominator exponent: f = p^{-aleph} * (c mod p^N)
    int digits() const { return N_; }
    int aleph() const { return aleph_; }
    int precision() const { return N_ - aleph_; }
    i64 modulus() const { return ppow(s_.p, N_); }
    const std::vector<i64>& numerators() const { return c_; }
    i64 numerator(const std::vector<i64>& g) const { return c_[(size_t)s_.index(g)]; }
    i64 signed_numerator(i64 idx) const { return symmetric(c_[(size_t)idx], modulus()); }

    // v_p of the coefficient at idx, or nullopt when it vanishes at precision.
    std::optional<int> coeff_valuation(i64 idx) const {
        i64 c = c_[(size_t)idx];
        if (c == 0) return std::nullopt;
        return vp(c, s_.p) - aleph_;
    }
    // Coefficient as an exact rational when the numerator is small.
    Rational coeff(const std::vector<i64>& g) const {
        return Rational(signed_numerator(s_.index(g)), ipow(s_.p, aleph_));
    }

    bool is_zero() const {
        for (i64 c : c_)
            if (c) return false;
        return true;
    }

    // Reduces the denominator exponent while every numerator is divisible by p.
    GroupRingElt& normalize() {
        while (aleph_ > 0 && N_ > 1) {
            for (i64 c : c_)
                if (c % s_.p) return *this;
            for (auto& c : c_) c /= s_.p;
            --N_;
            --aleph_;
        }
        return *this;
    }

    GroupRingElt mul_p_pow(int k) const {
        GroupRingElt r = *this;
        r.aleph_ -= k;
        if (r.aleph_ < 0) {
            i64 f = ppow(s_.p, -r.aleph_);
            r.N_ = std::min(default_digits(s_.p), r.N_ - r.aleph_);
            for (auto& c : r.c_) c = mulmod(c, f, r.modulus());
            r.aleph_ = 0;
        }
        return r;
    }

    GroupRingElt scale(i64 k) const {
        GroupRingElt r = *this;
        for (auto& c : r.c_) c = mulmod(mod(k, modulus()), c, modulus());
        return r;
    }

    friend GroupRingElt operator+(const GroupRingElt& a, const GroupRingElt& b) { return combine(a, b, false); }
    friend GroupRingElt operator-(const GroupRingElt& a, const GroupRingElt& b) { return combine(a, b, true); }
    GroupRingElt operator-() const { return scale(-1); }

    friend GroupRingElt operator*(const GroupRingElt& a, const GroupRingElt& b) {
        check(a, b);
        GroupRingElt r(a.s_, std::min(a.N_, b.N_));
        r.aleph_ = a.aleph_ + b.aleph_;
        const i64 M = r.modulus(), S = a.s_.size();
        for (i64 i = 0; i < S; ++i) {
            if (!a.c_[(size_t)i]) continue;
            auto gi = a.s_.element(i);
            for (i64 j = 0; j < S; ++j) {
                if (!b.c_[(size_t)j]) continue;
                auto gj = a.s_.element(j);
                for (int k = 0; k < a.s_.d; ++k) gj[(size_t)k] += gi[(size_t)k];
                auto& slot = r.c_[(size_t)a.s_.index(gj)];
                slot = (slot + mulmod(a.c_[(size_t)i], b.c_[(size_t)j], M)) % M;
            }
        }
        return r;
    }
    GroupRingElt& operator+=(const GroupRingElt& o) { return *this = *this + o; }
    GroupRingElt& operator*=(const GroupRingElt& o) { return *this = *this * o; }

    GroupRingElt pow(int e) const {
        GroupRingElt r = one(s_), b = *this;
        for (; e > 0; e >>= 1, b = b * b)
            if (e & 1) r = r * b;
        return r;
    }

    // Equality at the common precision.
    bool equals(const GroupRingElt& o) const { return (*this - o).is_zero(); }

    // Value of the character c: sum_g f(g) zeta_{p^m}^{p^{m-n} <c,g>}.
    CycloElt eval(const std::vector<i64>& c, int m = -1) const {
        if (m < 0) m = s_.n;
        if (m < s_.n) throw std::invalid_argument("eval: cyclotomic order below level");
        i64 P = ipow(s_.p, m), up = ipow(s_.p, m - s_.n);
        std::vector<i64> raw((size_t)P, 0);
        const i64 M = modulus();
        for (i64 i = 0; i < s_.size(); ++i) {
            if (!c_[(size_t)i]) continue;
            auto& slot = raw[(size_t)(s_.pair(c, s_.element(i)) * up)];
            slot = (slot + c_[(size_t)i]) % M;
        }
        return CycloElt::from_cyclic(s_.p, m, raw, N_).mul_p_pow(-aleph_);
    }
    PadicNum augmentation() const {
        i64 sum = 0;
        for (i64 c : c_) sum = (sum + c) % modulus();
        if (sum == 0) return CycloElt::zero_at(s_.p, 0, N_ - aleph_);
        return CycloElt::from_int(s_.p, 0, sum, N_).mul_p_pow(-aleph_);
    }

    // gamma -> gamma^{-1}
    GroupRingElt sharp() const {
        GroupRingElt r = *this;
        for (i64 i = 0; i < s_.size(); ++i) {
            auto g = s_.element(i);
            for (auto& x : g) x = -x;
            r.c_[(size_t)s_.index(g)] = c_[(size_t)i];
        }
        return r;
    }

    // Pushforward along (Z/p^n)^d -> (Z/p^n)^e, g -> A g; A must be surjective mod p.
    GroupRingElt specialize(const std::vector<std::vector<i64>>& A) const {
        int e = (int)A.size();
        for (auto& row : A)
            if ((int)row.size() != s_.d) throw std::invalid_argument("specialize: matrix shape");
        if (e > 0 && rank_mod_p(A, s_.p) < e) throw NotSurjective("specialization matrix is not surjective mod p");
        GroupShape t{s_.p, e, s_.n};
        GroupRingElt r(t, N_);
        r.aleph_ = aleph_;
        const i64 M = modulus(), P = s_.pn();
        for (i64 i = 0; i < s_.size(); ++i) {
            if (!c_[(size_t)i]) continue;
            auto g = s_.element(i);
            std::vector<i64> h((size_t)e, 0);
            for (int a = 0; a < e; ++a)
                for (int b = 0; b < s_.d; ++b) h[(size_t)a] = mod(h[(size_t)a] + mulmod(mod(A[(size_t)a][(size_t)b], P), g[(size_t)b], P), P);
            auto& slot = r.c_[(size_t)t.index(h)];
            slot = (slot + c_[(size_t)i]) % M;
        }
        return r;
    }

    // Image at a lower level n' <= n.
    GroupRingElt project(int n2) const {
        if (n2 > s_.n) throw IncompatibleLevels("project: target level above source");
        GroupShape t{s_.p, s_.d, n2};
        GroupRingElt r(t, N_);
        r.aleph_ = aleph_;
        const i64 M = modulus();
        for (i64 i = 0; i < s_.size(); ++i) {
            auto& slot = r.c_[(size_t)t.index(s_.element(i))];
            slot = (slot + c_[(size_t)i]) % M;
        }
        return r;
    }

    // mu: minimal valuation of the coefficients.
    int mu() const {
        std::optional<int> best;
        for (i64 i = 0; i < s_.size(); ++i) {
            auto v = coeff_valuation(i);
            if (v && (!best || *v < *best)) best = v;
        }
        if (!best) throw PrecisionExhausted("mu: element vanishes modulo p^" + std::to_string(precision()));
        return *best;
    }

    std::string str() const {
        std::string s = "p^-" + std::to_string(aleph_) + "*[";
        for (i64 i = 0; i < s_.size(); ++i) s += (i ? "," : "") + std::to_string(signed_numerator(i));
        return s + "]";
    }

private:
    static void check(const GroupRingElt& a, const GroupRingElt& b) {
        if (!(a.s_ == b.s_)) throw std::invalid_argument("GroupRingElt: shape mismatch");
    }
    static GroupRingElt combine(const GroupRingElt& a, const GroupRingElt& b, bool sub) {
        check(a, b);
        int al = std::max(a.aleph_, b.aleph_);
        // numerator digits after aligning both to p^{-al}
        int N = std::min({a.N_ + al - a.aleph_, b.N_ + al - b.aleph_, default_digits(a.p())});
        GroupRingElt r(a.s_, N);
        r.aleph_ = al;
        const i64 M = r.modulus();
        i64 fa = ppow(a.p(), al - a.aleph_), fb = ppow(a.p(), al - b.aleph_);
        for (size_t i = 0; i < r.c_.size(); ++i) {
            i64 x = mulmod(a.c_[i] % M, fa, M), y = mulmod(b.c_[i] % M, fb, M);
            r.c_[i] = sub ? mod(x - y, M) : (x + y) % M;
        }
        return r;
    }

    GroupShape s_;
    int N_ = 0;
    int aleph_ = 0;
    std::vector<i64> c_;

    friend GroupRingElt fourier_invert(GroupShape, const std::vector<CycloElt>&);
    friend GroupRingElt fourier_invert_exact(GroupShape, const std::vector<CycloInt>&, int);
};

// All characters of the shape, in index order.
inline std::vector<std::vector<i64>> characters_of(const GroupShape& s) {
    std::vector<std::vector<i64>> out;
    out.reserve((size_t)s.size());
    for (i64 i = 0; i < s.size(); ++i) out.push_back(s.element(i));
    return out;
}

// All character values of f at once.
inline std::vector<CycloElt> eval_all(const GroupRingElt& f, int m = -1) {
    std::vector<CycloElt> out;
    out.reserve((size_t)f.shape().size());
    for (i64 i = 0; i < f.shape().size(); ++i) out.push_back(f.eval(f.shape().element(i), m));
    return out;
}

inline Valuation valuation_at_character(const GroupRingElt& f, const std::vector<i64>& c) { return f.eval(c).valuation(); }

// c_g = p^{-nd} sum_omega value(omega) omega(g)^{-1}; values indexed like the group.
inline GroupRingElt fourier_invert(GroupShape s, const std::vector<CycloElt>& values) {
    if ((i64)values.size() != s.size()) throw std::invalid_argument("fourier_invert: need one value per character");
    const int p = s.p, m = values[0].m();
    if (m < s.n) throw std::invalid_argument("fourier_invert: cyclotomic order below level");
    const i64 P = ipow(p, m), up = ipow(p, m - s.n);
    int shift = 1 << 28, A = 1 << 28;
    for (auto& v : values) {
        if (v.m() != m) throw std::invalid_argument("fourier_invert: mixed rings");
        A = std::min(A, v.prec());
        if (!v.is_zero()) shift = std::min(shift, v.shift());
    }
    const int nd = s.n * s.d;
    if (shift == (1 << 28)) {
        // every value vanishes at precision A
        GroupRingElt z(s, std::max(1, std::min(A, default_digits(p))));
        return z;
    }
    A = std::min(A, shift + default_digits(p));
    if (A - nd <= 0) throw PrecisionExhausted("fourier_invert: values known only modulo p^" + std::to_string(A));
    const int rel = A - shift;
    const i64 M = ppow(p, rel);
    std::vector<std::vector<i64>> u;
    u.reserve(values.size());
    for (auto& v : values) u.push_back(v.with_prec(A).coords_scaled(shift));
    const int f = phi_pm(p, m);
    GroupRingElt r(s, rel);
    for (i64 gi = 0; gi < s.size(); ++gi) {
        auto g = s.element(gi);
        std::vector<i128> raw((size_t)P, 0);
        for (i64 ci = 0; ci < s.size(); ++ci) {
            i64 e = mod(-s.pair(s.element(ci), g) * up, P);
            const auto& x = u[(size_t)ci];
            for (int k = 0; k < f; ++k)
                if (x[(size_t)k]) raw[(size_t)((k + e) % P)] += x[(size_t)k];
        }
        reduce_cyclic(raw, p, m);
        for (int k = 1; k < f; ++k)
            if (mod128(raw[(size_t)k], M) != 0)
                throw NotGaloisStable("fourier_invert: coefficient at " + std::to_string(gi) + " is not in Q_p");
        r.c_[(size_t)gi] = mod128(raw[0], M);
    }
    // r currently represents p^{shift - nd} * c
    r.aleph_ = nd - shift;
    if (r.aleph_ < 0) r = r.mul_p_pow(0);
    return r.normalize();
}

// Exact variant: value(omega) = nums[omega] / p^den_exp with nums in Z[zeta_{p^m}].
inline GroupRingElt fourier_invert_exact(GroupShape s, const std::vector<CycloInt>& nums, int den_exp) {
    if ((i64)nums.size() != s.size()) throw std::invalid_argument("fourier_invert_exact: need one value per character");
    const int p = s.p, m = nums[0].m();
    if (m < s.n) throw std::invalid_argument("fourier_invert_exact: cyclotomic order below level");
    const i64 P = ipow(p, m), up = ipow(p, m - s.n);
    const int f = phi_pm(p, m);
    std::vector<i128> exact((size_t)s.size());
    for (i64 gi = 0; gi < s.size(); ++gi) {
        auto g = s.element(gi);
        std::vector<i128> raw((size_t)P, 0);
        for (i64 ci = 0; ci < s.size(); ++ci) {
            i64 e = mod(-s.pair(s.element(ci), g) * up, P);
            const auto& x = nums[(size_t)ci].coords();
            for (int k = 0; k < f; ++k)
                if (x[(size_t)k]) raw[(size_t)((k + e) % P)] += x[(size_t)k];
        }
        reduce_cyclic(raw, p, m);
        for (int k = 1; k < f; ++k)
            if (raw[(size_t)k] != 0) throw NotGaloisStable("fourier_invert_exact: coefficient at " + std::to_string(gi) + " is not rational");
        exact[(size_t)gi] = raw[0];
    }
    // c_g = exact_g / p^{nd + den_exp}; divide out the common p-power first
    int aleph = s.n * s.d + den_exp;
    for (;;) {
        bool all = aleph > 0;
        for (auto x : exact)
            if (x % p) { all = false; break; }
        if (!all) break;
        for (auto& x : exact) x /= p;
        --aleph;
    }
    GroupRingElt r(s);
    const i64 M = r.modulus();
    for (size_t i = 0; i < exact.size(); ++i) r.c_[i] = mod128(exact[i], M);
    if (aleph < 0) {
        r = r.mul_p_pow(-aleph);
        aleph = 0;
    }
    r.aleph_ = aleph;
    return r.normalize();
}

// Characters of (Z/p^n)^d vanishing on the subgroup generated by gens.
inline std::vector<std::vector<i64>> annihilator(const GroupShape& s, const std::vector<std::vector<i64>>& gens) {
    std::vector<std::vector<i64>> out;
    for (i64 i = 0; i < s.size(); ++i) {
        auto c = s.element(i);
        bool ok = true;
        for (auto& g : gens)
            if (s.pair(c, g) != 0) { ok = false; break; }
        if (ok) out.push_back(c);
    }
    return out;
}

// f^H_Phi = prod over characters chi of H/Phi of f_chi, f_chi = sum f_sigma chi(sigma) sigma.
// f must be supported on H (the whole group when H is empty); Phi is given by
// generators and must contain p^n H so that H/Phi is visible at level n.
inline GroupRingElt restrict_to_subgroup(const GroupRingElt& f, const std::vector<std::vector<i64>>& Phi,
                                         const std::vector<std::vector<i64>>& H = {}) {
    const GroupShape& s = f.shape();
    std::vector<std::vector<i64>> Hg = H;
    if (Hg.empty())
        for (int i = 0; i < s.d; ++i) {
            std::vector<i64> e((size_t)s.d, 0);
            e[(size_t)i] = 1;
            Hg.push_back(e);
        }
    // H/Phi is visible at level n when Phi contains p^n H: then Phi has full rank
    // with no invariant above n + 1 - 1 at level n + 1
    auto XH = annihilator(s, Hg), XPhi = annihilator(s, Phi);
    auto inv_phi = subgroup_invariants(Phi, s.p, s.n + 1), inv_h = subgroup_invariants(Hg, s.p, s.n + 1);
    if (inv_phi.size() != inv_h.size()) throw IncompatibleLevels("restrict: subgroup not visible at this level");
    // supp f inside H
    for (i64 i = 0; i < s.size(); ++i) {
        if (!f.numerators()[(size_t)i]) continue;
        auto g = s.element(i);
        for (auto& c : XH)
            if (s.pair(c, g) != 0) throw std::invalid_argument("restrict: f not supported on H");
    }
    // representatives of X_Phi / X_H
    std::vector<std::vector<i64>> reps;
    std::vector<char> covered((size_t)s.size(), 0);
    for (auto& c : XPhi) {
        if (covered[(size_t)s.index(c)]) continue;
        reps.push_back(c);
        for (auto& h : XH) {
            std::vector<i64> x = c;
            for (int i = 0; i < s.d; ++i) x[(size_t)i] += h[(size_t)i];
            covered[(size_t)s.index(x)] = 1;
        }
    }
    auto vals = eval_all(f);
    std::vector<CycloElt> prod;
    prod.reserve(vals.size());
    for (i64 i = 0; i < s.size(); ++i) {
        auto eta = s.element(i);
        CycloElt acc = CycloElt::from_int(s.p, s.n, 1, f.digits() + 8);
        for (auto& chi : reps) {
            std::vector<i64> x = eta;
            for (int k = 0; k < s.d; ++k) x[(size_t)k] += chi[(size_t)k];
            acc = acc * vals[(size_t)s.index(x)];
        }
        prod.push_back(acc);
    }
    GroupRingElt r = fourier_invert(s, prod);
    for (i64 i = 0; i < s.size(); ++i) {
        if (!r.numerators()[(size_t)i]) continue;
        auto g = s.element(i);
        for (auto& c : XPhi)
            if (s.pair(c, g) != 0) throw NotGaloisStable("restrict: result not supported on Phi");
    }
    return r;
}

// ---- truncated power series --------------------------------------------------

class PowerSeries {
public:
    PowerSeries() = default;
    PowerSeries(int p, int d, int M, int N = 0) : p_(p), d_(d), M_(M), N_(N ? N : default_digits(p)) {
        a_.assign((size_t)ipow(M + 1, d), 0);
    }

    int p() const { return p_; }
    int d() const { return d_; }
    int max_degree() const { return M_; }
    int digits() const { return N_; }
    int aleph() const { return aleph_; }
    i64 modulus() const { return ppow(p_, N_); }
    i64 size() const { return (i64)a_.size(); }

    std::vector<int> exps(i64 idx) const {
        std::vector<int> e((size_t)d_);
        for (int i = 0; i < d_; ++i) { e[(size_t)i] = (int)(idx % (M_ + 1)); idx /= (M_ + 1); }
        return e;
    }
    i64 index(const std::vector<int>& e) const {
        i64 idx = 0;
        for (int i = d_ - 1; i >= 0; --i) idx = idx * (M_ + 1) + e[(size_t)i];
        return idx;
    }
    static int total(const std::vector<int>& e) {
        int s = 0;
        for (int x : e) s += x;
        return s;
    }

    i64 get(const std::vector<int>& e) const {
        if (total(e) > M_) return 0;
        for (int x : e)
            if (x < 0) return 0;
        return a_[(size_t)index(e)];
    }
    i64 get_signed(const std::vector<int>& e) const { return symmetric(get(e), modulus()); }
    void set(const std::vector<int>& e, i64 v) {
        if (total(e) > M_) return;
        a_[(size_t)index(e)] = mod(v, modulus());
    }
    const std::vector<i64>& raw() const { return a_; }

    static PowerSeries constant(int p, int d, int M, i64 c, int N = 0) {
        PowerSeries s(p, d, M, N);
        s.set(std::vector<int>((size_t)d, 0), c);
        return s;
    }
    static PowerSeries var(int p, int d, int M, int i, int N = 0) {
        PowerSeries s(p, d, M, N);
        std::vector<int> e((size_t)d, 0);
        e[(size_t)i] = 1;
        s.set(e, 1);
        return s;
    }
    // From coefficients given as (exponents, value).
    static PowerSeries from_terms(int p, int d, int M, const std::vector<std::pair<std::vector<int>, i64>>& terms, int N = 0) {
        PowerSeries s(p, d, M, N);
        for (auto& [e, v] : terms) s.set(e, mod(s.get(e) + v, s.modulus()));
        return s;
    }

    bool is_zero() const {
        for (i64 x : a_)
            if (x) return false;
        return true;
    }

    friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) { return combine(a, b, false); }
    friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) { return combine(a, b, true); }
    friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
        check(a, b);
        PowerSeries r(a.p_, a.d_, std::min(a.M_, b.M_), std::min(a.N_, b.N_));
        r.aleph_ = a.aleph_ + b.aleph_;
        const i64 Mod = r.modulus();
        for (i64 i = 0; i < a.size(); ++i) {
            if (!a.a_[(size_t)i]) continue;
            auto ei = a.exps(i);
            int ti = total(ei);
            if (ti > r.M_) continue;
            for (i64 j = 0; j < b.size(); ++j) {
                if (!b.a_[(size_t)j]) continue;
                auto ej = b.exps(j);
                if (ti + total(ej) > r.M_) continue;
                for (int k = 0; k < a.d_; ++k) ej[(size_t)k] += ei[(size_t)k];
                auto& slot = r.a_[(size_t)r.index(ej)];
                slot = (slot + mulmod(a.a_[(size_t)i], b.a_[(size_t)j], Mod)) % Mod;
            }
        }
        return r;
    }
    PowerSeries scale(i64 k) const {
        PowerSeries r = *this;
        for (auto& x : r.a_) x = mulmod(mod(k, modulus()), x, modulus());
        return r;
    }
    PowerSeries truncate(int M) const {
        PowerSeries r(p_, d_, std::min(M, M_), N_);
        r.aleph_ = aleph_;
        for (i64 i = 0; i < size(); ++i)
            if (a_[(size_t)i]) r.set(exps(i), a_[(size_t)i]);
        return r;
    }
    PowerSeries with_digits(int N) const {
        PowerSeries r = *this;
        r.N_ = std::min(N, N_);
        for (auto& x : r.a_) x %= r.modulus();
        return r;
    }
    bool equals(const PowerSeries& o) const {
        int M = std::min(M_, o.M_);
        PowerSeries a = truncate(M), b = o.truncate(M);
        return (a - b).is_zero();
    }

    // Inverse of a series with unit constant term.
    PowerSeries inverse() const {
        const std::vector<int> z((size_t)d_, 0);
        i64 c0 = get(z);
        if (aleph_ != 0 || c0 % p_ == 0) throw std::domain_error("PowerSeries::inverse: not a unit");
        i64 inv = invmod(c0, modulus());
        // x = inv * sum_k (1 - inv f)^k
        PowerSeries e = constant(p_, d_, M_, 1, N_) - scale(inv);
        PowerSeries r = constant(p_, d_, M_, 1, N_), term = r;
        for (int k = 1; k <= M_ + N_ + 1; ++k) {
            term = term * e;
            if (term.is_zero()) break;
            r = r + term;
        }
        return r.scale(inv);
    }

    // Substitute t_i = 0.
    PowerSeries set_zero(int i) const {
        PowerSeries r = *this;
        for (i64 k = 0; k < size(); ++k)
            if (exps(k)[(size_t)i] > 0) r.a_[(size_t)k] = 0;
        return r;
    }

    // Least total degree with a nonzero homogeneous part.
    int vanishing_order() const {
        int best = -1;
        for (i64 i = 0; i < size(); ++i) {
            if (!a_[(size_t)i]) continue;
            int t = total(exps(i));
            if (best < 0 || t < best) best = t;
        }
        if (best < 0) throw PrecisionExhausted("vanishing_order: zero up to degree " + std::to_string(M_) + " modulo p^" + std::to_string(N_));
        return best;
    }
    int mu() const {
        std::optional<int> best;
        for (i64 x : a_)
            if (x) {
                int v = vp(x, p_);
                if (!best || v < *best) best = v;
            }
        if (!best) throw PrecisionExhausted("mu: zero at precision");
        return *best - aleph_;
    }
    // Divide by p^k (k <= min valuation).
    PowerSeries div_p_pow(int k) const {
        PowerSeries r = *this;
        i64 f = ppow(p_, k);
        for (auto& x : r.a_) {
            if (x % f) throw NotDivisible("div_p_pow: coefficient not divisible");
            x /= f;
        }
        r.N_ -= k;
        for (auto& x : r.a_) x %= r.modulus();
        return r;
    }
    // Divide by t^r in one variable (d = 1).
    PowerSeries div_t_pow(int r) const {
        if (d_ != 1) throw std::invalid_argument("div_t_pow: one variable only");
        PowerSeries out(p_, 1, M_ - r, N_);
        out.aleph_ = aleph_;
        for (int k = 0; k < r; ++k)
            if (a_[(size_t)k]) throw NotDivisible("div_t_pow: low coefficient nonzero");
        for (int k = r; k <= M_; ++k) out.a_[(size_t)(k - r)] = a_[(size_t)k];
        return out;
    }

    // (1 + t_i) -> (1 + t_i)^{-1} in every variable.
    PowerSeries sharp() const {
        // s = (1+t)^{-1} - 1 = sum_{k>=1} (-t)^k in each variable
        std::vector<std::vector<PowerSeries>> powers((size_t)d_);
        for (int i = 0; i < d_; ++i) {
            PowerSeries s(p_, d_, M_, N_);
            std::vector<int> e((size_t)d_, 0);
            for (int k = 1; k <= M_; ++k) {
                e[(size_t)i] = k;
                s.set(e, (k % 2) ? -1 : 1);
            }
            powers[(size_t)i].push_back(constant(p_, d_, M_, 1, N_));
            for (int k = 1; k <= M_; ++k) powers[(size_t)i].push_back(powers[(size_t)i].back() * s);
        }
        PowerSeries r(p_, d_, M_, N_);
        r.aleph_ = aleph_;
        for (i64 k = 0; k < size(); ++k) {
            if (!a_[(size_t)k]) continue;
            auto e = exps(k);
            PowerSeries term = constant(p_, d_, M_, a_[(size_t)k], N_);
            for (int i = 0; i < d_; ++i) term = term * powers[(size_t)i][(size_t)e[(size_t)i]];
            r = r + term;
        }
        r.aleph_ = aleph_;
        return r;
    }

    // Series of a group ring element under sigma_i = 1 + t_i. Coefficients are
    // well defined modulo p^{n - floor(log_p M)} (and the element's own precision).
    static PowerSeries from_group_ring(const GroupRingElt& f, int M) {
        const GroupShape& s = f.shape();
        int floor_log = 0;
        for (i64 x = s.p; x <= M; x *= s.p) ++floor_log;
        int N = std::min(f.digits(), s.n - floor_log);
        if (N <= 0) throw PrecisionExhausted("from_group_ring: level too low for degree " + std::to_string(M));
        PowerSeries r(s.p, s.d, M, N);
        r.aleph_ = f.aleph();
        const i64 Mod = r.modulus(), P = s.pn();
        // binomial(g, k) mod p^N for g < p^n
        std::vector<std::vector<i64>> C((size_t)P, std::vector<i64>((size_t)M + 1, 0));
        for (i64 g = 0; g < P; ++g) {
            C[(size_t)g][0] = 1;
            for (int k = 1; k <= M; ++k) C[(size_t)g][(size_t)k] = g == 0 ? 0 : (C[(size_t)(g - 1)][(size_t)k] + C[(size_t)(g - 1)][(size_t)(k - 1)]) % Mod;
        }
        for (i64 gi = 0; gi < s.size(); ++gi) {
            i64 c = f.numerators()[(size_t)gi] % Mod;
            if (!c) continue;
            auto g = s.element(gi);
            for (i64 k = 0; k < r.size(); ++k) {
                auto e = r.exps(k);
                if (total(e) > M) continue;
                i64 v = c;
                for (int i = 0; i < s.d && v; ++i) v = mulmod(v, C[(size_t)g[(size_t)i]][(size_t)e[(size_t)i]], Mod);
                r.a_[(size_t)k] = (r.a_[(size_t)k] + v) % Mod;
            }
        }
        return r;
    }

    // Group ring element at level n: sum a_e prod (sigma_i - 1)^{e_i}.
    GroupRingElt to_group_ring(int n) const {
        GroupShape s{p_, d_, n};
        GroupRingElt r(s, N_);
        std::vector<GroupRingElt> tv;
        for (int i = 0; i < d_; ++i) tv.push_back(GroupRingElt::t(s, i));
        for (i64 k = 0; k < size(); ++k) {
            if (!a_[(size_t)k]) continue;
            auto e = exps(k);
            GroupRingElt term = GroupRingElt::one(s).scale(a_[(size_t)k]);
            for (int i = 0; i < d_; ++i) term = term * tv[(size_t)i].pow(e[(size_t)i]);
            r = r + term;
        }
        return r.mul_p_pow(-aleph_);
    }

    std::string str() const {
        std::string out;
        for (i64 k = 0; k < size(); ++k) {
            if (!a_[(size_t)k]) continue;
            auto e = exps(k);
            out += (out.empty() ? "" : " + ") + std::to_string(symmetric(a_[(size_t)k], modulus()));
            for (int i = 0; i < d_; ++i)
                if (e[(size_t)i]) out += "*t" + std::to_string(i + 1) + "^" + std::to_string(e[(size_t)i]);
        }
        return out.empty() ? "0" : out;
    }

private:
    static void check(const PowerSeries& a, const PowerSeries& b) {
        if (a.p_ != b.p_ || a.d_ != b.d_) throw std::invalid_argument("PowerSeries: shape mismatch");
    }
    static PowerSeries combine(const PowerSeries& a, const PowerSeries& b, bool sub) {
        check(a, b);
        if (a.aleph_ != b.aleph_) throw std::invalid_argument("PowerSeries: denominator mismatch");
        int M = std::min(a.M_, b.M_);
        PowerSeries r(a.p_, a.d_, M, std::min(a.N_, b.N_));
        r.aleph_ = a.aleph_;
        const i64 Mod = r.modulus();
        for (i64 k = 0; k < r.size(); ++k) {
            auto e = r.exps(k);
            if (total(e) > M) continue;
            i64 x = a.get(e) % Mod, y = b.get(e) % Mod;
            r.a_[(size_t)k] = sub ? mod(x - y, Mod) : (x + y) % Mod;
        }
        return r;
    }

    int p_ = 2, d_ = 0, M_ = 0, N_ = 0, aleph_ = 0;
    std::vector<i64> a_;
};

// ---- Weierstrass preparation --------------------------------------------------

struct WeierstrassResult {
    PowerSeries unit;
    PowerSeries poly;  // monic in t_var of degree `degree`
    int degree = 0;
    int var = 0;
};

// f = unit * poly modulo (p^N, total degree M - degree).
inline WeierstrassResult weierstrass_prepare(const PowerSeries& f, int var = 0) {
    if (f.aleph() != 0) throw std::invalid_argument("weierstrass_prepare: integral series only");
    const int p = f.p(), d = f.d(), M = f.max_degree();
    std::vector<int> e((size_t)d, 0);
    int r = -1;
    for (int k = 0; k <= M; ++k) {
        e[(size_t)var] = k;
        if (f.get(e) % p) { r = k; break; }
    }
    if (r < 0) throw NotPlain("weierstrass_prepare: f(t, 0, ..., 0) vanishes modulo p");
    // split f = B + t^r C
    auto upper = [&](const PowerSeries& h) {
        PowerSeries out(p, d, h.max_degree(), h.digits());
        for (i64 k = 0; k < h.size(); ++k) {
            auto x = h.exps(k);
            if (!h.raw()[(size_t)k] || x[(size_t)var] < r) continue;
            x[(size_t)var] -= r;
            out.set(x, h.raw()[(size_t)k]);
        }
        return out;
    };
    PowerSeries Cinv = upper(f).inverse();
    std::vector<int> er((size_t)d, 0);
    er[(size_t)var] = r;
    PowerSeries g(p, d, M, f.digits());
    g.set(er, 1);
    PowerSeries q(p, d, M, f.digits());
    bool done = false;
    for (int it = 0; it <= (f.digits() + 1) * (M + 2); ++it) {
        PowerSeries h = g - q * f;
        PowerSeries up = upper(h);
        if (up.is_zero()) {
            done = true;
            break;
        }
        q = q + Cinv * up;
    }
    if (!done) throw PrecisionExhausted("weierstrass_prepare: division did not converge");
    int Mo = M - r;
    WeierstrassResult W;
    W.degree = r;
    W.var = var;
    W.poly = (q * f).truncate(Mo);
    W.unit = q.truncate(Mo).inverse();
    return W;
}

// ---- d = 1 and d = 2 helpers ---------------------------------------------------

// True when the specialization along A is not divisible by p.
inline bool plainness_test(const GroupRingElt& f, const std::vector<std::vector<i64>>& A) {
    GroupRingElt g = f.specialize(A);
    if (g.is_zero()) return false;
    return g.mu() <= 0;
}

// Factor of f prime to the augmentation ideal, for d = 1: strip p^mu and t^r.
inline PowerSeries mathring_d1(const PowerSeries& f) {
    if (f.d() != 1) throw std::invalid_argument("mathring_d1: one variable only");
    if (f.is_zero()) throw ZeroInput("mathring_d1: zero input");
    int mu = f.mu() + f.aleph();
    PowerSeries g = f.div_p_pow(mu);
    return g.div_t_pow(g.vanishing_order());
}

namespace detail {

using Series1 = std::vector<i64>;  // one variable, truncated

inline Series1 s1_mul(const Series1& a, const Series1& b, i64 Mod) {
    Series1 r(a.size(), 0);
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i])
            for (size_t j = 0; i + j < r.size(); ++j) r[i + j] = (r[i + j] + mulmod(a[i], b[j], Mod)) % Mod;
    return r;
}

// Division-free determinant by expansion over column subsets.
inline Series1 det_series(const std::vector<std::vector<Series1>>& A, size_t K, i64 Mod) {
    const size_t n = A.size();
    std::map<unsigned, Series1> memo;
    std::function<Series1(size_t, unsigned)> rec = [&](size_t row, unsigned used) -> Series1 {
        if (row == n) {
            Series1 one(K, 0);
            one[0] = 1;
            return one;
        }
        auto it = memo.find(used);
        if (it != memo.end()) return it->second;
        Series1 acc(K, 0);
        int sign = 1;
        for (size_t c = 0; c < n; ++c) {
            if (used & (1u << c)) continue;
            const auto& a = A[row][c];
            bool nz = false;
            for (i64 x : a)
                if (x) { nz = true; break; }
            if (nz) {
                auto sub = s1_mul(a, rec(row + 1, used | (1u << c)), Mod);
                for (size_t k = 0; k < K; ++k) acc[k] = mod(acc[k] + sign * sub[k], Mod);
            }
            sign = -sign;
        }
        memo[used] = acc;
        return acc;
    };
    return rec(0, 0);
}

} // namespace detail

// For d = 2: Weierstrass-prepare both in t_1 and test whether the resultant in t_1
// (a series in t_2) is nonzero, i.e. f and g have no common non-unit factor.
inline bool resultant_coprime(const PowerSeries& f, const PowerSeries& g) {
    if (f.d() != 2 || g.d() != 2) throw std::invalid_argument("resultant_coprime: two variables only");
    if (f.is_zero() || g.is_zero()) throw ZeroInput("resultant_coprime: zero input");
    auto Wf = weierstrass_prepare(f, 0), Wg = weierstrass_prepare(g, 0);
    const int rf = Wf.degree, rg = Wg.degree;
    const int M = std::min(Wf.poly.max_degree(), Wg.poly.max_degree());
    const size_t K = (size_t)std::max(1, M - std::max(rf, rg) + 1);
    const i64 Mod = std::min(Wf.poly.modulus(), Wg.poly.modulus());
    auto coeffs = [&](const PowerSeries& P, int r) {
        std::vector<detail::Series1> c((size_t)r + 1, detail::Series1(K, 0));
        for (int k = 0; k <= r; ++k)
            for (size_t j = 0; j < K; ++j) c[(size_t)k][j] = P.get({k, (int)j}) % Mod;
        c[(size_t)r] = detail::Series1(K, 0);
        c[(size_t)r][0] = 1;
        return c;
    };
    auto cf = coeffs(Wf.poly, rf), cg = coeffs(Wg.poly, rg);
    const size_t n = (size_t)(rf + rg);
    if (n == 0) return true;
    std::vector<std::vector<detail::Series1>> S(n, std::vector<detail::Series1>(n, detail::Series1(K, 0)));
    for (int i = 0; i < rg; ++i)
        for (int k = 0; k <= rf; ++k) S[(size_t)i][(size_t)(i + rf - k)] = cf[(size_t)k];
    for (int i = 0; i < rf; ++i)
        for (int k = 0; k <= rg; ++k) S[(size_t)(rg + i)][(size_t)(i + rg - k)] = cg[(size_t)k];
    auto R = detail::det_series(S, K, Mod);
    for (i64 x : R)
        if (x) return true;
    return false;
}

} // namespace padicl
