#pragma once

// Places of F_q(t), elliptic curves over F_q(t) and their local data.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "padic.hpp"

namespace padicl {

struct Place {
    bool infinite = false;
    Poly poly;  // monic irreducible over F_q; empty for infinity
    int degree = 1;

    static Place inf() { return Place{true, {}, 1}; }
    static Place finite(Poly f) {
        int d = poly::deg(f);
        return Place{false, std::move(f), d};
    }
    i64 qv(i64 q) const { return ipow(q, degree); }

    friend bool operator==(const Place& a, const Place& b) {
        return a.infinite == b.infinite && a.poly == b.poly;
    }
    friend bool operator!=(const Place& a, const Place& b) { return !(a == b); }
    // degree first, then finite before infinity, then coefficients from the top
    friend bool operator<(const Place& a, const Place& b) {
        if (a.degree != b.degree) return a.degree < b.degree;
        if (a.infinite != b.infinite) return b.infinite;
        for (int i = (int)a.poly.size() - 1; i >= 0; --i)
            if (a.poly[i] != b.poly[i]) return a.poly[i] < b.poly[i];
        return false;
    }
    std::string str() const { return infinite ? "inf" : "(" + poly::str(poly) + ")"; }
};

inline int mobius(int n) {
    int mu = 1;
    for (int f = 2; f * f <= n; ++f) {
        if (n % f) continue;
        n /= f;
        if (n % f == 0) return 0;
        mu = -mu;
    }
    return n > 1 ? -mu : mu;
}

// Number of monic irreducible polynomials of degree d over F_q.
inline i64 necklace_count(i64 q, int d) {
    i64 total = 0;
    for (int e = 1; e <= d; ++e)
        if (d % e == 0) total += mobius(d / e) * ipow(q, e);
    return total / d;
}

// Minimal polynomial over F_q = F_{p^r} of x in F_{p^{rd}}, returned over F_q.
inline Poly minimal_polynomial(int p, int r, int d, int x) {
    const GF& S = field(p, r);
    const GF& B = field(p, r * d);
    const auto& emb = embedding(p, r, d);
    std::vector<int> conj{x};
    int y = B.pow(x, S.size());
    while (y != x) {
        conj.push_back(y);
        y = B.pow(y, S.size());
    }
    Poly m{1};
    for (int c : conj) m = poly::mul(B, m, poly::x_minus(B, c));
    // pull coefficients back to the small field
    std::vector<int> back((size_t)B.size(), -1);
    for (i64 a = 0; a < S.size(); ++a) back[(size_t)emb[(size_t)a]] = (int)a;
    Poly out;
    for (int c : m) {
        if (back[(size_t)c] < 0) throw std::logic_error("minimal_polynomial: coefficient outside base field");
        out.push_back(back[(size_t)c]);
    }
    return out;
}

inline std::vector<Place> enumerate_places(i64 q, int max_degree, bool empty_ok = false) {
    auto [p, r] = prime_power(q);
    if (max_degree < 1) {
        if (empty_ok) return {};
        throw std::invalid_argument("enumerate_places: max_degree must be >= 1");
    }
    std::vector<Place> out;
    for (int d = 1; d <= max_degree; ++d) {
        const GF& B = field(p, r * d);
        std::vector<char> seen((size_t)B.size(), 0);
        std::vector<Place> layer;
        for (i64 x = 0; x < B.size(); ++x) {
            if (seen[(size_t)x]) continue;
            std::vector<int> orbit{(int)x};
            int y = B.pow((int)x, q);
            while (y != (int)x) {
                orbit.push_back(y);
                y = B.pow(y, q);
            }
            for (int c : orbit) seen[(size_t)c] = 1;
            if ((int)orbit.size() == d) layer.push_back(Place::finite(minimal_polynomial(p, r, d, (int)x)));
        }
        if ((i64)layer.size() != necklace_count(q, d))
            throw std::logic_error("enumerate_places: necklace count mismatch");
        if (d == 1) layer.push_back(Place::inf());
        std::sort(layer.begin(), layer.end());
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

// Factorization of a nonzero polynomial into places with multiplicities.
inline std::vector<std::pair<Place, int>> factor_into_places(int p, int r, const Poly& f) {
    const GF& F = field(p, r);
    i64 q = F.size();
    Poly rest = poly::monic(F, f);
    std::vector<std::pair<Place, int>> out;
    auto take = [&](const Poly& g) {
        int e = 0;
        for (;;) {
            auto [qq, rr] = poly::divmod(F, rest, g);
            if (!rr.empty()) break;
            rest = qq;
            ++e;
        }
        out.push_back({Place::finite(g), e});
    };
    for (int d = 1; poly::deg(rest) >= 1; ++d) {
        if (poly::deg(rest) < 2 * d) {
            take(Poly(rest));
            break;
        }
        Poly x{0, 1}, xq = x;
        for (int i = 0; i < d; ++i) xq = poly::powmod(F, xq, q, rest);
        Poly g = poly::gcd(F, rest, poly::sub(F, xq, x));
        if (poly::deg(g) < 1) continue;
        const GF& B = field(p, r * d);
        const auto& emb = embedding(p, r, d);
        Poly gb;
        for (int c : g) gb.push_back(emb[(size_t)c]);
        std::set<Poly> found;
        for (i64 y = 0; y < B.size() && (int)found.size() * d < poly::deg(g); ++y)
            if (poly::eval(B, gb, (int)y) == 0) found.insert(minimal_polynomial(p, r, d, (int)y));
        for (const Poly& m : found) take(m);
    }
    std::sort(out.begin(), out.end());
    return out;
}

enum class Reduction { GoodOrdinary, GoodSupersingular, SplitMult, NonsplitMult, Additive };

inline std::string reduction_name(Reduction r) {
    switch (r) {
        case Reduction::GoodOrdinary: return "good-ordinary";
        case Reduction::GoodSupersingular: return "good-supersingular";
        case Reduction::SplitMult: return "split-mult";
        case Reduction::NonsplitMult: return "nonsplit-mult";
        case Reduction::Additive: return "additive";
    }
    return "?";
}
inline Reduction reduction_from_name(const std::string& s) {
    for (auto r : {Reduction::GoodOrdinary, Reduction::GoodSupersingular, Reduction::SplitMult,
                   Reduction::NonsplitMult, Reduction::Additive})
        if (reduction_name(r) == s) return r;
    throw std::invalid_argument("unknown reduction type " + s);
}
inline bool is_good(Reduction r) { return r == Reduction::GoodOrdinary || r == Reduction::GoodSupersingular; }
inline bool is_multiplicative(Reduction r) { return r == Reduction::SplitMult || r == Reduction::NonsplitMult; }

// Truncated Laurent series sum_{i} coeffs[i] * pi^(val + i) over F_q.
struct LaurentSeries {
    int val = 0;
    std::vector<int> coeffs;
};

struct PlaceOverride {
    std::optional<Reduction> type;
    std::optional<int> m_v;
    std::optional<i64> lambda;
    std::optional<LaurentSeries> Q;
};

struct PlaceData {
    Place place;
    Reduction type = Reduction::GoodOrdinary;
    i64 lambda = 0;
    std::optional<PadicNum> alpha;
    int m_v = 1;  // 0 when unknown (additive, no override)
    std::optional<LaurentSeries> Q;
    int ord_delta = 0;
    int ord_c4 = 0;

    bool ordinary() const { return type == Reduction::GoodOrdinary || is_multiplicative(type); }
};

// Weierstrass curve y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over F_q(t).
struct Curve {
    int p = 0;
    i64 q = 0;
    std::array<Poly, 5> a;  // a1, a2, a3, a4, a6
    std::map<Place, PlaceOverride> overrides;

    int r() const { return prime_power(q).second; }
    const GF& F() const { return field(p, r()); }
    bool constant() const {
        for (const auto& c : a)
            if (poly::deg(c) > 0) return false;
        return true;
    }

    static Curve make(i64 q, std::array<Poly, 5> coeffs) {
        Curve c;
        auto [p, r] = prime_power(q);
        (void)r;
        if (p == 2) throw std::invalid_argument("Curve: p must be odd");
        c.p = p;
        c.q = q;
        for (auto& x : coeffs) poly::trim(x);
        c.a = std::move(coeffs);
        return c;
    }
};

// b- and c-invariants of a Weierstrass model over F_q[t].
struct Invariants {
    Poly b2, b4, b6, b8, c4, c6, delta;
};

inline Invariants invariants(const GF& F, const std::array<Poly, 5>& a) {
    using namespace poly;
    auto k = [&](i64 v) { return constant(F.from_int(v)); };
    const Poly &a1 = a[0], &a2 = a[1], &a3 = a[2], &a4 = a[3], &a6 = a[4];
    Invariants I;
    I.b2 = add(F, mul(F, a1, a1), mul(F, k(4), a2));
    I.b4 = add(F, mul(F, k(2), a4), mul(F, a1, a3));
    I.b6 = add(F, mul(F, a3, a3), mul(F, k(4), a6));
    I.b8 = sub(F, add(F, add(F, mul(F, mul(F, a1, a1), a6), mul(F, k(4), mul(F, a2, a6))),
                      mul(F, mul(F, a2, a3), a3)),
               add(F, mul(F, mul(F, a1, a3), a4), mul(F, a4, a4)));
    I.c4 = sub(F, mul(F, I.b2, I.b2), mul(F, k(24), I.b4));
    I.c6 = add(F, neg(F, pow(F, I.b2, 3)), add(F, mul(F, k(36), mul(F, I.b2, I.b4)), mul(F, k(-216), I.b6)));
    Poly d = neg(F, mul(F, mul(F, I.b2, I.b2), I.b8));
    d = sub(F, d, mul(F, k(8), pow(F, I.b4, 3)));
    d = sub(F, d, mul(F, k(27), mul(F, I.b6, I.b6)));
    d = add(F, d, mul(F, k(9), mul(F, I.b2, mul(F, I.b4, I.b6))));
    I.delta = d;
    return I;
}

// Model at infinity: a_i(t) -> s^{i k} a_i(1/s), k minimal making it integral.
inline std::array<Poly, 5> model_at_infinity(const std::array<Poly, 5>& a, int* k_out = nullptr) {
    static const int w[5] = {1, 2, 3, 4, 6};
    int k = 0;
    for (int i = 0; i < 5; ++i) {
        int d = poly::deg(a[i]);
        if (d > 0) k = std::max(k, (d + w[i] - 1) / w[i]);
    }
    std::array<Poly, 5> out;
    for (int i = 0; i < 5; ++i) {
        if (a[i].empty()) continue;
        int D = w[i] * k;
        Poly b((size_t)D + 1, 0);
        for (size_t j = 0; j < a[i].size(); ++j) b[(size_t)D - j] = a[i][j];
        poly::trim(b);
        out[i] = b;
    }
    if (k_out) *k_out = k;
    return out;
}

inline int ord_at(const GF& F, const Place& v, Poly f) {
    if (f.empty()) return 1 << 20;
    if (v.infinite) {
        int i = 0;
        while (f[(size_t)i] == 0) ++i;
        return i;
    }
    int n = 0;
    for (;;) {
        auto [q, r] = poly::divmod(F, f, v.poly);
        if (!r.empty()) return n;
        f = std::move(q);
        ++n;
    }
}

// Residue field of a place with a chosen root t0 of its polynomial.
struct ResidueField {
    const GF* B;
    int degree;
    int t0;  // image of t (or of s = 1/t at infinity, i.e. 0)
    const std::vector<int>* emb;

    int reduce(const Poly& f) const {
        int x = 0;
        for (int i = (int)f.size() - 1; i >= 0; --i) x = B->add(B->mul(x, t0), (*emb)[(size_t)f[(size_t)i]]);
        return x;
    }
};

inline ResidueField residue_field(int p, int r, const Place& v) {
    int d = v.degree;
    const GF& B = field(p, r * d);
    const auto& emb = embedding(p, r, d);
    if (v.infinite) return ResidueField{&B, 1, 0, &emb};
    Poly f;
    for (int c : v.poly) f.push_back(emb[(size_t)c]);
    for (i64 x = 0; x < B.size(); ++x)
        if (poly::eval(B, f, (int)x) == 0) return ResidueField{&B, d, (int)x, &emb};
    throw std::logic_error("residue_field: polynomial has no root");
}

// sum_{x in B} chi(c3 x^3 + c2 x^2 + c1 x + c0), Horner in the log domain.
inline i64 sum_chi_cubic(const GF& B, int c3, int c2, int c1, int c0) {
    const i64 Q1 = B.size() - 1;
    const auto& lg = B.log_table();
    auto L = [&](int c) -> i64 { return c ? lg[(size_t)c] : -1; };
    const i64 l3 = L(c3), l2 = L(c2), l1 = L(c1), l0 = L(c0);
    auto addl = [&](i64 a, i64 b) -> i64 {
        if (a < 0) return b;
        if (b < 0) return a;
        i64 d = a - b;
        if (d < 0) d += Q1;
        int z = B.zech(d);
        if (z < 0) return -1;
        i64 s = b + z;
        return s >= Q1 ? s - Q1 : s;
    };
    auto mull = [&](i64 a, i64 lx) -> i64 {
        if (a < 0) return -1;
        i64 s = a + lx;
        return s >= Q1 ? s - Q1 : s;
    };
    i64 total = B.chi(c0);
    for (i64 lx = 0; lx < Q1; ++lx) {
        i64 v = mull(l3, lx);
        v = addl(v, l2);
        v = mull(v, lx);
        v = addl(v, l1);
        v = mull(v, lx);
        v = addl(v, l0);
        if (v >= 0) total += (v & 1) ? -1 : 1;
    }
    return total;
}

// Reduction of the 2-torsion-completed cubic 4x^3 + b2 x^2 + 2 b4 x + b6 at a place.
struct LocalCubic {
    const GF* B;
    std::array<int, 4> c;  // c0..c3

    int eval(int x) const {
        int v = 0;
        for (int i = 3; i >= 0; --i) v = B->add(B->mul(v, x), c[(size_t)i]);
        return v;
    }
    // a = #points - (Q + 1) sign reversed: trace of Frobenius
    i64 trace() const { return -sum_chi_cubic(*B, c[3], c[2], c[1], c[0]); }
};

// Model used at v: the given one at finite places, the model at infinity otherwise.
inline std::array<Poly, 5> model_at(const Curve& E, const Place& v) {
    return v.infinite ? model_at_infinity(E.a) : E.a;
}

inline LocalCubic local_cubic(const Curve& E, const Place& v) {
    const GF& F = E.F();
    Invariants I = invariants(F, model_at(E, v));
    ResidueField R = residue_field(E.p, E.r(), v);
    const GF& B = *R.B;
    LocalCubic lc{&B, {R.reduce(I.b6), B.mul(B.from_int(2), R.reduce(I.b4)), R.reduce(I.b2), B.from_int(4)}};
    return lc;
}

inline i64 point_count_raw(const Curve& E, const Place& v) { return local_cubic(E, v).trace(); }

// Tate parameter machinery.
namespace detail {

// Power-series helpers mod p (prime field).
inline std::vector<i64> ps_mul(const std::vector<i64>& a, const std::vector<i64>& b, int K, i64 p) {
    std::vector<i64> r((size_t)K, 0);
    for (int i = 0; i < K && i < (int)a.size(); ++i) {
        if (!a[(size_t)i]) continue;
        for (int j = 0; i + j < K && j < (int)b.size(); ++j) r[(size_t)(i + j)] = (r[(size_t)(i + j)] + a[(size_t)i] * b[(size_t)j]) % p;
    }
    return r;
}
inline std::vector<i64> ps_inv(const std::vector<i64>& a, int K, i64 p) {
    std::vector<i64> r((size_t)K, 0);
    i64 inv0 = invmod(mod(a[0], p), p);
    r[0] = inv0;
    for (int k = 1; k < K; ++k) {
        i64 s = 0;
        for (int j = 1; j <= k && j < (int)a.size(); ++j) s = (s + a[(size_t)j] * r[(size_t)(k - j)]) % p;
        r[(size_t)k] = mod(-s * inv0, p);
    }
    return r;
}

} // namespace detail

// Coefficients r_1..r_{K-1} (mod p) of q = sum r_k J^k where J = 1/j(q).
inline std::vector<i64> tate_reversion_coeffs(int p, int K) {
    using namespace detail;
    // q j(q) = E4^3 / prod (1 - q^n)^24
    std::vector<i64> e4((size_t)K, 0);
    e4[0] = 1;
    for (int n = 1; n < K; ++n) {
        i64 s = 0;
        for (int d = 1; d <= n; ++d)
            if (n % d == 0) s += (i64)d * d * d % p;
        e4[(size_t)n] = mod(240 * (s % p), p);
    }
    std::vector<i64> num = ps_mul(ps_mul(e4, e4, K, p), e4, K, p);
    std::vector<i64> eta((size_t)K, 0);
    eta[0] = 1;
    for (int n = 1; n < K; ++n) {
        std::vector<i64> f((size_t)K, 0);
        f[0] = 1;
        f[(size_t)n] = p - 1;
        for (int e = 0; e < 24; ++e) eta = ps_mul(eta, f, K, p);
    }
    std::vector<i64> qj = ps_mul(num, ps_inv(eta, K, p), K, p);
    // J = q * H(q) with H = 1/(q j)
    std::vector<i64> H = ps_inv(qj, K, p);
    std::vector<i64> J((size_t)K, 0);
    for (int i = 0; i + 1 < K; ++i) J[(size_t)(i + 1)] = H[(size_t)i];
    // revert: find R with J(R(x)) = x, coefficients r_1 = 1, ...
    std::vector<i64> R((size_t)K, 0);
    R[1] = 1;
    for (int k = 2; k < K; ++k) {
        std::vector<i64> comp((size_t)K, 0), powR((size_t)K, 0);
        powR[0] = 1;
        for (int i = 1; i < K; ++i) {
            powR = ps_mul(powR, R, K, p);
            for (int j = 0; j < K; ++j) comp[(size_t)j] = (comp[(size_t)j] + J[(size_t)i] * powR[(size_t)j]) % p;
        }
        R[(size_t)k] = mod(R[(size_t)k] - comp[(size_t)k], p);
    }
    return R;
}

// Local expansion of a polynomial at a degree-one place, in the uniformizer.
inline std::vector<int> local_expansion(const GF& F, const Place& v, const Poly& f, int K) {
    std::vector<int> out((size_t)K, 0);
    if (v.degree != 1) throw std::invalid_argument("local_expansion: degree-one places only");
    if (v.infinite) {
        for (int i = 0; i < K && i < (int)f.size(); ++i) out[(size_t)i] = f[(size_t)i];
        return out;
    }
    // t = a + pi with a the root of v
    int a = F.neg(v.poly[0]);
    Poly rest = f;
    Poly lin{F.neg(a), 1};
    for (int i = 0; i < K && !rest.empty(); ++i) {
        auto [qq, rr] = poly::divmod(F, rest, lin);
        out[(size_t)i] = rr.empty() ? 0 : rr[0];
        rest = qq;
    }
    return out;
}

inline LaurentSeries tate_parameter(const Curve& E, const Place& v, int prec_terms, int needed = 0) {
    if (prec_terms < needed) throw PrecisionTooLow("tate_parameter: " + std::to_string(prec_terms) + " < " + std::to_string(needed));
    const GF& F = E.F();
    Invariants I = invariants(F, model_at(E, v));
    int od = ord_at(F, v, I.delta), oc = ord_at(F, v, I.c4);
    if (oc != 0 || od <= 0) throw BadReduction("tate_parameter: place " + v.str() + " is not multiplicative");
    int m = od;  // ord of J = 1/j
    int K = m + prec_terms;
    // J = delta / c4^3 as series in pi
    auto mulF = [&](const std::vector<int>& x, const std::vector<int>& y) {
        std::vector<int> r((size_t)K, 0);
        for (int i = 0; i < K; ++i)
            for (int j = 0; i + j < K; ++j) r[(size_t)(i + j)] = F.add(r[(size_t)(i + j)], F.mul(x[(size_t)i], y[(size_t)j]));
        return r;
    };
    auto invF = [&](const std::vector<int>& x) {
        std::vector<int> r((size_t)K, 0);
        int i0 = F.inv(x[0]);
        r[0] = i0;
        for (int k = 1; k < K; ++k) {
            int s = 0;
            for (int j = 1; j <= k; ++j) s = F.add(s, F.mul(x[(size_t)j], r[(size_t)(k - j)]));
            r[(size_t)k] = F.neg(F.mul(s, i0));
        }
        return r;
    };
    auto c4s = local_expansion(F, v, I.c4, K);
    auto ds = local_expansion(F, v, I.delta, K);
    auto J = mulF(ds, invF(mulF(mulF(c4s, c4s), c4s)));
    int terms = K / m + 2;
    auto R = tate_reversion_coeffs(E.p, terms);
    std::vector<int> Qs((size_t)K, 0), Jp((size_t)K, 0);
    Jp[0] = 1;
    for (int k = 1; k < terms; ++k) {
        Jp = mulF(Jp, J);
        int c = F.from_int(R[(size_t)k]);
        for (int i = 0; i < K; ++i) Qs[(size_t)i] = F.add(Qs[(size_t)i], F.mul(c, Jp[(size_t)i]));
    }
    LaurentSeries out;
    out.val = m;
    out.coeffs.assign(Qs.begin() + m, Qs.end());
    return out;
}

inline PlaceData classify_reduction(const Curve& E, const Place& v, int alpha_prec = 0, int tate_terms = 0) {
    const GF& F = E.F();
    Invariants I = invariants(F, model_at(E, v));
    PlaceData D;
    D.place = v;
    D.ord_delta = ord_at(F, v, I.delta);
    D.ord_c4 = ord_at(F, v, I.c4);
    std::optional<PlaceOverride> ov;
    if (auto it = E.overrides.find(v); it != E.overrides.end()) ov = it->second;
    i64 qv = v.qv(E.q);

    bool nonminimal = D.ord_delta >= 12 && D.ord_c4 >= 4;
    if (nonminimal) {
        if (!ov || !ov->type) throw NotImplementedMinimalization("model not minimal at " + v.str());
        D.type = *ov->type;
        if (is_good(D.type) && !ov->lambda) throw NotImplementedMinimalization("override at " + v.str() + " needs lambda");
        D.lambda = ov->lambda ? *ov->lambda
                   : D.type == Reduction::SplitMult ? 1
                   : D.type == Reduction::NonsplitMult ? -1 : 0;
        D.m_v = ov->m_v.value_or(is_good(D.type) ? 1 : 0);
        if (ov->Q) D.Q = ov->Q;
    } else {
        if (D.ord_delta == 0) {
            LocalCubic lc = local_cubic(E, v);
            D.lambda = lc.trace();
            if ((i128)D.lambda * D.lambda > 4 * (i128)qv) throw std::logic_error("Hasse bound violated at " + v.str());
            D.type = mod(D.lambda, E.p) == 0 ? Reduction::GoodSupersingular : Reduction::GoodOrdinary;
            D.m_v = 1;
        } else if (D.ord_c4 == 0) {
            LocalCubic lc = local_cubic(E, v);
            const GF& B = *lc.B;
            int x0 = -1;
            for (i64 x = 0; x < B.size() && x0 < 0; ++x) {
                int fx = lc.eval((int)x);
                int dfx = B.add(B.add(B.mul(B.from_int(3), B.mul(lc.c[3], B.mul((int)x, (int)x))),
                                      B.mul(B.from_int(2), B.mul(lc.c[2], (int)x))), lc.c[1]);
                if (fx == 0 && dfx == 0) x0 = (int)x;
            }
            if (x0 < 0) throw std::logic_error("classify_reduction: node not found at " + v.str());
            // F''(x0)/2 = 3 c3 x0 + c2
            int half2 = B.add(B.mul(B.from_int(3), B.mul(lc.c[3], x0)), lc.c[2]);
            bool split = B.chi(half2) == 1;
            D.type = split ? Reduction::SplitMult : Reduction::NonsplitMult;
            D.lambda = split ? 1 : -1;
            D.m_v = split ? D.ord_delta : (D.ord_delta % 2 == 0 ? 2 : 1);
        } else {
            D.type = Reduction::Additive;
            D.lambda = 0;
            D.m_v = 0;
        }
        if (ov) {
            if (ov->type && *ov->type != D.type)
                throw OverrideMismatch("at " + v.str() + ": override " + reduction_name(*ov->type) + " vs computed " + reduction_name(D.type));
            if (ov->lambda && *ov->lambda != D.lambda) throw OverrideMismatch("lambda override mismatch at " + v.str());
            if (ov->m_v) {
                if (D.m_v != 0 && *ov->m_v != D.m_v) throw OverrideMismatch("m_v override mismatch at " + v.str());
                D.m_v = *ov->m_v;
            }
        }
    }
    if (D.type == Reduction::GoodOrdinary && alpha_prec > 0) D.alpha = hensel_unit_root(D.lambda, qv, E.p, alpha_prec);
    if (is_multiplicative(D.type) && tate_terms > 0) {
        if (!nonminimal && v.degree == 1) {
            LaurentSeries Q = tate_parameter(E, v, tate_terms);
            if (ov && ov->Q) {
                const auto& O = *ov->Q;
                size_t n = std::min(O.coeffs.size(), Q.coeffs.size());
                if (O.val != Q.val || !std::equal(O.coeffs.begin(), O.coeffs.begin() + (long)n, Q.coeffs.begin()))
                    throw OverrideMismatch("Tate parameter override mismatch at " + v.str());
            }
            D.Q = Q;
        } else if (ov && ov->Q) {
            D.Q = ov->Q;
        }
    }
    return D;
}

// lambda_v at a good place; BadReduction otherwise.
inline i64 point_count(const Curve& E, const Place& v) {
    const GF& F = E.F();
    Invariants I = invariants(F, model_at(E, v));
    if (ord_at(F, v, I.delta) != 0) throw BadReduction("place " + v.str() + " is bad");
    return point_count_raw(E, v);
}

// Bad places of the given model: finite factors of the discriminant, and infinity if bad there.
inline std::vector<Place> bad_places(const Curve& E) {
    const GF& F = E.F();
    Invariants I = invariants(F, E.a);
    if (I.delta.empty()) throw std::invalid_argument("singular curve");
    std::vector<Place> out;
    for (auto& [v, e] : factor_into_places(E.p, E.r(), I.delta)) out.push_back(v);
    Invariants Ii = invariants(F, model_at_infinity(E.a));
    if (ord_at(F, Place::inf(), Ii.delta) > 0) out.push_back(Place::inf());
    return out;
}

// Degree of the minimal discriminant, assuming the model is minimal everywhere
// unless overridden. Infinity counts with the model at infinity.
inline int discriminant_degree(const Curve& E) {
    const GF& F = E.F();
    int total = 0;
    for (const Place& v : bad_places(E)) {
        Invariants I = invariants(F, model_at(E, v));
        int od = ord_at(F, v, I.delta);
        if (od >= 12 && ord_at(F, v, I.c4) >= 4) throw NotImplementedMinimalization("discriminant_degree at " + v.str());
        total += od * v.degree;
    }
    return total;
}

// Conductor as (place, exponent) for the bad places: 1 multiplicative, 2 additive (p odd >= 5).
inline std::vector<std::pair<Place, int>> conductor(const Curve& E) {
    std::vector<std::pair<Place, int>> out;
    for (const Place& v : bad_places(E)) {
        PlaceData D = classify_reduction(E, v);
        out.push_back({v, is_multiplicative(D.type) ? 1 : 2});
    }
    return out;
}

// f with f = target_i mod v_i^{e_i}, deg f < sum e_i deg v_i.
struct Congruence {
    Place place;
    int exponent;
    Poly target;
};

inline Poly crt_approximate(const GF& F, const std::vector<Congruence>& cs) {
    if (cs.empty()) return {1};
    Poly f{}, M{1};
    for (size_t i = 0; i < cs.size(); ++i) {
        if (cs[i].place.infinite) throw std::invalid_argument("crt_approximate: finite places only");
        for (size_t j = 0; j < i; ++j)
            if (cs[j].place == cs[i].place) throw std::invalid_argument("crt_approximate: repeated place");
        Poly m = poly::pow(F, cs[i].place.poly, cs[i].exponent);
        // f' = f + M * ((target - f) * M^{-1} mod m)
        auto [g, s, t] = poly::xgcd(F, M, m);
        (void)t;
        Poly diff = poly::rem(F, poly::sub(F, cs[i].target, f), m);
        Poly k = poly::rem(F, poly::mul(F, diff, s), m);
        f = poly::add(F, f, poly::mul(F, M, k));
        M = poly::mul(F, M, m);
        f = poly::rem(F, f, M);
    }
    return f;
}

} // namespace padicl
