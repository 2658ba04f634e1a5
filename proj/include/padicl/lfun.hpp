#pragma once

// Twisted Hasse-Weil L-polynomials and classical ray class L-polynomials of
// F_q(t), Gauss sums, the classical functional equation and base change.
//
// L-functions are assembled from power sums: u d/du log L = sum_k P_k u^k with
// P_k(omega) = sum over places v with deg v | k of deg v * s_{k/deg v}(v) * omega([v])^{k/deg v},
// where s_m(v) is the m-th power sum of the Frobenius eigenvalues at v. The sums
// are aggregated per ray class element once and then paired with every character.

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "funfield.hpp"
#include "padic.hpp"
#include "rayclass.hpp"

namespace padicl {

// ---- places of a given degree, via Frobenius orbits ----------------------

struct PlaceTrace {
    Poly P;                 // monic irreducible, degree d
    int root = 0;           // a root in F_{q^d}
    Reduction type = Reduction::GoodOrdinary;
    i64 lambda = 1;
};

// m-th power sum of the local Frobenius eigenvalues.
inline i64 trace_power(Reduction type, i64 lambda, i64 qv, int m) {
    if (m == 0) return is_good(type) ? 2 : 1;
    if (type == Reduction::Additive) return 0;
    if (is_multiplicative(type)) return (m % 2 == 0 || lambda > 0) ? 1 : -1;
    i64 s0 = 2, s1 = lambda;
    for (int k = 2; k <= m; ++k) {
        i64 s2 = checked_add(checked_mul(lambda, s1), -checked_mul(qv, s0));
        s0 = s1;
        s1 = s2;
    }
    return s1;
}

// The cubic 4x^3 + b2 x^2 + 2 b4 x + b6 written as A(x) + h(t) B(x).
struct AffineFamily {
    Poly h;
    std::array<int, 4> A{}, B{};
};

inline std::optional<AffineFamily> affine_family(const Curve& E) {
    const GF& F = E.F();
    Invariants I = invariants(F, E.a);
    std::array<Poly, 4> C = {I.b6, poly::scale(F, I.b4, F.from_int(2)), I.b2, poly::constant(F.from_int(4))};
    AffineFamily fam;
    int lead = -1;
    for (int i = 0; i < 4; ++i)
        if (poly::deg(C[(size_t)i]) > 0) { lead = i; break; }
    if (lead < 0) return std::nullopt;
    Poly h = C[(size_t)lead];
    h[0] = 0;
    poly::trim(h);
    fam.h = h;
    int hl = h.back();
    for (int i = 0; i < 4; ++i) {
        Poly c = C[(size_t)i];
        int c0 = c.empty() ? 0 : c[0];
        Poly rest = c;
        if (!rest.empty()) rest[0] = 0;
        poly::trim(rest);
        int b = rest.empty() ? 0 : F.div(rest.back(), hl);
        if (poly::sub(F, rest, poly::scale(F, h, b)) != Poly{}) return std::nullopt;
        fam.A[(size_t)i] = c0;
        fam.B[(size_t)i] = b;
    }
    return fam;
}

namespace detail {

// In-place DFT over (Z/p)^m indexed by base-p digits: a(b) <- sum_x a(x) zeta_p^{sign <b,x>}.
inline void additive_dft(std::vector<std::complex<double>>& a, int p, int m, int sign) {
    std::vector<std::complex<double>> w((size_t)p), tmp((size_t)p);
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < p; ++k) w[(size_t)k] = std::polar(1.0, sign * 2 * pi * k / p);
    size_t N = a.size(), stride = 1;
    for (int axis = 0; axis < m; ++axis, stride *= (size_t)p) {
        for (size_t base = 0; base < N; ++base) {
            if ((base / stride) % (size_t)p) continue;
            for (int b = 0; b < p; ++b) {
                std::complex<double> s = 0;
                for (int x = 0; x < p; ++x) s += a[base + (size_t)x * stride] * w[(size_t)((b * x) % p)];
                tmp[(size_t)b] = s;
            }
            for (int b = 0; b < p; ++b) a[base + (size_t)b * stride] = tmp[(size_t)b];
        }
    }
}

} // namespace detail

// g(s) = sum_{x in B} chi(A(x) + s B(x)) for every s in B (A, B given over B).
inline std::vector<i64> family_character_sums(const GF& B, const std::array<int, 4>& A, const std::array<int, 4>& Bc) {
    const i64 Q = B.size();
    auto ev = [&](const std::array<int, 4>& c, int x) {
        int v = 0;
        for (int i = 3; i >= 0; --i) v = B.add(B.mul(v, x), c[(size_t)i]);
        return v;
    };
    i64 base = 0;
    std::vector<std::complex<double>> h((size_t)Q, 0), chi((size_t)Q, 0);
    for (i64 x = 0; x < Q; ++x) {
        int a = ev(A, (int)x), b = ev(Bc, (int)x);
        if (b == 0) {
            base += B.chi(a);
            continue;
        }
        // chi(a + s b) = chi(b) chi(s + a/b); store at -(a/b) to make a convolution
        int r = B.neg(B.div(a, b));
        h[(size_t)r] += (double)B.chi(b);
    }
    for (i64 y = 0; y < Q; ++y) chi[(size_t)y] = (double)B.chi((int)y);
    const int m = B.n();
    detail::additive_dft(h, B.p(), m, -1);
    detail::additive_dft(chi, B.p(), m, -1);
    for (i64 i = 0; i < Q; ++i) h[(size_t)i] *= chi[(size_t)i];
    detail::additive_dft(h, B.p(), m, +1);
    // c(s) = sum_r h(r) chi(s - r) with r = -(a/b): s - r = s + a/b
    std::vector<i64> out((size_t)Q);
    for (i64 s = 0; s < Q; ++s) {
        double v = h[(size_t)s].real() / (double)Q;
        i64 iv = (i64)std::llround(v);
        if (std::abs(v - (double)iv) > 0.25) throw std::logic_error("family_character_sums: rounding failure");
        out[(size_t)s] = iv + base;
    }
    return out;
}

// Monic irreducible polynomials of exact degree d over F_q, one root each.
inline std::vector<std::pair<Poly, int>> places_of_degree(int p, int r, int d) {
    const GF& F = field(p, r);
    const GF& B = field(p, r * d);
    const auto& emb = embedding(p, r, d);
    std::vector<int> back((size_t)B.size(), -1);
    for (size_t c = 0; c < emb.size(); ++c) back[(size_t)emb[c]] = (int)c;
    const i64 Q1 = B.size() - 1, q = F.size();
    std::vector<std::pair<Poly, int>> out;
    if (d == 1) {
        for (int a = 0; a < (int)q; ++a) out.push_back({{F.neg(a), 1}, emb[(size_t)a]});
        return out;
    }
    for (i64 x = 1; x < B.size(); ++x) {
        i64 lx = B.log((int)x);
        // exact degree and minimality of x in its orbit
        bool ok = true;
        i64 l = lx;
        for (int i = 1; i < d; ++i) {
            l = mulmod(l, q, Q1);
            if (l == lx) { ok = false; break; }
            if (B.gen_pow(l) < x) { ok = false; break; }
        }
        if (!ok) continue;
        Poly m{1};
        i64 li = lx;
        for (int i = 0; i < d; ++i) {
            int root = B.gen_pow(li);
            Poly next((size_t)m.size() + 1, 0);
            for (size_t k = 0; k < m.size(); ++k) {
                next[k + 1] = B.add(next[k + 1], m[k]);
                next[k] = B.sub(next[k], B.mul(m[k], root));
            }
            m = next;
            li = mulmod(li, q, Q1);
        }
        Poly P;
        for (int c : m) {
            if (back[(size_t)c] < 0) throw std::logic_error("places_of_degree: coefficient outside F_q");
            P.push_back(back[(size_t)c]);
        }
        out.push_back({P, (int)x});
    }
    return out;
}

// Euler data source: an elliptic curve, or nothing (classical L_K).
class EulerSource {
public:
    // classical L-functions of F_q(t)
    EulerSource(int p, i64 q) : p_(p), q_(q), r_(prime_power(q).second) {}
    explicit EulerSource(const Curve& E, int alpha_prec = 0) : p_(E.p), q_(E.q), r_(E.r()), E_(E) {
        for (const Place& v : bad_places(E)) bad_[v] = classify_reduction(E, v, alpha_prec);
        if (!bad_.count(Place::inf())) inf_ = classify_reduction(E, Place::inf(), alpha_prec);
        else inf_ = bad_[Place::inf()];
        if (!E.constant()) fam_ = affine_family(E);
        Invariants I = invariants(E.F(), E.a);
        delta_ = I.delta;
        b_ = {I.b6, poly::scale(E.F(), I.b4, E.F().from_int(2)), I.b2, poly::constant(E.F().from_int(4))};
    }

    int p() const { return p_; }
    i64 q() const { return q_; }
    int r() const { return r_; }
    bool classical() const { return !E_.has_value(); }
    const std::optional<Curve>& curve() const { return E_; }
    const std::map<Place, PlaceData>& bad() const { return bad_; }

    // Local data (type, lambda) at an arbitrary place.
    PlaceData local(const Place& v) const {
        if (classical()) {
            PlaceData D;
            D.place = v;
            D.type = Reduction::SplitMult;
            D.lambda = 1;
            return D;
        }
        if (v.infinite) return inf_;
        if (auto it = bad_.find(v); it != bad_.end()) return it->second;
        return classify_reduction(*E_, v);
    }
    i64 power_sum(const PlaceData& D, int m) const {
        if (classical()) return 1;
        return trace_power(D.type, D.lambda, D.place.qv(q_), m);
    }

    // Finite places of exact degree d with their local traces.
    const std::vector<PlaceTrace>& places(int d) {
        if ((int)cache_.size() > d && cache_[(size_t)d]) return *cache_[(size_t)d];
        if ((int)cache_.size() <= d) cache_.resize((size_t)d + 1);
        auto list = places_of_degree(p_, r_, d);
        auto out = std::make_unique<std::vector<PlaceTrace>>();
        out->reserve(list.size());
        if (classical()) {
            for (auto& [P, x] : list) out->push_back({P, x, Reduction::SplitMult, 1});
        } else {
            const GF& B = field(p_, r_ * d);
            const auto& emb = embedding(p_, r_, d);
            auto at = [&](const Poly& f, int x) {
                int v = 0;
                for (int i = (int)f.size() - 1; i >= 0; --i) v = B.add(B.mul(v, x), emb[(size_t)f[(size_t)i]]);
                return v;
            };
            std::vector<i64> gsum;
            bool fast = fam_ && B.size() > 2000;
            if (fast) {
                std::array<int, 4> A, Bc;
                for (int i = 0; i < 4; ++i) {
                    A[(size_t)i] = emb[(size_t)fam_->A[(size_t)i]];
                    Bc[(size_t)i] = emb[(size_t)fam_->B[(size_t)i]];
                }
                gsum = family_character_sums(B, A, Bc);
            }
            for (auto& [P, x] : list) {
                PlaceTrace t{P, x, Reduction::GoodOrdinary, 0};
                if (at(delta_, x) == 0) {
                    const PlaceData& D = bad_.at(Place::finite(P));
                    t.type = D.type;
                    t.lambda = D.lambda;
                } else {
                    if (fast) t.lambda = -gsum[(size_t)at(fam_->h, x)];
                    else t.lambda = -sum_chi_cubic(B, at(b_[3], x), at(b_[2], x), at(b_[1], x), at(b_[0], x));
                    t.type = mod(t.lambda, p_) == 0 ? Reduction::GoodSupersingular : Reduction::GoodOrdinary;
                }
                out->push_back(t);
            }
        }
        cache_[(size_t)d] = std::move(out);
        return *cache_[(size_t)d];
    }

    // Conductor exponent of the curve at a place (1 multiplicative, 2 additive, 0 good).
    int conductor_exp(const Place& v) const {
        if (classical()) return 0;
        auto D = local(v);
        if (is_good(D.type)) return 0;
        return is_multiplicative(D.type) ? 1 : 2;
    }

private:
    int p_;
    i64 q_;
    int r_;
    std::optional<Curve> E_;
    std::map<Place, PlaceData> bad_;
    PlaceData inf_;
    std::optional<AffineFamily> fam_;
    Poly delta_;
    std::array<Poly, 4> b_;
    std::vector<std::unique_ptr<std::vector<PlaceTrace>>> cache_;
};

// ---- L-polynomials -------------------------------------------------------

struct LPolynomial {
    int p = 0, m = 0;
    i64 q = 0;
    std::vector<CycloInt> coeffs;  // numerator, coefficient of u^k
    std::vector<CycloInt> denom;   // {1} unless the constant-curve pole case
    int degree = 0;                // predicted numerator degree

    bool has_denominator() const { return denom.size() > 1; }
};

// Exact value num/den in Q(zeta).
struct ExactValue {
    CycloInt num, den;
    CycloElt to_elt(int prec) const {
        return num.to_elt(prec + 8) * den.to_elt(prec + 8).inverse();
    }
    // Rational value when the ring is Z.
    Rational rational() const {
        for (int i = 1; i < num.phi(); ++i)
            if (num.coords()[(size_t)i] || den.coords()[(size_t)i]) throw std::logic_error("ExactValue::rational: not rational");
        return Rational(num.coords()[0], den.coords()[0]);
    }
};

// Power-sum tables for one level group and one Euler source.
class TwistedSums {
public:
    TwistedSums(EulerSource& src, const LevelGroup& G, int B) : src_(&src), G_(&G), B_(B) {
        W_.assign((size_t)B + 1, std::vector<i64>((size_t)G.size(), 0));
        bool by_degree = G.modulus().empty() && (src.classical() || src.curve()->constant());
        if (by_degree) {
            // every place of degree d has class d [inf] and the same local factor
            const PlaceData D = src.local(Place::inf());
            const auto inf = G.class_of_place(Place::inf());
            for (int d = 1; d <= B; ++d) {
                i64 N = necklace_count(src.q(), d);
                for (int mlt = 1; mlt * d <= B; ++mlt) {
                    int k = mlt * d;
                    i64 s = src.classical() ? 1 : trace_power(D.type, D.lambda, src.q(), k);
                    i64 idx = G.index(G.scale(inf, k));
                    auto& w = W_[(size_t)k][(size_t)idx];
                    w = checked_add(w, checked_mul(checked_mul(d, N), s));
                }
            }
        }
        for (int d = 1; d <= B && !by_degree; ++d) {
            for (const auto& pt : src.places(d)) {
                if (!G.coprime(pt.P)) continue;
                auto cls = G.class_of_poly(pt.P);
                i64 qv = ipow(src.q(), d);
                for (int mlt = 1; mlt * d <= B; ++mlt) {
                    i64 s = src.classical() ? 1 : trace_power(pt.type, pt.lambda, qv, mlt);
                    if (!s) continue;
                    i64 idx = G.index(G.scale(cls, mlt));
                    auto& w = W_[(size_t)(mlt * d)][(size_t)idx];
                    w = checked_add(w, checked_mul(d, s));
                }
            }
        }
        specials_.push_back({Place::inf(), G.class_of_place(Place::inf()), src.local(Place::inf())});
        for (auto& [v, e] : G.modulus()) specials_.push_back({v, G.uniformizer_class(v), src.local(v)});
    }

    const LevelGroup& group() const { return *G_; }
    EulerSource& source() const { return *src_; }
    int bound() const { return B_; }

    // P_k(omega) for k = 1..B; places where omega ramifies are dropped.
    std::vector<CycloInt> power_sums(const RayCharacter& w) const {
        const LevelGroup& G = *G_;
        const int p = G.p(), n = G.n();
        const i64 pn = G.pn();
        Divisor cond = G.conductor(w);
        std::vector<i64> pair((size_t)G.size());
        for (i64 i = 0; i < G.size(); ++i) pair[(size_t)i] = G.pair(w, G.element(i));
        std::vector<CycloInt> P((size_t)B_ + 1, CycloInt(p, n));
        for (int k = 1; k <= B_; ++k) {
            std::vector<i64> raw((size_t)pn, 0);
            const auto& Wk = W_[(size_t)k];
            for (i64 i = 0; i < G.size(); ++i)
                if (Wk[(size_t)i]) raw[(size_t)pair[(size_t)i]] = checked_add(raw[(size_t)pair[(size_t)i]], Wk[(size_t)i]);
            for (const auto& s : specials_) {
                if (divisor::ord(cond, s.place) > 0) continue;
                int d = s.place.degree;
                if (k % d) continue;
                i64 val = src_->power_sum(s.data, k / d);
                if (!val) continue;
                i64 e = mod(G.pair(w, s.cls) * (k / d), pn);
                raw[(size_t)e] = checked_add(raw[(size_t)e], checked_mul(d, val));
            }
            P[(size_t)k] = CycloInt::from_cyclic(p, n, raw);
        }
        return P;
    }

    // Euler product coefficients c_0..c_B by Newton's identities.
    std::vector<CycloInt> series(const RayCharacter& w) const {
        auto P = power_sums(w);
        const int p = G_->p(), n = G_->n();
        std::vector<CycloInt> c((size_t)B_ + 1, CycloInt(p, n));
        c[0] = CycloInt(p, n, 1);
        for (int k = 1; k <= B_; ++k) {
            CycloInt s(p, n);
            for (int i = 1; i <= k; ++i) s += P[(size_t)i] * c[(size_t)(k - i)];
            c[(size_t)k] = s.div_exact(k);
        }
        return c;
    }

private:
    struct Special {
        Place place;
        LevelGroup::Elt cls;
        PlaceData data;
    };
    EulerSource* src_;
    const LevelGroup* G_;
    int B_;
    std::vector<std::vector<i64>> W_;
    std::vector<Special> specials_;
};

// Degree predicted from conductors: deg N(A x omega) - 4, classical deg D_omega - 2.
inline int predicted_degree(const EulerSource& src, const Divisor& cond) {
    if (src.classical()) return cond.empty() ? 0 : divisor::degree(cond) - 2;
    const Curve& E = *src.curve();
    if (E.constant()) return cond.empty() ? 0 : 2 * divisor::degree(cond) - 4;
    int deg = 0;
    for (auto& [v, D] : src.bad()) {
        if (divisor::ord(cond, v) > 0) continue;
        deg += v.degree * (is_multiplicative(D.type) ? 1 : 2);
    }
    return deg + 2 * divisor::degree(cond) - 4;
}

// z = omega(Frob_q) for omega unramified everywhere, as an exponent of zeta_{p^n}.
inline i64 constant_field_exponent(const LevelGroup& G, const RayCharacter& w) {
    return G.pair(w, G.class_of_place(Place::inf()));
}

inline std::vector<CycloInt> poly_mul(const std::vector<CycloInt>& a, const std::vector<CycloInt>& b, size_t cap = SIZE_MAX) {
    size_t n = std::min(cap, a.size() + b.size() - 1);
    std::vector<CycloInt> r(n, CycloInt(a[0].p(), a[0].m()));
    for (size_t i = 0; i < a.size() && i < n; ++i) {
        if (a[i].is_zero()) continue;
        for (size_t j = 0; j < b.size() && i + j < n; ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

// Denominator delta_alpha delta_beta for the constant curve with omega unramified.
inline std::vector<CycloInt> constant_curve_denominator(int p, int n, i64 q, i64 lambda, i64 zexp) {
    CycloInt z = CycloInt::zeta_pow(p, n, zexp), z2 = z * z;
    std::vector<CycloInt> a = {CycloInt(p, n, 1), z.scale(-lambda), z2.scale(q)};
    std::vector<CycloInt> b = {CycloInt(p, n, 1), z.scale(-checked_mul(lambda, q)), z2.scale(checked_mul(q, checked_mul(q, q)))};
    return poly_mul(a, b);
}

// The L-polynomial of omega, checking the vanishing of coefficients beyond the
// predicted degree up to the bound of the tables.
inline LPolynomial l_polynomial(const TwistedSums& T, const RayCharacter& w, bool check_degree = true) {
    const LevelGroup& G = T.group();
    EulerSource& src = T.source();
    Divisor cond = G.conductor(w);
    LPolynomial L;
    L.p = G.p();
    L.m = G.n();
    L.q = G.q();
    L.degree = predicted_degree(src, cond);
    auto c = T.series(w);
    L.denom = {CycloInt(L.p, L.m, 1)};
    bool pole = !src.classical() && src.curve()->constant() && cond.empty();
    bool classical_pole = src.classical() && cond.empty();
    if (pole) {
        L.denom = constant_curve_denominator(L.p, L.m, L.q, src.local(Place::inf()).lambda, constant_field_exponent(G, w));
        c = poly_mul(c, L.denom, c.size());
    } else if (classical_pole) {
        CycloInt z = CycloInt::zeta_pow(L.p, L.m, constant_field_exponent(G, w));
        L.denom = poly_mul({CycloInt(L.p, L.m, 1), -z}, {CycloInt(L.p, L.m, 1), -(z.scale(L.q))});
        c = poly_mul(c, L.denom, c.size());
    }
    if (check_degree) {
        if (T.bound() < L.degree + 2)
            throw std::invalid_argument("l_polynomial: bound " + std::to_string(T.bound()) + " below predicted degree " + std::to_string(L.degree) + " + 2");
        for (int k = L.degree + 1; k <= T.bound(); ++k)
            if (!c[(size_t)k].is_zero())
                throw DegreeMismatch("coefficient of u^" + std::to_string(k) + " nonzero, predicted degree " + std::to_string(L.degree));
    }
    c.resize((size_t)std::min<int>(L.degree + 1, (int)c.size()), CycloInt(L.p, L.m));
    L.coeffs = c;
    return L;
}

// Value at u = q^{-1}, i.e. s = 1.
inline ExactValue l_value_at_one(const LPolynomial& L) {
    int D = (int)std::max(L.coeffs.size(), L.denom.size()) - 1;
    auto eval = [&](const std::vector<CycloInt>& c) {
        CycloInt s(L.p, L.m);
        for (size_t k = 0; k < c.size(); ++k) s += c[k].scale(ipow(L.q, D - (int)k));
        return s;
    };
    return ExactValue{eval(L.coeffs), eval(L.denom)};
}

// ---- Gauss sums ----------------------------------------------------------

// Residue-trace additive character exponent: Tr_{F_q/F_p}(coefficient of t^{kd-1}).
inline int residue_trace(const GF& F, const Poly& x, int top) {
    int c = top < (int)x.size() ? x[(size_t)top] : 0;
    int tr = 0, y = c;
    for (int i = 0; i < F.n(); ++i) {
        tr = F.add(tr, y);
        y = F.frob(y);
    }
    return tr;  // lies in F_p
}

struct GaussSum {
    CycloInt value;  // in Z[zeta_{p^m}], m = max(n, 1)
    Divisor conductor;
};

// tau_omega with the differential idele of dt (a_inf = pi_inf^{-2}) and the
// additive character x -> zeta_p^{Tr Res(a x dt)}, a a nonzero element of F_q.
inline GaussSum gauss_sum(const LevelGroup& G, const RayCharacter& w, int a = 1) {
    const int p = G.p(), n = G.n(), m = std::max(n, 1);
    const i64 pm = ipow(p, m), up = ipow(p, m - n);
    const GF& F = G.F();
    if (a == 0) throw std::invalid_argument("gauss_sum: zero scalar");
    Divisor cond = G.conductor(w);
    GaussSum out{CycloInt(p, m, 1), cond};
    out.value = CycloInt::zeta_pow(p, m, G.pair(w, G.scale(G.class_of_place(Place::inf()), 2)) * up);
    for (auto& [v, k] : cond) {
        i64 e0 = mod(-(i64)k * G.pair(w, G.uniformizer_class(v)), G.pn());
        int top = k * v.degree;
        std::vector<i64> raw((size_t)pm, 0);
        i64 total = ipow(F.size(), top);
        for (i64 idx = 0; idx < total; ++idx) {
            Poly x;
            i64 t = idx;
            for (int i = 0; i < top; ++i) { x.push_back((int)(t % F.size())); t /= F.size(); }
            poly::trim(x);
            if (x.empty() || poly::rem(F, x, v.poly).empty()) continue;
            i64 e = mod(e0 + G.pair(w, G.local_unit_class(v, x)), G.pn()) * up;
            int tr = residue_trace(F, poly::scale(F, x, a), top - 1);
            e = mod(e + (i64)tr * ipow(p, m - 1), pm);
            raw[(size_t)e] += 1;
        }
        out.value = out.value * CycloInt::from_cyclic(p, m, raw);
    }
    return out;
}

// ---- classical functional equation ----------------------------------------

struct FEReport {
    bool pass = false;
    int degree = 0;
    int first_mismatch = -1;
    std::string detail;
};

// Checks q^{k+1} c_{d-k}(omega^{-1}) = tau_omega c_k(omega) for k = 0..d, d = deg D_omega - 2.
inline FEReport check_classical_fe(EulerSource& classical, const LevelGroup& G, const RayCharacter& w, bool throw_on_fail = false) {
    if (!classical.classical()) throw std::invalid_argument("check_classical_fe: needs the classical source");
    Divisor cond = G.conductor(w);
    if (cond.empty()) throw std::invalid_argument("check_classical_fe: omega must be ramified");
    int d = divisor::degree(cond) - 2;
    FEReport rep;
    rep.degree = d;
    TwistedSums T(classical, G, std::max(d + 2, 1));
    auto L = l_polynomial(T, w);
    auto Li = l_polynomial(T, G.inverse(w));
    auto tau = gauss_sum(G, w).value;
    const int m = tau.m();
    for (int k = 0; k <= d; ++k) {
        CycloInt lhs = Li.coeffs[(size_t)(d - k)].lift(m).scale(ipow(G.q(), k + 1));
        CycloInt rhs = tau * L.coeffs[(size_t)k].lift(m);
        if (!(lhs == rhs)) {
            rep.first_mismatch = k;
            rep.detail = "coefficient " + std::to_string(k) + ": " + lhs.str() + " vs " + rhs.str();
            if (throw_on_fail) throw FEViolation(rep.detail);
            return rep;
        }
    }
    rep.pass = true;
    return rep;
}

// ---- base change ----------------------------------------------------------

struct BaseChangeReport {
    std::vector<CycloInt> product;  // prod_chi L_{A/K}(omega chi, u)
    int degree = 0;
    int predicted = 0;
    int genus = 0;  // of K'
};

// L_{A/K'}(omega) as the product over the characters chi of Gamma/Phi (powers of
// psi, of order p) of L_{A/K}(omega~ chi). Its degree is compared with the one
// computed on K' from the reduction of A over K', conductor-discriminant and
// Riemann-Hurwitz.
inline BaseChangeReport base_change_product(const TwistedSums& T, const RayCharacter& wt, const RayCharacter& psi) {
    const LevelGroup& G = T.group();
    EulerSource& src = T.source();
    const int p = G.p();
    if (G.is_trivial(psi) || G.order_exp(psi) != 1) throw std::invalid_argument("base_change_product: psi must have order p");
    BaseChangeReport rep;
    std::vector<CycloInt> prod = {CycloInt(p, G.n(), 1)};
    std::vector<Divisor> conds;
    RayCharacter chi{std::vector<i64>(psi.w.size(), 0)};
    int disc = 0, ram_part = 0;
    for (int j = 0; j < p; ++j) {
        auto wc = G.multiply(wt, chi);
        auto L = l_polynomial(T, wc);
        prod = poly_mul(prod, L.coeffs);
        rep.degree += L.degree;
        conds.push_back(G.conductor(wc));
        ram_part += 2 * divisor::degree(conds.back());
        disc += divisor::degree(G.conductor(chi));
        chi = G.multiply(chi, psi);
    }
    while (prod.size() > 1 && prod.back().is_zero()) prod.pop_back();
    rep.product = prod;
    if ((int)prod.size() - 1 != rep.degree) throw ConductorMismatch("product degree differs from the sum of degrees");
    rep.genus = (disc - 2 * p + 2) / 2;
    if (src.classical() || src.curve()->constant()) {
        rep.predicted = rep.degree;
        return rep;
    }
    // places w of K' over bad v where omega is unramified; omega is ramified at w
    // exactly when every omega~ chi is ramified at v
    int bad_part = 0;
    for (auto& [v, D] : src.bad()) {
        int fv = is_multiplicative(D.type) ? 1 : 2;
        bool all_ram = true;
        for (auto& c : conds)
            if (divisor::ord(c, v) == 0) all_ram = false;
        if (all_ram) continue;
        bool ram_in_Kp = divisor::ord(G.conductor(psi), v) > 0;
        bad_part += fv * (ram_in_Kp ? v.degree : p * v.degree);
    }
    // deg N' + 2 deg D'_omega + 4 kappa' - 4, with 2 deg D'_omega = 2 deg Nm D'_omega - 2 deg Disc
    rep.predicted = bad_part + (ram_part - 2 * disc) + 4 * (rep.genus - 1);
    if (rep.predicted != rep.degree)
        throw ConductorMismatch("predicted " + std::to_string(rep.predicted) + " vs product degree " + std::to_string(rep.degree));
    return rep;
}

} // namespace padicl
