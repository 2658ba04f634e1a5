#pragma once

// p-power quotients of the ray class groups W_D of F_q(t), Artin classes,
// characters, conductors and Z_p^d-tower presentations.
//
// Model: W_D = Z x (F_q[t]/D)^* / F_q^*, the Z coordinate being the degree.
// After killing prime-to-p parts and p^n-th powers, the group is
//   Z/p^n  x  prod_{v in D}  U^1_v / U^{e_v}  (tensor Z/p^n),
// and U^1_v/U^{e_v} = prod_{p not | j < e_v} prod_{k < f_v} Z/p^{s(j)} via the
// generators g_{jk} = 1 + w_k pi^j, where w_k = g^k runs over the power basis of
// the residue field and s(j) is the least s with j p^s >= e_v.

#include <algorithm>
#include <functional>
#include <set>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "funfield.hpp"
#include "padic.hpp"

namespace padicl {

// Effective divisor supported on finite places, sorted, positive exponents.
using Divisor = std::vector<std::pair<Place, int>>;

namespace divisor {

inline Divisor normalize(Divisor D) {
    std::map<Place, int> m;
    for (auto& [v, e] : D) {
        if (v.infinite) throw std::invalid_argument("divisor: infinity not allowed in a modulus");
        m[v] += e;
    }
    Divisor out;
    for (auto& [v, e] : m)
        if (e > 0) out.push_back({v, e});
    return out;
}
inline int ord(const Divisor& D, const Place& v) {
    for (auto& [w, e] : D)
        if (w == v) return e;
    return 0;
}
inline int degree(const Divisor& D) {
    int s = 0;
    for (auto& [v, e] : D) s += e * v.degree;
    return s;
}
inline bool leq(const Divisor& A, const Divisor& B) {
    for (auto& [v, e] : A)
        if (ord(B, v) < e) return false;
    return true;
}
inline Divisor add(const Divisor& A, const Divisor& B) {
    Divisor C = A;
    C.insert(C.end(), B.begin(), B.end());
    return normalize(C);
}
inline Divisor sub(const Divisor& A, const Divisor& B) {
    Divisor C = A;
    for (auto& [v, e] : B) C.push_back({v, -e});
    std::map<Place, int> m;
    for (auto& [v, e] : C) m[v] += e;
    Divisor out;
    for (auto& [v, e] : m) {
        if (e < 0) throw std::invalid_argument("divisor::sub: result not effective");
        if (e > 0) out.push_back({v, e});
    }
    return out;
}
inline std::vector<Place> support(const Divisor& D) {
    std::vector<Place> s;
    for (auto& [v, e] : D) s.push_back(v);
    return s;
}
inline std::string str(const Divisor& D) {
    if (D.empty()) return "0";
    std::string s;
    for (auto& [v, e] : D) {
        if (!s.empty()) s += "+";
        s += (e == 1 ? "" : std::to_string(e)) + v.str();
    }
    return s;
}
// All effective divisors D' <= D.
inline std::vector<Divisor> sub_divisors(const Divisor& D) {
    std::vector<Divisor> out{{}};
    for (auto& [v, e] : D) {
        std::vector<Divisor> next;
        for (auto& base : out)
            for (int k = 0; k <= e; ++k) {
                Divisor x = base;
                if (k) x.push_back({v, k});
                next.push_back(x);
            }
        out = std::move(next);
    }
    for (auto& x : out) x = normalize(x);
    return out;
}

} // namespace divisor

// Least s with j p^s >= e (e >= 1, j >= 1).
inline int s_level(int j, int e, int p) {
    int s = 0;
    i64 x = j;
    while (x < e) { x *= p; ++s; }
    return s;
}

// Truncated power series over a finite field.
namespace series {
using S = std::vector<int>;
inline S mul(const GF& B, const S& a, const S& b, int e) {
    S r((size_t)e, 0);
    for (int i = 0; i < e && i < (int)a.size(); ++i) {
        if (!a[(size_t)i]) continue;
        for (int j = 0; i + j < e && j < (int)b.size(); ++j)
            if (b[(size_t)j]) r[(size_t)(i + j)] = B.add(r[(size_t)(i + j)], B.mul(a[(size_t)i], b[(size_t)j]));
    }
    return r;
}
inline S inv(const GF& B, const S& a, int e) {
    S r((size_t)e, 0);
    int i0 = B.inv(a[0]);
    r[0] = i0;
    for (int k = 1; k < e; ++k) {
        int s = 0;
        for (int j = 1; j <= k && j < (int)a.size(); ++j) s = B.add(s, B.mul(a[(size_t)j], r[(size_t)(k - j)]));
        r[(size_t)k] = B.neg(B.mul(s, i0));
    }
    return r;
}
} // namespace series

// Local data at a finite place: residue field F_v = F_{p^f}, the expansion of t
// in F_v[[pi]] with pi = P_v(t), truncated at pi^e.
struct LocalExpansion {
    Place place;
    int e = 0;
    int f = 0;  // [F_v : F_p]
    const GF* B = nullptr;
    const std::vector<int>* emb = nullptr;  // F_q -> F_v
    series::S T;                            // t as a series in pi

    LocalExpansion() = default;
    LocalExpansion(int p, int r, const Place& v, int e_) : place(v), e(e_) {
        ResidueField R = residue_field(p, r, v);
        B = R.B;
        emb = R.emb;
        f = B->n();
        Poly P;
        for (int c : v.poly) P.push_back((*emb)[(size_t)c]);
        Poly dP = poly::derivative(*B, P);
        T.assign((size_t)e, 0);
        T[0] = R.t0;
        // Newton on P(T) = pi
        for (int it = 0; (1 << it) <= 2 * e + 2; ++it) {
            series::S PT = eval_series(P), dPT = eval_series(dP);
            if (e > 1) PT[1] = B->sub(PT[1], 1);
            series::S corr = series::mul(*B, PT, series::inv(*B, dPT, e), e);
            for (int i = 0; i < e; ++i) T[(size_t)i] = B->sub(T[(size_t)i], corr[(size_t)i]);
        }
    }
    // polynomial over F_v evaluated at T
    series::S eval_series(const Poly& g) const {
        series::S r((size_t)e, 0);
        for (int i = (int)g.size() - 1; i >= 0; --i) {
            r = series::mul(*B, r, T, e);
            r[0] = B->add(r[0], g[(size_t)i]);
        }
        return r;
    }
    // polynomial over F_q mapped into F_v[[pi]]/pi^e
    series::S expand(const GF& F, const Poly& g) const {
        Poly h = g;
        if (poly::deg(h) >= e * place.degree) h = poly::rem(F, h, poly::pow(F, place.poly, e));
        Poly gb;
        for (int c : h) gb.push_back((*emb)[(size_t)c]);
        return eval_series(gb);
    }
};

// Coordinates (c_{jk}) of the 1-unit part of a unit series u, c_{jk} mod p^{s(j)},
// ordered by j (p not dividing j, 1 <= j < e), then k.
inline std::vector<i64> one_unit_coords(const LocalExpansion& L, int p, series::S u) {
    const GF& B = *L.B;
    const int e = L.e, f = L.f;
    std::vector<int> js;
    for (int j = 1; j < e; ++j)
        if (j % p) js.push_back(j);
    std::vector<i64> c(js.size() * (size_t)f, 0);
    if (e <= 1) return c;
    if (u[0] == 0) throw NotCoprime("one_unit_coords: not a unit");
    int u0 = B.inv(u[0]);
    for (auto& x : u) x = B.mul(x, u0);
    std::map<int, size_t> jpos;
    for (size_t i = 0; i < js.size(); ++i) jpos[js[i]] = i;
    for (int i = 1; i < e; ++i) {
        int b = u[(size_t)i];
        if (!b) continue;
        int j = i, s = 0;
        while (j % p == 0) { j /= p; ++s; }
        // b in the basis w_k^{p^s}: digits of Frob^{-s}(b)
        int back = (int)((f - s % f) % f);
        int bb = B.pow(b, ipow(p, back));
        i64 code = bb;
        for (int k = 0; k < f; ++k) {
            int ck = (int)(code % p);
            code /= p;
            if (!ck) continue;
            int a = B.pow(B.gen_pow(k), ipow(p, s));
            // divide u by (1 + a pi^i)^{ck}
            series::S g((size_t)e, 0);
            g[0] = 1;
            g[(size_t)i] = a;
            series::S gi = series::inv(B, g, e);
            for (int r = 0; r < ck; ++r) u = series::mul(B, u, gi, e);
            c[jpos[j] * (size_t)f + (size_t)k] += (i64)ck * ipow(p, s);
        }
    }
    for (int i = 1; i < e; ++i)
        if (u[(size_t)i]) throw std::logic_error("one_unit_coords: elimination failed");
    for (size_t a = 0; a < js.size(); ++a)
        for (int k = 0; k < f; ++k) c[a * (size_t)f + (size_t)k] = mod(c[a * (size_t)f + (size_t)k], ipow(p, s_level(js[a], e, p)));
    return c;
}

// Generator descriptor: the degree, or g_{jk} at a place.
struct GenKey {
    bool is_degree = true;
    Place place;
    int j = 0, k = 0;

    static GenKey degree() { return GenKey{}; }
    static GenKey unit(const Place& v, int j, int k) { return GenKey{false, v, j, k}; }
    friend bool operator==(const GenKey& a, const GenKey& b) {
        return a.is_degree == b.is_degree && (a.is_degree || (a.place == b.place && a.j == b.j && a.k == b.k));
    }
    friend bool operator<(const GenKey& a, const GenKey& b) {
        if (a.is_degree != b.is_degree) return a.is_degree;
        if (a.is_degree) return false;
        if (a.place != b.place) return a.place < b.place;
        if (a.j != b.j) return a.j < b.j;
        return a.k < b.k;
    }
    std::string str() const {
        return is_degree ? "deg" : "u" + place.str() + "[" + std::to_string(j) + "," + std::to_string(k) + "]";
    }
};

// A character omega(x) = zeta_{p^n}^{sum_i w_i x_i}, with w_i p^{exp_i} = 0 mod p^n.
struct RayCharacter {
    std::vector<i64> w;
    friend bool operator==(const RayCharacter& a, const RayCharacter& b) { return a.w == b.w; }
};

class LevelGroup {
public:
    using Elt = std::vector<i64>;

    LevelGroup(int p, i64 q, Divisor D, int n) : p_(p), q_(q), n_(n), D_(divisor::normalize(std::move(D))) {
        if (n < 0) throw std::invalid_argument("LevelGroup: n >= 0");
        auto [pp, r] = prime_power(q);
        if (pp != p) throw std::invalid_argument("LevelGroup: p must divide q");
        r_ = r;
        if (n_ > 0) {
            keys_.push_back(GenKey::degree());
            exps_.push_back(n_);
        }
        for (auto& [v, e] : D_) {
            local_.emplace_back(p, r, v, e);
            int f = local_.back().f;
            for (int j = 1; j < e; ++j) {
                if (j % p == 0) continue;
                int s = std::min(s_level(j, e, p), n_);
                for (int k = 0; k < f; ++k) {
                    if (s > 0) {
                        keys_.push_back(GenKey::unit(v, j, k));
                        exps_.push_back(s);
                    }
                }
            }
        }
        size_ = 1;
        for (int e : exps_) size_ *= ipow(p, e);
        pn_ = ipow(p, n_);
    }

    int p() const { return p_; }
    i64 q() const { return q_; }
    int n() const { return n_; }
    const Divisor& modulus() const { return D_; }
    const std::vector<GenKey>& keys() const { return keys_; }
    const std::vector<int>& exps() const { return exps_; }
    int rank() const { return (int)exps_.size(); }
    i64 size() const { return size_; }
    i64 pn() const { return pn_; }
    const GF& F() const { return field(p_, r_); }

    Elt zero() const { return Elt(exps_.size(), 0); }
    Elt reduce(Elt a) const {
        for (size_t i = 0; i < a.size(); ++i) a[i] = mod(a[i], ipow(p_, exps_[i]));
        return a;
    }
    Elt add(const Elt& a, const Elt& b) const {
        Elt c(a.size());
        for (size_t i = 0; i < a.size(); ++i) c[i] = mod(a[i] + b[i], ipow(p_, exps_[i]));
        return c;
    }
    Elt neg(const Elt& a) const { return scale(a, -1); }
    Elt scale(const Elt& a, i64 k) const {
        Elt c(a.size());
        for (size_t i = 0; i < a.size(); ++i) c[i] = mod((i128)a[i] * mod(k, ipow(p_, exps_[i])) % ipow(p_, exps_[i]), ipow(p_, exps_[i]));
        return c;
    }
    i64 index(const Elt& a) const {
        i64 idx = 0;
        for (size_t i = a.size(); i-- > 0;) idx = idx * ipow(p_, exps_[i]) + a[i];
        return idx;
    }
    Elt element(i64 idx) const {
        Elt a(exps_.size());
        for (size_t i = 0; i < a.size(); ++i) {
            i64 m = ipow(p_, exps_[i]);
            a[i] = idx % m;
            idx /= m;
        }
        return a;
    }
    int key_index(const GenKey& k) const {
        for (size_t i = 0; i < keys_.size(); ++i)
            if (keys_[i] == k) return (int)i;
        return -1;
    }

    bool coprime(const Poly& f) const {
        for (auto& [v, e] : D_)
            if (poly::rem(F(), f, v.poly).empty()) return false;
        return true;
    }

    // Unit coordinates of f at the i-th place of the modulus (full precision p^{s(j)}).
    std::vector<i64> unit_coords_at(size_t i, const Poly& f) const {
        return one_unit_coords(local_[i], p_, local_[i].expand(F(), f));
    }

    // Class of (deg, unit part): unit part contributes sign * coords of f at each
    // place of the modulus except `skip`.
    Elt from_poly_parts(i64 deg, const Poly& f, int sign, int skip = -1) const {
        Elt x = zero();
        size_t pos = 0;
        if (n_ > 0) x[pos++] = mod(deg, pn_);
        for (size_t i = 0; i < local_.size(); ++i) {
            const auto& L = local_[i];
            std::vector<i64> c;
            if ((int)i != skip) c = unit_coords_at(i, f);
            size_t ci = 0;
            for (int j = 1; j < L.e; ++j) {
                if (j % p_ == 0) continue;
                int s = std::min(s_level(j, L.e, p_), n_);
                for (int k = 0; k < L.f; ++k, ++ci) {
                    if (s <= 0) continue;
                    if ((int)i != skip) x[pos] = mod(sign * c[ci], ipow(p_, s));
                    ++pos;
                }
            }
        }
        return x;
    }

    // Artin class of a nonzero polynomial coprime to the modulus.
    Elt class_of_poly(const Poly& f) const {
        if (f.empty()) throw std::invalid_argument("class_of_poly: zero");
        if (!coprime(f)) throw NotCoprime("class_of_poly: " + poly::str(f) + " not coprime to " + divisor::str(D_));
        return from_poly_parts(poly::deg(f), f, +1);
    }
    // [v]_D for a place not in the support of D; [inf] = (1, 1).
    Elt class_of_place(const Place& v) const {
        if (v.infinite) {
            Elt x = zero();
            if (n_ > 0) x[0] = 1;
            return x;
        }
        return class_of_poly(v.poly);
    }
    // Class of the idele with component P_v at a place v of the modulus.
    Elt uniformizer_class(const Place& v) const {
        int i = place_index(v);
        if (i < 0) return class_of_place(v);
        return from_poly_parts(v.degree, v.poly, +1, i);
    }
    // Class of a local unit at a place of the modulus, given by a polynomial prime to v.
    Elt local_unit_class(const Place& v, const Poly& u) const {
        int i = place_index(v);
        if (i < 0) return zero();
        Elt x = zero();
        auto c = unit_coords_at((size_t)i, u);
        size_t ci = 0;
        const auto& L = local_[(size_t)i];
        for (int j = 1; j < L.e; ++j) {
            if (j % p_ == 0) continue;
            int s = std::min(s_level(j, L.e, p_), n_);
            for (int k = 0; k < L.f; ++k, ++ci) {
                if (s <= 0) continue;
                int pos = key_index(GenKey::unit(v, j, k));
                x[(size_t)pos] = mod(-c[ci], ipow(p_, s));
            }
        }
        return x;
    }
    // Image of the local unit generator g_{jk} at v (local units map with a sign).
    Elt unit_generator(const Place& v, int j, int k) const {
        Elt x = zero();
        int pos = key_index(GenKey::unit(v, j, k));
        if (pos >= 0) x[(size_t)pos] = mod(-1, ipow(p_, exps_[(size_t)pos]));
        return x;
    }
    int place_index(const Place& v) const {
        for (size_t i = 0; i < D_.size(); ++i)
            if (D_[i].first == v) return (int)i;
        return -1;
    }
    const LocalExpansion& local(size_t i) const { return local_[i]; }

    // Projection to a group of smaller modulus and level.
    Elt project(const LevelGroup& T, const Elt& x) const {
        if (!divisor::leq(T.D_, D_) || T.n_ > n_) throw IncompatibleLevels("project: target not below source");
        Elt y = T.zero();
        for (size_t i = 0; i < keys_.size(); ++i) {
            int pos = T.key_index(keys_[i]);
            if (pos < 0) continue;
            y[(size_t)pos] = mod(x[i], ipow(p_, T.exps_[(size_t)pos]));
        }
        return y;
    }

    // ---- characters ----
    i64 pair(const RayCharacter& w, const Elt& x) const {
        i128 s = 0;
        for (size_t i = 0; i < x.size(); ++i) s += (i128)w.w[i] * x[i];
        return mod128(s, pn_);
    }
    CycloElt value(const RayCharacter& w, const Elt& x, int prec) const {
        return CycloElt::zeta_pow(p_, n_, pair(w, x), prec);
    }
    std::vector<RayCharacter> characters() const {
        std::vector<RayCharacter> out;
        for (i64 idx = 0; idx < size_; ++idx) {
            Elt a = element(idx);
            RayCharacter w;
            for (size_t i = 0; i < a.size(); ++i) w.w.push_back(a[i] * ipow(p_, n_ - exps_[i]));
            out.push_back(w);
        }
        return out;
    }
    bool is_trivial(const RayCharacter& w) const {
        for (auto x : w.w)
            if (mod(x, pn_)) return false;
        return true;
    }
    RayCharacter inverse(const RayCharacter& w) const {
        RayCharacter r;
        for (auto x : w.w) r.w.push_back(mod(-x, pn_));
        return r;
    }
    RayCharacter multiply(const RayCharacter& a, const RayCharacter& b) const {
        RayCharacter r;
        for (size_t i = 0; i < a.w.size(); ++i) r.w.push_back(mod(a.w[i] + b.w[i], pn_));
        return r;
    }
    // Order exponent: omega has order p^{order_exp}.
    int order_exp(const RayCharacter& w) const {
        int m = 0;
        for (auto x : w.w)
            if (mod(x, pn_)) m = std::max(m, n_ - vp(mod(x, pn_), p_));
        return m;
    }
    // Pull back a character of a smaller group T (modulus <= D, level <= n).
    RayCharacter pullback(const LevelGroup& T, const RayCharacter& w) const {
        RayCharacter r;
        r.w.assign(keys_.size(), 0);
        for (size_t i = 0; i < keys_.size(); ++i) {
            int pos = T.key_index(keys_[i]);
            if (pos >= 0) r.w[i] = mod(w.w[(size_t)pos] * ipow(p_, n_ - T.n_), pn_);
        }
        return r;
    }
    // Conductor exponent of omega at the i-th place of the modulus.
    int conductor_exp(const RayCharacter& w, size_t i) const {
        const auto& [v, e] = D_[i];
        for (int e2 = 0; e2 <= e; ++e2) {
            if (e2 == 1) continue;
            bool trivial = true;
            for (size_t a = 0; a < keys_.size() && trivial; ++a) {
                const auto& k = keys_[a];
                if (k.is_degree || k.place != v) continue;
                int s = e2 == 0 ? 0 : s_level(k.j, e2, p_);
                if (mod((i128)w.w[a] * ipow(p_, std::min(s, n_)) % pn_, pn_) != 0) trivial = false;
            }
            if (trivial) return e2;
        }
        return e;
    }
    Divisor conductor(const RayCharacter& w) const {
        Divisor c;
        for (size_t i = 0; i < D_.size(); ++i) {
            int e = conductor_exp(w, i);
            if (e) c.push_back({D_[i].first, e});
        }
        return c;
    }
    // The same character on the group of its conductor (same level).
    RayCharacter restrict_to(const LevelGroup& T, const RayCharacter& w) const {
        RayCharacter r;
        r.w.assign(T.keys_.size(), 0);
        for (size_t i = 0; i < keys_.size(); ++i) {
            int pos = T.key_index(keys_[i]);
            if (pos >= 0) r.w[(size_t)pos] = w.w[i];
            else if (mod(w.w[i], pn_)) throw IncompatibleLevels("restrict_to: character does not factor");
        }
        if (T.n_ != n_) throw IncompatibleLevels("restrict_to: level mismatch");
        return r;
    }

private:
    int p_, r_ = 1;
    i64 q_;
    int n_;
    Divisor D_;
    std::vector<LocalExpansion> local_;
    std::vector<GenKey> keys_;
    std::vector<int> exps_;
    i64 size_ = 1, pn_ = 1;
};

inline LevelGroup level_group(const Divisor& D, int p, i64 q, int n) { return LevelGroup(p, q, D, n); }

// ---- small linear algebra over Z/p^n ----------------------------------------

// Invariants of the subgroup of (Z/p^n)^d generated by the given vectors:
// returns exponents a_i with subgroup = prod Z/p^{a_i} (zeros dropped).
inline std::vector<int> subgroup_invariants(std::vector<std::vector<i64>> gens, int p, int n) {
    i64 pn = ipow(p, n);
    std::vector<int> out;
    if (gens.empty()) return out;
    size_t d = gens[0].size();
    for (auto& g : gens)
        for (auto& x : g) x = mod(x, pn);
    size_t row = 0;
    for (size_t col = 0; col < d && row < gens.size(); ++col) {
        // pick the row with the minimal valuation in remaining columns
        int best = n + 1;
        size_t br = 0, bc = 0;
        for (size_t r = row; r < gens.size(); ++r)
            for (size_t c = 0; c < d; ++c)
                if (gens[r][c]) {
                    int v = vp(gens[r][c], p);
                    if (v < best) { best = v; br = r; bc = c; }
                }
        if (best > n - 1) break;
        std::swap(gens[row], gens[br]);
        for (auto& g : gens) std::swap(g[col], g[bc]);
        i64 piv = gens[row][col];
        i64 unit = piv / ipow(p, best);
        i64 uinv = invmod(mod(unit, pn), pn);
        for (size_t r = 0; r < gens.size(); ++r) {
            if (r == row || !gens[r][col]) continue;
            i64 factor = mulmod(gens[r][col] / ipow(p, best), uinv, pn);
            for (size_t c = 0; c < d; ++c) gens[r][c] = mod(gens[r][c] - mulmod(factor, gens[row][c], pn), pn);
        }
        // column elimination is implicit: the subgroup is generated by the rows
        for (size_t c = 0; c < d; ++c) {
            if (c == col || !gens[row][c]) continue;
            i64 factor = mulmod(gens[row][c] / ipow(p, best), uinv, pn);
            for (size_t r = 0; r < gens.size(); ++r) gens[r][c] = mod(gens[r][c] - mulmod(factor, gens[r][col], pn), pn);
        }
        out.push_back(n - best);
        ++row;
    }
    return out;
}

// Rank over F_p of a list of vectors.
inline int rank_mod_p(std::vector<std::vector<i64>> rows, int p) {
    if (rows.empty()) return 0;
    size_t d = rows[0].size();
    int rk = 0;
    for (size_t c = 0; c < d; ++c) {
        size_t piv = rows.size();
        for (size_t r = (size_t)rk; r < rows.size(); ++r)
            if (mod(rows[r][c], p)) { piv = r; break; }
        if (piv == rows.size()) continue;
        std::swap(rows[(size_t)rk], rows[piv]);
        i64 inv = invmod(mod(rows[(size_t)rk][c], p), p);
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r == (size_t)rk) continue;
            i64 fct = mod(rows[r][c] * inv, p);
            if (!fct) continue;
            for (size_t k = 0; k < d; ++k) rows[r][k] = mod(rows[r][k] - fct * rows[(size_t)rk][k], p);
        }
        ++rk;
    }
    return rk;
}

// ---- towers --------------------------------------------------------------

using GammaElt = std::vector<i64>;  // element of (Z/p^n)^d

// A Z_p^d quotient of the pro-p ray class group unramified outside S, given by
// the images of canonical generators (integer vectors, read in Z_p^d).
struct TowerSpec {
    int p = 0;
    i64 q = 0;
    int d = 0;
    std::vector<Place> S;
    std::map<GenKey, std::vector<i64>> images;

    static TowerSpec trivial(int p, i64 q) { return TowerSpec{p, q, 0, {}, {}}; }
    static TowerSpec constant(int p, i64 q) {
        TowerSpec T{p, q, 1, {}, {}};
        T.images[GenKey::degree()] = {1};
        return T;
    }
    // d = 1 tower ramified only at v, cut from the 1-unit generator g_{jk} at v.
    static TowerSpec cyclotomic_at(int p, i64 q, const Place& v, int j = 1, int k = 0) {
        TowerSpec T{p, q, 1, {v}, {}};
        T.images[GenKey::unit(v, j, k)] = {1};
        return T;
    }
    // Direct sum of towers (coordinates concatenated).
    static TowerSpec product(const TowerSpec& A, const TowerSpec& B) {
        TowerSpec T{A.p, A.q, A.d + B.d, A.S, {}};
        for (auto& v : B.S)
            if (std::find(T.S.begin(), T.S.end(), v) == T.S.end()) T.S.push_back(v);
        std::sort(T.S.begin(), T.S.end());
        std::set<GenKey> keys;
        for (auto& [k, x] : A.images) keys.insert(k);
        for (auto& [k, x] : B.images) keys.insert(k);
        for (auto& k : keys) {
            std::vector<i64> img((size_t)T.d, 0);
            if (auto it = A.images.find(k); it != A.images.end())
                for (int i = 0; i < A.d; ++i) img[(size_t)i] = it->second[(size_t)i];
            if (auto it = B.images.find(k); it != B.images.end())
                for (int i = 0; i < B.d; ++i) img[(size_t)(A.d + i)] = it->second[(size_t)i];
            T.images[k] = img;
        }
        return T;
    }
    // Sub-tower L' given by an e x d integer matrix A (Gamma -> Gamma').
    TowerSpec sub_tower(const std::vector<std::vector<i64>>& A) const {
        int e = (int)A.size();
        TowerSpec T{p, q, e, {}, {}};
        std::set<Place> Sp;
        for (auto& [k, x] : images) {
            std::vector<i64> img((size_t)e, 0);
            bool nz = false;
            for (int i = 0; i < e; ++i) {
                for (int j = 0; j < d; ++j) img[(size_t)i] += A[(size_t)i][(size_t)j] * x[(size_t)j];
                if (img[(size_t)i]) nz = true;
            }
            if (!nz) continue;
            T.images[k] = img;
            if (!k.is_degree) Sp.insert(k.place);
        }
        T.S.assign(Sp.begin(), Sp.end());
        return T;
    }

    // Modulus needed at level n: e_v(n) = max (j p^{n - v_p(image) - 1} + 1).
    Divisor modulus(int n) const {
        std::map<Place, int> e;
        for (auto& [k, x] : images) {
            if (k.is_degree) continue;
            int v = n;
            for (auto c : x)
                if (c) v = std::min(v, vp(c, p));
            int need = n - v;
            if (need <= 0) continue;
            int ev = (int)(k.j * ipow(p, need - 1) + 1);
            e[k.place] = std::max(e[k.place], ev);
        }
        Divisor D;
        for (auto& [v, x] : e) D.push_back({v, x});
        return divisor::normalize(D);
    }
};

struct TowerLevel {
    TowerSpec spec;
    int n = 0;
    LevelGroup G;
    std::vector<std::vector<i64>> M;  // per generator of G: image in (Z/p^n)^d
    i64 pn = 1;

    TowerLevel(const TowerSpec& T, int n_)
        : spec(T), n(n_), G(T.p, T.q, T.modulus(n_), n_), pn(ipow(T.p, n_)) {
        for (auto& [k, x] : T.images)
            if (!k.is_degree && std::find(T.S.begin(), T.S.end(), k.place) == T.S.end())
                throw std::invalid_argument("TowerSpec: generator at a place outside S");
        for (auto& v : T.S)
            if (v.infinite) throw std::invalid_argument("TowerSpec: infinity must not ramify");
        for (size_t i = 0; i < G.keys().size(); ++i) {
            std::vector<i64> img((size_t)T.d, 0);
            if (auto it = T.images.find(G.keys()[i]); it != T.images.end())
                for (int l = 0; l < T.d; ++l) img[(size_t)l] = mod(it->second[(size_t)l], pn);
            for (auto c : img)
                if (mod((i128)c * ipow(T.p, G.exps()[i]) % pn, pn) != 0)
                    throw IncompatibleLevels("tower map not well defined on " + G.keys()[i].str());
            M.push_back(img);
        }
        for (auto& [k, x] : T.images)
            if (G.key_index(k) < 0) {
                for (auto c : x)
                    if (mod(c, pn)) throw IncompatibleLevels("generator " + k.str() + " missing at level " + std::to_string(n));
            }
        if (n > 0 && rank_mod_p(M, T.p) < T.d) throw NotSurjective("tower map is not surjective mod p");
    }

    int d() const { return spec.d; }
    int p() const { return spec.p; }
    i64 size() const { return ipow(pn, d()); }

    GammaElt image(const LevelGroup::Elt& x) const {
        GammaElt g((size_t)d(), 0);
        for (size_t i = 0; i < x.size(); ++i)
            for (int l = 0; l < d(); ++l) g[(size_t)l] = mod(g[(size_t)l] + (i128)x[i] * M[i][(size_t)l] % pn, pn);
        return g;
    }
    // Frobenius of a place outside S (or infinity).
    GammaElt frob(const Place& v) const { return image(G.class_of_place(v)); }
    // Image of the uniformizer idele P_v at a place of S.
    GammaElt uniformizer(const Place& v) const { return image(G.uniformizer_class(v)); }
    // Generators of the decomposition group of v.
    std::vector<GammaElt> decomposition_gens(const Place& v) const {
        std::vector<GammaElt> gens;
        bool inS = std::find(spec.S.begin(), spec.S.end(), v) != spec.S.end();
        if (!inS) return {frob(v)};
        gens.push_back(uniformizer(v));
        for (size_t i = 0; i < G.keys().size(); ++i) {
            const auto& k = G.keys()[i];
            if (!k.is_degree && k.place == v) gens.push_back(image(G.unit_generator(v, k.j, k.k)));
        }
        return gens;
    }
    std::vector<GammaElt> inertia_gens(const Place& v) const {
        std::vector<GammaElt> gens;
        for (size_t i = 0; i < G.keys().size(); ++i) {
            const auto& k = G.keys()[i];
            if (!k.is_degree && k.place == v) gens.push_back(image(G.unit_generator(v, k.j, k.k)));
        }
        return gens;
    }
    std::vector<int> decomposition_invariants(const Place& v) const {
        return subgroup_invariants(decomposition_gens(v), p(), n);
    }

    // index of Gamma elements (mixed radix, coordinate 0 fastest)
    i64 index(const GammaElt& g) const {
        i64 idx = 0;
        for (size_t i = g.size(); i-- > 0;) idx = idx * pn + mod(g[i], pn);
        return idx;
    }
    GammaElt element(i64 idx) const {
        GammaElt g((size_t)d());
        for (int i = 0; i < d(); ++i) { g[(size_t)i] = idx % pn; idx /= pn; }
        return g;
    }
    // Character of Gamma_n given by c: gamma -> zeta^{c.gamma}, pulled back to G.
    RayCharacter character(const std::vector<i64>& c) const {
        RayCharacter w;
        for (size_t i = 0; i < M.size(); ++i) {
            i128 s = 0;
            for (int l = 0; l < d(); ++l) s += (i128)c[(size_t)l] * M[i][(size_t)l];
            w.w.push_back(mod128(s, pn));
        }
        return w;
    }
};

inline TowerLevel tower_project(const TowerSpec& T, int n) { return TowerLevel(T, n); }

} // namespace padicl
