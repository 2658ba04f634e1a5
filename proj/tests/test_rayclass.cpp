#include <gtest/gtest.h>

#include <random>
#include <set>

#include "padicl/rayclass.hpp"

using namespace padicl;

namespace {

Place fin(Poly f) { return Place::finite(std::move(f)); }

Poly random_poly(std::mt19937_64& rng, int q, int maxdeg) {
    int d = (int)(rng() % (unsigned)(maxdeg + 1));
    Poly f((size_t)d + 1);
    for (auto& c : f) c = (int)(rng() % (unsigned)q);
    f.back() = 1 + (int)(rng() % (unsigned)(q - 1));
    return f;
}

Poly random_coprime(std::mt19937_64& rng, const GF& F, const LevelGroup& G, int maxdeg) {
    for (;;) {
        Poly f = random_poly(rng, F.size(), maxdeg);
        if (G.coprime(f)) return f;
    }
}

// Invariants (exponents) of a finite abelian p-group given by the counts
// c_k = #{x : p^k x = 0}.
std::multiset<int> invariants_from_counts(const std::vector<i64>& counts, int p) {
    // number of cyclic factors of order >= p^k is log_p(c_k / c_{k-1})
    std::multiset<int> inv;
    std::vector<int> ge;
    for (size_t k = 1; k < counts.size(); ++k) {
        int r = 0;
        i64 x = counts[k] / counts[k - 1];
        while (x > 1) { x /= p; ++r; }
        ge.push_back(r);
    }
    for (size_t k = 0; k < ge.size(); ++k) {
        int next = k + 1 < ge.size() ? ge[k + 1] : 0;
        for (int i = 0; i < ge[k] - next; ++i) inv.insert((int)k + 1);
    }
    return inv;
}

// Brute-force 1-units of F_q[t]/P^e: the p-group structure by orders.
std::multiset<int> one_unit_invariants_oracle(const GF& F, const Poly& P, int e, int maxk) {
    Poly Pe = poly::pow(F, P, e);
    int dP = poly::deg(P) * e;
    i64 total = ipow(F.size(), dP);
    std::vector<Poly> ones;
    for (i64 idx = 0; idx < total; ++idx) {
        Poly g;
        i64 x = idx;
        for (int i = 0; i < dP; ++i) { g.push_back((int)(x % F.size())); x /= F.size(); }
        poly::trim(g);
        Poly h = poly::sub(F, g, Poly{1});
        if (!poly::rem(F, h, P).empty()) continue;
        ones.push_back(g);
    }
    int p = F.p();
    std::vector<i64> counts;
    for (int k = 0; k <= maxk; ++k) {
        i64 c = 0;
        for (auto& g : ones) {
            Poly h = poly::powmod(F, g, ipow(p, k), Pe);
            if (h == Poly{1}) ++c;
        }
        counts.push_back(c);
    }
    return invariants_from_counts(counts, p);
}

} // namespace

TEST(RayClass, WorkedExamples) {
    LevelGroup G(3, 3, {{fin({0, 1}), 2}}, 1);
    EXPECT_EQ(G.size(), 9);
    EXPECT_EQ(G.exps(), (std::vector<int>{1, 1}));

    LevelGroup G0(5, 5, {}, 3);
    EXPECT_EQ(G0.size(), 125);
    EXPECT_EQ(G0.rank(), 1);

    LevelGroup G1(3, 3, {{fin({0, 1}), 1}}, 1);
    EXPECT_EQ(G1.size(), 3);

    // t^3 + 2t^2 + 1 is 1 mod t^2 and has degree 3
    EXPECT_EQ(G.class_of_poly({1, 0, 2, 1}), G.zero());
    // t - 1 normalizes to 1 + 2t
    EXPECT_EQ(G.class_of_poly({2, 1}), (LevelGroup::Elt{1, 2}));
    EXPECT_THROW(G.class_of_poly({0, 1}), NotCoprime);
    EXPECT_EQ(G.class_of_place(Place::inf()), (LevelGroup::Elt{1, 0}));
}

TEST(RayClass, OneUnitStructureMatchesEnumeration) {
    struct Case { int p, r; Poly P; int e; };
    std::vector<Case> cases = {
        {3, 1, {0, 1}, 2}, {3, 1, {0, 1}, 3}, {3, 1, {0, 1}, 4}, {3, 1, {0, 1}, 5}, {3, 1, {0, 1}, 7},
        {5, 1, {1, 1}, 3}, {5, 1, {0, 1}, 6}, {3, 1, {1, 0, 1}, 2}, {3, 1, {1, 0, 1}, 3},
        {3, 2, {0, 1}, 3}, {2, 1, {0, 1}, 5}, {2, 1, {1, 1, 1}, 3}, {7, 1, {3, 1}, 3},
    };
    for (auto& c : cases) {
        const GF& F = field(c.p, c.r);
        Place v = fin(c.P);
        LevelGroup G(c.p, F.size(), {{v, c.e}}, 20);
        std::multiset<int> ours;
        for (size_t i = 1; i < G.exps().size(); ++i) ours.insert(G.exps()[i]);
        int maxk = 0;
        while (ipow(c.p, maxk) < c.e) ++maxk;
        EXPECT_EQ(ours, one_unit_invariants_oracle(F, c.P, c.e, maxk + 1)) << c.p << "^" << c.r << " e=" << c.e;
    }
}

TEST(RayClass, CoordinatesAreBijectiveOnOneUnits) {
    // every 1-unit mod v^e gets distinct coordinates
    struct Case { int p, r; Poly P; int e; };
    std::vector<Case> cases = {{3, 1, {0, 1}, 5}, {3, 1, {1, 0, 1}, 3}, {2, 1, {1, 1, 1}, 4}, {5, 1, {2, 1}, 4}, {3, 2, {1, 1}, 3}};
    for (auto& c : cases) {
        const GF& F = field(c.p, c.r);
        Place v = fin(c.P);
        LevelGroup G(c.p, F.size(), {{v, c.e}}, 20);
        int dP = poly::deg(c.P) * c.e;
        std::set<LevelGroup::Elt> seen;
        i64 total = ipow(F.size(), dP), ones = 0;
        for (i64 idx = 0; idx < total; ++idx) {
            Poly g;
            i64 x = idx;
            for (int i = 0; i < dP; ++i) { g.push_back((int)(x % F.size())); x /= F.size(); }
            poly::trim(g);
            if (!poly::rem(F, poly::sub(F, g, Poly{1}), c.P).empty()) continue;
            ++ones;
            seen.insert(G.local_unit_class(v, g));
        }
        EXPECT_EQ((i64)seen.size(), ones);
        EXPECT_EQ(ones * ipow(c.p, 20), G.size());
    }
}

TEST(RayClass, ArtinClassIsHomomorphism) {
    std::mt19937_64 rng(11);
    struct Case { int p, r; Divisor D; int n; };
    std::vector<Case> cases = {
        {3, 1, {{fin({0, 1}), 4}, {fin({1, 1}), 2}}, 2},
        {3, 1, {{fin({1, 0, 1}), 3}}, 2},
        {5, 1, {{fin({0, 1}), 2}, {fin({3, 1}), 3}}, 1},
        {3, 2, {{fin({0, 1}), 3}}, 2},
        {2, 1, {{fin({1, 1, 1}), 4}, {fin({0, 1}), 5}}, 3},
    };
    for (auto& c : cases) {
        const GF& F = field(c.p, c.r);
        LevelGroup G(c.p, F.size(), c.D, c.n);
        for (int it = 0; it < 100; ++it) {
            Poly f = random_coprime(rng, F, G, 8), g = random_coprime(rng, F, G, 8);
            EXPECT_EQ(G.class_of_poly(poly::mul(F, f, g)), G.add(G.class_of_poly(f), G.class_of_poly(g)));
            // scalars act trivially on the unit part
            int a = 1 + (int)(rng() % (unsigned)(F.size() - 1));
            EXPECT_EQ(G.class_of_poly(poly::scale(F, f, a)), G.class_of_poly(f));
        }
    }
}

TEST(RayClass, ClassesSurjectAndProjectCompatibly) {
    std::mt19937_64 rng(5);
    const GF& F = field(3, 1);
    Divisor D = {{fin({0, 1}), 4}, {fin({2, 1}), 3}};
    LevelGroup G(3, 3, D, 2);
    std::set<LevelGroup::Elt> hit;
    for (int d = 0; d <= 8; ++d)
        for (i64 idx = 0; idx < ipow(3, d); ++idx) {
            Poly f;
            for (i64 x = idx, i = 0; i < d; ++i, x /= 3) f.push_back((int)(x % 3));
            f.push_back(1);
            if (!G.coprime(f)) continue;
            auto c = G.class_of_poly(f);
            c[0] = 0;
            hit.insert(c);
        }
    // the unit part is onto; the degree coordinate is free via [inf]
    EXPECT_EQ((i64)hit.size() * 9, G.size());

    for (auto& Dp : divisor::sub_divisors(D))
        for (int np = 0; np <= 2; ++np) {
            LevelGroup H(3, 3, Dp, np);
            for (int it = 0; it < 20; ++it) {
                Poly f = random_coprime(rng, F, G, 7);
                EXPECT_EQ(G.project(H, G.class_of_poly(f)), H.class_of_poly(f));
            }
            // uniformizer classes project to place classes when the place leaves the modulus
            for (auto& [v, e] : D)
                if (H.place_index(v) < 0) EXPECT_EQ(G.project(H, G.uniformizer_class(v)), H.class_of_place(v));
        }
}

TEST(RayClass, CharactersAndConductors) {
    LevelGroup G(3, 3, {{fin({0, 1}), 2}}, 1);
    auto chars = G.characters();
    EXPECT_EQ((i64)chars.size(), G.size());
    int ramified = 0;
    for (auto& w : chars) {
        auto c = G.conductor(w);
        if (c.empty()) continue;
        ++ramified;
        EXPECT_EQ(c, (Divisor{{fin({0, 1}), 2}}));
    }
    EXPECT_EQ(ramified, 6);
    EXPECT_TRUE(G.conductor(chars[0]).empty());
    // degree-only characters are unramified
    RayCharacter deg{{1, 0}};
    EXPECT_TRUE(G.conductor(deg).empty());
}

TEST(RayClass, ConductorIsMinimalFactorization) {
    // oracle: omega factors through D' iff it kills the local units = 1 mod D'
    const GF& F = field(3, 1);
    Place a = fin({0, 1}), b = fin({1, 0, 1});
    Divisor D = {{a, 5}, {b, 2}};
    LevelGroup G(3, 3, D, 2);
    auto factors_through = [&](const RayCharacter& w, const Divisor& Dp) {
        for (auto& [v, e] : D) {
            int ep = divisor::ord(Dp, v);
            Poly Ve = poly::pow(F, v.poly, e), Vp = poly::pow(F, v.poly, ep);
            int dd = poly::deg(Ve);
            for (i64 idx = 0; idx < ipow(3, dd); ++idx) {
                Poly g;
                i64 x = idx;
                for (int i = 0; i < dd; ++i) { g.push_back((int)(x % 3)); x /= 3; }
                poly::trim(g);
                if (g.empty() || poly::rem(F, g, v.poly).empty()) continue;
                if (ep > 0 && !poly::rem(F, poly::sub(F, g, Poly{1}), Vp).empty()) continue;
                if (G.pair(w, G.local_unit_class(v, g))) return false;
            }
        }
        return true;
    };
    std::mt19937_64 rng(2);
    auto chars = G.characters();
    auto subs = divisor::sub_divisors(D);
    for (int it = 0; it < 100; ++it) {
        const auto& w = chars[rng() % chars.size()];
        Divisor c = G.conductor(w);
        EXPECT_TRUE(divisor::leq(c, D));
        EXPECT_TRUE(factors_through(w, c)) << divisor::str(c);
        for (auto& Dp : subs)
            if (divisor::leq(Dp, c) && Dp != c) EXPECT_FALSE(factors_through(w, Dp)) << divisor::str(Dp);
        // the conductor never has exponent 1 for p-power characters
        for (auto& [v, e] : c) EXPECT_GE(e, 2);
        // pulled back to a deeper level group, the conductor is unchanged
        LevelGroup H(3, 3, divisor::add(D, {{a, 1}, {fin({1, 1}), 3}}), 3);
        EXPECT_EQ(H.conductor(H.pullback(G, w)), c);
        // restriction to the conductor's group agrees on classes
        LevelGroup C(3, 3, c, 2);
        auto wc = G.restrict_to(C, w);
        Poly f = {1, 2, 0, 1, 1};
        if (G.coprime(f)) EXPECT_EQ(G.pair(w, G.class_of_poly(f)), C.pair(wc, C.class_of_poly(f)));
    }
}

TEST(RayClass, CharacterOrthogonality) {
    LevelGroup G(3, 3, {{fin({0, 1}), 4}}, 2);
    auto chars = G.characters();
    // sum over characters of omega(x) is |G| at 0 and 0 elsewhere
    for (i64 idx = 0; idx < G.size(); ++idx) {
        auto x = G.element(idx);
        CycloInt s(3, 2);
        for (auto& w : chars) s = s + CycloInt::zeta_pow(3, 2, G.pair(w, x));
        if (idx == 0) EXPECT_EQ(s, CycloInt(3, 2, G.size()));
        else EXPECT_TRUE(s.is_zero());
    }
}

TEST(RayClass, ConstantTower) {
    auto T = TowerSpec::constant(3, 3);
    for (int n = 1; n <= 3; ++n) {
        TowerLevel L(T, n);
        EXPECT_EQ(L.size(), ipow(3, n));
        for (auto& v : enumerate_places(3, 4))
            EXPECT_EQ(L.frob(v), (GammaElt{mod(v.degree, ipow(3, n))}));
        EXPECT_EQ(L.decomposition_invariants(fin({0, 1})), (std::vector<int>{n}));
    }
}

TEST(RayClass, CyclotomicTowerAndProducts) {
    Place v = fin({0, 1});
    auto T = TowerSpec::cyclotomic_at(3, 3, v);
    std::mt19937_64 rng(3);
    const GF& F = field(3, 1);
    for (int n = 1; n <= 3; ++n) {
        TowerLevel L(T, n);
        EXPECT_EQ(divisor::ord(L.G.modulus(), v), ipow(3, n - 1) + 1);
        // sigma_v generates: the decomposition group is all of G_n
        auto inv = L.decomposition_invariants(v);
        ASSERT_EQ(inv.size(), 1u);
        EXPECT_EQ(inv[0], n);
        if (n > 1) {
            TowerLevel Lm(T, n - 1);
            for (int it = 0; it < 30; ++it) {
                Poly f = random_coprime(rng, F, L.G, 8);
                auto g = L.image(L.G.class_of_poly(f));
                for (auto& x : g) x = mod(x, ipow(3, n - 1));
                EXPECT_EQ(g, Lm.image(Lm.G.class_of_poly(f)));
            }
        }
    }
    auto P = TowerSpec::product(TowerSpec::constant(3, 3), T);
    TowerLevel L2(P, 2);
    EXPECT_EQ(L2.d(), 2);
    EXPECT_EQ(L2.frob(Place::inf()), (GammaElt{1, 0}));
    // augmentation onto K: the trivial sub-tower
    auto K = P.sub_tower({});
    EXPECT_EQ(K.d, 0);
    TowerLevel LK(K, 2);
    EXPECT_EQ(LK.size(), 1);
    // sub-tower by a matrix: first coordinate only
    TowerLevel Lc(P.sub_tower({{1, 0}}), 2);
    EXPECT_TRUE(Lc.spec.S.empty());
    EXPECT_EQ(Lc.frob(fin({1, 0, 1})), (GammaElt{2}));
    // cyclotomic direction at a second place
    auto Q = TowerSpec::product(T, TowerSpec::cyclotomic_at(3, 3, fin({1, 1})));
    TowerLevel LQ(Q, 2);
    EXPECT_EQ(LQ.G.modulus().size(), 2u);
    EXPECT_EQ(LQ.decomposition_invariants(fin({2, 1, 1})).size(), 1u);
}

TEST(RayClass, NotSurjectiveTowerRejected) {
    TowerSpec T{3, 3, 1, {}, {}};
    T.images[GenKey::degree()] = {3};
    EXPECT_THROW(TowerLevel(T, 2), NotSurjective);
}
