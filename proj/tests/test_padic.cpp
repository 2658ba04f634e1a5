#include <gtest/gtest.h>

#include <random>

#include "padicl/padic.hpp"

using namespace padicl;

namespace {

// Independent oracle: brute force over Z/p^N.
std::vector<i64> brute_roots(i64 lambda, i64 qv, i64 M) {
    std::vector<i64> r;
    for (i64 x = 0; x < M; ++x)
        if (mod(x * x - lambda * x + qv, M) == 0) r.push_back(x);
    return r;
}

// Independent oracle: schoolbook product followed by long division by the
// cyclotomic polynomial Phi_{p^m}(x) = sum_{j<p} x^{j p^{m-1}}.
std::vector<i64> poly_mod_phi(std::vector<i64> a, int p, int m, i64 M) {
    int step = (int)ipow(p, m - 1), f = (p - 1) * step;
    for (int k = (int)a.size() - 1; k >= f; --k) {
        i64 c = mod(a[k], M);
        if (!c) continue;
        for (int j = 0; j < p; ++j) a[k - f + j * step] = mod(a[k - f + j * step] - c, M);
    }
    a.resize(f);
    for (auto& x : a) x = mod(x, M);
    return a;
}

CycloElt random_elt(std::mt19937_64& rng, int p, int m, int N) {
    std::vector<i64> raw((size_t)ipow(p, m) + 3);
    for (auto& x : raw) x = (i64)(rng() % 2000) - 1000;
    return cyclo_normalize(raw, m, p, N);
}

} // namespace

TEST(Padic, HenselExamples) {
    EXPECT_EQ(hensel_unit_root(-3, 5, 5, 2).residue(), 7);
    EXPECT_EQ(hensel_unit_root(3, 7, 7, 2).residue(), 17);
    EXPECT_THROW(hensel_unit_root(5, 5, 5, 2), NotOrdinary);
}

TEST(Padic, HenselMatchesBruteForce) {
    for (int p : {3, 5, 7}) {
        for (int N = 1; N <= 3; ++N) {
            i64 M = ipow(p, N);
            for (i64 lambda = -6; lambda <= 6; ++lambda) {
                if (mod(lambda, p) == 0) continue;
                for (i64 qv : {(i64)p, (i64)p * p}) {
                    i64 a = hensel_unit_root(lambda, qv, p, N).residue();
                    auto roots = brute_roots(lambda, qv, M);
                    int units = 0;
                    for (auto r : roots)
                        if (r % p) { ++units; EXPECT_EQ(r, a); }
                    EXPECT_EQ(units, 1);
                    // alpha * beta = qv with beta = lambda - alpha, v(beta) = v(qv)
                    i64 beta = mod(lambda - a, M);
                    EXPECT_EQ(mod(a * beta - qv, M), 0);
                    if (N > vp(qv, p)) EXPECT_EQ(vp(beta, p), vp(qv, p));
                }
            }
        }
    }
}

TEST(Padic, NormalizeExamples) {
    for (int p : {3, 5}) {
        for (int m : {1, 2}) {
            std::vector<i64> xpm((size_t)ipow(p, m) + 1, 0);
            xpm.back() = 1;
            EXPECT_TRUE(cyclo_normalize(xpm, m, p, 6).equals(CycloElt::from_int(p, m, 1, 6)));
            std::vector<i64> phi((size_t)ipow(p, m), 0);
            for (int j = 0; j < p; ++j) phi[(size_t)(j * ipow(p, m - 1))] = 1;
            EXPECT_TRUE(cyclo_normalize(phi, m, p, 6).is_zero());
        }
    }
    auto sq = cyclo_normalize({1, 2, 1}, 1, 3, 5);
    auto oracle = poly_mod_phi({1, 2, 1}, 3, 1, 243);
    EXPECT_EQ(oracle, (std::vector<i64>{0, 1}));  // 1+2z+z^2 = z for p=3
    EXPECT_TRUE(sq.equals(CycloElt::from_basis(3, 1, oracle, 5)));
}

TEST(Padic, MultiplicationMatchesSchoolbook) {
    std::mt19937_64 rng(1);
    for (int p : {3, 5}) {
        for (int m : {1, 2}) {
            i64 M = ipow(p, 8);
            int f = phi_pm(p, m);
            for (int it = 0; it < 50; ++it) {
                std::vector<i64> a(f), b(f);
                for (auto& x : a) x = (i64)(rng() % M);
                for (auto& x : b) x = (i64)(rng() % M);
                std::vector<i64> prod(2 * f - 1, 0);
                for (int i = 0; i < f; ++i)
                    for (int j = 0; j < f; ++j) prod[i + j] = mod(prod[i + j] + mulmod(a[i], b[j], M), M);
                auto expect = poly_mod_phi(prod, p, m, M);
                auto got = CycloElt::from_basis(p, m, a, 8) * CycloElt::from_basis(p, m, b, 8);
                EXPECT_TRUE(got.equals(CycloElt::from_basis(p, m, expect, 8)));
            }
        }
    }
}

TEST(Padic, ValuationExamples) {
    for (int p : {3, 5}) {
        EXPECT_EQ(cyclo_valuation(CycloElt::from_int(p, 1, p, 10)), Valuation::of(1));
        auto pi = CycloElt::zeta_pow(p, 1, 1, 10) - CycloElt::from_int(p, 1, 1, 10);
        EXPECT_EQ(cyclo_valuation(pi), Valuation::of(1, p - 1));
        EXPECT_EQ(cyclo_valuation(CycloElt::zero(p, 2)), Valuation::inf());
        EXPECT_THROW(cyclo_valuation(CycloElt::zero_at(p, 1, 4)), PrecisionExhausted);
        auto pi2 = CycloElt::zeta_pow(p, 2, 1, 10) - CycloElt::from_int(p, 2, 1, 10);
        EXPECT_EQ(cyclo_valuation(pi2), Valuation::of(1, p * (p - 1)));
        EXPECT_EQ(pi2.resultant_valuation(), Valuation::of(1, p * (p - 1)));
    }
}

TEST(Padic, ValuationAdditiveAndResultantAgrees) {
    std::mt19937_64 rng(2);
    for (int p : {3, 5}) {
        for (int m : {1, 2}) {
            for (int it = 0; it < 100; ++it) {
                auto x = random_elt(rng, p, m, 12), y = random_elt(rng, p, m, 12);
                if (x.is_zero() || y.is_zero()) continue;
                auto vx = x.valuation(), vy = y.valuation();
                auto xy = x * y;
                EXPECT_EQ(xy.valuation(), vx + vy);
                EXPECT_EQ(x.resultant_valuation(), vx);
            }
        }
    }
}

TEST(Padic, GaloisAction) {
    for (int p : {3, 5}) {
        for (int m : {1, 2}) {
            i64 P = ipow(p, m);
            auto z = CycloElt::zeta_pow(p, m, 1, 8);
            for (i64 a = 1; a < P; ++a) {
                if (a % p == 0) continue;
                EXPECT_TRUE(galois_act(a, z).equals(CycloElt::zeta_pow(p, m, a, 8)));
            }
        }
    }
    auto z = CycloElt::zeta_pow(3, 1, 1, 8);
    EXPECT_TRUE((z + galois_act(2, z)).equals(CycloElt::from_int(3, 1, -1, 8)));
    std::mt19937_64 rng(3);
    for (int it = 0; it < 100; ++it) {
        auto x = random_elt(rng, 5, 2, 10);
        i64 a = 1 + (i64)(rng() % 24), b = 1 + (i64)(rng() % 24);
        if (a % 5 == 0 || b % 5 == 0) continue;
        EXPECT_TRUE(galois_act(a, galois_act(b, x)).equals(galois_act(a * b, x)));
        EXPECT_TRUE(galois_act(1, x).equals(x));
    }
}

TEST(Padic, NormalizeIdempotent200) {
    std::mt19937_64 rng(4);
    for (int it = 0; it < 200; ++it) {
        int p = it % 2 ? 3 : 5, m = 1 + it % 2;
        std::vector<i64> raw((size_t)(rng() % 40 + 1));
        for (auto& x : raw) x = (i64)(rng() % 100000) - 50000;
        auto once = cyclo_normalize(raw, m, p, 9);
        std::vector<i64> again(once.coords_scaled(0));
        auto twice = cyclo_normalize(again, m, p, 9);
        EXPECT_EQ(once.coords_scaled(0), twice.coords_scaled(0));
    }
}

TEST(Padic, InverseAndDivision) {
    std::mt19937_64 rng(5);
    for (int p : {3, 5}) {
        for (int m : {0, 1, 2}) {
            for (int it = 0; it < 40; ++it) {
                auto x = random_elt(rng, p, m, 14);
                if (x.is_zero()) continue;
                auto one = x * x.inverse();
                EXPECT_TRUE(one.equals(CycloElt::from_int(p, m, 1, one.prec())));
            }
        }
    }
    auto q = CycloElt::from_rational(5, 0, Rational(5, 81), 10);
    EXPECT_EQ(q.valuation(), Valuation::of(1));
    EXPECT_TRUE((q * CycloElt::from_int(5, 0, 81, 10)).equals(CycloElt::from_int(5, 0, 5, 10)));
    // division by p^k lowers absolute precision by k
    auto y = CycloElt::from_int(5, 1, 7, 10).mul_p_pow(-3);
    EXPECT_EQ(y.prec(), 7);
}

TEST(Padic, CycloIntExact) {
    auto z = CycloInt::zeta_pow(5, 2, 1);
    CycloInt s(5, 2);
    for (int k = 0; k < 25; ++k) s += CycloInt::zeta_pow(5, 2, k);
    EXPECT_TRUE(s.is_zero());
    auto w = z * z.galois(24);
    EXPECT_EQ(w, CycloInt(5, 2, 1));
}
