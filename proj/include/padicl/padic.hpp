#pragma once

// Exact arithmetic in Q_p(zeta_{p^m}) at finite p-adic precision.

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "intmath.hpp"

namespace padicl {

// v_p as an exact rational or +infinity.
struct Valuation {
    bool infinite = false;
    Rational value;

    static Valuation inf() { Valuation v; v.infinite = true; return v; }
    static Valuation of(i64 num, i64 den = 1) { Valuation v; v.value = Rational(num, den); return v; }

    friend Valuation operator+(const Valuation& a, const Valuation& b) {
        if (a.infinite || b.infinite) return inf();
        Valuation r; r.value = a.value + b.value; return r;
    }
    friend bool operator==(const Valuation& a, const Valuation& b) {
        return a.infinite == b.infinite && (a.infinite || a.value == b.value);
    }
    friend bool operator<(const Valuation& a, const Valuation& b) {
        if (a.infinite) return false;
        if (b.infinite) return true;
        return a.value < b.value;
    }
    std::string str() const { return infinite ? "inf" : value.str(); }
};

inline int phi_pm(int p, int m) { return m == 0 ? 1 : (p - 1) * (int)ipow(p, m - 1); }

inline i64 ppow(int p, int k) {
    thread_local std::vector<std::vector<i64>> cache(64);
    if (p < 64) {
        auto& c = cache[p];
        if (c.empty()) {
            c.push_back(1);
            while ((i128)c.back() * p < ((i128)1 << 62)) c.push_back(c.back() * p);
        }
        if (k < (int)c.size()) return c[k];
    }
    return ipow(p, k);
}

// Folds a vector indexed by exponents mod p^m into the power basis of
// Z[zeta_{p^m}], using zeta^{phi} = -sum_{j<p-1} zeta^{j p^{m-1}}.
// T is i64 (exact, overflow checked) or i128.
template <class T>
void reduce_cyclic(std::vector<T>& c, int p, int m) {
    if (m == 0) {
        T s = 0;
        for (auto x : c) s += x;
        c.assign(1, s);
        return;
    }
    const int P = (int)ipow(p, m), f = phi_pm(p, m), step = P / p;
    if ((int)c.size() > P) {
        for (size_t k = P; k < c.size(); ++k) c[k % P] += c[k];
    }
    c.resize(P, T(0));
    for (int k = P - 1; k >= f; --k) {
        T v = c[k];
        if (v == 0) continue;
        for (int j = 0; j <= p - 2; ++j) c[k - f + j * step] -= v;
        c[k] = 0;
    }
    c.resize(f);
}

class CycloElt;
using PadicNum = CycloElt;  // the m = 0 case

// An element of Q_p(zeta_{p^m}) stored as p^shift * sum u_i zeta^i, with the
// integer coordinates u_i known modulo p^rel. After normalization either some
// u_i is a unit or rel == 0 (zero at absolute precision `shift`).
class CycloElt {
public:
    CycloElt() = default;

    static CycloElt zero(int p, int m) {
        CycloElt x(p, m);
        x.exact_zero_ = true;
        x.shift_ = 0;
        x.rel_ = max_digits(p);
        return x;
    }

    // Zero known only modulo p^prec.
    static CycloElt zero_at(int p, int m, int prec) {
        CycloElt x(p, m);
        x.shift_ = prec;
        x.rel_ = 0;
        return x;
    }

    static CycloElt from_int(int p, int m, i128 v, int prec) {
        if (v == 0) return zero(p, m);
        int s = vp(v, p);
        i128 w = v;
        for (int i = 0; i < s; ++i) w /= p;
        CycloElt x(p, m);
        x.shift_ = s;
        x.rel_ = std::clamp(prec - s, 0, max_digits(p));
        x.u_[0] = mod128(w, ppow(p, x.rel_));
        x.normalize();
        return x;
    }

    static CycloElt from_rational(int p, int m, Rational r, int prec) {
        return from_int(p, m, r.num, prec) * from_int(p, m, r.den, prec + 2 * vp(r.den, p)).inverse();
    }

    static CycloElt zeta_pow(int p, int m, i64 k, int prec) {
        std::vector<i64> raw((size_t)ipow(p, m), 0);
        raw[(size_t)mod(k, (i64)raw.size())] = 1;
        return from_cyclic(p, m, raw, prec);
    }

    // Coordinates given on exponents mod p^m (any length; folded).
    static CycloElt from_cyclic(int p, int m, const std::vector<i64>& raw, int prec, int shift = 0) {
        int rel = std::clamp(prec - shift, 0, max_digits(p));
        i64 M = ppow(p, rel);
        std::vector<i64> c(raw.size());
        for (size_t i = 0; i < raw.size(); ++i) c[i] = mod(raw[i], M);
        // fold with values < 2^62; p^m * 2^62 may overflow, so reduce per step
        std::vector<i128> wide(c.begin(), c.end());
        reduce_cyclic(wide, p, m);
        CycloElt x(p, m);
        x.shift_ = shift;
        x.rel_ = rel;
        for (int i = 0; i < x.phi(); ++i) x.u_[i] = mod128(wide[i], M);
        x.normalize();
        return x;
    }

    // Coordinates already in the power basis.
    static CycloElt from_basis(int p, int m, const std::vector<i64>& u, int prec, int shift = 0) {
        if ((int)u.size() != phi_pm(p, m)) throw std::invalid_argument("from_basis: wrong length");
        int rel = std::clamp(prec - shift, 0, max_digits(p));
        i64 M = ppow(p, rel);
        CycloElt x(p, m);
        x.shift_ = shift;
        x.rel_ = rel;
        for (size_t i = 0; i < u.size(); ++i) x.u_[i] = mod(u[i], M);
        x.normalize();
        return x;
    }

    int p() const { return p_; }
    int m() const { return m_; }
    int phi() const { return phi_pm(p_, m_); }
    int shift() const { return shift_; }
    int rel() const { return rel_; }
    bool exact_zero() const { return exact_zero_; }
    // Absolute precision: the value is known modulo p^prec().
    int prec() const { return exact_zero_ ? (1 << 28) : shift_ + rel_; }
    const std::vector<i64>& unit_coords() const { return u_; }
    bool is_zero() const { return exact_zero_ || rel_ == 0; }

    // Value as an integer mod p^prec (requires m == 0 and shift >= 0).
    i64 residue() const {
        if (m_ != 0) throw std::logic_error("residue: not in Z_p");
        if (exact_zero_) return 0;
        if (shift_ < 0) throw std::domain_error("residue: not integral");
        if (shift_ + rel_ > max_digits(p_)) throw Overflow("residue");
        return (i64)((i128)u_[0] * ppow(p_, shift_) % ppow(p_, shift_ + rel_));
    }

    // Integer coordinates of p^{-s} * value, modulo p^{prec - s}; s <= shift.
    std::vector<i64> coords_scaled(int s) const {
        std::vector<i64> r(phi(), 0);
        if (exact_zero_ || rel_ == 0) return r;
        int k = shift_ - s;
        if (k < 0) throw std::domain_error("coords_scaled: scale exceeds value");
        if (k + rel_ > max_digits(p_)) throw Overflow("coords_scaled");
        i64 f = ppow(p_, k);
        for (int i = 0; i < phi(); ++i) r[i] = u_[i] * f;
        return r;
    }

    CycloElt with_prec(int prec) const {
        if (exact_zero_ || prec >= this->prec()) return *this;
        CycloElt r = *this;
        if (prec <= shift_) return zero_at(p_, m_, prec);
        r.rel_ = prec - shift_;
        i64 M = ppow(p_, r.rel_);
        for (auto& c : r.u_) c = mod(c, M);
        r.normalize();
        return r;
    }

    // Embed into Q_p(zeta_{p^m2}), m2 >= m.
    CycloElt lift(int m2) const {
        if (m2 == m_) return *this;
        if (m2 < m_) throw std::invalid_argument("lift: target order smaller");
        CycloElt r(p_, m2);
        r.exact_zero_ = exact_zero_;
        r.shift_ = shift_;
        r.rel_ = rel_;
        i64 step = m_ == 0 ? 0 : ipow(p_, m2 - m_);
        for (int i = 0; i < phi(); ++i) r.u_[(size_t)(i * step)] = u_[i];
        return r;
    }

    friend CycloElt operator+(const CycloElt& a, const CycloElt& b) { return add(a, b, false); }
    friend CycloElt operator-(const CycloElt& a, const CycloElt& b) { return add(a, b, true); }
    CycloElt operator-() const {
        CycloElt r = *this;
        if (!exact_zero_ && rel_ > 0) {
            i64 M = ppow(p_, rel_);
            for (auto& c : r.u_) c = mod(-c, M);
        }
        return r;
    }
    CycloElt& operator+=(const CycloElt& o) { return *this = *this + o; }
    CycloElt& operator-=(const CycloElt& o) { return *this = *this - o; }
    CycloElt& operator*=(const CycloElt& o) { return *this = *this * o; }

    friend CycloElt operator*(const CycloElt& a, const CycloElt& b) {
        check_same(a, b);
        if (a.exact_zero_ || b.exact_zero_) return zero(a.p_, a.m_);
        CycloElt r(a.p_, a.m_);
        r.shift_ = a.shift_ + b.shift_;
        r.rel_ = std::min(a.rel_, b.rel_);
        if (r.rel_ == 0) return r;
        i64 M = ppow(a.p_, r.rel_);
        int f = a.phi();
        if (f == 1) {
            r.u_[0] = mulmod(a.u_[0], b.u_[0], M);
        } else {
            std::vector<i128> prod(2 * f - 1, 0);
            for (int i = 0; i < f; ++i) {
                if (a.u_[i] == 0) continue;
                for (int j = 0; j < f; ++j)
                    if (b.u_[j]) prod[i + j] += mulmod(a.u_[i], b.u_[j], M);
            }
            reduce_cyclic(prod, a.p_, a.m_);
            for (int i = 0; i < f; ++i) r.u_[i] = mod128(prod[i], M);
        }
        r.normalize();
        return r;
    }

    // Multiply by p^k (k < 0 divides; absolute precision drops by |k|).
    CycloElt mul_p_pow(int k) const {
        if (exact_zero_) return *this;
        CycloElt r = *this;
        r.shift_ += k;
        return r;
    }

    // Multiply by zeta^k: a permutation of coordinates, no precision change.
    CycloElt mul_zeta(i64 k) const {
        if (exact_zero_ || rel_ == 0 || m_ == 0) return *this;
        i64 P = ipow(p_, m_);
        std::vector<i128> c((size_t)P, 0);
        for (int i = 0; i < phi(); ++i) c[(size_t)mod(i + k, P)] += u_[i];
        reduce_cyclic(c, p_, m_);
        CycloElt r = *this;
        i64 M = ppow(p_, rel_);
        for (int i = 0; i < phi(); ++i) r.u_[i] = mod128(c[i], M);
        return r;
    }

    // zeta -> zeta^a.
    CycloElt galois(i64 a) const {
        if (m_ == 0 || exact_zero_ || rel_ == 0) return *this;
        i64 P = ipow(p_, m_);
        if (mod(a, p_) == 0) throw std::invalid_argument("galois_act: exponent divisible by p");
        std::vector<i128> c((size_t)P, 0);
        for (int i = 0; i < phi(); ++i) c[(size_t)mod((i128)i * a % P, P)] += u_[i];
        reduce_cyclic(c, p_, m_);
        CycloElt r = *this;
        i64 M = ppow(p_, rel_);
        for (int i = 0; i < phi(); ++i) r.u_[i] = mod128(c[i], M);
        return r;
    }

    // True when the value lies in Q_p (all non-constant coordinates vanish).
    bool in_base_ring() const {
        if (exact_zero_ || rel_ == 0) return true;
        for (int i = 1; i < phi(); ++i)
            if (u_[i] != 0) return false;
        return true;
    }

    PadicNum to_padic() const {
        if (!in_base_ring()) throw NotGaloisStable("value not in Q_p");
        if (exact_zero_) return zero(p_, 0);
        CycloElt r(p_, 0);
        r.shift_ = shift_;
        r.rel_ = rel_;
        r.u_[0] = u_[0];
        return r;
    }

    // v_p via the pi-adic expansion in pi = zeta - 1. Exact.
    Valuation valuation() const {
        if (exact_zero_) return Valuation::inf();
        if (rel_ == 0)
            throw PrecisionExhausted("value is zero modulo p^" + std::to_string(shift_));
        int f = phi();
        // substitute zeta = 1 + pi: b_j = sum_i C(i, j) u_i, unitriangular so
        // some b_j is a unit; the first such j gives v = shift + j/f.
        std::vector<i64> b(f, 0);
        for (int j = 0; j < f; ++j) {
            i64 s = 0;
            i64 binom = 1;  // C(i, j) mod p, enough to test unit-ness
            for (int i = j; i < f; ++i) {
                if (i > j) binom = binom_mod_p(i, j, p_);
                s = (s + binom * (u_[i] % p_)) % p_;
            }
            if (s % p_ != 0) return Valuation::of((i64)shift_ * f + j, f);
        }
        throw std::logic_error("valuation: normalization invariant broken");
    }

    // N_{Q_p(zeta)/Q_p}(x) as the product of all Galois conjugates.
    PadicNum norm() const {
        if (m_ == 0) return *this;
        CycloElt r = *this;
        i64 P = ipow(p_, m_);
        for (i64 a = 2; a < P; ++a)
            if (a % p_ != 0) r = r * galois(a);
        return r.to_padic();
    }

    // v_p via the resultant with Phi_{p^m} (the norm), divided by phi.
    // Falls back to the pi-adic expansion when the norm is zero at precision.
    Valuation resultant_valuation() const {
        if (exact_zero_) return Valuation::inf();
        PadicNum n = norm();
        if (n.is_zero()) return valuation();
        return Valuation::of(n.shift(), phi());
    }

    CycloElt inverse() const {
        if (exact_zero_ || rel_ == 0) throw std::domain_error("inverse of zero");
        if (m_ == 0) {
            CycloElt r(p_, 0);
            r.shift_ = -shift_;
            r.rel_ = rel_;
            r.u_[0] = invmod(u_[0], ppow(p_, rel_));
            return r;
        }
        CycloElt c = from_int(p_, m_, 1, 1 << 20);
        i64 P = ipow(p_, m_);
        for (i64 a = 2; a < P; ++a)
            if (a % p_ != 0) c = c * galois(a);
        CycloElt n = (c * *this).to_padic();
        return c * n.inverse().lift(m_);
    }

    bool equals(const CycloElt& o) const { return (*this - o).is_zero(); }

    std::string str() const {
        if (exact_zero_) return "0";
        std::ostringstream os;
        os << "p^" << shift_ << "*(";
        for (int i = 0; i < phi(); ++i) os << (i ? "," : "") << u_[i];
        os << ") mod p^" << rel_;
        return os.str();
    }

private:
    CycloElt(int p, int m) : p_(p), m_(m), u_(phi_pm(p, m), 0) {}

    static void check_same(const CycloElt& a, const CycloElt& b) {
        if (a.p_ != b.p_ || a.m_ != b.m_) throw std::invalid_argument("CycloElt: ring mismatch");
    }

    static i64 binom_mod_p(int n, int k, int p) {
        // Lucas
        i64 r = 1;
        while (n > 0 || k > 0) {
            int a = n % p, b = k % p;
            if (b > a) return 0;
            i64 c = 1;
            for (int i = 0; i < b; ++i) c = c * (a - i) / (i + 1);
            r = (r * (c % p)) % p;
            n /= p;
            k /= p;
        }
        return r;
    }

    static CycloElt add(const CycloElt& a, const CycloElt& b, bool sub) {
        check_same(a, b);
        if (b.exact_zero_) return a;
        if (a.exact_zero_) return sub ? -b : b;
        int A = std::min(a.prec(), b.prec());
        int s = std::min(a.shift_, b.shift_);
        if (A <= s) return zero_at(a.p_, a.m_, A);
        CycloElt r(a.p_, a.m_);
        r.shift_ = s;
        r.rel_ = A - s;
        i64 M = ppow(a.p_, r.rel_);
        int ka = a.shift_ - s, kb = b.shift_ - s;
        i64 fa = ka < r.rel_ ? ppow(a.p_, ka) : 0, fb = kb < r.rel_ ? ppow(a.p_, kb) : 0;
        for (int i = 0; i < a.phi(); ++i) {
            i64 x = fa ? mulmod(a.u_[i], fa, M) : 0;
            i64 y = fb ? mulmod(b.u_[i], fb, M) : 0;
            r.u_[i] = sub ? mod(x - y, M) : mod(x + y, M);
        }
        r.normalize();
        return r;
    }

    void normalize() {
        if (exact_zero_) return;
        while (rel_ > 0) {
            bool all = true;
            for (auto c : u_)
                if (c % p_ != 0) { all = false; break; }
            if (!all) return;
            for (auto& c : u_) c /= p_;
            ++shift_;
            --rel_;
        }
        std::fill(u_.begin(), u_.end(), 0);
    }

    int p_ = 2, m_ = 0;
    int shift_ = 0, rel_ = 0;
    bool exact_zero_ = false;
    std::vector<i64> u_;

    friend class CycloInt;
};

// Exact element of Z[zeta_{p^m}] with overflow-checked i64 coordinates.
class CycloInt {
public:
    CycloInt() = default;
    CycloInt(int p, int m, i64 c = 0) : p_(p), m_(m), c_(phi_pm(p, m), 0) { c_[0] = c; }

    static CycloInt zeta_pow(int p, int m, i64 k) {
        CycloInt r(p, m);
        if (m == 0) { r.c_[0] = 1; return r; }
        i64 P = ipow(p, m);
        std::vector<i64> raw((size_t)P, 0);
        raw[(size_t)mod(k, P)] = 1;
        reduce_cyclic(raw, p, m);
        r.c_ = raw;
        return r;
    }

    // From coefficients on exponents mod p^m.
    static CycloInt from_cyclic(int p, int m, std::vector<i64> raw) {
        CycloInt r(p, m);
        std::vector<i128> w(raw.begin(), raw.end());
        reduce_cyclic(w, p, m);
        for (int i = 0; i < r.phi(); ++i) {
            if (w[i] > INT64_MAX || w[i] < INT64_MIN) throw Overflow("CycloInt");
            r.c_[i] = (i64)w[i];
        }
        return r;
    }

    int p() const { return p_; }
    int m() const { return m_; }
    int phi() const { return phi_pm(p_, m_); }
    const std::vector<i64>& coords() const { return c_; }
    bool is_zero() const {
        for (auto x : c_)
            if (x) return false;
        return true;
    }

    friend CycloInt operator+(const CycloInt& a, const CycloInt& b) {
        CycloInt r = a;
        for (size_t i = 0; i < r.c_.size(); ++i) r.c_[i] = checked_add(a.c_[i], b.c_[i]);
        return r;
    }
    friend CycloInt operator-(const CycloInt& a, const CycloInt& b) {
        CycloInt r = a;
        for (size_t i = 0; i < r.c_.size(); ++i) r.c_[i] = checked_add(a.c_[i], -b.c_[i]);
        return r;
    }
    CycloInt operator-() const {
        CycloInt r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend CycloInt operator*(const CycloInt& a, const CycloInt& b) {
        int f = a.phi();
        CycloInt r(a.p_, a.m_);
        if (f == 1) { r.c_[0] = checked_mul(a.c_[0], b.c_[0]); return r; }
        std::vector<i128> prod(2 * f - 1, 0);
        for (int i = 0; i < f; ++i) {
            if (!a.c_[i]) continue;
            for (int j = 0; j < f; ++j) prod[i + j] += (i128)a.c_[i] * b.c_[j];
        }
        reduce_cyclic(prod, a.p_, a.m_);
        for (int i = 0; i < f; ++i) {
            if (prod[i] > INT64_MAX || prod[i] < INT64_MIN) throw Overflow("CycloInt mul");
            r.c_[i] = (i64)prod[i];
        }
        return r;
    }
    CycloInt& operator+=(const CycloInt& o) { return *this = *this + o; }
    CycloInt& operator-=(const CycloInt& o) { return *this = *this - o; }
    CycloInt& operator*=(const CycloInt& o) { return *this = *this * o; }

    CycloInt scale(i64 k) const {
        CycloInt r = *this;
        for (auto& x : r.c_) x = checked_mul(x, k);
        return r;
    }
    // Exact division by an integer; throws if not divisible.
    CycloInt div_exact(i64 k) const {
        CycloInt r = *this;
        for (auto& x : r.c_) {
            if (x % k != 0) throw std::domain_error("CycloInt::div_exact: not divisible");
            x /= k;
        }
        return r;
    }
    CycloInt galois(i64 a) const {
        if (m_ == 0) return *this;
        i64 P = ipow(p_, m_);
        std::vector<i128> w((size_t)P, 0);
        for (int i = 0; i < phi(); ++i) w[(size_t)mod((i128)i * a % P, P)] += c_[i];
        reduce_cyclic(w, p_, m_);
        CycloInt r(p_, m_);
        for (int i = 0; i < phi(); ++i) r.c_[i] = (i64)w[i];
        return r;
    }
    CycloInt lift(int m2) const {
        CycloInt r(p_, m2);
        i64 step = m_ == 0 ? 0 : ipow(p_, m2 - m_);
        for (int i = 0; i < phi(); ++i) r.c_[(size_t)(i * step)] = c_[i];
        return r;
    }
    friend bool operator==(const CycloInt& a, const CycloInt& b) {
        return a.p_ == b.p_ && a.m_ == b.m_ && a.c_ == b.c_;
    }
    CycloElt to_elt(int prec) const { return CycloElt::from_basis(p_, m_, c_, prec); }

    std::string str() const {
        std::ostringstream os;
        os << "(";
        for (int i = 0; i < phi(); ++i) os << (i ? "," : "") << c_[i];
        os << ")";
        return os.str();
    }

private:
    int p_ = 2, m_ = 0;
    std::vector<i64> c_;
};

// ---- module operations -------------------------------------------------

// Unit root of x^2 - lambda x + qv in Z/p^N.
inline PadicNum hensel_unit_root(i64 lambda, i64 qv, int p, int N) {
    if (N < 1) throw std::invalid_argument("hensel_unit_root: N >= 1 required");
    if (qv % p != 0) throw std::invalid_argument("hensel_unit_root: p must divide qv");
    if (mod(lambda, p) == 0) throw NotOrdinary("trace " + std::to_string(lambda) + " divisible by p");
    if (N > max_digits(p)) throw Overflow("hensel_unit_root: precision too large");
    i64 M = ppow(p, N);
    i64 x = mod(lambda, p);
    // Newton: x <- x - f(x)/f'(x); f' = 2x - lambda is a unit.
    for (int k = 1; k < N; k *= 2) {
        for (int it = 0; it < 2; ++it) {
            i64 fx = mod(mulmod(x, x, M) - mulmod(mod(lambda, M), x, M) + mod(qv, M), M);
            i64 d = mod(2 * x - lambda, M);
            x = mod(x - mulmod(fx, invmod(d, M), M), M);
        }
    }
    for (int it = 0; it < 64; ++it) {
        i64 fx = mod(mulmod(x, x, M) - mulmod(mod(lambda, M), x, M) + mod(qv, M), M);
        if (fx == 0) break;
        x = mod(x - mulmod(fx, invmod(mod(2 * x - lambda, M), M), M), M);
    }
    return CycloElt::from_int(p, 0, x, N);
}

// Canonical representative of a raw integer polynomial modulo (Phi_{p^m}, p^N).
inline CycloElt cyclo_normalize(const std::vector<i64>& raw_poly, int m, int p, int N) {
    if (raw_poly.empty()) return CycloElt::zero_at(p, m, N);
    i64 P = ipow(p, m);
    std::vector<i64> folded((size_t)P, 0);
    i64 M = ppow(p, std::min(N, max_digits(p)));
    for (size_t i = 0; i < raw_poly.size(); ++i) {
        size_t k = (size_t)(i % (size_t)P);
        folded[k] = mod(folded[k] + mod(raw_poly[i], M), M);
    }
    return CycloElt::from_cyclic(p, m, folded, N);
}

inline Valuation cyclo_valuation(const CycloElt& x) { return x.valuation(); }

inline CycloElt galois_act(i64 a, const CycloElt& x) { return x.galois(a); }

} // namespace padicl
