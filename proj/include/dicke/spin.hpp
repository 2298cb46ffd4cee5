#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "dicke/errors.hpp"

namespace dicke {

using Complex = std::complex<double>;

enum class Basis { Z, X };

// Total spin S = N*s of the collective ensemble. Integer S only; the
// Hilbert-space dimension is 2S+1 and amplitude index i maps to m = S - i
// (m = S first, descending).
struct SpinQuantum {
    int value;

    explicit SpinQuantum(int s) : value(s) {
        if (s < 1)
            throw std::invalid_argument("SpinQuantum: total spin must be an integer >= 1");
    }

    int dim() const { return 2 * value + 1; }

    friend bool operator==(SpinQuantum a, SpinQuantum b) { return a.value == b.value; }
};

namespace detail {

// m <-> row/column index for a spin-j block (index 0 is m = j).
inline int midx(int j, int m) { return j - m; }

inline double lfact(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

} // namespace detail

// S+ for arbitrary block spin j >= 0: <m+1|S+|m> = sqrt((j-m)(j+m+1)).
inline Eigen::MatrixXd splus_matrix(int j) {
    const int dim = 2 * j + 1;
    Eigen::MatrixXd sp = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = -j; m < j; ++m)
        sp(detail::midx(j, m + 1), detail::midx(j, m)) =
            std::sqrt(static_cast<double>(j - m) * (j + m + 1));
    return sp;
}

inline Eigen::MatrixXd sminus_matrix(int j) { return splus_matrix(j).transpose(); }

inline Eigen::MatrixXd sz_matrix(int j) {
    const int dim = 2 * j + 1;
    Eigen::MatrixXd sz = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = j; m >= -j; --m) sz(detail::midx(j, m), detail::midx(j, m)) = m;
    return sz;
}

inline Eigen::MatrixXd sx_matrix(int j) {
    return 0.5 * (splus_matrix(j) + sminus_matrix(j));
}

inline Eigen::MatrixXcd sy_matrix(int j) {
    const Complex I(0.0, 1.0);
    return (splus_matrix(j) - sminus_matrix(j)).cast<Complex>() / (2.0 * I);
}

namespace detail {

// Single entry of the Wigner small-d matrix as a factorial series in
// log-space. The series index runs over all non-negative factorial
// arguments. Exact (single term, no cancellation) for mp = +-j at any
// angle; loses precision from alternating-sign cancellation for interior
// columns once j grows beyond ~20.
inline double wigner_entry_series(int j, int m, int mp, double beta) {
    const double c = std::cos(beta / 2.0);
    const double s = std::sin(beta / 2.0);
    const double lognum = 0.5 * (lfact(j + mp) + lfact(j - mp) + lfact(j + m) + lfact(j - m));
    const int klo = std::max(0, mp - m);
    const int khi = std::min(j + mp, j - m);
    double total = 0.0;
    for (int k = klo; k <= khi; ++k) {
        const double logden = lfact(k) + lfact(j + mp - k) + lfact(j - m - k) + lfact(k + m - mp);
        const int pc = 2 * j - 2 * k + mp - m;
        const int ps = 2 * k - mp + m;
        double term = std::exp(lognum - logden);
        if ((k - mp + m) % 2 != 0) term = -term;
        term *= std::pow(c, pc) * std::pow(s, ps);
        total += term;
    }
    return total;
}

} // namespace detail

// Wigner small-d rotation matrix d^j(beta), rows indexed by m and columns
// by m' (both j..-j). Evaluated as the exponential of the real
// antisymmetric generator (S- - S+)/2 via an eigendecomposition, which
// stays orthogonal to machine precision for j in the hundreds where the
// factorial series cancels catastrophically. The outer columns m' = +-j
// reduce to a single series term and are filled from the exact closed
// form so their relative accuracy is machine-level even at 2^-j scale.
inline Eigen::MatrixXd wigner_small_d(int j, double beta) {
    if (j < 0) throw std::invalid_argument("wigner_small_d: j must be >= 0");
    const int dim = 2 * j + 1;
    if (j == 0) return Eigen::MatrixXd::Identity(1, 1);

    const Eigen::MatrixXd gen = 0.5 * (sminus_matrix(j) - splus_matrix(j));
    const Complex I(0.0, 1.0);
    Eigen::MatrixXcd herm = I * gen.cast<Complex>(); // Hermitian i*K
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    if (es.info() != Eigen::Success)
        throw numeric_error("wigner_small_d: eigendecomposition failed");
    Eigen::VectorXcd phases(dim);
    for (int i = 0; i < dim; ++i)
        phases(i) = std::exp(-I * beta * es.eigenvalues()(i));
    Eigen::MatrixXd d =
        (es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint()).real();

    for (int m = j; m >= -j; --m) {
        d(detail::midx(j, m), detail::midx(j, j)) = detail::wigner_entry_series(j, m, j, beta);
        d(detail::midx(j, m), detail::midx(j, -j)) = detail::wigner_entry_series(j, m, -j, beta);
    }
    return d;
}

inline Eigen::MatrixXd wigner_small_d(SpinQuantum S, double beta) {
    return wigner_small_d(S.value, beta);
}

// The engine's workhorse column D^S_{m,S}(-pi/2) = (-1)^(S-m) 2^-S sqrt(C(2S,S+m)),
// indexed m = S..-S.
inline Eigen::VectorXd dcol_max(int j) {
    Eigen::VectorXd col(2 * j + 1);
    for (int m = j; m >= -j; --m) {
        double v = std::exp(0.5 * (detail::lfact(2 * j) - detail::lfact(j + m) - detail::lfact(j - m))
                            - j * std::log(2.0));
        if ((j - m) % 2 != 0) v = -v;
        col(detail::midx(j, m)) = v;
    }
    return col;
}

struct SpinState {
    SpinQuantum S;
    Basis basis;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }

    void normalize() {
        const double n = norm();
        if (n <= 0.0) throw numeric_error("SpinState::normalize: zero state");
        amplitudes /= n;
    }

    Complex amplitude(int m) const { return amplitudes(detail::midx(S.value, m)); }
};

enum class Op { Sx, Sy, Sz, Splus, Sminus };

struct OperatorMatrix {
    SpinQuantum S;
    Basis basis;
    Eigen::MatrixXcd entries;
};

// Basis-change matrix of Eq-style convention: amplitudes_x = R * amplitudes_z
// with R = d^S(-pi/2); R conjugation sends the z-basis Sx matrix to diag(S..-S).
inline Eigen::MatrixXd basis_change_ztox(int j) { return wigner_small_d(j, -M_PI / 2.0); }

// Matrix of a collective spin operator between the eigenstates of the
// tagged axis. Basis::X entries are obtained by conjugating the Z-basis
// matrix with the rotation that diagonalizes Sx.
inline OperatorMatrix collective_operator(SpinQuantum S, Op which, Basis basis = Basis::Z) {
    const int j = S.value;
    Eigen::MatrixXcd m;
    switch (which) {
        case Op::Sx: m = sx_matrix(j).cast<Complex>(); break;
        case Op::Sy: m = sy_matrix(j); break;
        case Op::Sz: m = sz_matrix(j).cast<Complex>(); break;
        case Op::Splus: m = splus_matrix(j).cast<Complex>(); break;
        case Op::Sminus: m = sminus_matrix(j).cast<Complex>(); break;
        default: throw std::invalid_argument("collective_operator: unknown operator");
    }
    if (basis == Basis::X) {
        const Eigen::MatrixXd r = basis_change_ztox(j);
        m = (r * m * r.transpose()).eval();
    }
    return OperatorMatrix{S, basis, std::move(m)};
}

inline SpinState rotate_basis(const SpinState& state, Basis to) {
    if (state.basis == to) return state;
    const Eigen::MatrixXd r = basis_change_ztox(state.S.value);
    SpinState out{state.S, to, {}};
    if (to == Basis::X)
        out.amplitudes = r * state.amplitudes;
    else
        out.amplitudes = r.transpose() * state.amplitudes;
    return out;
}

inline SpinState dicke_state(SpinQuantum S, int m, Basis basis = Basis::Z) {
    if (std::abs(m) > S.value)
        throw std::invalid_argument("dicke_state: |m| must be <= S");
    SpinState st{S, basis, Eigen::VectorXcd::Zero(S.dim())};
    st.amplitudes(detail::midx(S.value, m)) = 1.0;
    return st;
}

// (1+i)/2 |S,S>_z + (-1)^S (1-i)/2 |S,-S>_z
inline SpinState cat_psi(SpinQuantum S) {
    SpinState st{S, Basis::Z, Eigen::VectorXcd::Zero(S.dim())};
    const double sgn = (S.value % 2 == 0) ? 1.0 : -1.0;
    st.amplitudes(0) = Complex(0.5, 0.5);
    st.amplitudes(S.dim() - 1) = sgn * Complex(0.5, -0.5);
    return st;
}

// Same superposition with the opposite relative phase, (-1)^(S+1).
inline SpinState cat_psi_prime(SpinQuantum S) {
    SpinState st = cat_psi(S);
    st.amplitudes(S.dim() - 1) = -st.amplitudes(S.dim() - 1);
    return st;
}

// (|S,m>_x + sign |S,-m>_x)/sqrt(2), the t=0 kitten with the time phase
// stripped. m = 0 collapses to |S,0>_x for sign=+ and is rejected for sign=-.
inline SpinState kitten_state(SpinQuantum S, int m, int sign) {
    if (m < 0 || m > S.value)
        throw std::invalid_argument("kitten_state: m must be in [0, S]");
    if (sign != +1 && sign != -1)
        throw std::invalid_argument("kitten_state: sign must be +1 or -1");
    if (m == 0 && sign == -1)
        throw std::invalid_argument("kitten_state: (m=0, -) is the zero vector");
    SpinState st{S, Basis::X, Eigen::VectorXcd::Zero(S.dim())};
    if (m == 0) {
        st.amplitudes(detail::midx(S.value, 0)) = 1.0;
        return st;
    }
    const double a = 1.0 / std::sqrt(2.0);
    st.amplitudes(detail::midx(S.value, m)) = a;
    st.amplitudes(detail::midx(S.value, -m)) = sign * a;
    return st;
}

struct StateSpec {
    enum class Kind { Dicke, CatPsi, CatPsiPrime, Kitten };
    Kind kind = Kind::Dicke;
    int m = 0;
    Basis basis = Basis::Z; // Dicke only
    int sign = +1;          // Kitten only
};

inline SpinState make_state(SpinQuantum S, const StateSpec& spec) {
    switch (spec.kind) {
        case StateSpec::Kind::Dicke: return dicke_state(S, spec.m, spec.basis);
        case StateSpec::Kind::CatPsi: return cat_psi(S);
        case StateSpec::Kind::CatPsiPrime: return cat_psi_prime(S);
        case StateSpec::Kind::Kitten: return kitten_state(S, spec.m, spec.sign);
    }
    throw std::invalid_argument("make_state: unknown state kind");
}

inline Complex overlap(const SpinState& a, const SpinState& b) {
    if (!(a.S == b.S)) throw std::invalid_argument("overlap: spin mismatch");
    const SpinState bb = (a.basis == b.basis) ? b : rotate_basis(b, a.basis);
    return a.amplitudes.dot(bb.amplitudes); // Eigen dot conjugates the left factor
}

inline Complex expectation(const SpinState& psi, const OperatorMatrix& op) {
    if (!(psi.S == op.S)) throw std::invalid_argument("expectation: spin mismatch");
    const SpinState p = (psi.basis == op.basis) ? psi : rotate_basis(psi, op.basis);
    return p.amplitudes.dot(op.entries * p.amplitudes);
}

} // namespace dicke
