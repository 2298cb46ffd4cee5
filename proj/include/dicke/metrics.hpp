#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "dicke/errors.hpp"
#include "dicke/spin.hpp"

namespace dicke {

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues; // descending
    Eigen::MatrixXcd eigenvectors;
};

namespace detail {

inline void require_hermitian(const Eigen::MatrixXcd& m, double tol, const char* who) {
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > tol)
        throw numeric_error(std::string(who) + ": matrix is not Hermitian (deviation " +
                            std::to_string(dev) + ")");
}

} // namespace detail

// Eigendecomposition of a density matrix with the noise policy of the
// integrators: eigenvalues above -1e-10 are clamped to zero and the
// spectrum renormalized; anything more negative is treated as an
// integrator failure.
inline SpectralDecomposition spectral_decomposition(const Eigen::MatrixXcd& rho) {
    detail::require_hermitian(rho, 1e-9, "spectral_decomposition");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
    if (es.info() != Eigen::Success)
        throw numeric_error("spectral_decomposition: eigensolver failed");

    const int n = static_cast<int>(rho.rows());
    Eigen::VectorXd vals = es.eigenvalues();
    if (vals.minCoeff() < -1e-10)
        throw numeric_error("spectral_decomposition: negative eigenvalue " +
                            std::to_string(vals.minCoeff()) + " beyond tolerance");
    const double raw_trace = vals.sum();
    for (int i = 0; i < n; ++i) vals(i) = std::max(vals(i), 0.0);
    const double clamped_trace = vals.sum();
    if (clamped_trace > 0.0 && raw_trace > 0.0) vals *= raw_trace / clamped_trace;

    SpectralDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) { // SelfAdjointEigenSolver sorts ascending
        out.eigenvalues(i) = vals(n - 1 - i);
        out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

// <Psi| rho |Psi> for a pure target (the only case the engine compares
// against). Clamped into [0,1].
inline double fidelity(const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& target) {
    if (rho.rows() != target.size() || rho.cols() != target.size())
        throw std::invalid_argument("fidelity: dimension mismatch");
    detail::require_hermitian(rho, 1e-8, "fidelity");
    const double f = std::real(target.dot(rho * target));
    return std::clamp(f, 0.0, 1.0);
}

inline double fidelity(const Eigen::MatrixXcd& rho, const SpinState& target) {
    return fidelity(rho, target.amplitudes);
}

namespace detail {

// Spectral QFI sum over one Hermitian block with raw (not necessarily
// unit-trace) eigenvalues; pairs with lambda_k + lambda_k' below cutoff
// carry no information and are skipped.
inline double qfi_spectral_sum(const Eigen::VectorXd& vals, const Eigen::MatrixXcd& vecs,
                               const Eigen::MatrixXcd& gen, double cutoff = 1e-12) {
    const int n = static_cast<int>(vals.size());
    const Eigen::MatrixXcd g = vecs.adjoint() * gen * vecs;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        for (int kp = 0; kp < n; ++kp) {
            const double sum = vals(k) + vals(kp);
            if (sum < cutoff) continue;
            const double diff = vals(k) - vals(kp);
            total += 2.0 * diff * diff / sum * std::norm(g(k, kp));
        }
    }
    return total;
}

} // namespace detail

// QFI of a density matrix with respect to a Hermitian generator,
// F = 2 sum_{k,k'} (l_k - l_k')^2/(l_k + l_k') |<e_k|G|e_k'>|^2.
inline double qfi(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& generator) {
    if (rho.rows() != generator.rows() || rho.cols() != generator.cols())
        throw std::invalid_argument("qfi: dimension mismatch");
    detail::require_hermitian(generator, 1e-10, "qfi generator");
    const SpectralDecomposition sd = spectral_decomposition(rho);
    return detail::qfi_spectral_sum(sd.eigenvalues, sd.eigenvectors, generator);
}

inline double qfi(const Eigen::MatrixXcd& rho, const OperatorMatrix& generator) {
    return qfi(rho, generator.entries);
}

// Pure-state QFI, 4(<G^2> - <G>^2).
inline double qfi_pure(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& generator) {
    if (psi.size() != generator.rows())
        throw std::invalid_argument("qfi_pure: dimension mismatch");
    const Eigen::VectorXcd gpsi = generator * psi;
    const double mean = std::real(psi.dot(gpsi));
    const double mean2 = std::real(gpsi.dot(gpsi));
    return std::max(0.0, 4.0 * (mean2 - mean * mean));
}

inline double qfi_pure(const SpinState& psi, const OperatorMatrix& generator) {
    const SpinState p = (psi.basis == generator.basis) ? psi : rotate_basis(psi, generator.basis);
    return qfi_pure(p.amplitudes, generator.entries);
}

} // namespace dicke
