#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "dicke/spin.hpp"

namespace dicke {

// One-axis twisting rate Lambda and collective decay Gamma. Most closed
// forms depend only on the ratio Gamma/Lambda; time enters as the
// dimensionless Lambda*t (or Gamma*t when Lambda vanishes).
struct TwistParams {
    double lambda = 1.0; // rad/s, > 0
    double gamma = 0.0;  // rad/s, >= 0

    static TwistParams from_rates(double lambda, double gamma) {
        if (lambda <= 0.0)
            throw std::invalid_argument("TwistParams: Lambda must be positive");
        if (gamma < 0.0)
            throw std::invalid_argument("TwistParams: Gamma must be non-negative");
        return TwistParams{lambda, gamma};
    }

    // Dimensionless parametrization: Lambda = 1, Gamma = ratio.
    static TwistParams from_ratio(double ratio) { return from_rates(1.0, ratio); }

    double ratio() const { return gamma / lambda; }
};

// Stand-in for the Gamma/Lambda -> infinity limit; exp(-pi * 1e3) underflows
// cleanly to zero so no special-casing of infinity is needed anywhere.
inline double asymptotic_ratio() { return 1e3; }

namespace detail {

// i^(n) for integer n of either sign, exact by mod-4 lookup.
inline Complex ipow(long long n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

} // namespace detail

// Conditional state of the engineered twisting model given no jump:
// starting from |S,S>_z, the X-basis amplitudes are
// D^S_{m,S} e^{i Lambda m^2 t} e^{-Gamma m^2 t}, renormalized.
inline SpinState nojump_state(SpinQuantum S, const TwistParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("nojump_state: t must be >= 0");
    const int j = S.value;
    const Eigen::VectorXd d = dcol_max(j);
    SpinState st{S, Basis::X, Eigen::VectorXcd(S.dim())};
    for (int m = j; m >= -j; --m) {
        const double m2 = static_cast<double>(m) * m;
        const Complex phase = std::exp(Complex(0.0, p.lambda * m2 * t));
        st.amplitudes(detail::midx(j, m)) = d(detail::midx(j, m)) * phase * std::exp(-p.gamma * m2 * t);
    }
    st.normalize();
    return st;
}

// P(t) = sum_m e^{-2 Gamma m^2 t} (D^S_{m,S})^2, the squared norm of the
// unnormalized no-jump wave function.
inline double nojump_probability(SpinQuantum S, const TwistParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("nojump_probability: t must be >= 0");
    const int j = S.value;
    const Eigen::VectorXd d = dcol_max(j);
    double total = 0.0;
    for (int m = j; m >= -j; --m) {
        const double m2 = static_cast<double>(m) * m;
        const double w = d(detail::midx(j, m));
        total += w * w * std::exp(-2.0 * p.gamma * m2 * t);
    }
    return total;
}

// Fidelity of the no-jump state at Lambda*t = pi/2 with the ideal cat,
// F = [sum_m e^{-(pi r/2) m^2} D_m^2]^2 / sum_m e^{-pi r m^2} D_m^2.
inline double cat_fidelity(SpinQuantum S, double ratio) {
    if (ratio < 0.0) throw std::invalid_argument("cat_fidelity: ratio must be >= 0");
    const int j = S.value;
    const Eigen::VectorXd d = dcol_max(j);
    double num = 0.0, den = 0.0;
    for (int m = j; m >= -j; --m) {
        const double m2 = static_cast<double>(m) * m;
        const double w2 = d(detail::midx(j, m)) * d(detail::midx(j, m));
        num += w2 * std::exp(-M_PI * ratio * m2 / 2.0);
        den += w2 * std::exp(-M_PI * ratio * m2);
    }
    return num * num / den;
}

// QFI (generator Sz) of the no-jump state at Lambda*t = pi/2, evaluated as
// the explicit triple sum over m, k, l in [-S, S]. Both numerators carry
// the e^{-(pi r/2)(m^2+k^2)} weight of the state's amplitude product; this
// is the variant that agrees identically with the pure-state variance
// formula applied to the Lambda*t = pi/2 state.
inline double cat_qfi(SpinQuantum S, double ratio) {
    if (ratio < 0.0) throw std::invalid_argument("cat_qfi: ratio must be >= 0");
    const int j = S.value;
    const Eigen::MatrixXd d = wigner_small_d(j, -M_PI / 2.0);
    const int mS = detail::midx(j, j);

    double den = 0.0;
    for (int m = j; m >= -j; --m) {
        const double w = d(detail::midx(j, m), mS);
        den += w * w * std::exp(-M_PI * ratio * static_cast<double>(m) * m);
    }

    Complex term1 = 0.0, term2 = 0.0;
    for (int m = j; m >= -j; --m) {
        const int im = detail::midx(j, m);
        for (int k = j; k >= -j; --k) {
            const int ik = detail::midx(j, k);
            const double e = std::exp(-M_PI * ratio / 2.0 *
                                      (static_cast<double>(m) * m + static_cast<double>(k) * k));
            const Complex ph = detail::ipow(static_cast<long long>(k) * k -
                                            static_cast<long long>(m) * m);
            double sum_l2 = 0.0, sum_l = 0.0;
            for (int l = j; l >= -j; --l) {
                const double w = d(im, detail::midx(j, l)) * d(ik, detail::midx(j, l));
                sum_l2 += w * static_cast<double>(l) * l;
                sum_l += w * l;
            }
            const double dd = d(im, mS) * d(ik, mS);
            term1 += dd * e * ph * sum_l2;
            term2 += dd * e * ph * sum_l;
        }
    }
    const double mean2 = std::real(term1) / den;
    const Complex mean = term2 / den;
    return std::max(0.0, 4.0 * (mean2 - std::norm(mean)));
}

struct Dicke0Probability {
    double exact;    // C(2S,S)/4^S
    double stirling; // 1/sqrt(pi S)
};

// Probability that the long-time no-jump survivor is |S,0>_x.
inline Dicke0Probability dicke0_probability(SpinQuantum S) {
    const int j = S.value;
    const double logp = detail::lfact(2 * j) - 2.0 * detail::lfact(j) -
                        2.0 * j * std::log(2.0);
    return Dicke0Probability{std::exp(logp), 1.0 / std::sqrt(M_PI * j)};
}

} // namespace dicke
