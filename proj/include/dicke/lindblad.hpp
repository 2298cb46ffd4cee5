#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/metrics.hpp"
#include "dicke/spin.hpp"

namespace dicke {

// State space of a density-matrix model: bare collective spin, or spin
// tensor a Fock-truncated boson (spin-major ordering, index = s*(nmax+1)+n).
struct StateSpace {
    enum class Kind { SpinOnly, SpinBoson };
    Kind kind;
    SpinQuantum S;
    int nmax = 0;

    static StateSpace spin_only(SpinQuantum S) { return {Kind::SpinOnly, S, 0}; }

    static StateSpace spin_boson(SpinQuantum S, int nmax) {
        if (nmax < 1) throw std::invalid_argument("StateSpace: nmax must be >= 1");
        return {Kind::SpinBoson, S, nmax};
    }

    int dim() const {
        return kind == Kind::SpinOnly ? S.dim() : S.dim() * (nmax + 1);
    }
};

// Effective Dicke-model parameters, rad/s throughout.
struct ModelParams {
    double omega = 0.0;
    double omega0 = 0.0;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double kappa = 0.0;
    double nbar = 0.0;

    // Advisory regime flag: sqrt(w^2+k^2) >= 10 max(w0, lambda+-).
    bool dispersive_valid() const {
        const double fast = std::sqrt(omega * omega + kappa * kappa);
        const double slow = std::max({std::abs(omega0), std::abs(lambda_plus),
                                      std::abs(lambda_minus)});
        return fast >= 10.0 * slow;
    }
};

struct LindbladTerm {
    double rate; // >= 0, multiplies D[op] with D[O]r = 2 O r O^+ - {O^+O, r}
    Eigen::MatrixXcd op;
    Eigen::MatrixXcd op_dag;    // cached
    Eigen::MatrixXcd opdag_op;  // cached

    LindbladTerm(double r, Eigen::MatrixXcd o) : rate(r), op(std::move(o)) {
        if (rate < 0.0) throw std::invalid_argument("LindbladTerm: rate must be >= 0");
        op_dag = op.adjoint();
        opdag_op = op_dag * op;
    }
};

struct LindbladModel {
    StateSpace space;
    Eigen::MatrixXcd hamiltonian;
    std::vector<LindbladTerm> terms;
    std::vector<std::string> warnings;
};

inline Eigen::MatrixXcd boson_annihilation(int nmax) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nmax + 1, nmax + 1);
    for (int n = 1; n <= nmax; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Fock truncation heuristic for the dispersive regime; the convergence
// doubling check below validates it after the fact.
inline int default_nmax(const ModelParams& p, SpinQuantum S) {
    const double lam = std::max(std::abs(p.lambda_plus), std::abs(p.lambda_minus));
    const double fast2 = p.omega != 0.0 ? p.omega * p.omega
                                        : p.omega * p.omega + p.kappa * p.kappa;
    const double occ = p.nbar + (fast2 > 0.0 ? lam * lam / fast2 * S.value : 0.0);
    return std::max(4, static_cast<int>(std::ceil(8.0 * occ)));
}

// Full generalized Dicke model on spin (x) boson:
// H = w a^+a + w0 Sz + (l-/sqrt(2S))(a S+ + a^+ S-) + (l+/sqrt(2S))(a S- + a^+ S+),
// dissipators k(nbar+1) D[a], k nbar D[a^+].
inline LindbladModel build_full_dicke(const ModelParams& p, const StateSpace& space) {
    if (space.kind != StateSpace::Kind::SpinBoson)
        throw std::invalid_argument("build_full_dicke: needs a spin-boson space");
    const int j = space.S.value;
    const int bd = space.nmax + 1;
    const Eigen::MatrixXcd ispin = Eigen::MatrixXcd::Identity(space.S.dim(), space.S.dim());
    const Eigen::MatrixXcd ibos = Eigen::MatrixXcd::Identity(bd, bd);
    const Eigen::MatrixXcd a = kron(ispin, boson_annihilation(space.nmax));
    const Eigen::MatrixXcd adag = a.adjoint();
    const Eigen::MatrixXcd sp = kron(splus_matrix(j).cast<Complex>(), ibos);
    const Eigen::MatrixXcd sm = sp.adjoint();
    const Eigen::MatrixXcd sz = kron(sz_matrix(j).cast<Complex>(), ibos);

    const double root2s = std::sqrt(2.0 * j);
    Eigen::MatrixXcd h = p.omega * (adag * a) + p.omega0 * sz;
    h += (p.lambda_minus / root2s) * (a * sp + adag * sm);
    h += (p.lambda_plus / root2s) * (a * sm + adag * sp);

    LindbladModel model{space, std::move(h), {}, {}};
    if (p.kappa > 0.0) {
        model.terms.emplace_back(p.kappa * (p.nbar + 1.0), a);
        if (p.nbar > 0.0) model.terms.emplace_back(p.kappa * p.nbar, adag);
    }
    if (p.nbar > 0.0) {
        const double tail = std::pow(p.nbar / (p.nbar + 1.0), space.nmax);
        if (tail > 1e-8)
            model.warnings.push_back("thermal occupation tail " + std::to_string(tail) +
                                     " at nmax=" + std::to_string(space.nmax) +
                                     " is not negligible");
    }
    return model;
}

// Reduced collective-spin model after elimination of the boson:
// H = [w0 - w(2nbar+1)(l-^2-l+^2)/(2S(w^2+k^2))] Sz
//     - w/(2S(w^2+k^2)) [(l-+l+)^2 Sx^2 + (l--l+)^2 Sy^2],
// dissipators k(nbar+1)/(2S(w^2+k^2)) D[l- S- + l+ S+]
// and        k nbar   /(2S(w^2+k^2)) D[l- S+ + l+ S-].
inline LindbladModel build_reduced(const ModelParams& p, SpinQuantum S) {
    const int j = S.value;
    const double denom = 2.0 * j * (p.omega * p.omega + p.kappa * p.kappa);
    if (denom == 0.0)
        throw std::invalid_argument("build_reduced: omega and kappa cannot both vanish");
    const Eigen::MatrixXcd sp = splus_matrix(j).cast<Complex>();
    const Eigen::MatrixXcd sm = sminus_matrix(j).cast<Complex>();
    const Eigen::MatrixXcd sx = sx_matrix(j).cast<Complex>();
    const Eigen::MatrixXcd sy = sy_matrix(j);
    const Eigen::MatrixXcd sz = sz_matrix(j).cast<Complex>();

    const double lm = p.lambda_minus, lp = p.lambda_plus;
    const double zshift = p.omega0 -
        p.omega * (2.0 * p.nbar + 1.0) * (lm * lm - lp * lp) / denom;
    const double cxy = p.omega / denom;
    Eigen::MatrixXcd h = zshift * sz;
    h -= cxy * ((lm + lp) * (lm + lp) * (sx * sx) + (lm - lp) * (lm - lp) * (sy * sy));

    LindbladModel model{StateSpace::spin_only(S), std::move(h), {}, {}};
    if (p.kappa > 0.0) {
        model.terms.emplace_back(p.kappa * (p.nbar + 1.0) / denom, lm * sm + lp * sp);
        if (p.nbar > 0.0)
            model.terms.emplace_back(p.kappa * p.nbar / denom, lm * sp + lp * sm);
    }
    return model;
}

// Engineered limit: H = -Lambda Sx^2, single dissipator Gamma D[Sx].
inline LindbladModel build_twisting(double lambda, double gamma, SpinQuantum S) {
    if (lambda < 0.0 || gamma < 0.0)
        throw std::invalid_argument("build_twisting: rates must be >= 0");
    const Eigen::MatrixXcd sx = sx_matrix(S.value).cast<Complex>();
    LindbladModel model{StateSpace::spin_only(S), -lambda * (sx * sx), {}, {}};
    if (gamma > 0.0) model.terms.emplace_back(gamma, sx);
    return model;
}

// drho/dt = -i[H,rho] + sum_k rate_k (2 O rho O^+ - O^+O rho - rho O^+O),
// applied matrix-free.
inline Eigen::MatrixXcd apply_liouvillian(const LindbladModel& model,
                                          const Eigen::MatrixXcd& rho) {
    const Complex I(0.0, 1.0);
    Eigen::MatrixXcd out = -I * (model.hamiltonian * rho - rho * model.hamiltonian);
    for (const auto& t : model.terms) {
        if (t.rate == 0.0) continue;
        out.noalias() += (2.0 * t.rate) * (t.op * rho * t.op_dag);
        out.noalias() -= t.rate * (t.opdag_op * rho);
        out.noalias() -= t.rate * (rho * t.opdag_op);
    }
    return out;
}

struct IntegrateOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;   // 0: choose from the first RHS evaluation
    long max_steps = 20'000'000;
    bool check_positivity = true; // eigenvalue floor -1e-8 at grid points
    bool trace_guard = true;      // |tr-1| < 1e-8 each accepted step, then renormalize
};

namespace detail {

inline double error_norm(const Eigen::MatrixXcd& err, const Eigen::MatrixXcd& y0,
                         const Eigen::MatrixXcd& y1, double atol, double rtol) {
    double worst = 0.0;
    for (Eigen::Index c = 0; c < err.cols(); ++c)
        for (Eigen::Index r = 0; r < err.rows(); ++r) {
            const double scale =
                atol + rtol * std::max(std::abs(y0(r, c)), std::abs(y1(r, c)));
            worst = std::max(worst, std::abs(err(r, c)) / scale);
        }
    return worst;
}

} // namespace detail

// Adaptive Dormand-Prince 5(4) on the density matrix.
inline std::vector<Eigen::MatrixXcd> integrate(const LindbladModel& model,
                                               const Eigen::MatrixXcd& rho0,
                                               const std::vector<double>& times,
                                               const IntegrateOptions& opt = {}) {
    if (times.empty()) return {};
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw std::invalid_argument("integrate: times must be strictly increasing");
    if (rho0.rows() != model.space.dim() || rho0.cols() != model.space.dim())
        throw std::invalid_argument("integrate: state dimension does not match model");

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    std::vector<Eigen::MatrixXcd> out;
    out.reserve(times.size());
    Eigen::MatrixXcd y = rho0;
    double t = times.front();
    out.push_back(y);

    Eigen::MatrixXcd k1 = apply_liouvillian(model, y);
    double h = opt.initial_step;
    if (h <= 0.0) {
        const double scale = k1.cwiseAbs().maxCoeff();
        h = scale > 0.0 ? 0.01 / scale : (times.back() - times.front()) / 100.0;
    }

    long steps = 0;
    for (std::size_t target = 1; target < times.size(); ++target) {
        const double t_end = times[target];
        while (t < t_end) {
            if (++steps > opt.max_steps)
                throw limit_error("integrate: step budget exhausted");
            const bool clipped = t + h >= t_end;
            const double hs = clipped ? t_end - t : h;

            Eigen::MatrixXcd k2 = apply_liouvillian(model, y + hs * (a21 * k1));
            Eigen::MatrixXcd k3 = apply_liouvillian(model, y + hs * (a31 * k1 + a32 * k2));
            Eigen::MatrixXcd k4 =
                apply_liouvillian(model, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
            Eigen::MatrixXcd k5 = apply_liouvillian(
                model, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            Eigen::MatrixXcd k6 = apply_liouvillian(
                model, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            Eigen::MatrixXcd ynew =
                y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            Eigen::MatrixXcd k7 = apply_liouvillian(model, ynew);
            Eigen::MatrixXcd err =
                hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double en = detail::error_norm(err, y, ynew, opt.atol, opt.rtol);
            if (en <= 1.0) {
                t += hs;
                y = std::move(ynew);
                k1 = std::move(k7);
                y = 0.5 * (y + y.adjoint().eval()); // keep Hermitian drift at zero
                if (opt.trace_guard) {
                    const double tr = y.trace().real();
                    if (std::abs(tr - 1.0) > 1e-8)
                        throw numeric_error("integrate: trace drifted to " + std::to_string(tr));
                    y /= tr;
                }
            }
            double factor = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            factor = std::min(5.0, std::max(0.2, factor));
            h = (clipped && en <= 1.0) ? std::max(h, hs * factor) : hs * factor;
            if (!(h > 1e-15 * std::max(1.0, std::abs(t))))
                throw numeric_error("integrate: step size underflow");
        }
        if (opt.check_positivity) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(y);
            if (es.eigenvalues().minCoeff() < -1e-8)
                throw numeric_error("integrate: positivity violated, eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
        }
        out.push_back(y);
    }
    return out;
}

inline Eigen::MatrixXcd partial_trace_boson(const Eigen::MatrixXcd& rho, int spin_dim,
                                            int boson_dim) {
    if (rho.rows() != spin_dim * boson_dim)
        throw std::invalid_argument("partial_trace_boson: dimension mismatch");
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(spin_dim, spin_dim);
    for (int i = 0; i < spin_dim; ++i)
        for (int j = 0; j < spin_dim; ++j)
            for (int n = 0; n < boson_dim; ++n)
                out(i, j) += rho(i * boson_dim + n, j * boson_dim + n);
    return out;
}

inline double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Appendix-style elimination benchmark: integrate the full spin-boson
// model and the reduced model side by side from |S,S>_z (boson vacuum)
// and report the spin-sector trace distance on the Lambda*t grid.
struct EliminationResult {
    std::vector<double> lambda_t;
    std::vector<double> distance;
    double max_distance = 0.0;
};

inline EliminationResult elimination_comparison(double lambda, double omega_over_lambda,
                                                double kappa_over_lambda, double nbar,
                                                SpinQuantum S,
                                                const std::vector<double>& lambda_t_grid,
                                                const IntegrateOptions& opt = {}) {
    ModelParams p;
    p.omega = omega_over_lambda * lambda;
    p.kappa = kappa_over_lambda * lambda;
    p.omega0 = 0.0;
    p.lambda_plus = p.lambda_minus = lambda;
    p.nbar = nbar;

    const double twist =
        2.0 * lambda * lambda * p.omega / (S.value * (p.omega * p.omega + p.kappa * p.kappa));
    std::vector<double> times(lambda_t_grid.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = lambda_t_grid[i] / twist;

    const StateSpace space = StateSpace::spin_boson(S, default_nmax(p, S));
    LindbladModel full = build_full_dicke(p, space);
    LindbladModel red = build_reduced(p, S);

    Eigen::VectorXcd spin0 = dicke_state(S, S.value, Basis::Z).amplitudes;
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(space.nmax + 1);
    vac(0) = 1.0;
    Eigen::VectorXcd full0v(space.dim());
    for (int i = 0; i < S.dim(); ++i)
        for (int n = 0; n <= space.nmax; ++n)
            full0v(i * (space.nmax + 1) + n) = spin0(i) * vac(n);

    const auto full_states = integrate(full, full0v * full0v.adjoint(), times, opt);
    const auto red_states = integrate(red, spin0 * spin0.adjoint(), times, opt);

    EliminationResult out;
    out.lambda_t = lambda_t_grid;
    out.distance.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Eigen::MatrixXcd spin_red =
            partial_trace_boson(full_states[i], S.dim(), space.nmax + 1);
        out.distance[i] = trace_distance(spin_red, red_states[i]);
        out.max_distance = std::max(out.max_distance, out.distance[i]);
    }
    return out;
}

} // namespace dicke
