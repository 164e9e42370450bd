#pragma once

// Dense complex linear algebra on small Hilbert spaces: Hermitian
// eigensystems, operator square roots, support projectors, pseudo-inverses
// and fidelity. Everything is a pure function of its inputs; operators are
// validated when constructed and immutable afterwards.
//
// Tolerance conventions used throughout the library:
//   - Hermiticity is checked at 1e-12 (max-abs of M - M^dagger).
//   - Eigenvalues in [-1e-10, 0) are clamped to zero before square roots;
//     anything below the window is an error, not noise.
//   - Support membership is relative: an eigenvalue belongs to the support
//     iff it exceeds 1e-10 times the largest eigenvalue.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "wcf/errors.hpp"

namespace wcf {

using complex_t = std::complex<double>;
using cmatrix = Eigen::MatrixXcd;
using cvector = Eigen::VectorXcd;
using rvector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermiticity = 1e-12;
inline constexpr double eigen_residual = 1e-10;
inline constexpr double psd_clamp = 1e-10;
inline constexpr double support_cutoff = 1e-10;
inline constexpr double state_norm = 1e-10;
inline constexpr double density = 1e-9;
inline constexpr double povm = 1e-9;
inline constexpr double fairness = 1e-9;
inline constexpr double unitarity = 1e-9;
inline constexpr double completeness = 1e-9;
}  // namespace tol

inline double max_abs(const cmatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Square complex matrix certified Hermitian at construction. The stored
// matrix is the symmetrization (M + M^dagger)/2, so downstream eigensolvers
// see an exactly Hermitian operand.
class hermitian_operator {
public:
    explicit hermitian_operator(const cmatrix& m, double tolerance = tol::hermiticity) {
        if (m.rows() == 0 || m.rows() != m.cols()) {
            throw dimension_error("hermitian operator must be square and non-empty, got " +
                                  std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        }
        const double residual = max_abs(m - m.adjoint());
        if (!(residual <= tolerance)) {  // negated compare also rejects NaN
            throw not_hermitian_error("hermiticity violated: " +
                                      residual_text("max|M - M^dagger|", residual, tolerance));
        }
        mat_ = 0.5 * (m + m.adjoint());
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const cmatrix& matrix() const { return mat_; }

private:
    cmatrix mat_;
};

// Eigenvalues ascending, eigenvectors as the matching columns.
struct eigen_system {
    rvector eigenvalues;
    cmatrix eigenvectors;
};

inline eigen_system hermitian_eig(const hermitian_operator& h) {
    Eigen::SelfAdjointEigenSolver<cmatrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw error("hermitian eigensolver did not converge");
    }
    eigen_system sys{solver.eigenvalues(), solver.eigenvectors()};
    const double scale = std::max(1.0, sys.eigenvalues.cwiseAbs().maxCoeff());
    const cmatrix recon =
        sys.eigenvectors * sys.eigenvalues.cast<complex_t>().asDiagonal() * sys.eigenvectors.adjoint();
    const double recon_residual = max_abs(recon - h.matrix());
    if (!(recon_residual <= tol::eigen_residual * scale)) {
        throw error("eigendecomposition reconstruction failed: " +
                    residual_text("max|V L V^dagger - M|", recon_residual, tol::eigen_residual * scale));
    }
    const double orth_residual =
        max_abs(sys.eigenvectors.adjoint() * sys.eigenvectors - cmatrix::Identity(h.dim(), h.dim()));
    if (!(orth_residual <= tol::eigen_residual)) {
        throw error("eigenvector basis not orthonormal: " +
                    residual_text("max|V^dagger V - I|", orth_residual, tol::eigen_residual));
    }
    return sys;
}

namespace detail {

// Eigensystem of an operator required to be PSD: eigenvalues within the
// clamping window below zero are snapped to zero, anything lower throws.
struct psd_spectrum {
    rvector lambda;  // ascending, clamped nonnegative
    cmatrix vecs;
};

inline psd_spectrum clamped_spectrum(const hermitian_operator& p, double clamp, const char* who) {
    eigen_system sys = hermitian_eig(p);
    for (Eigen::Index i = 0; i < sys.eigenvalues.size(); ++i) {
        if (sys.eigenvalues[i] < -clamp) {
            throw not_psd_error(std::string(who) + ": operator not PSD, " +
                                residual_text("min eigenvalue", sys.eigenvalues[i], -clamp));
        }
        if (sys.eigenvalues[i] < 0.0) sys.eigenvalues[i] = 0.0;
    }
    return {sys.eigenvalues, sys.eigenvectors};
}

inline cmatrix rebuild(const rvector& lambda, const cmatrix& vecs) {
    return vecs * lambda.cast<complex_t>().asDiagonal() * vecs.adjoint();
}

}  // namespace detail

// Unique PSD square root. Eigenvalues in [-clamp, 0) are treated as zero.
inline hermitian_operator psd_sqrt(const hermitian_operator& p, double clamp = tol::psd_clamp) {
    auto spec = detail::clamped_spectrum(p, clamp, "psd_sqrt");
    const rvector roots = spec.lambda.cwiseSqrt();
    return hermitian_operator(detail::rebuild(roots, spec.vecs));
}

// Orthogonal projector onto the span of eigenvectors whose eigenvalue
// exceeds relative_cutoff times the largest eigenvalue.
inline hermitian_operator support_projector(const hermitian_operator& p,
                                            double relative_cutoff = tol::support_cutoff) {
    auto spec = detail::clamped_spectrum(p, tol::psd_clamp, "support_projector");
    const double lam_max = spec.lambda.size() ? spec.lambda.maxCoeff() : 0.0;
    const double threshold = relative_cutoff * lam_max;
    rvector indicator = rvector::Zero(spec.lambda.size());
    for (Eigen::Index i = 0; i < spec.lambda.size(); ++i) {
        if (spec.lambda[i] > threshold) indicator[i] = 1.0;
    }
    return hermitian_operator(detail::rebuild(indicator, spec.vecs));
}

// Moore-Penrose inverse restricted to the support, with the same cutoff
// convention as support_projector.
inline hermitian_operator pinv_on_support(const hermitian_operator& p,
                                          double relative_cutoff = tol::support_cutoff) {
    auto spec = detail::clamped_spectrum(p, tol::psd_clamp, "pinv_on_support");
    const double lam_max = spec.lambda.size() ? spec.lambda.maxCoeff() : 0.0;
    const double threshold = relative_cutoff * lam_max;
    rvector inv = rvector::Zero(spec.lambda.size());
    for (Eigen::Index i = 0; i < spec.lambda.size(); ++i) {
        if (spec.lambda[i] > threshold) inv[i] = 1.0 / spec.lambda[i];
    }
    return hermitian_operator(detail::rebuild(inv, spec.vecs));
}

// Fidelity F(omega, tau) = Tr sqrt(sqrt(tau) omega sqrt(tau)). Accepts
// subnormalized operators (trace at most one within tolerance); symmetric in
// its arguments up to numerical error.
inline double fidelity(const hermitian_operator& omega, const hermitian_operator& tau) {
    if (omega.dim() != tau.dim()) {
        throw dimension_error("fidelity operands differ in dimension: " +
                              std::to_string(omega.dim()) + " vs " + std::to_string(tau.dim()));
    }
    auto spec_omega = detail::clamped_spectrum(omega, tol::psd_clamp, "fidelity(omega)");
    auto spec_tau = detail::clamped_spectrum(tau, tol::psd_clamp, "fidelity(tau)");
    const double tr_omega = spec_omega.lambda.sum();
    const double tr_tau = spec_tau.lambda.sum();
    if (tr_omega > 1.0 + tol::density || tr_tau > 1.0 + tol::density) {
        throw validation_error("fidelity expects subnormalized operators: " +
                               residual_text("max trace", std::max(tr_omega, tr_tau), 1.0 + tol::density));
    }
    // Evaluated as the trace norm of sqrt(tau) * sqrt(omega). Sandwiching
    // (sqrt(tau) * omega * sqrt(tau)) instead would square the small singular
    // values, and the final square root would then blow eigensolver noise up
    // from machine epsilon to its square root.
    const cmatrix root_omega = detail::rebuild(spec_omega.lambda.cwiseSqrt(), spec_omega.vecs);
    const cmatrix root_tau = detail::rebuild(spec_tau.lambda.cwiseSqrt(), spec_tau.vecs);
    Eigen::JacobiSVD<cmatrix> svd(root_tau * root_omega);
    return svd.singularValues().sum();
}

inline bool is_unitary(const cmatrix& u, double tolerance = tol::unitarity) {
    if (u.rows() != u.cols() || u.rows() == 0) return false;
    return max_abs(u.adjoint() * u - cmatrix::Identity(u.rows(), u.cols())) <= tolerance;
}

}  // namespace wcf
