#pragma once

// Bipartite pure states on H_A (x) H_B and the operations the protocol needs
// on them: partial traces, one-sided operator application, Schmidt
// decomposition, purification, and the reduced-state identity relating a
// one-sided measurement operator to its mirror on the other factor.
//
// Index convention: the joint amplitude of |i>_A (x) |j>_B lives at
// amp[i * dim_b + j]. as_matrix reshapes amplitudes into the dim_a x dim_b
// matrix Psi with Psi(i, j) = amp[i * dim_b + j].

#include <utility>

#include "wcf/linalg.hpp"

namespace wcf {

inline cmatrix as_matrix(const cvector& amp, Eigen::Index dim_a, Eigen::Index dim_b) {
    using row_major = Eigen::Matrix<complex_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const row_major>(amp.data(), dim_a, dim_b);
}

inline cvector as_vector(const cmatrix& m) {
    cvector v(m.rows() * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            v[i * m.cols() + j] = m(i, j);
        }
    }
    return v;
}

// Unit-norm joint state. Unnormalized intermediate vectors are passed around
// as raw cvector values and only wrapped once normalized.
class bipartite_state {
public:
    bipartite_state(Eigen::Index dim_a, Eigen::Index dim_b, cvector amplitudes,
                    double tolerance = tol::state_norm)
        : dim_a_(dim_a), dim_b_(dim_b), amp_(std::move(amplitudes)) {
        if (dim_a_ < 1 || dim_b_ < 1) {
            throw dimension_error("bipartite state factors must be non-empty");
        }
        if (amp_.size() != dim_a_ * dim_b_) {
            throw dimension_error("amplitude count " + std::to_string(amp_.size()) +
                                  " does not match " + std::to_string(dim_a_) + "x" +
                                  std::to_string(dim_b_));
        }
        const double residual = std::abs(amp_.norm() - 1.0);
        if (!(residual <= tolerance)) {
            throw validation_error("state not normalized: " +
                                   residual_text("| ||amp|| - 1 |", residual, tolerance));
        }
    }

    static bipartite_state from_unnormalized(Eigen::Index dim_a, Eigen::Index dim_b,
                                             const cvector& v) {
        const double n = v.norm();
        if (!(n > 1e-12)) {
            throw validation_error("cannot normalize a near-zero vector, " +
                                   residual_text("norm", n, 1e-12));
        }
        return bipartite_state(dim_a, dim_b, v / n);
    }

    Eigen::Index dim_a() const { return dim_a_; }
    Eigen::Index dim_b() const { return dim_b_; }
    const cvector& amplitudes() const { return amp_; }
    complex_t amplitude(Eigen::Index i, Eigen::Index j) const { return amp_[i * dim_b_ + j]; }

private:
    Eigen::Index dim_a_;
    Eigen::Index dim_b_;
    cvector amp_;
};

// Partial traces of an unnormalized outer product |v><v|. The _raw variants
// skip density validation and are the workhorses for intermediate vectors.
inline cmatrix partial_trace_A_raw(const cvector& amp, Eigen::Index dim_a, Eigen::Index dim_b) {
    const cmatrix psi = as_matrix(amp, dim_a, dim_b);
    return psi.transpose() * psi.conjugate();  // operator on B
}

inline cmatrix partial_trace_B_raw(const cvector& amp, Eigen::Index dim_a, Eigen::Index dim_b) {
    const cmatrix psi = as_matrix(amp, dim_a, dim_b);
    return psi * psi.adjoint();  // operator on A
}

// Trace out A: reduced density operator on B.
inline hermitian_operator partial_trace_A(const bipartite_state& s) {
    hermitian_operator out(partial_trace_A_raw(s.amplitudes(), s.dim_a(), s.dim_b()));
    const double tr = out.matrix().trace().real();
    if (!(std::abs(tr - 1.0) <= 1e-10)) {
        throw validation_error("reduced operator trace drifted: " +
                               residual_text("|Tr - 1|", std::abs(tr - 1.0), 1e-10));
    }
    return out;
}

// Trace out B: reduced density operator on A.
inline hermitian_operator partial_trace_B(const bipartite_state& s) {
    hermitian_operator out(partial_trace_B_raw(s.amplitudes(), s.dim_a(), s.dim_b()));
    const double tr = out.matrix().trace().real();
    if (!(std::abs(tr - 1.0) <= 1e-10)) {
        throw validation_error("reduced operator trace drifted: " +
                               residual_text("|Tr - 1|", std::abs(tr - 1.0), 1e-10));
    }
    return out;
}

// (I (x) X)|v>, returned unnormalized.
inline cvector apply_on_B_raw(const cmatrix& x, const cvector& amp, Eigen::Index dim_a,
                              Eigen::Index dim_b) {
    if (x.rows() != dim_b || x.cols() != dim_b) {
        throw dimension_error("operator on B must be " + std::to_string(dim_b) + "x" +
                              std::to_string(dim_b) + ", got " + std::to_string(x.rows()) + "x" +
                              std::to_string(x.cols()));
    }
    const cmatrix out = as_matrix(amp, dim_a, dim_b) * x.transpose();
    return as_vector(out);
}

inline cvector apply_on_B(const cmatrix& x, const bipartite_state& s) {
    return apply_on_B_raw(x, s.amplitudes(), s.dim_a(), s.dim_b());
}

// (X (x) I)|v>, returned unnormalized.
inline cvector apply_on_A_raw(const cmatrix& x, const cvector& amp, Eigen::Index dim_a,
                              Eigen::Index dim_b) {
    if (x.rows() != dim_a || x.cols() != dim_a) {
        throw dimension_error("operator on A must be " + std::to_string(dim_a) + "x" +
                              std::to_string(dim_a) + ", got " + std::to_string(x.rows()) + "x" +
                              std::to_string(x.cols()));
    }
    const cmatrix out = x * as_matrix(amp, dim_a, dim_b);
    return as_vector(out);
}

inline cvector apply_on_A(const cmatrix& x, const bipartite_state& s) {
    return apply_on_A_raw(x, s.amplitudes(), s.dim_a(), s.dim_b());
}

// Schmidt form |phi> = sum_k c_k |a_k>|b_k> with coefficients descending.
// All min(dim_a, dim_b) coefficients are kept, zeros included; rank() counts
// the ones above the relative cutoff.
struct schmidt_decomposition {
    rvector coefficients;
    cmatrix basis_a;  // columns |a_k>
    cmatrix basis_b;  // columns |b_k>

    Eigen::Index rank(double relative_cutoff = tol::support_cutoff) const {
        if (coefficients.size() == 0) return 0;
        const double threshold = relative_cutoff * coefficients[0];
        Eigen::Index r = 0;
        while (r < coefficients.size() && coefficients[r] > threshold) ++r;
        return r;
    }
};

inline schmidt_decomposition schmidt_decompose(const bipartite_state& s) {
    const cmatrix psi = as_matrix(s.amplitudes(), s.dim_a(), s.dim_b());
    Eigen::JacobiSVD<cmatrix> svd(psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    schmidt_decomposition out{svd.singularValues(), svd.matrixU(), svd.matrixV().conjugate()};

    const double weight_residual = std::abs(out.coefficients.squaredNorm() - 1.0);
    if (!(weight_residual <= 1e-10)) {
        throw validation_error("Schmidt weights do not sum to one: " +
                               residual_text("|sum c_k^2 - 1|", weight_residual, 1e-10));
    }
    cmatrix recon = cmatrix::Zero(s.dim_a(), s.dim_b());
    for (Eigen::Index k = 0; k < out.coefficients.size(); ++k) {
        recon += out.coefficients[k] * out.basis_a.col(k) * out.basis_b.col(k).transpose();
    }
    const double recon_residual = max_abs(recon - psi);
    if (!(recon_residual <= 1e-10)) {
        throw validation_error("Schmidt reconstruction failed: " +
                               residual_text("max|recon - psi|", recon_residual, 1e-10));
    }
    return out;
}

// Purification sum_k sqrt(l_k) |k>_A (x) |u_k>_B with (l_k, u_k) the
// eigensystem of rho in descending order. The result is renormalized, so a
// trace within the density tolerance of one is accepted.
inline bipartite_state canonical_purification(const hermitian_operator& rho,
                                              double density_tolerance = tol::density) {
    eigen_system sys = hermitian_eig(rho);
    const double tr_residual = std::abs(sys.eigenvalues.sum() - 1.0);
    if (!(tr_residual <= density_tolerance)) {
        throw not_density_error("purification input not a density operator: " +
                                residual_text("|Tr - 1|", tr_residual, density_tolerance));
    }
    if (!(sys.eigenvalues.minCoeff() >= -density_tolerance)) {
        throw not_density_error("purification input not PSD: " +
                                residual_text("min eigenvalue", sys.eigenvalues.minCoeff(),
                                              -density_tolerance));
    }
    const Eigen::Index d = rho.dim();
    cvector amp = cvector::Zero(d * d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const Eigen::Index src = d - 1 - k;  // eigenvalues ascending -> descending
        const double lam = std::max(sys.eigenvalues[src], 0.0);
        amp.segment(k * d, d) = std::sqrt(lam) * sys.eigenvectors.col(src);
    }
    return bipartite_state::from_unnormalized(d, d, amp);
}

// Operator D on A whose matrix elements in phi's A-side Schmidt basis equal
// those of E in the B-side Schmidt basis: <a_k|D|a_j> = <b_k|E|b_j>.
inline cmatrix schmidt_equivalent(const hermitian_operator& e, const bipartite_state& phi,
                                  double relative_cutoff = tol::support_cutoff) {
    if (e.dim() != phi.dim_b()) {
        throw dimension_error("schmidt_equivalent operand must act on B (dim " +
                              std::to_string(phi.dim_b()) + "), got " + std::to_string(e.dim()));
    }
    const schmidt_decomposition sd = schmidt_decompose(phi);
    const Eigen::Index r = sd.rank(relative_cutoff);
    const cmatrix br = sd.basis_b.leftCols(r);
    const cmatrix ar = sd.basis_a.leftCols(r);
    return ar * (br.adjoint() * e.matrix() * br) * ar.adjoint();
}

// Both sides of the reduced-state identity
//   Tr_B[(I (x) sqrt(E)) |phi><phi| (I (x) sqrt(E))] = sqrt(w) D^T sqrt(w),
// where w = Tr_B |phi><phi|, D is the Schmidt-equivalent of E, and the
// transpose is taken in phi's A-side Schmidt basis. Degenerate Schmidt
// weights are fine: every factor on the right is computed in the one basis
// the decomposition chose.
inline std::pair<hermitian_operator, hermitian_operator> lemma_lhs_rhs(
    const bipartite_state& phi, const hermitian_operator& e) {
    const hermitian_operator root_e = psd_sqrt(e);
    const cvector v = apply_on_B(root_e.matrix(), phi);
    const cmatrix lhs = partial_trace_B_raw(v, phi.dim_a(), phi.dim_b());

    const schmidt_decomposition sd = schmidt_decompose(phi);
    const cmatrix dmat = sd.basis_b.adjoint() * e.matrix() * sd.basis_b;
    const cmatrix s = sd.coefficients.cast<complex_t>().asDiagonal();
    const cmatrix rhs = sd.basis_a * (s * dmat.transpose() * s) * sd.basis_a.adjoint();

    return {hermitian_operator(lhs, 1e-10), hermitian_operator(rhs, 1e-10)};
}

}  // namespace wcf
