// Operator-core checks: eigendecomposition wrappers, PSD square roots,
// support projectors, pseudo-inverses, fidelity, and the validation guards.

#include <gtest/gtest.h>

#include <cmath>

#include "wcf/linalg.hpp"
#include "wcf/oracle.hpp"  // random matrix generators

namespace {

using wcf::cmatrix;
using wcf::complex_t;
using wcf::cvector;
using wcf::hermitian_operator;
using wcf::rvector;

cmatrix diag2(double a, double b) {
    cmatrix m = cmatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

TEST(eig, hand_solved_two_by_two) {
    cmatrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    const wcf::eigen_system sys = wcf::hermitian_eig(hermitian_operator(m));
    ASSERT_EQ(sys.eigenvalues.size(), 2);
    EXPECT_NEAR(sys.eigenvalues[0], 0.0, 1e-14);
    EXPECT_NEAR(sys.eigenvalues[1], 1.0, 1e-14);
    cvector top(2);
    top << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(top.dot(sys.eigenvectors.col(1))), 1.0, 1e-12);
}

TEST(eig, diagonal_and_identity) {
    const wcf::eigen_system sys = wcf::hermitian_eig(hermitian_operator(diag2(0.75, 0.25)));
    EXPECT_NEAR(sys.eigenvalues[0], 0.25, 1e-14);
    EXPECT_NEAR(sys.eigenvalues[1], 0.75, 1e-14);
    // Eigenvectors of a diagonal matrix are the standard basis up to phase.
    EXPECT_NEAR(std::abs(sys.eigenvectors.col(0)(1)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(sys.eigenvectors.col(1)(0)), 1.0, 1e-12);

    const wcf::eigen_system id3 = wcf::hermitian_eig(hermitian_operator(cmatrix::Identity(3, 3)));
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(id3.eigenvalues[i], 1.0, 1e-14);
    }
}

TEST(eig, reconstruction_and_orthonormality_on_random_input) {
    wcf::rng_stream rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const cmatrix g = wcf::ginibre(5, 5, rng);
        const hermitian_operator h(0.5 * (g + g.adjoint()));
        const wcf::eigen_system sys = wcf::hermitian_eig(h);
        const cmatrix rebuilt = sys.eigenvectors *
                                sys.eigenvalues.cast<complex_t>().asDiagonal() *
                                sys.eigenvectors.adjoint();
        const double scale = std::max(1.0, sys.eigenvalues.cwiseAbs().maxCoeff());
        EXPECT_LE(wcf::max_abs(rebuilt - h.matrix()), 1e-10 * scale);
        EXPECT_LE(wcf::max_abs(sys.eigenvectors.adjoint() * sys.eigenvectors -
                               cmatrix::Identity(5, 5)),
                  1e-10);
        // Ascending order contract.
        for (Eigen::Index i = 1; i < sys.eigenvalues.size(); ++i) {
            EXPECT_LE(sys.eigenvalues[i - 1], sys.eigenvalues[i]);
        }
    }
}

TEST(hermitian_operator, rejects_bad_input) {
    EXPECT_THROW(hermitian_operator(cmatrix::Zero(2, 3)), wcf::dimension_error);
    EXPECT_THROW(hermitian_operator(cmatrix::Zero(0, 0)), wcf::dimension_error);

    cmatrix skew(2, 2);
    skew << 0.0, complex_t(0.0, 1.0), complex_t(0.0, 1.0), 0.0;  // M != M^dagger
    EXPECT_THROW(hermitian_operator{skew}, wcf::not_hermitian_error);

    cmatrix nan_mat = cmatrix::Zero(2, 2);
    nan_mat(0, 0) = std::nan("");
    EXPECT_THROW(hermitian_operator{nan_mat}, wcf::not_hermitian_error);
}

TEST(psd_sqrt, diagonal_values) {
    const hermitian_operator r1 = wcf::psd_sqrt(hermitian_operator(diag2(0.75, 0.25)));
    EXPECT_NEAR(r1.matrix()(0, 0).real(), std::sqrt(3.0) / 2.0, 1e-14);
    EXPECT_NEAR(r1.matrix()(1, 1).real(), 0.5, 1e-14);
    EXPECT_NEAR(std::abs(r1.matrix()(0, 1)), 0.0, 1e-14);

    const hermitian_operator r2 = wcf::psd_sqrt(hermitian_operator(diag2(0.25, 0.5625)));
    EXPECT_NEAR(r2.matrix()(0, 0).real(), 0.5, 1e-14);
    EXPECT_NEAR(r2.matrix()(1, 1).real(), 0.75, 1e-14);
}

TEST(psd_sqrt, projector_is_its_own_root) {
    cmatrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    const hermitian_operator r = wcf::psd_sqrt(hermitian_operator(m));
    EXPECT_LE(wcf::max_abs(r.matrix() - m), 1e-12);
}

TEST(psd_sqrt, squares_back_on_random_psd) {
    wcf::rng_stream rng(102);
    for (int trial = 0; trial < 20; ++trial) {
        const cmatrix g = wcf::ginibre(4, 4, rng);
        const hermitian_operator p(g * g.adjoint());
        const hermitian_operator r = wcf::psd_sqrt(p);
        EXPECT_LE(wcf::max_abs(r.matrix() * r.matrix() - p.matrix()),
                  1e-9 * std::max(1.0, wcf::max_abs(p.matrix())));
    }
}

TEST(psd_sqrt, clamps_dust_but_rejects_real_negativity) {
    const hermitian_operator dusty = wcf::psd_sqrt(hermitian_operator(diag2(-1e-11, 1.0)));
    EXPECT_NEAR(dusty.matrix()(0, 0).real(), 0.0, 1e-12);
    EXPECT_NEAR(dusty.matrix()(1, 1).real(), 1.0, 1e-12);
    EXPECT_THROW(wcf::psd_sqrt(hermitian_operator(diag2(-1e-3, 1.0))), wcf::not_psd_error);
}

TEST(support_projector, drops_null_directions) {
    const hermitian_operator pi = wcf::support_projector(hermitian_operator(diag2(1e-15, 1.0)));
    EXPECT_NEAR(pi.matrix()(0, 0).real(), 0.0, 1e-13);
    EXPECT_NEAR(pi.matrix()(1, 1).real(), 1.0, 1e-13);
}

TEST(support_projector, is_idempotent_and_fixes_the_operator) {
    wcf::rng_stream rng(103);
    for (int trial = 0; trial < 10; ++trial) {
        const cmatrix g = wcf::ginibre(4, 2, rng);  // rank-2 PSD in dimension 4
        const hermitian_operator p(g * g.adjoint());
        const cmatrix pi = wcf::support_projector(p).matrix();
        EXPECT_NEAR(pi.trace().real(), 2.0, 1e-10);
        EXPECT_LE(wcf::max_abs(pi * pi - pi), 1e-10);
        EXPECT_LE(wcf::max_abs(pi * p.matrix() - p.matrix()),
                  1e-10 * std::max(1.0, wcf::max_abs(p.matrix())));
    }
}

TEST(pinv_on_support, inverts_on_the_support) {
    const hermitian_operator inv = wcf::pinv_on_support(hermitian_operator(diag2(0.5, 0.25)));
    EXPECT_NEAR(inv.matrix()(0, 0).real(), 2.0, 1e-12);
    EXPECT_NEAR(inv.matrix()(1, 1).real(), 4.0, 1e-12);

    wcf::rng_stream rng(104);
    const cmatrix g = wcf::ginibre(4, 3, rng);  // rank deficient
    const hermitian_operator p(g * g.adjoint());
    const cmatrix product = p.matrix() * wcf::pinv_on_support(p).matrix();
    EXPECT_LE(wcf::max_abs(product - wcf::support_projector(p).matrix()), 1e-9);
}

TEST(fidelity, known_values_and_symmetry) {
    const hermitian_operator half_identity(0.5 * cmatrix::Identity(2, 2));
    const hermitian_operator ground(diag2(1.0, 0.0));
    EXPECT_NEAR(wcf::fidelity(half_identity, ground), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(wcf::fidelity(ground, ground), 1.0, 1e-12);

    wcf::rng_stream rng(105);
    for (int trial = 0; trial < 10; ++trial) {
        const hermitian_operator a(wcf::random_density(3, rng));
        const hermitian_operator b(wcf::random_density(3, rng));
        const double fab = wcf::fidelity(a, b);
        EXPECT_NEAR(fab, wcf::fidelity(b, a), 1e-10);
        EXPECT_GE(fab, -1e-12);
        EXPECT_LE(fab, 1.0 + 1e-9);
    }
}

TEST(fidelity, pure_state_overlap) {
    wcf::rng_stream rng(106);
    const cvector a = wcf::random_unit_vector(3, rng);
    const cvector b = wcf::random_unit_vector(3, rng);
    const hermitian_operator pa(a * a.adjoint());
    const hermitian_operator pb(b * b.adjoint());
    EXPECT_NEAR(wcf::fidelity(pa, pb), std::abs(a.dot(b)), 1e-10);
}

TEST(fidelity, rejects_bad_operands) {
    const hermitian_operator d2(0.5 * cmatrix::Identity(2, 2));
    const hermitian_operator d3(cmatrix::Identity(3, 3) / 3.0);
    EXPECT_THROW(wcf::fidelity(d2, d3), wcf::dimension_error);
    EXPECT_THROW(wcf::fidelity(hermitian_operator(2.0 * cmatrix::Identity(2, 2)), d2),
                 wcf::validation_error);
}

TEST(is_unitary, classifies_correctly) {
    EXPECT_TRUE(wcf::is_unitary(cmatrix::Identity(3, 3)));
    EXPECT_FALSE(wcf::is_unitary(0.5 * cmatrix::Identity(3, 3)));
    wcf::rng_stream rng(107);
    EXPECT_TRUE(wcf::is_unitary(wcf::random_unitary(4, rng)));
}

TEST(max_abs, picks_the_largest_entry_magnitude) {
    cmatrix m = cmatrix::Zero(2, 2);
    m(0, 1) = complex_t(3.0, 4.0);
    EXPECT_NEAR(wcf::max_abs(m), 5.0, 1e-15);
}

}  // namespace
