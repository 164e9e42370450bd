#pragma once

// Cheating strategies and their exact figures of merit.
//
// Four numbers summarize an instance's security:
//   p_a_max     best winning probability of a cheating Alice (honest Bob),
//               = 2 Tr(rho E0^2); she risks being caught to get it.
//   p_a_thresh  best winning probability of an Alice who is never caught,
//               = 1 / (2 Tr(rho P1)) with P1 the support projector of E1.
//   p_b_max     best winning probability of a cheating Bob (honest Alice),
//               = 2 (Tr sqrt(rho E0 rho))^2; achieved without measuring at
//               all, by a single rotate-and-return strategy.
//   p_b_thresh  best winning probability of a Bob who is never caught,
//               = 1 / (2 lmax(P E0 P)) with P the support projector of rho.
//
// Each figure comes with the explicit strategy achieving it, and exact
// evaluators report (p_win, p_caught, p_opponent_wins, p_false_accusation)
// for arbitrary strategies so the constructions can be checked against the
// closed forms, against independent numerical searches, and against
// simulation.

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "wcf/protocol.hpp"

namespace wcf {

// ---------------------------------------------------------------------------
// Closed-form security figures.

inline double p_a_max(const protocol_instance& inst) {
    const cmatrix& e0 = inst.e0_pos().matrix();
    return 2.0 * (inst.rho().matrix() * e0 * e0).trace().real();
}

inline double p_a_thresh(const protocol_instance& inst) {
    const cmatrix p1 = support_projector(inst.e1_pos(), inst.tols().support_cutoff).matrix();
    const double mass = (inst.rho().matrix() * p1).trace().real();
    if (!(mass > 1e-12)) {
        throw degenerate_instance_error(
            "rho carries no mass on the support of e1; the never-caught figure for Alice "
            "is undefined");
    }
    return 1.0 / (2.0 * mass);
}

inline double p_b_max(const protocol_instance& inst) {
    // Nuclear-norm route: 2 (Tr sqrt(rho E0 rho))^2. A second, independent
    // route through the fidelity function is kept separate below so tests can
    // cross-check the two.
    const cmatrix& rho = inst.rho().matrix();
    const hermitian_operator m(rho * inst.e0_pos().matrix() * rho);
    const rvector lambda = detail::clamped_spectrum(m, tol::psd_clamp, "rho e0 rho").lambda;
    const double trace_root = lambda.cwiseSqrt().sum();
    return 2.0 * trace_root * trace_root;
}

inline double p_b_max_via_fidelity(const protocol_instance& inst) {
    const cmatrix root = psd_sqrt(inst.rho()).matrix();
    const hermitian_operator omega(2.0 * root * inst.e0_pos().matrix() * root);
    const double f = fidelity(omega, inst.rho());
    return f * f;
}

inline double p_b_thresh(const protocol_instance& inst) {
    const cmatrix p = support_projector(inst.rho(), inst.tols().support_cutoff).matrix();
    const hermitian_operator pinched(p * inst.e0_pos().matrix() * p);
    const double top = hermitian_eig(pinched).eigenvalues.maxCoeff();
    if (!(top > 1e-12)) {
        throw degenerate_instance_error(
            "e0 vanishes on the support of rho; the never-caught figure for Bob is undefined");
    }
    return 1.0 / (2.0 * top);
}

// ---------------------------------------------------------------------------
// Honest strategies.

inline alice_strategy honest_alice(const protocol_instance& inst) {
    return alice_strategy{inst.psi(), /*honest=*/true};
}

inline bob_strategy honest_bob(const protocol_instance& inst) {
    bob_strategy s;
    s.povm = {inst.e0_pos(), inst.e1_pos()};
    s.unitaries = {cmatrix::Identity(inst.dim(), inst.dim()),
                   cmatrix::Identity(inst.dim(), inst.dim())};
    s.announce_zero_set = {0};
    s.honest = true;
    return s;
}

// ---------------------------------------------------------------------------
// Uhlmann machinery shared by Bob's constructions.
//
// For a fixed prepared state |phi> and target |tau>, the overlap
// <tau|(I (x) U)|phi> is the linear functional Tr(U K) of the unitary, with
// K = Phi^T conj(Tau) built from the amplitude matrices. Its maximum modulus
// over unitaries is the nuclear norm of K, attained at U = Q P^+ from the
// singular value decomposition K = P S Q^+.

inline cmatrix cross_matrix(const bipartite_state& state, const bipartite_state& target) {
    if (state.dim_a() != target.dim_a() || state.dim_b() != target.dim_b()) {
        throw dimension_error("cross matrix needs states on identical spaces");
    }
    const cmatrix phi = as_matrix(state.amplitudes(), state.dim_a(), state.dim_b());
    const cmatrix tau = as_matrix(target.amplitudes(), target.dim_a(), target.dim_b());
    return phi.transpose() * tau.conjugate();
}

inline cmatrix uhlmann_unitary(const cmatrix& cross) {
    if (cross.rows() != cross.cols()) {
        throw dimension_error("cross matrix must be square");
    }
    Eigen::JacobiSVD<cmatrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV() * svd.matrixU().adjoint();
}

// ---------------------------------------------------------------------------
// Optimal and never-caught cheating strategies.

// Reckless Alice: prepare the unit vector along (I (x) sqrt(E1))|psi_1>, the
// state whose overlap with the checked branch is largest.
inline alice_strategy optimal_alice_state(const protocol_instance& inst) {
    const cvector v = apply_on_B(inst.sqrt_e1().matrix(), inst.psi1());
    return alice_strategy{bipartite_state::from_unnormalized(inst.dim(), inst.dim(), v), false};
}

// Careful Alice: prepare along (I (x) P1)|psi| with P1 the support projector
// of E1. Conditioned on announcement 1 the joint state is then exactly
// |psi_1>, so she can never be caught.
inline alice_strategy threshold_alice_state(const protocol_instance& inst) {
    const cmatrix p1 = support_projector(inst.e1_pos(), inst.tols().support_cutoff).matrix();
    const cvector v = apply_on_B(p1, inst.psi());
    return alice_strategy{bipartite_state::from_unnormalized(inst.dim(), inst.dim(), v), false};
}

// Reckless Bob: skip the measurement (single-element POVM {I}), always
// announce 0, and return his half rotated by the unitary that best aligns
// |psi> with |psi_0>.
inline bob_strategy optimal_bob_strategy(const protocol_instance& inst) {
    bob_strategy s;
    s.povm = {hermitian_operator(cmatrix::Identity(inst.dim(), inst.dim()))};
    s.unitaries = {uhlmann_unitary(cross_matrix(inst.psi(), inst.psi0()))};
    s.announce_zero_set = {0};
    return s;
}

// Careful Bob: measure {E0', I - E0'} with E0' the rho-pinched E0 rescaled to
// unit norm, announce 0 on the first outcome, and rotate the post-measurement
// state exactly onto |psi_0>. The pinching keeps the reduced state on Alice's
// side proportional to the honest one, which is what makes an exact rotation
// possible; the rescaling makes the announcement as frequent as it can be
// without ever failing Alice's check.
inline bob_strategy threshold_bob_strategy(const protocol_instance& inst) {
    const Eigen::Index d = inst.dim();
    const cmatrix p = support_projector(inst.rho(), inst.tols().support_cutoff).matrix();
    const hermitian_operator pinched(p * inst.e0_pos().matrix() * p);
    const double top = hermitian_eig(pinched).eigenvalues.maxCoeff();
    if (!(top > 1e-12)) {
        throw degenerate_instance_error(
            "e0 vanishes on the support of rho; no never-caught strategy for Bob exists");
    }
    const hermitian_operator e0_prime(pinched.matrix() / top);
    const hermitian_operator e1_prime(cmatrix::Identity(d, d) - e0_prime.matrix());

    const cvector branch = apply_on_B(psd_sqrt(e0_prime, tol::povm).matrix(), inst.psi());
    const bipartite_state post = bipartite_state::from_unnormalized(d, d, branch);

    bob_strategy s;
    s.povm = {e0_prime, e1_prime};
    s.unitaries = {uhlmann_unitary(cross_matrix(post, inst.psi0())),
                   cmatrix::Identity(d, d)};
    s.announce_zero_set = {0};
    return s;
}

// ---------------------------------------------------------------------------
// Exact evaluation of arbitrary strategies.

struct strategy_assessment {
    double p_win = 0.0;              // cheater wins and survives verification
    double p_caught = 0.0;           // cheater is caught by the honest party
    double p_opponent_wins = 0.0;    // honest party wins the flip
    double p_false_accusation = 0.0; // cheater accuses the honest party
    double sum() const { return p_win + p_caught + p_opponent_wins + p_false_accusation; }
};

// Cheating Alice against honest Bob. Announcement 1 leads to Bob's projective
// check (win or get caught); announcement 0 leads to Alice's own check, where
// she may falsely accuse the honest Bob.
inline strategy_assessment evaluate_alice(const protocol_instance& inst,
                                          const alice_strategy& alice) {
    const Eigen::Index d = inst.dim();
    if (alice.prepared_state.dim_a() != d || alice.prepared_state.dim_b() != d) {
        throw dimension_error("prepared state does not match instance dimension " +
                              std::to_string(d));
    }
    const cvector w1 = apply_on_B(inst.sqrt_e1().matrix(), alice.prepared_state);
    const cvector w0 = apply_on_B(inst.sqrt_e0().matrix(), alice.prepared_state);

    strategy_assessment a;
    a.p_win = std::norm(inst.psi1().amplitudes().dot(w1));
    a.p_caught = std::max(0.0, w1.squaredNorm() - a.p_win);
    a.p_opponent_wins = std::norm(inst.psi0().amplitudes().dot(w0));
    a.p_false_accusation = std::max(0.0, w0.squaredNorm() - a.p_opponent_wins);
    return a;
}

// Cheating Bob against honest Alice. Outcomes where he announces 0 lead to
// Alice's projective check; announcing 1 concedes the flip, so that branch
// counts wholly toward the opponent and a false accusation gains him nothing.
inline strategy_assessment evaluate_bob(const protocol_instance& inst, const bob_strategy& bob) {
    validate_bob_strategy(bob, inst.dim());

    strategy_assessment a;
    for (std::size_t k = 0; k < bob.povm.size(); ++k) {
        const cmatrix action = bob.unitaries[k] * psd_sqrt(bob.povm[k], tol::povm).matrix();
        const cvector w = apply_on_B(action, inst.psi());
        const double p_k = w.squaredNorm();
        if (bob.announce_zero_set.count(k)) {
            const double pass = std::norm(inst.psi0().amplitudes().dot(w));
            a.p_win += pass;
            a.p_caught += std::max(0.0, p_k - pass);
        } else {
            a.p_opponent_wins += p_k;
        }
    }
    return a;
}

// ---------------------------------------------------------------------------
// The full report.

struct security_report {
    double p_a_max = 0.0;
    double p_a_thresh = 0.0;
    double p_b_max = 0.0;
    double p_b_thresh = 0.0;

    // Bias: how far past a fair coin each cheater can push their win rate.
    double epsilon_a() const { return p_a_max - 0.5; }
    double epsilon_b() const { return p_b_max - 0.5; }
    double tradeoff_product() const { return p_a_max * p_b_max; }
};

inline security_report compute_security_report(const protocol_instance& inst) {
    security_report r;
    r.p_a_max = p_a_max(inst);
    r.p_a_thresh = p_a_thresh(inst);
    r.p_b_max = p_b_max(inst);
    r.p_b_thresh = p_b_thresh(inst);

    // Ordering sanity: a never-caught strategy is a special case of a general
    // one, and honest play already wins half the time.
    const double slack = 1e-9;
    const auto in_range = [slack](double v) { return v >= 0.5 - slack && v <= 1.0 + slack; };
    if (!in_range(r.p_a_max) || !in_range(r.p_a_thresh) || !in_range(r.p_b_max) ||
        !in_range(r.p_b_thresh) || r.p_a_thresh > r.p_a_max + slack ||
        r.p_b_thresh > r.p_b_max + slack) {
        throw validation_error("security figures violate ordering invariants");
    }
    return r;
}

}  // namespace wcf
