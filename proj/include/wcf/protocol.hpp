#pragma once

// The three-round coin-flipping protocol itself.
//
// Round 1: Alice prepares a joint state |psi> on A (x) B and sends B to Bob.
// Round 2: Bob measures {E_0, E_1} on B and announces the outcome b.
// Round 3: on b = 0 Bob returns B and Alice projects the joint system onto
//          the honest post-measurement state |psi_0>; on b = 1 Alice sends A
//          and Bob projects onto |psi_1>. Announcing 1 means Alice wins if
//          the check passes; announcing 0 means Bob wins if it passes; a
//          failed check is a catch by the verifying party.
//
// An instance is the pair (rho, e0) with Tr(rho e0) = 1/2, plus every object
// derived from it: |psi> purifies rho, e1 = I - e0, and |psi_b> is the
// normalized (I (x) sqrt(E_b))|psi>. The verifier's projective tests always
// target the honest |psi_b>, whichever strategies are actually in play.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "wcf/rng.hpp"
#include "wcf/strategy.hpp"

namespace wcf {

struct tolerances {
    double hermiticity = tol::hermiticity;
    double density = tol::density;
    double povm = tol::povm;
    double fairness = tol::fairness;
    double support_cutoff = tol::support_cutoff;
};

class protocol_instance {
public:
    static protocol_instance build(const hermitian_operator& rho, const hermitian_operator& e0,
                                   const tolerances& t = {}) {
        return protocol_instance(rho, e0, std::nullopt, t);
    }

    // Same instance, but purified with the A-side basis W|k> instead of |k>.
    // Security figures must not depend on this choice.
    static protocol_instance build_with_purifier(const hermitian_operator& rho,
                                                 const hermitian_operator& e0,
                                                 const cmatrix& purifier_basis,
                                                 const tolerances& t = {}) {
        return protocol_instance(rho, e0, purifier_basis, t);
    }

    Eigen::Index dim() const { return rho_.dim(); }
    const tolerances& tols() const { return tols_; }

    const hermitian_operator& rho() const { return rho_; }
    const hermitian_operator& e0() const { return e0_; }
    const hermitian_operator& e1() const { return e1_; }

    // Spectra clipped into [0, 1]; share e0's eigenbasis, so e0_pos + e1_pos
    // is exactly the identity. All derived algebra uses these.
    const hermitian_operator& e0_pos() const { return e0_pos_; }
    const hermitian_operator& e1_pos() const { return e1_pos_; }
    const hermitian_operator& sqrt_e0() const { return sqrt_e0_; }
    const hermitian_operator& sqrt_e1() const { return sqrt_e1_; }

    const bipartite_state& psi() const { return psi_; }
    const bipartite_state& psi0() const { return psi0_; }
    const bipartite_state& psi1() const { return psi1_; }
    const hermitian_operator& sigma() const { return sigma_; }  // Tr_B |psi><psi|

private:
    protocol_instance(const hermitian_operator& rho, const hermitian_operator& e0,
                      const std::optional<cmatrix>& purifier, const tolerances& t)
        : rho_(rho),
          e0_(e0),
          e1_(validate_and_complement(rho, e0, t)),
          e0_pos_(e0),   // placeholder, replaced below
          e1_pos_(e0),
          sqrt_e0_(e0),
          sqrt_e1_(e0),
          psi_(make_psi(rho, purifier, t)),
          psi0_(psi_),
          psi1_(psi_),
          sigma_(rho),
          tols_(t) {
        // Clip e0's spectrum into [0, 1]; build the complement in the same
        // eigenbasis so both halves are exactly PSD and exactly complementary.
        eigen_system sys = hermitian_eig(e0_);
        rvector clipped = sys.eigenvalues.cwiseMax(0.0).cwiseMin(1.0);
        rvector complement = rvector::Ones(clipped.size()) - clipped;
        e0_pos_ = hermitian_operator(detail::rebuild(clipped, sys.eigenvectors));
        e1_pos_ = hermitian_operator(detail::rebuild(complement, sys.eigenvectors));
        sqrt_e0_ = hermitian_operator(detail::rebuild(clipped.cwiseSqrt(), sys.eigenvectors));
        sqrt_e1_ = hermitian_operator(detail::rebuild(complement.cwiseSqrt(), sys.eigenvectors));

        const cvector v0 = apply_on_B(sqrt_e0_.matrix(), psi_);
        const cvector v1 = apply_on_B(sqrt_e1_.matrix(), psi_);
        // Fairness must propagate to the purification: <psi|I (x) E_b|psi> = 1/2.
        const double residual = std::abs(v0.squaredNorm() - 0.5);
        if (!(residual <= 2.0 * t.fairness)) {
            throw fairness_error("purified fairness drifted: " +
                                 residual_text("|<psi|I(x)E0|psi> - 1/2|", residual,
                                               2.0 * t.fairness));
        }
        psi0_ = bipartite_state::from_unnormalized(dim(), dim(), std::sqrt(2.0) * v0);
        psi1_ = bipartite_state::from_unnormalized(dim(), dim(), std::sqrt(2.0) * v1);
        sigma_ = partial_trace_B(psi_);
    }

    static hermitian_operator validate_and_complement(const hermitian_operator& rho,
                                                      const hermitian_operator& e0,
                                                      const tolerances& t) {
        if (rho.dim() != e0.dim()) {
            throw dimension_error("rho is " + std::to_string(rho.dim()) + "-dimensional but e0 is " +
                                  std::to_string(e0.dim()) + "-dimensional");
        }
        eigen_system rho_sys = hermitian_eig(rho);
        const double tr_residual = std::abs(rho_sys.eigenvalues.sum() - 1.0);
        if (!(tr_residual <= t.density)) {
            throw not_density_error("rho trace off one: " +
                                    residual_text("|Tr(rho) - 1|", tr_residual, t.density));
        }
        if (!(rho_sys.eigenvalues.minCoeff() >= -t.density)) {
            throw not_density_error("rho not PSD: " +
                                    residual_text("min eigenvalue", rho_sys.eigenvalues.minCoeff(),
                                                  -t.density));
        }
        eigen_system e0_sys = hermitian_eig(e0);
        if (!(e0_sys.eigenvalues.minCoeff() >= -t.povm)) {
            throw not_povm_error("e0 not PSD: " +
                                 residual_text("min eigenvalue", e0_sys.eigenvalues.minCoeff(),
                                               -t.povm));
        }
        if (!(e0_sys.eigenvalues.maxCoeff() <= 1.0 + t.povm)) {
            throw not_povm_error("e0 exceeds identity: " +
                                 residual_text("max eigenvalue", e0_sys.eigenvalues.maxCoeff(),
                                               1.0 + t.povm));
        }
        const double fair = (rho.matrix() * e0.matrix()).trace().real();
        const double fair_residual = std::abs(fair - 0.5);
        if (!(fair_residual <= t.fairness)) {
            throw fairness_error("announcement bias: " +
                                 residual_text("|Tr(rho e0) - 1/2|", fair_residual, t.fairness));
        }
        return hermitian_operator(cmatrix::Identity(e0.dim(), e0.dim()) - e0.matrix());
    }

    static bipartite_state make_psi(const hermitian_operator& rho,
                                    const std::optional<cmatrix>& purifier, const tolerances& t) {
        bipartite_state psi = canonical_purification(rho, t.density);
        if (purifier) {
            if (!is_unitary(*purifier)) {
                throw validation_error("purifier basis is not unitary");
            }
            psi = bipartite_state::from_unnormalized(psi.dim_a(), psi.dim_b(),
                                                     apply_on_A(*purifier, psi));
        }
        return psi;
    }

    hermitian_operator rho_, e0_, e1_, e0_pos_, e1_pos_, sqrt_e0_, sqrt_e1_;
    bipartite_state psi_, psi0_, psi1_;
    hermitian_operator sigma_;
    tolerances tols_;
};

// One-parameter families of fair instances on a qubit, both diagonal.
// Family one biases Bob's winning measurement onto a single ray; family two
// is its complement-shaped counterpart. Their closed-form security figures
// make them the standard test and plotting families.
inline protocol_instance family_one(double x) {
    if (!(x > 0.5 && x <= 1.0)) {
        throw domain_error("family one needs x in (1/2, 1], got " + std::to_string(x));
    }
    cmatrix rho = cmatrix::Zero(2, 2);
    rho(0, 0) = x;
    rho(1, 1) = 1.0 - x;
    cmatrix e0 = cmatrix::Zero(2, 2);
    e0(0, 0) = 1.0 / (2.0 * x);
    return protocol_instance::build(hermitian_operator(rho), hermitian_operator(e0));
}

inline protocol_instance family_two(double x) {
    if (!(x >= 0.5 && x < 1.0)) {
        throw domain_error("family two needs x in [1/2, 1), got " + std::to_string(x));
    }
    cmatrix rho = cmatrix::Zero(2, 2);
    rho(0, 0) = x;
    rho(1, 1) = 1.0 - x;
    cmatrix e0 = cmatrix::Zero(2, 2);
    e0(0, 0) = 1.0 - 1.0 / (2.0 * x);
    e0(1, 1) = 1.0;
    return protocol_instance::build(hermitian_operator(rho), hermitian_operator(e0));
}

enum class outcome { alice_wins, bob_wins, alice_catches_bob, bob_catches_alice };

inline const char* to_string(outcome o) {
    switch (o) {
        case outcome::alice_wins: return "alice_wins";
        case outcome::bob_wins: return "bob_wins";
        case outcome::alice_catches_bob: return "alice_catches_bob";
        case outcome::bob_catches_alice: return "bob_catches_alice";
    }
    return "unknown";
}

inline constexpr std::array<outcome, 4> all_outcomes = {
    outcome::alice_wins, outcome::bob_wins, outcome::alice_catches_bob,
    outcome::bob_catches_alice};

struct outcome_probabilities {
    double alice_wins = 0.0;
    double bob_wins = 0.0;
    double alice_catches_bob = 0.0;
    double bob_catches_alice = 0.0;

    double of(outcome o) const {
        switch (o) {
            case outcome::alice_wins: return alice_wins;
            case outcome::bob_wins: return bob_wins;
            case outcome::alice_catches_bob: return alice_catches_bob;
            case outcome::bob_catches_alice: return bob_catches_alice;
        }
        return 0.0;
    }
    double sum() const { return alice_wins + bob_wins + alice_catches_bob + bob_catches_alice; }
};

// Exact Born-rule distribution over the four terminal outcomes for any pair
// of strategies. Bob's branch k contributes through the combined action
// U_k sqrt(E_k) on his half; the receiving party's projective test targets
// the honest |psi_b> regardless of who cheated.
inline outcome_probabilities outcome_distribution(const protocol_instance& inst,
                                                  const alice_strategy& alice,
                                                  const bob_strategy& bob) {
    const Eigen::Index d = inst.dim();
    if (alice.prepared_state.dim_a() != d || alice.prepared_state.dim_b() != d) {
        throw dimension_error("prepared state does not match instance dimension " +
                              std::to_string(d));
    }
    validate_bob_strategy(bob, d);

    outcome_probabilities out;
    for (std::size_t k = 0; k < bob.povm.size(); ++k) {
        // Strategy elements are only PSD within the POVM tolerance, so the
        // square-root clamp is widened accordingly.
        const cmatrix action = bob.unitaries[k] * psd_sqrt(bob.povm[k], tol::povm).matrix();
        const cvector w = apply_on_B(action, alice.prepared_state);
        const double p_k = w.squaredNorm();
        if (bob.announce_zero_set.count(k)) {
            const double pass = std::norm(inst.psi0().amplitudes().dot(w));
            out.bob_wins += pass;
            out.alice_catches_bob += std::max(0.0, p_k - pass);
        } else {
            const double pass = std::norm(inst.psi1().amplitudes().dot(w));
            out.alice_wins += pass;
            out.bob_catches_alice += std::max(0.0, p_k - pass);
        }
    }
    // POVM completeness is validated entrywise, so the total probability can
    // drift from one by roughly dim times that entrywise tolerance.
    const double sum_residual = std::abs(out.sum() - 1.0);
    if (!(sum_residual <= 1e-8)) {
        throw validation_error("outcome probabilities do not sum to one: " +
                               residual_text("|sum - 1|", sum_residual, 1e-8));
    }
    return out;
}

struct transcript {
    int announced_bit = 0;
    bool verification_passed = false;
    outcome result = outcome::bob_wins;
    bool false_accusation = false;  // a catch outcome whose accused party played honestly
    std::array<std::string, 3> round_log;
};

namespace detail {

// Collapsed two-stage view of the distribution: first the announced bit,
// then the conditional pass probability of the round-3 test.
struct branch_sampler {
    double p_zero;
    double pass_given_zero;
    double pass_given_one;

    // Consumes exactly two uniforms per run, pass/fail drawn second.
    std::pair<int, bool> draw(rng_stream& rng) const {
        const int bit = rng.uniform() < p_zero ? 0 : 1;
        const double pass_p = bit == 0 ? pass_given_zero : pass_given_one;
        const bool passed = rng.uniform() < pass_p;
        return {bit, passed};
    }
};

inline branch_sampler make_branch_sampler(const outcome_probabilities& dist) {
    branch_sampler s{};
    const double p0 = dist.bob_wins + dist.alice_catches_bob;
    const double p1 = dist.alice_wins + dist.bob_catches_alice;
    s.p_zero = p0;
    s.pass_given_zero = p0 > 0.0 ? dist.bob_wins / p0 : 1.0;
    s.pass_given_one = p1 > 0.0 ? dist.alice_wins / p1 : 1.0;
    return s;
}

inline outcome outcome_of(int bit, bool passed) {
    if (bit == 0) return passed ? outcome::bob_wins : outcome::alice_catches_bob;
    return passed ? outcome::alice_wins : outcome::bob_catches_alice;
}

}  // namespace detail

inline transcript sample_run(const protocol_instance& inst, const alice_strategy& alice,
                             const bob_strategy& bob, rng_stream& rng) {
    const outcome_probabilities dist = outcome_distribution(inst, alice, bob);
    const auto [bit, passed] = detail::make_branch_sampler(dist).draw(rng);

    transcript t;
    t.announced_bit = bit;
    t.verification_passed = passed;
    t.result = detail::outcome_of(bit, passed);
    t.false_accusation = (t.result == outcome::alice_catches_bob && bob.honest) ||
                         (t.result == outcome::bob_catches_alice && alice.honest);
    t.round_log = {"alice -> bob: system B",
                   "bob -> alice: bit " + std::to_string(bit),
                   bit == 0 ? "bob -> alice: system B" : "alice -> bob: system A"};
    return t;
}

}  // namespace wcf
