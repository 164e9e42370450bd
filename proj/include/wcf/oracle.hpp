#pragma once

// Independent numerical verification of the closed forms.
//
// Every security figure exported by the library comes with a search routine
// here that knows nothing about the formula: it climbs the corresponding
// objective from random starting points and reports the best value found,
// along with the strategy realizing it. Tests compare search results against
// the closed forms from both sides — a search may fall short by a whisker
// (finite iterations) but must never exceed the formula beyond numerical
// noise.
//
// The never-caught searches work inside an exact parameterization of their
// feasibility set (states indistinguishable from honest ones on the checked
// branch), so every probe they evaluate is itself a valid never-caught
// strategy; each converged candidate is re-checked by the exact evaluator
// and discarded unless its catch probability is numerically zero.
//
// Also here: random instance generation, the identity check used to justify
// moving measurement operators across the shared state, and Monte Carlo
// agreement between sampled runs and the exact outcome distribution.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wcf/adversary.hpp"

namespace wcf {

struct oracle_config {
    int restarts = 64;
    int max_iterations = 2000;
    double step_tolerance = 1e-10;  // line search gives up below this step size
    std::uint64_t seed = 1;
};

struct oracle_result {
    double best_value = 0.0;
    std::optional<alice_strategy> best_alice;
    std::optional<bob_strategy> best_bob;
    std::vector<std::vector<double>> value_history;  // one trace per restart
    double closed_form_delta = 0.0;                  // best_value minus the closed form
};

// ---------------------------------------------------------------------------
// Random ensembles. All sampling is via rng_stream so results are
// bit-reproducible across platforms.

inline cmatrix ginibre(Eigen::Index rows, Eigen::Index cols, rng_stream& rng) {
    cmatrix g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            g(i, j) = rng.complex_normal();
        }
    }
    return g;
}

inline cvector random_unit_vector(Eigen::Index n, rng_stream& rng) {
    cvector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = rng.complex_normal();
    }
    const double norm = v.norm();
    if (!(norm > 1e-12)) {
        throw degenerate_instance_error("random vector collapsed to zero");
    }
    return v / norm;
}

inline bipartite_state random_state(Eigen::Index dim_a, Eigen::Index dim_b, rng_stream& rng) {
    return bipartite_state(dim_a, dim_b, random_unit_vector(dim_a * dim_b, rng));
}

inline cmatrix random_unitary(Eigen::Index d, rng_stream& rng) {
    const cmatrix g = ginibre(d, d, rng);
    Eigen::HouseholderQR<cmatrix> qr(g);
    cmatrix q = qr.householderQ();
    const cmatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phase freedom of QR so the distribution is uniform.
    cvector phases(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double a = std::abs(r(i, i));
        phases[i] = a > 0.0 ? r(i, i) / a : complex_t(1.0, 0.0);
    }
    return q * phases.asDiagonal();
}

inline hermitian_operator random_density(Eigen::Index d, rng_stream& rng) {
    const cmatrix g = ginibre(d, d, rng);
    const cmatrix m = g * g.adjoint();
    return hermitian_operator(m / m.trace().real());
}

// Random measurement element that is fair for the given state: a rescaled
// random PSD matrix, shifted along the identity until Tr(rho e0) = 1/2, and
// rejected unless its spectrum stayed inside [0, 1].
inline hermitian_operator random_fair_e0(const hermitian_operator& rho, rng_stream& rng) {
    const Eigen::Index d = rho.dim();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const cmatrix g = ginibre(d, d, rng);
        const hermitian_operator p(g * g.adjoint());
        const double top = hermitian_eig(p).eigenvalues.maxCoeff();
        if (!(top > 0.0)) continue;
        const double radius = 0.15 + 0.8 * rng.uniform();
        const cmatrix c = p.matrix() * (radius / top);
        const double shift = 0.5 - (rho.matrix() * c).trace().real();
        const hermitian_operator e0(c + shift * cmatrix::Identity(d, d));
        const rvector spectrum = hermitian_eig(e0).eigenvalues;
        if (spectrum.minCoeff() >= 0.0 && spectrum.maxCoeff() <= 1.0) {
            return e0;
        }
    }
    throw degenerate_instance_error("could not sample a fair measurement for this state");
}

inline protocol_instance random_instance(Eigen::Index d, rng_stream& rng) {
    const hermitian_operator rho = random_density(d, rng);
    const hermitian_operator e0 = random_fair_e0(rho, rng);
    return protocol_instance::build(rho, e0);
}

// ---------------------------------------------------------------------------
// Shared ascent loop. The gradient is evaluated once per outer iteration
// (it may be expensive); `retract` maps (point, gradient, step) back onto
// the search domain, and backtracking halves the step until the retracted
// proposal improves, growing it again after successes.

namespace detail {

template <typename Point, typename Value, typename Grad, typename Retract>
double ascend(Point& x, Value&& value, Grad&& grad, Retract&& retract, const oracle_config& cfg,
              std::vector<double>& history) {
    double f = value(x);
    history.push_back(f);
    double step = 1.0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const auto g = grad(x);
        bool accepted = false;
        while (step >= cfg.step_tolerance) {
            Point y = retract(x, g, step);
            const double fy = value(y);
            if (fy > f + 1e-15 * (1.0 + std::abs(f))) {
                x = std::move(y);
                f = fy;
                accepted = true;
                step = std::min(step * 1.5, 1e3);
                break;
            }
            step *= 0.5;
        }
        history.push_back(f);
        if (!accepted) {
            break;
        }
    }
    return f;
}

inline cmatrix polar_factor(const cmatrix& a) {
    Eigen::JacobiSVD<cmatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reckless Alice: maximize the winning overlap over all prepared states.

inline oracle_result alice_oracle(const protocol_instance& inst, const oracle_config& cfg = {}) {
    const Eigen::Index d = inst.dim();
    const cvector v = apply_on_B(inst.sqrt_e1().matrix(), inst.psi1());

    const auto value = [&](const cvector& x) { return std::norm(v.dot(x)); };
    const auto grad = [&](const cvector& x) { return cvector(v * v.dot(x)); };
    const auto retract = [](const cvector& x, const cvector& g, double step) {
        cvector y = x + step * g;
        return cvector(y / y.norm());
    };

    oracle_result out;
    double best = -1.0;
    cvector best_x;
    for (int r = 0; r < cfg.restarts; ++r) {
        rng_stream rng = rng_stream::substream(cfg.seed, static_cast<std::uint64_t>(r));
        cvector x = random_unit_vector(d * d, rng);
        std::vector<double> trace;
        const double f = detail::ascend(x, value, grad, retract, cfg, trace);
        out.value_history.push_back(std::move(trace));
        if (f > best) {
            best = f;
            best_x = x;
        }
    }
    alice_strategy s{bipartite_state::from_unnormalized(d, d, best_x), false};
    out.best_value = evaluate_alice(inst, s).p_win;
    out.best_alice = std::move(s);
    out.closed_form_delta = out.best_value - p_a_max(inst);
    return out;
}

// ---------------------------------------------------------------------------
// Careful Alice: maximize the winning overlap over never-caught states.
//
// A prepared state is never caught exactly when its checked branch is
// proportional to |psi_1>, i.e. when it lies in the span of one special ray
// (the honest state filtered through the support of E1) plus everything E1
// annihilates. The search runs on the unit sphere of that subspace, so every
// probe satisfies the constraint by construction.

inline oracle_result alice_threshold_oracle(const protocol_instance& inst,
                                            const oracle_config& cfg = {}) {
    const Eigen::Index d = inst.dim();
    const eigen_system e1_sys = hermitian_eig(inst.e1_pos());
    const double lam_max = e1_sys.eigenvalues.maxCoeff();
    if (!(lam_max > 0.0)) {
        throw degenerate_instance_error("e1 vanishes; never-caught search for Alice undefined");
    }
    const double cutoff = inst.tols().support_cutoff * lam_max;

    const cmatrix p1 = support_projector(inst.e1_pos(), inst.tols().support_cutoff).matrix();
    cvector anchor = apply_on_B(p1, inst.psi());
    const double anchor_norm = anchor.norm();
    if (!(anchor_norm > 1e-12)) {
        throw degenerate_instance_error("honest state carries no mass on the support of e1");
    }
    anchor /= anchor_norm;

    std::vector<Eigen::Index> kernel_cols;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (e1_sys.eigenvalues[j] <= cutoff) {
            kernel_cols.push_back(j);
        }
    }
    const Eigen::Index width = 1 + d * static_cast<Eigen::Index>(kernel_cols.size());
    cmatrix basis = cmatrix::Zero(d * d, width);
    basis.col(0) = anchor;
    Eigen::Index col = 1;
    for (const Eigen::Index j : kernel_cols) {
        for (Eigen::Index i = 0; i < d; ++i) {
            basis.block(i * d, col, d, 1) = e1_sys.eigenvectors.col(j);
            ++col;
        }
    }

    const cvector v = apply_on_B(inst.sqrt_e1().matrix(), inst.psi1());
    const cvector w = basis.adjoint() * v;  // objective functional in manifold coordinates

    const auto value = [&](const cvector& z) { return std::norm(w.dot(z)); };
    const auto grad = [&](const cvector& z) { return cvector(w * w.dot(z)); };
    const auto retract = [](const cvector& z, const cvector& g, double step) {
        cvector y = z + step * g;
        const double n = y.norm();
        if (!(n > 1e-12)) {
            // The functional annihilated the whole proposal; the anchor
            // direction is always a valid never-caught state to restart from.
            cvector fallback = cvector::Zero(z.size());
            fallback[0] = 1.0;
            return fallback;
        }
        return cvector(y / n);
    };

    oracle_result out;
    double best = -1.0;
    cvector best_z;
    for (int r = 0; r < cfg.restarts; ++r) {
        rng_stream rng = rng_stream::substream(cfg.seed, static_cast<std::uint64_t>(r));
        cvector z = random_unit_vector(width, rng);
        std::vector<double> trace;
        double f = detail::ascend(z, value, grad, retract, cfg, trace);
        const alice_strategy probe{bipartite_state::from_unnormalized(d, d, basis * z), false};
        if (evaluate_alice(inst, probe).p_caught > 1e-10) {
            f = -1.0;  // infeasible probe; cannot happen by construction, but filter anyway
        }
        out.value_history.push_back(std::move(trace));
        if (f > best) {
            best = f;
            best_z = z;
        }
    }
    if (best < 0.0) {
        throw validation_error("never-caught search for Alice produced no feasible candidate");
    }
    alice_strategy s{bipartite_state::from_unnormalized(d, d, basis * best_z), false};
    out.best_value = evaluate_alice(inst, s).p_win;
    out.best_alice = std::move(s);
    out.closed_form_delta = out.best_value - p_a_thresh(inst);
    return out;
}

// ---------------------------------------------------------------------------
// Reckless Bob: maximize |<psi_0|(I (x) U)|psi>|^2 over unitaries, climbing
// with the gradient of the linear functional Tr(U K) and retracting through
// the polar decomposition.

inline oracle_result bob_unitary_oracle(const protocol_instance& inst,
                                        const oracle_config& cfg = {}) {
    const Eigen::Index d = inst.dim();
    const cmatrix k = cross_matrix(inst.psi(), inst.psi0());

    const auto value = [&](const cmatrix& u) { return std::norm((u * k).trace()); };
    const auto grad = [&](const cmatrix& u) {
        return cmatrix((u * k).trace() * k.adjoint());
    };
    const auto retract = [](const cmatrix& u, const cmatrix& g, double step) {
        return detail::polar_factor(u + step * g);
    };

    oracle_result out;
    double best = -1.0;
    cmatrix best_u;
    for (int r = 0; r < cfg.restarts; ++r) {
        rng_stream rng = rng_stream::substream(cfg.seed, static_cast<std::uint64_t>(r));
        cmatrix u = random_unitary(d, rng);
        std::vector<double> trace;
        const double f = detail::ascend(u, value, grad, retract, cfg, trace);
        out.value_history.push_back(std::move(trace));
        if (f > best) {
            best = f;
            best_u = u;
        }
    }
    bob_strategy s;
    s.povm = {hermitian_operator(cmatrix::Identity(d, d))};
    s.unitaries = {best_u};
    s.announce_zero_set = {0};
    out.best_value = evaluate_bob(inst, s).p_win;
    out.best_bob = std::move(s);
    out.closed_form_delta = out.best_value - p_b_max(inst);
    return out;
}

// ---------------------------------------------------------------------------
// Careful Bob: maximize the announcement-0 probability over never-caught
// two-outcome strategies.
//
// Writing the whole announce-0 branch as one contraction M (measurement
// followed by rotation), the branch passes Alice's check with certainty
// exactly when M agrees, on the support of rho, with a multiple of the ray
// R = sqrt(2) sqrt(E0) P_rho, for which (I (x) R)|psi> = |psi_0> on the
// nose. The component of M off that support is invisible to the objective
// and only eats operator-norm budget, so the retraction projects onto the
// ray, damps the invisible part, and caps the ray coefficient at the norm
// boundary. The winning probability is the squared coefficient.

inline oracle_result bob_threshold_oracle(const protocol_instance& inst,
                                          const oracle_config& cfg = {}) {
    const Eigen::Index d = inst.dim();
    if (d > 3) {
        throw scale_error("never-caught search for Bob is limited to dimension <= 3");
    }
    const cmatrix k = cross_matrix(inst.psi(), inst.psi0());
    const cmatrix pi = support_projector(inst.rho(), inst.tols().support_cutoff).matrix();
    const cmatrix off = cmatrix::Identity(d, d) - pi;
    const cmatrix ray = std::sqrt(2.0) * (inst.sqrt_e0().matrix() * pi);

    const double ray_frob2 = ray.squaredNorm();
    const double ray_op2 =
        hermitian_eig(hermitian_operator(ray.adjoint() * ray)).eigenvalues.maxCoeff();
    if (!(ray_frob2 > 1e-24) || !(ray_op2 > 1e-12)) {
        throw degenerate_instance_error(
            "e0 vanishes on the support of rho; no never-caught strategy for Bob exists");
    }
    const double cap = (1.0 - 1e-12) / std::sqrt(ray_op2);

    const auto ray_coefficient = [&](const cmatrix& m) {
        complex_t c = (ray.adjoint() * (m * pi)).trace() / ray_frob2;
        const double mag = std::abs(c);
        if (mag > cap) {
            c *= cap / mag;
        }
        return c;
    };
    const auto value = [&](const cmatrix& m) { return std::norm((m * k).trace()); };
    const auto grad = [&](const cmatrix& m) {
        return cmatrix((m * k).trace() * k.adjoint());
    };
    const auto retract = [&](const cmatrix& m, const cmatrix& g, double step) {
        const cmatrix y = m + step * g;
        return cmatrix(ray_coefficient(y) * ray + 0.9 * (y * off));
    };

    oracle_result out;
    double best = -1.0;
    cmatrix best_m;
    for (int r = 0; r < cfg.restarts; ++r) {
        rng_stream rng = rng_stream::substream(cfg.seed, static_cast<std::uint64_t>(r));
        const cmatrix g = ginibre(d, d, rng);
        const double top =
            std::sqrt(hermitian_eig(hermitian_operator(g.adjoint() * g)).eigenvalues.maxCoeff());
        cmatrix m = ray_coefficient(g / top) * ray;  // feasible random start
        std::vector<double> trace;
        const double f = detail::ascend(m, value, grad, retract, cfg, trace);
        out.value_history.push_back(std::move(trace));
        if (f > best) {
            best = f;
            best_m = m;
        }
    }

    const cmatrix polished = ray_coefficient(best_m) * ray;
    const hermitian_operator e0_prime(polished.adjoint() * polished);
    const hermitian_operator e1_prime(cmatrix::Identity(d, d) - e0_prime.matrix());
    bob_strategy s;
    s.povm = {e0_prime, e1_prime};
    s.unitaries = {detail::polar_factor(polished), cmatrix::Identity(d, d)};
    s.announce_zero_set = {0};

    const strategy_assessment check = evaluate_bob(inst, s);
    if (check.p_caught > 1e-10) {
        throw validation_error("never-caught search for Bob produced an infeasible candidate");
    }
    out.best_value = check.p_win;
    out.best_bob = std::move(s);
    out.closed_form_delta = out.best_value - p_b_thresh(inst);
    return out;
}

// ---------------------------------------------------------------------------
// General Bob: finite-difference search over multi-outcome measurements.
//
// The theory says a single outcome already suffices for an optimal cheat;
// this search gives that claim an independent workout by optimizing over
// POVMs with several outcomes and every possible announcement assignment.
// Free matrices A_1..A_{n-1} become measurement elements A^+A (rescaled into
// a valid POVM with a completing element), the rotation for each announce-0
// outcome is chosen optimally in closed form, and what remains is climbed by
// central finite differences. Deliberately small-scale.

inline oracle_result bob_full_oracle(const protocol_instance& inst, int outcomes,
                                     const oracle_config& cfg = {}) {
    const Eigen::Index d = inst.dim();
    if (d > 3 || outcomes < 1 || outcomes > 3) {
        throw scale_error("finite-difference search is limited to dimension <= 3 and <= 3 "
                          "measurement outcomes");
    }
    const int free_count = outcomes - 1;
    const Eigen::Index entries = d * d;
    const Eigen::Index params = 2 * entries * free_count;  // real and imaginary parts

    const auto povm_from = [&](const rvector& theta) {
        std::vector<hermitian_operator> povm;
        cmatrix sum = cmatrix::Zero(d, d);
        std::vector<cmatrix> free_mats;
        for (int f = 0; f < free_count; ++f) {
            cmatrix a(d, d);
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    const Eigen::Index base = 2 * (f * entries + i * d + j);
                    a(i, j) = complex_t(theta[base], theta[base + 1]);
                }
            }
            free_mats.push_back(a);
            sum += a.adjoint() * a;
        }
        double scale = 1.0;
        if (free_count > 0) {
            scale = std::max(1.0, hermitian_eig(hermitian_operator(sum)).eigenvalues.maxCoeff());
        }
        for (const cmatrix& a : free_mats) {
            povm.emplace_back((a.adjoint() * a) / scale);
        }
        povm.emplace_back(cmatrix::Identity(d, d) - sum / scale);
        return povm;
    };

    // With rotations chosen optimally, each announce-0 outcome contributes the
    // squared nuclear norm of its branch's alignment matrix.
    const cmatrix target = as_matrix(inst.psi0().amplitudes(), d, d).conjugate();
    const auto win_value = [&](const std::vector<hermitian_operator>& povm,
                               const std::set<std::size_t>& zero_set) {
        double total = 0.0;
        for (const std::size_t idx : zero_set) {
            const cmatrix root = psd_sqrt(povm[idx], tol::povm).matrix();
            const cvector branch = apply_on_B(root, inst.psi());
            const cmatrix cross = as_matrix(branch, d, d).transpose() * target;
            Eigen::JacobiSVD<cmatrix> svd(cross);
            const double nuclear = svd.singularValues().sum();
            total += nuclear * nuclear;
        }
        return total;
    };

    oracle_result out;
    double best = -1.0;
    rvector best_theta;
    std::set<std::size_t> best_zero_set;

    const std::size_t subset_count = std::size_t(1) << outcomes;
    for (std::size_t mask = 0; mask < subset_count; ++mask) {
        std::set<std::size_t> zero_set;
        for (int b = 0; b < outcomes; ++b) {
            if (mask & (std::size_t(1) << b)) {
                zero_set.insert(static_cast<std::size_t>(b));
            }
        }
        const auto value = [&](const rvector& theta) {
            return win_value(povm_from(theta), zero_set);
        };
        const double h = 1e-6;
        const auto grad = [&](const rvector& theta) {
            rvector g(theta.size());
            rvector probe = theta;
            for (Eigen::Index i = 0; i < params; ++i) {
                const double saved = probe[i];
                probe[i] = saved + h;
                const double up = value(probe);
                probe[i] = saved - h;
                const double down = value(probe);
                probe[i] = saved;
                g[i] = (up - down) / (2.0 * h);
            }
            return g;
        };
        const auto retract = [](const rvector& theta, const rvector& g, double step) {
            return rvector(theta + step * g);
        };

        for (int r = 0; r < cfg.restarts; ++r) {
            rng_stream rng = rng_stream::substream(
                cfg.seed, mask * 1000 + static_cast<std::uint64_t>(r));
            rvector theta = rvector::Zero(std::max<Eigen::Index>(params, 1));
            // The first restart begins at the corner of the chart where every
            // free element vanishes and the completing element is the whole
            // identity: the no-measurement strategy the theory singles out.
            // The remaining restarts probe it from random directions.
            if (r > 0) {
                for (Eigen::Index i = 0; i < params; ++i) {
                    theta[i] = 0.5 * rng.normal();
                }
            }
            std::vector<double> trace;
            double f;
            if (params == 0) {
                f = value(theta);  // single-outcome POVM has no free matrix
                trace.push_back(f);
            } else {
                f = detail::ascend(theta, value, grad, retract, cfg, trace);
            }
            out.value_history.push_back(std::move(trace));
            if (f > best) {
                best = f;
                best_theta = theta;
                best_zero_set = zero_set;
            }
        }
    }

    // Materialize the winning strategy with its optimal rotations.
    const std::vector<hermitian_operator> povm = povm_from(best_theta);
    bob_strategy s;
    s.povm = povm;
    s.announce_zero_set = best_zero_set;
    for (std::size_t idx = 0; idx < povm.size(); ++idx) {
        if (best_zero_set.count(idx)) {
            const cmatrix root = psd_sqrt(povm[idx], tol::povm).matrix();
            const cvector branch = apply_on_B(root, inst.psi());
            const bipartite_state post = bipartite_state::from_unnormalized(d, d, branch);
            s.unitaries.push_back(uhlmann_unitary(cross_matrix(post, inst.psi0())));
        } else {
            s.unitaries.push_back(cmatrix::Identity(d, d));
        }
    }
    out.best_value = evaluate_bob(inst, s).p_win;
    out.best_bob = std::move(s);
    out.closed_form_delta = out.best_value - p_b_max(inst);
    return out;
}

// ---------------------------------------------------------------------------
// Identity behind moving measurement operators across the shared state:
// tracing out Bob's side of (I (x) sqrt(E))|phi> equals conjugating a
// transformed E by the state's own decomposition. Checked on random pairs;
// returns the worst residual.

inline double lemma_check(Eigen::Index dim, int trials, std::uint64_t seed) {
    rng_stream rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const bipartite_state phi = random_state(dim, dim, rng);
        const cmatrix g = ginibre(dim, dim, rng);
        const cmatrix p = g * g.adjoint();
        const double top = hermitian_eig(hermitian_operator(p)).eigenvalues.maxCoeff();
        const hermitian_operator e(p / top);
        const auto [lhs, rhs] = lemma_lhs_rhs(phi, e);
        worst = std::max(worst, max_abs(lhs.matrix() - rhs.matrix()));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Monte Carlo agreement between sampled runs and the exact distribution.

inline std::size_t outcome_index(outcome o) {
    switch (o) {
        case outcome::alice_wins: return 0;
        case outcome::bob_wins: return 1;
        case outcome::alice_catches_bob: return 2;
        case outcome::bob_catches_alice: return 3;
    }
    return 0;
}

struct mc_report {
    std::uint64_t trials = 0;
    std::array<std::uint64_t, 4> counts{};     // indexed like all_outcomes
    std::array<double, 4> frequency{};
    std::array<double, 4> exact{};
    std::array<std::optional<double>, 4> z{};  // standard score; absent when variance is zero
};

inline mc_report monte_carlo_agreement(const protocol_instance& inst, const alice_strategy& alice,
                                       const bob_strategy& bob, std::uint64_t trials,
                                       rng_stream& rng) {
    if (trials < 1000) {
        throw validation_error("Monte Carlo agreement needs at least 1000 trials");
    }
    const outcome_probabilities dist = outcome_distribution(inst, alice, bob);
    const detail::branch_sampler sampler = detail::make_branch_sampler(dist);

    mc_report r;
    r.trials = trials;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto [bit, passed] = sampler.draw(rng);
        ++r.counts[outcome_index(detail::outcome_of(bit, passed))];
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const double p = dist.of(all_outcomes[i]);
        const double freq = static_cast<double>(r.counts[i]) / static_cast<double>(trials);
        r.frequency[i] = freq;
        r.exact[i] = p;
        const double variance = p * (1.0 - p) / static_cast<double>(trials);
        if (variance > 0.0) {
            r.z[i] = (freq - p) / std::sqrt(variance);
        }
    }
    return r;
}

inline mc_report monte_carlo_agreement(const protocol_instance& inst, const alice_strategy& alice,
                                       const bob_strategy& bob, std::uint64_t trials,
                                       std::uint64_t seed) {
    rng_stream rng(seed);
    return monte_carlo_agreement(inst, alice, bob, trials, rng);
}

}  // namespace wcf
