#pragma once

// Strategy records for the two parties. Alice's entire freedom is the joint
// state she prepares in round one. Bob's is the measurement he performs in
// round two (any POVM), a unitary he may apply to his half afterwards, and
// the set of measurement outcomes on which he announces bit 0.

#include <set>
#include <string>
#include <vector>

#include "wcf/bipartite.hpp"

namespace wcf {

struct alice_strategy {
    bipartite_state prepared_state;
    bool honest = false;
};

struct bob_strategy {
    std::vector<hermitian_operator> povm;    // measurement elements, sum to I
    std::vector<cmatrix> unitaries;          // post-measurement rotation per outcome
    std::set<std::size_t> announce_zero_set; // outcomes on which Bob announces 0
    bool honest = false;
};

inline void validate_bob_strategy(const bob_strategy& s, Eigen::Index dim) {
    if (s.povm.empty()) {
        throw validation_error("strategy POVM is empty");
    }
    if (s.unitaries.size() != s.povm.size()) {
        throw validation_error("strategy has " + std::to_string(s.povm.size()) +
                               " POVM elements but " + std::to_string(s.unitaries.size()) +
                               " unitaries");
    }
    cmatrix sum = cmatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < s.povm.size(); ++k) {
        if (s.povm[k].dim() != dim) {
            throw dimension_error("POVM element " + std::to_string(k) + " has dimension " +
                                  std::to_string(s.povm[k].dim()) + ", expected " +
                                  std::to_string(dim));
        }
        Eigen::SelfAdjointEigenSolver<cmatrix> es(s.povm[k].matrix(), Eigen::EigenvaluesOnly);
        const double lam_min = es.eigenvalues().minCoeff();
        if (!(lam_min >= -tol::povm)) {
            throw validation_error("POVM element " + std::to_string(k) + " not PSD: " +
                                   residual_text("min eigenvalue", lam_min, -tol::povm));
        }
        sum += s.povm[k].matrix();
        if (s.unitaries[k].rows() != dim || s.unitaries[k].cols() != dim) {
            throw dimension_error("unitary " + std::to_string(k) + " has wrong shape");
        }
        if (!is_unitary(s.unitaries[k])) {
            const double residual =
                max_abs(s.unitaries[k].adjoint() * s.unitaries[k] - cmatrix::Identity(dim, dim));
            throw validation_error("unitary " + std::to_string(k) + " fails unitarity: " +
                                   residual_text("max|U^dagger U - I|", residual, tol::unitarity));
        }
    }
    const double completeness = max_abs(sum - cmatrix::Identity(dim, dim));
    if (!(completeness <= tol::completeness)) {
        throw validation_error("POVM incomplete: " +
                               residual_text("max|sum E_k - I|", completeness, tol::completeness));
    }
    for (std::size_t k : s.announce_zero_set) {
        if (k >= s.povm.size()) {
            throw validation_error("announce set references outcome " + std::to_string(k) +
                                   " but POVM has " + std::to_string(s.povm.size()) + " elements");
        }
    }
}

}  // namespace wcf
