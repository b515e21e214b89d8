#pragma once

#include <sstream>
#include <string>

namespace realize {

/**
Numerical tolerance stack shared by every module.

The layers are ordered: linear solves are accurate to `linear_solve`, the
simplex respects constraints to `feasibility`, and a design is only reported
as realizable when its separation margin exceeds `realizability`. Verifiers
demand strict gaps above `strict_margin` and treat values within `equality`
as tied.
*/
struct Tolerances {
    double distribution = 1e-9;   ///< row-sum slack for transition rows
    double linear_solve = 1e-10;  ///< relative residual of visitation solves
    double pivot = 1e-10;         ///< smallest usable simplex pivot
    double feasibility = 1e-9;    ///< simplex primal feasibility
    double realizability = 1e-7;  ///< LP margin required to report a reward
    double strict_margin = 1e-7;  ///< verifier gap for strict relations
    double equality = 1e-6;       ///< verifier slack for ties
    double binary_margin = 1e-9;  ///< strict gap for the {0,1} brute force
};

inline std::string describe(const Tolerances& tol) {
    std::ostringstream out;
    out << "distribution=" << tol.distribution << " linear_solve=" << tol.linear_solve
        << " pivot=" << tol.pivot << " feasibility=" << tol.feasibility
        << " realizability=" << tol.realizability << " strict_margin=" << tol.strict_margin
        << " equality=" << tol.equality << " binary_margin=" << tol.binary_margin;
    return out.str();
}

} // namespace realize
