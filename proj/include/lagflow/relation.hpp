#pragma once

#include <utility>
#include <variant>

#include "lagflow/harmonic.hpp"

namespace lagflow {

// Constants relating two equal-Jacobian harmonic maps.
//
// LinearDependentRelation (constant-dilatation base map):
//   F2' = alpha F1',  G2' = beta F1',  |alpha|^2 - |beta|^2 = 1 - |lambda|^2 > 0.
// GeneralRelation (nonconstant dilatation):
//   F2' = alpha F1' + e^{i xi} beta G1',
//   G2' = conj(beta) F1' + e^{i xi} conj(alpha) G1',  |alpha|^2 = 1 + |beta|^2.
struct LinearDependentRelation {
    Complex alpha;
    Complex beta;
};

struct GeneralRelation {
    Complex alpha;
    Complex beta;
    double xi = 0.0;  // in [0, 2*pi)
};

using RelationParams = std::variant<LinearDependentRelation, GeneralRelation>;

struct RelationFit {
    RelationParams params;
    double fit_residual = 0.0;  // max grid mismatch, relative to derivative scale
    bool constant_dilatation_branch = false;
};

// Fits the relation constants from the two maps' derivatives: mean ratios in
// the constant-dilatation branch, otherwise a 2x2 solve from two
// well-separated grid points, validated on the full grid to rel_tol.
RelationFit recover_relation(const HarmonicMap& m1, const HarmonicMap& m2,
                             double rel_tol = 1e-8);

// Derivative pair (F2', G2') of the related map as closed expressions.
std::pair<Expr, Expr> apply_relation(const HarmonicMap& m1, const RelationParams& p);

// Antiderivative-level related map: same linear combination applied to
// (F1, G1) directly, so its derivative pair equals apply_relation's output.
HarmonicMap related_map(const HarmonicMap& m1, const RelationParams& p);

// Flips (alpha, beta) -> (-alpha, -beta) so that Re alpha >= 0 (ties broken
// by Im alpha >= 0). Used when comparing parameter tuples.
RelationParams canonicalized(const RelationParams& p);

enum class ModulusIdentityVerdict { ForcedConstant, NotSatisfied };

// Checks |phi|^2 = r |psi|^2 + s on the sampled domain. When r and s are
// both nonzero, the identity can only hold with phi and psi constant; a grid
// state contradicting that indicates a tolerance misconfiguration and raises
// NumericalError. With s = 0 the constancy conclusion does not apply and the
// test reports plainly.
ModulusIdentityVerdict modulus_identity_test(const Expr& phi, const Expr& psi, double r,
                                             double s, const Domain& domain,
                                             const Bindings& params = {});

}  // namespace lagflow
