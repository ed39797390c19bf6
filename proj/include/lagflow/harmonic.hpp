#pragma once

#include <optional>
#include <utility>

#include "lagflow/domain.hpp"
#include "lagflow/expr.hpp"

namespace lagflow {

enum class Orientation { SensePreserving, SenseReversing, Degenerate };

struct UnivalenceReport {
    // min |J| over the grid exceeds the degeneracy tolerance
    bool locally_injective = false;
    // lower-left corner labels of two lattice cells more than two cells
    // apart whose image quadrilaterals overlap (a fold in the image)
    std::optional<std::pair<GridPoint, GridPoint>> collision;
    // smallest far-pair image distance found within the search radius,
    // divided by the median nearest-neighbor image distance; diagnostic only
    // (maps that compress a boundary arc drive it to 0 while staying
    // univalent), and a lower bound when nothing lies within the radius
    double min_image_separation_ratio = 0.0;
    double median_neighbor_distance = 0.0;
};

// Planar harmonic map z -> F(z) + conj(G(z)) with F, G analytic on `domain`.
// G is stored as the analytic function of z (the co-analytic part of the map
// is its conjugate). Extra parameter bindings (wave numbers etc.) are kept
// with the map so expressions stay closed.
class HarmonicMap {
public:
    HarmonicMap(Expr F, Expr G, Domain domain, Bindings params = {});

    const Expr& F() const { return F_; }
    const Expr& G() const { return G_; }
    const Expr& f() const { return f_; }  // F'
    const Expr& g() const { return g_; }  // G'
    const Domain& domain() const { return domain_; }
    const Bindings& params() const { return params_; }

    Complex eval_F(Complex z) const;
    Complex eval_G(Complex z) const;
    Complex eval_f(Complex z) const;
    Complex eval_g(Complex z) const;

    // Image point F(z) + conj(G(z)).
    Complex image(Complex z) const;

    // J(z) = |F'(z)|^2 - |G'(z)|^2.
    double jacobian(Complex z) const;

    // Second complex dilatation w = G'(z)/F'(z); requires F'(z) != 0.
    Complex dilatation(Complex z) const;

private:
    Expr F_, G_, f_, g_;
    Domain domain_;
    Bindings params_;
};

// Sign of J over the sampled grid; Degenerate when J changes sign or some
// |J| falls below 1e-12.
Orientation orientation(const HarmonicMap& m);

// For a sense-reversing map, relabels by the conjugate domain so the result
// is sense-preserving with the same image set at t=0. Errors when the input
// is not sense-reversing.
HarmonicMap conjugate_relabel(const HarmonicMap& m);

// Grid heuristic for global injectivity. A collision is two lattice cells
// more than two cells apart whose image quads overlap; for a univalent map
// the cell images are disjoint however strongly the map compresses, so the
// test is resolution-stable. separation_tol sets the search radius of the
// reported distance ratio (separation_tol * median neighbor distance).
// Requires a grid of at least 32x32.
UnivalenceReport univalence_check(const HarmonicMap& m, double separation_tol = 0.5);

// True iff the dilatation varies by at most tol across the grid.
bool dilatation_is_constant(const HarmonicMap& m, double tol = 1e-9);

}  // namespace lagflow
