#include "lagflow/relation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lagflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct GridSamples {
    std::vector<Complex> f1, g1, f2, g2;
};

GridSamples sample_derivatives(const HarmonicMap& m1, const HarmonicMap& m2) {
    const auto& grid = m1.domain().grid();
    GridSamples s;
    s.f1.reserve(grid.size());
    s.g1.reserve(grid.size());
    s.f2.reserve(grid.size());
    s.g2.reserve(grid.size());
    for (const GridPoint& p : grid) {
        s.f1.push_back(m1.eval_f(p.z));
        s.g1.push_back(m1.eval_g(p.z));
        s.f2.push_back(m2.eval_f(p.z));
        s.g2.push_back(m2.eval_g(p.z));
    }
    return s;
}

double fit_residual_on_grid(const GridSamples& s, Complex cf1, Complex cg1, Complex df1,
                            Complex dg1) {
    // predicted f2 = cf1*f1 + cg1*g1, g2 = df1*f1 + dg1*g1
    double sup_f = 0.0, sup_g = 0.0, err_f = 0.0, err_g = 0.0;
    for (std::size_t k = 0; k < s.f1.size(); ++k) {
        sup_f = std::max(sup_f, std::abs(s.f2[k]));
        sup_g = std::max(sup_g, std::abs(s.g2[k]));
        err_f = std::max(err_f, std::abs(s.f2[k] - (cf1 * s.f1[k] + cg1 * s.g1[k])));
        err_g = std::max(err_g, std::abs(s.g2[k] - (df1 * s.f1[k] + dg1 * s.g1[k])));
    }
    const double scale = std::max({sup_f, sup_g, 1e-300});
    return std::max(err_f, err_g) / scale;
}

}  // namespace

RelationFit recover_relation(const HarmonicMap& m1, const HarmonicMap& m2, double rel_tol) {
    if (orientation(m1) != Orientation::SensePreserving) {
        throw ValidationError("NotSensePreserving", "base map must be sense-preserving");
    }
    const auto& grid = m1.domain().grid();
    GridSamples s = sample_derivatives(m1, m2);

    // Equal-Jacobian precondition.
    double jac_mismatch = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double j1 = std::norm(s.f1[k]) - std::norm(s.g1[k]);
        const double j2 = std::norm(s.f2[k]) - std::norm(s.g2[k]);
        jac_mismatch = std::max(jac_mismatch, std::abs(j1 - j2) / std::abs(j1));
    }
    if (jac_mismatch > 1e-8) {
        throw ValidationError("JacobianMismatch",
                              "sampled Jacobians differ by " + std::to_string(jac_mismatch));
    }

    RelationFit fit;
    if (dilatation_is_constant(m1)) {
        // F2' = alpha F1', G2' = beta F1': fit the constant ratios by their
        // grid mean, then validate everywhere.
        Complex alpha(0.0, 0.0), beta(0.0, 0.0);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            alpha += s.f2[k] / s.f1[k];
            beta += s.g2[k] / s.f1[k];
        }
        alpha /= static_cast<double>(grid.size());
        beta /= static_cast<double>(grid.size());
        fit.params = LinearDependentRelation{alpha, beta};
        fit.constant_dilatation_branch = true;
        fit.fit_residual = fit_residual_on_grid(s, alpha, Complex(0.0, 0.0), beta,
                                                Complex(0.0, 0.0));
    } else {
        // Two well-separated points with linearly independent (f1, g1)
        // samples; candidates are spread across the grid and the best
        // conditioned pair wins.
        std::vector<std::size_t> candidates;
        const std::size_t n = grid.size();
        for (int i = 0; i < 25; ++i) {
            std::size_t idx = static_cast<std::size_t>(
                (static_cast<double>(i) / 24.0) * static_cast<double>(n - 1));
            if (candidates.empty() || candidates.back() != idx) candidates.push_back(idx);
        }
        double best_cond = 0.0;
        std::size_t best_p = 0, best_q = 0;
        for (std::size_t a = 0; a < candidates.size(); ++a) {
            for (std::size_t b = a + 1; b < candidates.size(); ++b) {
                const std::size_t p = candidates[a], q = candidates[b];
                const Complex det = s.f1[p] * s.g1[q] - s.f1[q] * s.g1[p];
                const double norm = std::abs(s.f1[p]) * std::abs(s.g1[q]) +
                                    std::abs(s.f1[q]) * std::abs(s.g1[p]) + 1e-300;
                const double cond = std::abs(det) / norm;
                if (cond > best_cond) {
                    best_cond = cond;
                    best_p = p;
                    best_q = q;
                }
            }
        }
        if (best_cond < 1e-10) {
            throw ValidationError("IllConditionedSamples",
                                  "no linearly independent (F1', G1') sample pair found");
        }
        const std::size_t p = best_p, q = best_q;
        const Complex det = s.f1[p] * s.g1[q] - s.f1[q] * s.g1[p];
        const Complex alpha = (s.f2[p] * s.g1[q] - s.f2[q] * s.g1[p]) / det;
        const Complex u = (s.f1[p] * s.f2[q] - s.f1[q] * s.f2[p]) / det;  // beta e^{i xi}
        const Complex beta_conj = (s.g2[p] * s.g1[q] - s.g2[q] * s.g1[p]) / det;
        const Complex v = (s.f1[p] * s.g2[q] - s.f1[q] * s.g2[p]) / det;  // conj(alpha) e^{i xi}
        if (alpha == Complex(0.0, 0.0)) {
            throw ValidationError("IllConditionedSamples", "fitted alpha vanished");
        }
        double xi = std::arg(v / std::conj(alpha));
        if (xi < 0.0) xi += kTwoPi;
        if (xi >= kTwoPi) xi -= kTwoPi;
        const Complex beta = std::conj(beta_conj);
        const Complex eix = std::polar(1.0, xi);
        fit.params = GeneralRelation{alpha, beta, xi};
        fit.constant_dilatation_branch = false;
        fit.fit_residual = fit_residual_on_grid(s, alpha, beta * eix, std::conj(beta),
                                                std::conj(alpha) * eix);
        (void)u;
    }

    if (fit.fit_residual > rel_tol) {
        throw ValidationError(
            "FitResidualExceeded",
            "maps are not related by constants (residual " +
                std::to_string(fit.fit_residual) + ")");
    }
    return fit;
}

namespace {

void validate_params(const RelationParams& p) {
    if (const auto* ld = std::get_if<LinearDependentRelation>(&p)) {
        if (!(std::norm(ld->alpha) - std::norm(ld->beta) > 0.0)) {
            throw ValidationError("InvalidRelation",
                                  "linear-dependent relation requires |alpha|^2 > |beta|^2");
        }
    } else {
        const auto& g = std::get<GeneralRelation>(p);
        if (std::abs(std::norm(g.alpha) - (1.0 + std::norm(g.beta))) > 1e-9) {
            throw ValidationError("InvalidRelation",
                                  "general relation requires |alpha|^2 = 1 + |beta|^2");
        }
    }
}

}  // namespace

std::pair<Expr, Expr> apply_relation(const HarmonicMap& m1, const RelationParams& p) {
    validate_params(p);
    if (const auto* ld = std::get_if<LinearDependentRelation>(&p)) {
        return {Expr::constant(ld->alpha) * m1.f(), Expr::constant(ld->beta) * m1.f()};
    }
    const auto& g = std::get<GeneralRelation>(p);
    const Complex eix = std::polar(1.0, g.xi);
    Expr f2 = Expr::constant(g.alpha) * m1.f() + Expr::constant(g.beta * eix) * m1.g();
    Expr g2 = Expr::constant(std::conj(g.beta)) * m1.f() +
              Expr::constant(std::conj(g.alpha) * eix) * m1.g();
    return {std::move(f2), std::move(g2)};
}

HarmonicMap related_map(const HarmonicMap& m1, const RelationParams& p) {
    validate_params(p);
    if (const auto* ld = std::get_if<LinearDependentRelation>(&p)) {
        return HarmonicMap(Expr::constant(ld->alpha) * m1.F(),
                           Expr::constant(ld->beta) * m1.F(), m1.domain(), m1.params());
    }
    const auto& g = std::get<GeneralRelation>(p);
    const Complex eix = std::polar(1.0, g.xi);
    Expr F2 = Expr::constant(g.alpha) * m1.F() + Expr::constant(g.beta * eix) * m1.G();
    Expr G2 = Expr::constant(std::conj(g.beta)) * m1.F() +
              Expr::constant(std::conj(g.alpha) * eix) * m1.G();
    return HarmonicMap(std::move(F2), std::move(G2), m1.domain(), m1.params());
}

RelationParams canonicalized(const RelationParams& p) {
    if (const auto* g = std::get_if<GeneralRelation>(&p)) {
        const bool flip = g->alpha.real() < 0.0 ||
                          (g->alpha.real() == 0.0 && g->alpha.imag() < 0.0);
        if (flip) return GeneralRelation{-g->alpha, -g->beta, g->xi};
    }
    return p;
}

ModulusIdentityVerdict modulus_identity_test(const Expr& phi, const Expr& psi, double r,
                                             double s, const Domain& domain,
                                             const Bindings& params) {
    if (r == 0.0) {
        throw ValidationError("InvalidModulusIdentity", "r must be nonzero");
    }
    const auto& grid = domain.grid();
    std::vector<Complex> phis, psis;
    phis.reserve(grid.size());
    psis.reserve(grid.size());
    for (const GridPoint& p : grid) {
        Bindings b = params;
        b.set("z", p.z);
        phis.push_back(phi.eval(b));
        psis.push_back(psi.eval(b));
    }

    double sup_phi = 0.0;
    for (const Complex& v : phis) sup_phi = std::max(sup_phi, std::abs(v));
    if (sup_phi == 0.0) {
        throw ValidationError("InvalidModulusIdentity", "phi is identically zero on the grid");
    }

    double identity_defect = 0.0, magnitude = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        identity_defect = std::max(
            identity_defect, std::abs(std::norm(phis[k]) - r * std::norm(psis[k]) - s));
        magnitude = std::max(magnitude, std::norm(phis[k]) + std::abs(r) * std::norm(psis[k]) +
                                            std::abs(s));
    }
    const double tol = 1e-10 * std::max(1.0, magnitude);
    const bool identity_holds = identity_defect <= tol;

    auto grid_constant = [&](const std::vector<Complex>& vals) {
        const double ctol = 1e-10 * (1.0 + std::abs(vals.front()));
        for (const Complex& v : vals) {
            if (std::abs(v - vals.front()) > ctol) return false;
        }
        return true;
    };
    const bool both_constant = grid_constant(phis) && grid_constant(psis);

    if (identity_holds && both_constant) return ModulusIdentityVerdict::ForcedConstant;
    if (!identity_holds) return ModulusIdentityVerdict::NotSatisfied;
    // identity holds with nonconstant data: impossible when r, s != 0
    if (s != 0.0) {
        throw NumericalError(
            "modulus identity held with nonconstant phi/psi; tolerance misconfigured");
    }
    return ModulusIdentityVerdict::NotSatisfied;
}

}  // namespace lagflow
