#include "lagflow/presets.hpp"

#include <cmath>

namespace lagflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::vector<std::string> preset_names() {
    return {"kirchhoff", "gerstner", "harmonic_koebe", "steady_shear"};
}

std::optional<PresetId> preset_from_name(const std::string& name) {
    if (name == "kirchhoff") return PresetId::Kirchhoff;
    if (name == "gerstner") return PresetId::Gerstner;
    if (name == "harmonic_koebe") return PresetId::HarmonicKoebe;
    if (name == "steady_shear") return PresetId::SteadyShear;
    return std::nullopt;
}

std::string preset_name(PresetId id) {
    switch (id) {
        case PresetId::Kirchhoff: return "kirchhoff";
        case PresetId::Gerstner: return "gerstner";
        case PresetId::HarmonicKoebe: return "harmonic_koebe";
        case PresetId::SteadyShear: return "steady_shear";
    }
    return {};
}

Domain kirchhoff_default_domain() { return Domain::rectangle(0.0, 3.0, -1.0, 0.0, 41, 41); }

FlowSpec kirchhoff(double A, double k, double lambda, Domain domain) {
    if (A == 0.0 || !std::isfinite(A)) {
        throw ValidationError("InvalidParameter", "kirchhoff requires A != 0");
    }
    if (k == 0.0 || !std::isfinite(k)) {
        throw ValidationError("InvalidParameter", "kirchhoff requires k != 0");
    }
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw ValidationError("InvalidParameter", "kirchhoff requires lambda in [0, 1)");
    }
    // F0 univalence fails when the domain holds labels with equal Im parts
    // and Re parts differing by a multiple of 2*pi/k.
    double width;
    if (const auto* r = domain.rectangle_shape()) {
        width = r->a_max - r->a_min;
    } else {
        width = 2.0 * domain.disk_shape()->radius;
    }
    if (width >= kTwoPi / std::abs(k)) {
        throw ValidationError("DomainTooWide",
                              "label domain must be narrower than 2*pi/|k|");
    }

    // F0' = A e^{ikz}  =>  F0 = -(i A / k) e^{ikz}
    Bindings params;
    params.set("A", A).set("k", k);
    Expr F0 = parse_expr("-(i*A/k)*exp(i*k*z)");
    FlowSpec spec{LinearDependentSpec{std::move(F0), Complex(lambda, 0.0),
                                      BetaPath::constant(Complex(lambda, 0.0)), 0.0},
                  std::move(domain), std::move(params), Tamper{}};
    return spec;
}

Domain gerstner_default_domain() { return Domain::rectangle(0.0, 3.0, -2.0, -0.1, 41, 41); }

FlowSpec gerstner(double k, double g_accel, Domain domain) {
    if (!(k > 0.0)) {
        throw ValidationError("InvalidParameter", "gerstner requires k > 0");
    }
    if (!(g_accel > 0.0)) {
        throw ValidationError("InvalidParameter", "gerstner requires g > 0");
    }
    double b_max;
    if (const auto* r = domain.rectangle_shape()) {
        b_max = r->b_max;
    } else {
        const auto* d = domain.disk_shape();
        b_max = d->center.imag() + d->radius;
    }
    if (!(b_max < 0.0)) {
        throw ValidationError("DegenerateBoundary",
                              "gerstner labels must satisfy Im z < 0 (J -> 0 at b = 0)");
    }

    Bindings params;
    params.set("k", k);
    Expr F0 = parse_expr("z");
    Expr G0 = parse_expr("-(i/k)*exp(-i*k*z)");  // G0' = -e^{-ikz}
    FlowSpec spec{RotationalSpec{std::move(F0), std::move(G0), 0.0, std::sqrt(k * g_accel)},
                  std::move(domain), std::move(params), Tamper{}};
    return spec;
}

Expr harmonic_koebe_f() { return parse_expr("(z-z^2/2+z^3/6)/(1-z)^3"); }

Expr harmonic_koebe_g() { return parse_expr("(z^2/2+z^3/6)/(1-z)^3"); }

HarmonicMap harmonic_koebe(Complex mu) {
    if (std::abs(std::abs(mu) - 1.0) > 1e-12) {
        throw ValidationError("InvalidParameter", "harmonic_koebe requires |mu| = 1");
    }
    Domain disk = Domain::disk(Complex(0.0, 0.0), 0.97, 64, 64);
    return HarmonicMap(harmonic_koebe_f(), Expr::constant(mu) * harmonic_koebe_g(),
                       std::move(disk));
}

FlowSpec steady_shear() {
    const Complex lambda(0.5, 0.0);
    FlowSpec spec{LinearDependentSpec{parse_expr("z"), lambda, BetaPath::constant(lambda), 0.0},
                  Domain::rectangle(-1.0, 1.0, -1.0, 1.0, 41, 41), Bindings{}, Tamper{}};
    return spec;
}

}  // namespace lagflow
