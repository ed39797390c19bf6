#include "lagflow/flows.hpp"

#include <algorithm>
#include <cmath>

#include "lagflow/quadrature.hpp"

namespace lagflow {

namespace {
constexpr Complex kI(0.0, 1.0);
}

BetaPath::BetaPath(Expr expr_in_t, Bindings params)
    : expr_(std::move(expr_in_t)),
      deriv_(expr_.derivative("t")),
      second_deriv_(deriv_.derivative("t")),
      params_(std::move(params)) {}

BetaPath BetaPath::constant(Complex value) { return BetaPath(Expr::constant(value)); }

Complex BetaPath::value(double t) const {
    Bindings b = params_;
    b.set("t", Complex(t, 0.0));
    return expr_.eval(b);
}

Complex BetaPath::deriv(double t) const {
    Bindings b = params_;
    b.set("t", Complex(t, 0.0));
    return deriv_.eval(b);
}

Complex BetaPath::second_deriv(double t) const {
    Bindings b = params_;
    b.set("t", Complex(t, 0.0));
    return second_deriv_.eval(b);
}

Flow::Flow(FlowSpec spec, FlowFamily family)
    : spec_(std::move(spec)),
      family_(family),
      domain_(spec_.domain),
      params_(spec_.params),
      phase_cache_(std::make_shared<PhaseCache>()) {
    if (const auto* ld = std::get_if<LinearDependentSpec>(&spec_.family)) {
        F0_ = ld->F0;
        G0_ = Expr::constant(ld->lambda) * ld->F0;
        beta_ = BetaPath(ld->beta.expr(), params_);
        nu0_ = ld->nu0;
        c_ = 1.0 - std::norm(ld->lambda);
    } else if (const auto* af = std::get_if<AffineSpec>(&spec_.family)) {
        F0_ = af->F0;
        G0_ = af->G0;
        beta_ = BetaPath(af->beta.expr(), params_);
        nu0_ = af->nu0;
        c_ = 1.0;
    } else {
        const auto& rot = std::get<RotationalSpec>(spec_.family);
        F0_ = rot.F0;
        G0_ = rot.G0;
        nu0_ = rot.nu0;
        xi0_ = rot.xi0;
    }
    f0_ = F0_.derivative("z");
    g0_ = G0_.derivative("z");
}

Complex Flow::eval_F0(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return F0_.eval(b);
}

Complex Flow::eval_G0(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return G0_.eval(b);
}

Complex Flow::eval_f0(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return f0_.eval(b);
}

Complex Flow::eval_g0(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return g0_.eval(b);
}

HarmonicMap Flow::initial_map() const { return HarmonicMap(F0_, G0_, domain_, params_); }

double Flow::phase_integrand(double t) const {
    const Complex beta = beta_->value(t);
    const Complex beta_t = beta_->deriv(t);
    const double num =
        nu0_ + (family_ == FlowFamily::LinearDependent ? std::imag(beta * std::conj(beta_t))
                                                       : std::imag(beta_t * std::conj(beta)));
    return num / (c_ + std::norm(beta));
}

double Flow::raw_phase(double t) const {
    if (constant_phase_rate_) return *constant_phase_rate_ * t;
    if (t == 0.0) return 0.0;

    auto integrand = [this](double s) { return phase_integrand(s); };
    auto tail = [&](double lo, double hi) {
        const int panels = std::max(
            1, static_cast<int>(std::ceil(std::abs(hi - lo) / kPhaseSegment *
                                          static_cast<double>(phase_panels_))));
        return composite_gk15(integrand, lo, hi, panels);
    };
    auto segment = [&](long k) {
        {
            std::lock_guard<std::mutex> lock(phase_cache_->mutex);
            auto it = phase_cache_->segments.find(k);
            if (it != phase_cache_->segments.end()) return it->second;
        }
        const double lo = static_cast<double>(k) * kPhaseSegment;
        const double value = composite_gk15(integrand, lo, lo + kPhaseSegment, phase_panels_);
        std::lock_guard<std::mutex> lock(phase_cache_->mutex);
        return phase_cache_->segments.emplace(k, value).first->second;
    };

    double sum = 0.0;
    if (t > 0.0) {
        const long m = static_cast<long>(std::floor(t / kPhaseSegment));
        for (long k = 0; k < m; ++k) sum += segment(k);
        sum += tail(static_cast<double>(m) * kPhaseSegment, t);
    } else {
        const long m = static_cast<long>(std::ceil(t / kPhaseSegment));
        for (long k = m; k < 0; ++k) sum -= segment(k);
        sum += tail(static_cast<double>(m) * kPhaseSegment, t);
    }
    return sum;
}

double Flow::phase(double t) const {
    if (family_ == FlowFamily::Rotational) return nu0_ * t;
    return raw_phase(t);
}

Flow::CoefState Flow::coef_state(double t) const {
    CoefState s;
    if (family_ == FlowFamily::Rotational) {
        s.alpha = std::polar(1.0, nu0_ * t);
        s.alpha_t = kI * nu0_ * s.alpha;
        s.alpha_tt = -nu0_ * nu0_ * s.alpha;
        s.beta = s.beta_t = s.beta_tt = Complex(0.0, 0.0);
        s.xi = xi0_ * t;
        s.xi_t = xi0_;
    } else {
        const Complex beta = beta_->value(t);
        const Complex beta_t = beta_->deriv(t);
        const Complex beta_tt = beta_->second_deriv(t);
        const double R2 = c_ + std::norm(beta);
        const double R = std::sqrt(R2);
        const double R_t = std::real(beta_t * std::conj(beta)) / R;
        const double num =
            nu0_ + (family_ == FlowFamily::LinearDependent
                        ? std::imag(beta * std::conj(beta_t))
                        : std::imag(beta_t * std::conj(beta)));
        const double num_t = family_ == FlowFamily::LinearDependent
                                 ? std::imag(beta * std::conj(beta_tt))
                                 : std::imag(beta_tt * std::conj(beta));
        const double phi_t = num / R2;
        const double phi_tt = (num_t - phi_t * 2.0 * std::real(beta_t * std::conj(beta))) / R2;
        const double R_tt =
            (std::real(beta_tt * std::conj(beta)) + std::norm(beta_t) - R_t * R_t) / R;
        const double phi = raw_phase(t);
        const Complex eiphi = std::polar(1.0, phi);
        s.alpha = R * eiphi;
        s.alpha_t = (Complex(R_t, 0.0) + kI * (R * phi_t)) * eiphi;
        s.alpha_tt =
            (Complex(R_tt - R * phi_t * phi_t, 0.0) + kI * (2.0 * R_t * phi_t + R * phi_tt)) *
            eiphi;
        s.beta = beta;
        s.beta_t = beta_t;
        s.beta_tt = beta_tt;
        s.xi = 0.0;
        s.xi_t = 0.0;
    }
    return s;
}

double Flow::f_side_scale(double t) const {
    if (spec_.tamper.kind == Tamper::Kind::AlphaScaleStep && t > 0.0) {
        return 1.0 + spec_.tamper.amount;
    }
    return 1.0;
}

Coefficients Flow::coefficients(double t) const {
    const CoefState s = coef_state(t);
    return Coefficients{s.alpha, s.beta, s.xi};
}

std::pair<Complex, Complex> Flow::fg(double t, Complex z) const {
    const CoefState s = coef_state(t);
    const Complex f0 = eval_f0(z);
    Complex f, g;
    if (family_ == FlowFamily::LinearDependent) {
        f = s.alpha * f0;
        g = s.beta * f0;
    } else {
        const Complex g0 = eval_g0(z);
        const Complex E = std::polar(1.0, s.xi);
        f = s.alpha * f0 + E * s.beta * g0;
        g = std::conj(s.beta) * f0 + E * std::conj(s.alpha) * g0;
    }
    if (spec_.tamper.kind == Tamper::Kind::GScaleRate) {
        g *= 1.0 + spec_.tamper.amount * t;
    }
    return {f_side_scale(t) * f, g};
}

std::pair<Complex, Complex> Flow::fg_t(double t, Complex z) const {
    const CoefState s = coef_state(t);
    const Complex f0 = eval_f0(z);
    Complex f_t, g_t, g;
    if (family_ == FlowFamily::LinearDependent) {
        f_t = s.alpha_t * f0;
        g_t = s.beta_t * f0;
        g = s.beta * f0;
    } else {
        const Complex g0 = eval_g0(z);
        const Complex E = std::polar(1.0, s.xi);
        const Complex E_t = kI * s.xi_t * E;
        f_t = s.alpha_t * f0 + (E_t * s.beta + E * s.beta_t) * g0;
        g_t = std::conj(s.beta_t) * f0 +
              (E_t * std::conj(s.alpha) + E * std::conj(s.alpha_t)) * g0;
        g = std::conj(s.beta) * f0 + E * std::conj(s.alpha) * g0;
    }
    if (spec_.tamper.kind == Tamper::Kind::GScaleRate) {
        const double rate = spec_.tamper.amount;
        g_t = g_t * (1.0 + rate * t) + rate * g;
    }
    return {f_side_scale(t) * f_t, g_t};
}

Complex Flow::labelling(double t, Complex z) const {
    const CoefState s = coef_state(t);
    const Complex F0v = eval_F0(z);
    Complex F, G;
    if (family_ == FlowFamily::LinearDependent) {
        F = s.alpha * F0v;
        G = s.beta * F0v;
    } else {
        const Complex G0v = eval_G0(z);
        const Complex E = std::polar(1.0, s.xi);
        F = s.alpha * F0v + E * s.beta * G0v;
        G = std::conj(s.beta) * F0v + E * std::conj(s.alpha) * G0v;
    }
    if (spec_.tamper.kind == Tamper::Kind::GScaleRate) {
        G *= 1.0 + spec_.tamper.amount * t;
    }
    return f_side_scale(t) * F + std::conj(G);
}

Complex Flow::velocity(double t, Complex z) const {
    const CoefState s = coef_state(t);
    const Complex F0v = eval_F0(z);
    Complex F_t, G_t, G;
    if (family_ == FlowFamily::LinearDependent) {
        F_t = s.alpha_t * F0v;
        G_t = s.beta_t * F0v;
        G = s.beta * F0v;
    } else {
        const Complex G0v = eval_G0(z);
        const Complex E = std::polar(1.0, s.xi);
        const Complex E_t = kI * s.xi_t * E;
        F_t = s.alpha_t * F0v + (E_t * s.beta + E * s.beta_t) * G0v;
        G_t = std::conj(s.beta_t) * F0v +
              (E_t * std::conj(s.alpha) + E * std::conj(s.alpha_t)) * G0v;
        G = std::conj(s.beta) * F0v + E * std::conj(s.alpha) * G0v;
    }
    if (spec_.tamper.kind == Tamper::Kind::GScaleRate) {
        const double rate = spec_.tamper.amount;
        G_t = G_t * (1.0 + rate * t) + rate * G;
    }
    return f_side_scale(t) * F_t + std::conj(G_t);
}

Complex Flow::acceleration(double t, Complex z) const {
    const CoefState s = coef_state(t);
    const Complex F0v = eval_F0(z);
    Complex F_tt, G_tt, G_t, G;
    if (family_ == FlowFamily::LinearDependent) {
        F_tt = s.alpha_tt * F0v;
        G_tt = s.beta_tt * F0v;
        G_t = s.beta_t * F0v;
        G = s.beta * F0v;
    } else {
        const Complex G0v = eval_G0(z);
        const Complex E = std::polar(1.0, s.xi);
        const Complex E_t = kI * s.xi_t * E;
        const Complex E_tt = -s.xi_t * s.xi_t * E;
        F_tt = s.alpha_tt * F0v +
               (E_tt * s.beta + 2.0 * E_t * s.beta_t + E * s.beta_tt) * G0v;
        G_tt = std::conj(s.beta_tt) * F0v +
               (E_tt * std::conj(s.alpha) + 2.0 * E_t * std::conj(s.alpha_t) +
                E * std::conj(s.alpha_tt)) *
                   G0v;
        G_t = std::conj(s.beta_t) * F0v +
              (E_t * std::conj(s.alpha) + E * std::conj(s.alpha_t)) * G0v;
        G = std::conj(s.beta) * F0v + E * std::conj(s.alpha) * G0v;
    }
    if (spec_.tamper.kind == Tamper::Kind::GScaleRate) {
        const double rate = spec_.tamper.amount;
        G_tt = G_tt * (1.0 + rate * t) + 2.0 * rate * G_t;
    }
    (void)G;
    return f_side_scale(t) * F_tt + std::conj(G_tt);
}

std::vector<Complex> Flow::trajectory(Complex z, std::span<const double> times) const {
    if (times.empty()) {
        throw ValidationError("EmptyTimes", "trajectory requires at least one time");
    }
    if (times.front() < 0.0) {
        throw ValidationError("NegativeTime", "trajectory times must start at t >= 0");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) {
            throw ValidationError("TimesNotAscending", "trajectory times must be ascending");
        }
    }
    std::vector<Complex> points;
    points.reserve(times.size());
    for (double t : times) points.push_back(labelling(t, z));
    return points;
}

namespace {

bool grid_identically_zero(const Flow& flow, const Domain& domain) {
    double sup_g = 0.0, sup_f = 0.0;
    for (const GridPoint& p : domain.grid()) {
        sup_g = std::max(sup_g, std::abs(flow.eval_g0(p.z)));
        sup_f = std::max(sup_f, std::abs(flow.eval_f0(p.z)));
    }
    return sup_g <= 1e-14 * (1.0 + sup_f);
}

}  // namespace

Flow build_flow(const FlowSpec& spec) {
    FlowFamily family;
    if (const auto* ld = std::get_if<LinearDependentSpec>(&spec.family)) {
        family = FlowFamily::LinearDependent;
        if (!(std::abs(ld->lambda) < 1.0)) {
            throw ValidationError("LambdaOutOfRange", "|lambda| must be < 1");
        }
    } else if (std::holds_alternative<AffineSpec>(spec.family)) {
        family = FlowFamily::Affine;
    } else {
        family = FlowFamily::Rotational;
        const auto& rot = std::get<RotationalSpec>(spec.family);
        if (rot.xi0 == 0.0 || !std::isfinite(rot.xi0)) {
            throw ValidationError("XiZero", "rotational family requires xi0 != 0");
        }
    }

    Flow flow(spec, family);

    // beta initial condition: beta(0) = lambda (LD) or 0 (affine)
    if (family == FlowFamily::LinearDependent) {
        const auto& ld = std::get<LinearDependentSpec>(spec.family);
        const Complex b0 = flow.beta_->value(0.0);
        if (std::abs(b0 - ld.lambda) > 1e-12) {
            throw ValidationError("BetaInitialMismatch",
                                  "linear-dependent family requires beta(0) = lambda");
        }
    } else if (family == FlowFamily::Affine) {
        const Complex b0 = flow.beta_->value(0.0);
        if (std::abs(b0) > 1e-12) {
            throw ValidationError("BetaInitialMismatch",
                                  "affine family requires beta(0) = 0");
        }
    }

    // initial map must be sense-preserving
    HarmonicMap initial = flow.initial_map();
    if (orientation(initial) != Orientation::SensePreserving) {
        throw ValidationError("NotSensePreserving",
                              "initial labelling map is not sense-preserving on the grid");
    }

    // linear-independence hypotheses of the two theorem-4 families
    if (family == FlowFamily::Affine) {
        if (dilatation_is_constant(initial)) {
            throw ValidationError("ConstantDilatationInAffineFamily",
                                  "affine family requires nonconstant dilatation");
        }
    } else if (family == FlowFamily::Rotational) {
        // G0 identically zero collapses to a rigid rotation and is accepted;
        // otherwise the dilatation must be nonconstant.
        if (!grid_identically_zero(flow, spec.domain) && dilatation_is_constant(initial)) {
            throw ValidationError("ConstantDilatationInRotationalFamily",
                                  "rotational family requires nonconstant dilatation");
        }
    }

    // univalence heuristic, when the grid is fine enough to support it
    if (spec.domain.n_a() >= 32 && spec.domain.n_b() >= 32) {
        UnivalenceReport report = univalence_check(initial);
        if (report.collision) {
            throw ValidationError("UnivalenceCollision",
                                  "initial labelling map fails the grid univalence heuristic");
        }
    }

    // closed form for the phase when the integrand is constant (constant or
    // constant-modulus beta paths)
    if (family != FlowFamily::Rotational) {
        static const double probes[] = {0.0,         0.123456789, 0.318309886,
                                        0.718281828, 1.234567891, 1.732050808,
                                        2.236067977, 3.010299957, 4.123105626};
        const double r0 = flow.phase_integrand(probes[0]);
        bool constant = true;
        for (double tp : probes) {
            if (std::abs(flow.phase_integrand(tp) - r0) > 1e-13 * (1.0 + std::abs(r0))) {
                constant = false;
                break;
            }
        }
        if (constant) {
            flow.constant_phase_rate_ = r0;
        } else {
            // calibrate the composite density: double panels until two
            // consecutive densities agree on a few probe segments
            auto integrand = [&flow](double s) { return flow.phase_integrand(s); };
            const double segs[][2] = {{0.0, 0.5}, {0.5, 1.0}, {1.5, 2.0}, {3.0, 3.5}};
            int panels = 8;
            for (;; panels *= 2) {
                double disagreement = 0.0;
                for (const auto& seg : segs) {
                    const double coarse = composite_gk15(integrand, seg[0], seg[1], panels);
                    const double fine = composite_gk15(integrand, seg[0], seg[1], 2 * panels);
                    disagreement = std::max(disagreement, std::abs(fine - coarse));
                }
                if (disagreement <= Flow::kPhaseTol) break;
                if (panels >= 2048) {
                    throw NumericalError(
                        "phase quadrature failed to converge (pathological beta path)");
                }
            }
            flow.phase_panels_ = panels;
        }
    }

    return flow;
}

}  // namespace lagflow
