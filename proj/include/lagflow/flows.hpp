#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "lagflow/harmonic.hpp"

namespace lagflow {

// C^1 coefficient path t -> beta(t), supplied symbolically so that its time
// derivatives are exact.
class BetaPath {
public:
    explicit BetaPath(Expr expr_in_t, Bindings params = {});
    static BetaPath constant(Complex value);

    Complex value(double t) const;
    Complex deriv(double t) const;
    Complex second_deriv(double t) const;

    const Expr& expr() const { return expr_; }

private:
    Expr expr_, deriv_, second_deriv_;
    Bindings params_;
};

// The three classified solution families.
//
// LinearDependentSpec: constant-dilatation initial data G0 = lambda F0,
//   f(t,z) = sqrt(1-|l|^2+|b(t)|^2) e^{i Phi(t)} F0'(z),  g(t,z) = b(t) F0'(z),
//   Phi(t) = Int_0^t (nu0 + Im{b conj(b')}) / (1-|l|^2+|b|^2) ds, b(0) = lambda.
//
// AffineSpec: linearly independent (F0', G0'), coupling path b with b(0) = 0,
//   f = sqrt(1+|b|^2) e^{i Phi} F0' + b G0',
//   g = conj(b) F0' + sqrt(1+|b|^2) e^{-i Phi} G0',
//   Phi(t) = Int_0^t (nu0 + Im{b' conj(b)}) / (1+|b|^2) ds.
//
// RotationalSpec: linearly independent (F0', G0'), xi0 != 0,
//   f = e^{i nu0 t} F0',  g = e^{i (xi0-nu0) t} G0'.
struct LinearDependentSpec {
    Expr F0;
    Complex lambda;
    BetaPath beta;
    double nu0 = 0.0;
};

struct AffineSpec {
    Expr F0;
    Expr G0;
    BetaPath beta;
    double nu0 = 0.0;
};

struct RotationalSpec {
    Expr F0;
    Expr G0;
    double nu0 = 0.0;
    double xi0 = 0.0;
};

// Deliberate defect injected for negative-control fixtures. GScaleRate
// multiplies the co-analytic part by (1 + amount*t); AlphaScaleStep scales
// the f-side coefficient by (1 + amount) for t > 0.
struct Tamper {
    enum class Kind { None, GScaleRate, AlphaScaleStep };
    Kind kind = Kind::None;
    double amount = 0.0;
};

struct FlowSpec {
    std::variant<LinearDependentSpec, AffineSpec, RotationalSpec> family;
    Domain domain;
    Bindings params;
    Tamper tamper;
};

enum class FlowFamily { LinearDependent, Affine, Rotational };

struct Coefficients {
    Complex alpha;
    Complex beta;
    double xi = 0.0;
};

// A validated flow. Immutable and safe to query concurrently; the phase
// cache is internally synchronized and a pure function of t, so results are
// independent of query order.
class Flow {
public:
    FlowFamily family() const { return family_; }
    const Domain& domain() const { return domain_; }
    const FlowSpec& spec() const { return spec_; }

    // Phase Phi(t) of the f-side coefficient (nu0*t for the rotational
    // family); Phi(0) = 0.
    double phase(double t) const;

    Coefficients coefficients(double t) const;

    // Derivative pair (f, g) = (F', G') at (t, z).
    std::pair<Complex, Complex> fg(double t, Complex z) const;
    // Exact time derivative (f_t, g_t) at (t, z).
    std::pair<Complex, Complex> fg_t(double t, Complex z) const;

    // Particle position F(t,z) + conj(G(t,z)).
    Complex labelling(double t, Complex z) const;
    // Exact time derivative of labelling (velocity u + i v).
    Complex velocity(double t, Complex z) const;
    // Exact second time derivative of labelling.
    Complex acceleration(double t, Complex z) const;

    std::vector<Complex> trajectory(Complex z, std::span<const double> times) const;

    // Initial labelling map F0 + conj(G0).
    HarmonicMap initial_map() const;

    Complex eval_f0(Complex z) const;
    Complex eval_g0(Complex z) const;

private:
    friend Flow build_flow(const FlowSpec& spec);
    Flow(FlowSpec spec, FlowFamily family);

    struct CoefState {
        Complex alpha, beta;
        double xi = 0.0, xi_t = 0.0;
        Complex alpha_t, beta_t;
        Complex alpha_tt, beta_tt;
    };
    CoefState coef_state(double t) const;
    double f_side_scale(double t) const;

    Complex eval_F0(Complex z) const;
    Complex eval_G0(Complex z) const;

    double phase_integrand(double t) const;
    double raw_phase(double t) const;

    FlowSpec spec_;
    FlowFamily family_;
    Domain domain_;
    Bindings params_;

    Expr F0_, G0_, f0_, g0_;
    std::optional<BetaPath> beta_;  // LD/affine families only
    double nu0_ = 0.0, xi0_ = 0.0;
    double c_ = 1.0;  // 1-|lambda|^2 (LD) or 1 (affine)

    std::optional<double> constant_phase_rate_;
    // Composite GK15 density per segment, calibrated once at build so the
    // phase error is a smooth function of t (a per-query adaptive rule would
    // inject subdivision jumps that finite differencing amplifies).
    int phase_panels_ = 8;
    static constexpr double kPhaseSegment = 0.5;
    static constexpr double kPhaseTol = 1e-13;
    struct PhaseCache {
        std::mutex mutex;
        std::map<long, double> segments;
    };
    std::shared_ptr<PhaseCache> phase_cache_;
};

// Validates the spec (named errors: BetaInitialMismatch, LambdaOutOfRange,
// ConstantDilatationInAffineFamily, XiZero, NotSensePreserving,
// UnivalenceCollision) and assembles the evaluator. This is the single choke
// point for family invariants.
Flow build_flow(const FlowSpec& spec);

}  // namespace lagflow
