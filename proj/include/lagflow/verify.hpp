#pragma once

#include <span>
#include <vector>

#include "lagflow/flows.hpp"

namespace lagflow {

// Sup-norm residuals of the governing equations over grid x times.
// Q(t,z) = f_t conj(f) - g conj(g_t) must equal i*nu(z) for exact flows:
// Re Q vanishes (mass conservation) and Im Q is time-independent (Euler
// compatibility). governing_scale is sup|Q|, the natural normalizer.
struct GoverningResidual {
    double re_sup = 0.0;
    double im_drift = 0.0;
    double scale = 0.0;
};

GoverningResidual governing_residual(const Flow& flow, std::span<const double> times);

// sup |J(t,.) - J(0,.)| / sup |J(0,.)| over grid x times.
double mass_conservation_residual(const Flow& flow, std::span<const double> times);

// Black-box check of the Lagrangian Euler compatibility condition
//   ( x_a x_bt + y_a y_bt - x_b x_at - y_b y_at )_t = 0
// by central finite differences on labelling positions only (step h in a, b
// and t). Works on interior grid nodes and times t >= 2h; independent of the
// symbolic derivative path.
double euler_compatibility_residual(const Flow& flow, std::span<const double> times,
                                    double h);

struct ConvergenceStudy {
    std::vector<double> steps;
    std::vector<double> residuals;
    std::vector<double> orders;  // log2(res[i]/res[i+1])
};

// Residuals at steps {h0*2^(levels-1), ..., 2*h0, h0} with observed orders.
ConvergenceStudy euler_convergence(const Flow& flow, std::span<const double> times,
                                   double h0, int levels = 3);

// Pressure reconstructed from exact particle accelerations:
//   P_a = -(x_a x_tt + y_a y_tt),  P_b = -(x_b x_tt + y_b y_tt),
// integrated along lattice edges from the anchor (trapezoid rule). Pressure
// is determined up to an additive constant; P(anchor) = 0.
struct PressureField {
    Complex anchor;
    int n_a = 0, n_b = 0;
    // row-major [ib*n_a + ia]; NaN marks nodes outside the domain
    std::vector<double> values;
    // max circulation of (P_a, P_b) around a complete lattice cell
    double loop_defect = 0.0;
};

PressureField pressure_field(const Flow& flow, double t, Complex anchor);

struct ResidualReport {
    double mass_conservation = 0.0;
    double governing_re = 0.0;
    double governing_im_drift = 0.0;
    double governing_scale = 0.0;
    double euler_fd = 0.0;
    std::vector<double> euler_steps;
    std::vector<double> euler_residuals;
    std::vector<double> euler_orders;
    double pressure_loop = 0.0;
    std::vector<double> times;
};

struct VerifyTolerances {
    double mass = 1e-9;
    double governing = 1e-9;  // relative to governing_scale
    double euler_h = 1e-3;
    double euler_order_min = 1.8;
    // residuals below this floor count as converged (exact steady flows)
    double residual_floor = 1e-12;
    // central differences bottom out at ~eps*|position|/h^3; levels whose
    // residual sits below fd_noise_coeff times that estimate are treated as
    // converged rather than failed for losing the order
    double fd_noise_coeff = 32.0;
};

struct VerifyOutcome {
    ResidualReport report;
    std::vector<std::string> failures;  // names of residuals over tolerance
    bool passed() const { return failures.empty(); }
};

// Full battery: mass + governing + FD Euler refinement study + pressure
// loop closure. times must include 0.
VerifyOutcome run_verification(const Flow& flow, std::span<const double> times,
                               const VerifyTolerances& tol = {});

}  // namespace lagflow
