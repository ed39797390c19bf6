#pragma once

#include <functional>

#include "lagflow/errors.hpp"

namespace lagflow {

// Adaptive Gauss-Kronrod 15(7) integration of f over [a, b] to the given
// absolute tolerance. Throws NumericalError when bisection stalls.
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double abs_tol);

// Single 15-point Kronrod panel with its embedded error estimate.
struct GkPanel {
    double value = 0.0;
    double error = 0.0;
};
GkPanel gk15_panel(const std::function<double(double)>& f, double a, double b);

// Fixed composite rule: GK15 on `panels` uniform subintervals. No adaptivity,
// so the result is a smooth function of the endpoints; used where integrals
// are finite-differenced afterwards.
double composite_gk15(const std::function<double(double)>& f, double a, double b,
                      int panels);

}  // namespace lagflow
