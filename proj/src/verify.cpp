#include "lagflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <unordered_map>

#include "lagflow/parallel.hpp"

namespace lagflow {

namespace {

bool contains_zero(std::span<const double> times) {
    for (double t : times) {
        if (t == 0.0) return true;
    }
    return false;
}

}  // namespace

GoverningResidual governing_residual(const Flow& flow, std::span<const double> times) {
    if (!contains_zero(times)) {
        throw ValidationError("TimesMissingZero", "governing residual requires t=0");
    }
    const auto& grid = flow.domain().grid();
    const std::size_t n = grid.size();

    std::vector<double> im0(n);
    parallel_for(n, [&](std::size_t k) {
        auto [f, g] = flow.fg(0.0, grid[k].z);
        auto [ft, gt] = flow.fg_t(0.0, grid[k].z);
        im0[k] = std::imag(ft * std::conj(f) - g * std::conj(gt));
    });

    GoverningResidual out;
    std::vector<double> re_sup(n), drift(n), scale(n);
    for (double t : times) {
        parallel_for(n, [&](std::size_t k) {
            auto [f, g] = flow.fg(t, grid[k].z);
            auto [ft, gt] = flow.fg_t(t, grid[k].z);
            const Complex q = ft * std::conj(f) - g * std::conj(gt);
            re_sup[k] = std::abs(std::real(q));
            drift[k] = std::abs(std::imag(q) - im0[k]);
            scale[k] = std::abs(q);
        });
        for (std::size_t k = 0; k < n; ++k) {
            out.re_sup = std::max(out.re_sup, re_sup[k]);
            out.im_drift = std::max(out.im_drift, drift[k]);
            out.scale = std::max(out.scale, scale[k]);
        }
    }
    return out;
}

double mass_conservation_residual(const Flow& flow, std::span<const double> times) {
    if (!contains_zero(times)) {
        throw ValidationError("TimesMissingZero", "mass conservation residual requires t=0");
    }
    const auto& grid = flow.domain().grid();
    const std::size_t n = grid.size();

    std::vector<double> j0(n);
    double sup_j0 = 0.0;
    parallel_for(n, [&](std::size_t k) {
        auto [f, g] = flow.fg(0.0, grid[k].z);
        j0[k] = std::norm(f) - std::norm(g);
    });
    for (double v : j0) sup_j0 = std::max(sup_j0, std::abs(v));
    if (sup_j0 == 0.0) sup_j0 = 1.0;

    double residual = 0.0;
    std::vector<double> diff(n);
    for (double t : times) {
        parallel_for(n, [&](std::size_t k) {
            auto [f, g] = flow.fg(t, grid[k].z);
            diff[k] = std::abs((std::norm(f) - std::norm(g)) - j0[k]);
        });
        for (double v : diff) residual = std::max(residual, v);
    }
    return residual / sup_j0;
}

namespace {

// The bracketed Euler expression at time t for label z, all derivatives by
// central differences with step h on labelling positions.
double euler_bracket(const Flow& flow, double t, Complex z, double h) {
    const Complex da(h, 0.0), db(0.0, h);
    auto w = [&](double tt, Complex zz) { return flow.labelling(tt, zz); };

    const Complex w_a = (w(t, z + da) - w(t, z - da)) / (2.0 * h);
    const Complex w_b = (w(t, z + db) - w(t, z - db)) / (2.0 * h);
    const Complex w_at =
        ((w(t + h, z + da) - w(t + h, z - da)) - (w(t - h, z + da) - w(t - h, z - da))) /
        (4.0 * h * h);
    const Complex w_bt =
        ((w(t + h, z + db) - w(t + h, z - db)) - (w(t - h, z + db) - w(t - h, z - db))) /
        (4.0 * h * h);

    const double x_a = w_a.real(), y_a = w_a.imag();
    const double x_b = w_b.real(), y_b = w_b.imag();
    const double x_at = w_at.real(), y_at = w_at.imag();
    const double x_bt = w_bt.real(), y_bt = w_bt.imag();
    return x_a * x_bt + y_a * y_bt - x_b * x_at - y_b * y_at;
}

}  // namespace

double euler_compatibility_residual(const Flow& flow, std::span<const double> times,
                                    double h) {
    const Domain& dom = flow.domain();
    const auto& grid = dom.grid();

    // interior nodes: the full space stencil must stay inside the domain
    std::vector<Complex> points;
    for (const GridPoint& p : grid) {
        const Complex offs[4] = {p.z + Complex(h, 0), p.z - Complex(h, 0),
                                 p.z + Complex(0, h), p.z - Complex(0, h)};
        bool ok = true;
        for (const Complex& q : offs) ok = ok && dom.contains(q);
        if (ok) points.push_back(p.z);
    }
    if (points.empty()) {
        throw ValidationError("StencilLeavesDomain",
                              "no interior grid nodes for the requested step");
    }

    std::vector<double> eval_times;
    for (double t : times) {
        if (t >= 2.0 * h) eval_times.push_back(t);
    }
    if (eval_times.empty()) {
        throw ValidationError("TimesNotInterior",
                              "euler residual requires times t >= 2h");
    }

    double residual = 0.0;
    std::vector<double> vals(points.size());
    for (double t : eval_times) {
        parallel_for(points.size(), [&](std::size_t k) {
            const double bp = euler_bracket(flow, t + h, points[k], h);
            const double bm = euler_bracket(flow, t - h, points[k], h);
            vals[k] = std::abs((bp - bm) / (2.0 * h));
        });
        for (double v : vals) residual = std::max(residual, v);
    }
    return residual;
}

ConvergenceStudy euler_convergence(const Flow& flow, std::span<const double> times,
                                   double h0, int levels) {
    ConvergenceStudy study;
    for (int level = levels - 1; level >= 0; --level) {
        const double h = h0 * std::pow(2.0, level);
        study.steps.push_back(h);
        study.residuals.push_back(euler_compatibility_residual(flow, times, h));
    }
    for (std::size_t k = 0; k + 1 < study.residuals.size(); ++k) {
        const double r0 = study.residuals[k], r1 = study.residuals[k + 1];
        study.orders.push_back(r1 > 0.0 ? std::log2(r0 / r1)
                                        : std::numeric_limits<double>::infinity());
    }
    return study;
}

PressureField pressure_field(const Flow& flow, double t, Complex anchor) {
    const Domain& dom = flow.domain();
    if (!dom.contains(anchor)) {
        throw ValidationError("AnchorOutsideDomain", "pressure anchor must be in the domain");
    }
    const auto& grid = dom.grid();
    const int n_a = dom.n_a(), n_b = dom.n_b();
    const double da = dom.cell_a(), db = dom.cell_b();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    PressureField field;
    field.anchor = anchor;
    field.n_a = n_a;
    field.n_b = n_b;
    field.values.assign(static_cast<std::size_t>(n_a) * n_b, nan);

    // node index per lattice slot, -1 where outside the domain
    std::vector<int> slot(static_cast<std::size_t>(n_a) * n_b, -1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        slot[static_cast<std::size_t>(grid[k].ib) * n_a + grid[k].ia] = static_cast<int>(k);
    }

    // exact pressure gradient in label coordinates
    std::vector<double> p_a(grid.size()), p_b(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
        const Complex z = grid[k].z;
        auto [f, g] = flow.fg(t, z);
        const Complex w_a = f + std::conj(g);
        const Complex w_b = Complex(0.0, 1.0) * f - Complex(0.0, 1.0) * std::conj(g);
        const Complex w_tt = flow.acceleration(t, z);
        p_a[k] = -std::real(std::conj(w_a) * w_tt);
        p_b[k] = -std::real(std::conj(w_b) * w_tt);
    });

    // anchor at the nearest grid node
    std::size_t anchor_idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double d = std::abs(grid[k].z - anchor);
        if (d < best) {
            best = d;
            anchor_idx = k;
        }
    }

    // breadth-first trapezoid integration over lattice edges
    std::vector<double> value(grid.size(), nan);
    std::vector<bool> visited(grid.size(), false);
    std::deque<std::size_t> queue;
    value[anchor_idx] = 0.0;
    visited[anchor_idx] = true;
    queue.push_back(anchor_idx);
    const int deltas[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        for (const auto& d : deltas) {
            const int ia = grid[k].ia + d[0];
            const int ib = grid[k].ib + d[1];
            if (ia < 0 || ia >= n_a || ib < 0 || ib >= n_b) continue;
            const int j = slot[static_cast<std::size_t>(ib) * n_a + ia];
            if (j < 0 || visited[static_cast<std::size_t>(j)]) continue;
            const std::size_t jj = static_cast<std::size_t>(j);
            double step;
            if (d[1] == 0) {
                step = 0.5 * (p_a[k] + p_a[jj]) * (d[0] * da);
            } else {
                step = 0.5 * (p_b[k] + p_b[jj]) * (d[1] * db);
            }
            value[jj] = value[k] + step;
            visited[jj] = true;
            queue.push_back(jj);
        }
    }

    for (std::size_t k = 0; k < grid.size(); ++k) {
        field.values[static_cast<std::size_t>(grid[k].ib) * n_a + grid[k].ia] = value[k];
    }

    // discrete curl defect: circulation of (P_a, P_b) around complete cells
    double loop = 0.0;
    for (int ib = 0; ib + 1 < n_b; ++ib) {
        for (int ia = 0; ia + 1 < n_a; ++ia) {
            const int k00 = slot[static_cast<std::size_t>(ib) * n_a + ia];
            const int k10 = slot[static_cast<std::size_t>(ib) * n_a + ia + 1];
            const int k01 = slot[static_cast<std::size_t>(ib + 1) * n_a + ia];
            const int k11 = slot[static_cast<std::size_t>(ib + 1) * n_a + ia + 1];
            if (k00 < 0 || k10 < 0 || k01 < 0 || k11 < 0) continue;
            const double circ =
                0.5 * (p_a[k00] + p_a[k10]) * da + 0.5 * (p_b[k10] + p_b[k11]) * db -
                0.5 * (p_a[k01] + p_a[k11]) * da - 0.5 * (p_b[k00] + p_b[k01]) * db;
            loop = std::max(loop, std::abs(circ));
        }
    }
    field.loop_defect = loop;
    return field;
}

VerifyOutcome run_verification(const Flow& flow, std::span<const double> times,
                               const VerifyTolerances& tol) {
    VerifyOutcome out;
    ResidualReport& r = out.report;
    r.times.assign(times.begin(), times.end());

    r.mass_conservation = mass_conservation_residual(flow, times);
    GoverningResidual gov = governing_residual(flow, times);
    r.governing_re = gov.re_sup;
    r.governing_im_drift = gov.im_drift;
    r.governing_scale = gov.scale;

    ConvergenceStudy study = euler_convergence(flow, times, tol.euler_h);
    r.euler_steps = study.steps;
    r.euler_residuals = study.residuals;
    r.euler_orders = study.orders;
    r.euler_fd = study.residuals.empty() ? 0.0 : study.residuals.back();

    double loop = 0.0;
    for (double t : times) {
        loop = std::max(loop, pressure_field(flow, t, flow.domain().grid().front().z)
                                  .loop_defect);
    }
    r.pressure_loop = loop;

    if (r.mass_conservation > tol.mass) out.failures.push_back("mass_conservation");
    if (r.governing_re > tol.governing * r.governing_scale)
        out.failures.push_back("governing_re");
    if (r.governing_im_drift > tol.governing * r.governing_scale)
        out.failures.push_back("governing_im_drift");

    // FD route: each refinement must show the order, unless the finer
    // residual already sits at the roundoff floor eps*|w|/h^3 (or below the
    // absolute floor, as for exact steady flows).
    double position_scale = 0.0;
    for (double t : times) {
        for (const GridPoint& p : flow.domain().grid()) {
            position_scale = std::max(position_scale, std::abs(flow.labelling(t, p.z)));
        }
    }
    auto fd_floor = [&](double h) {
        return std::max(tol.residual_floor,
                        tol.fd_noise_coeff * 2.220446049250313e-16 * position_scale /
                            (h * h * h));
    };
    bool orders_ok = !r.euler_orders.empty();
    for (std::size_t i = 0; i < r.euler_orders.size(); ++i) {
        const bool level_ok = r.euler_orders[i] >= tol.euler_order_min ||
                              r.euler_residuals[i + 1] <= fd_floor(r.euler_steps[i + 1]);
        orders_ok = orders_ok && level_ok;
    }
    if (!orders_ok) out.failures.push_back("euler_fd_order");
    return out;
}

}  // namespace lagflow
