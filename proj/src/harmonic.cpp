#include "lagflow/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "lagflow/parallel.hpp"

namespace lagflow {

namespace {
constexpr double kDegeneracyTol = 1e-12;
}

HarmonicMap::HarmonicMap(Expr F, Expr G, Domain domain, Bindings params)
    : F_(std::move(F)),
      G_(std::move(G)),
      f_(F_.derivative("z")),
      g_(G_.derivative("z")),
      domain_(std::move(domain)),
      params_(std::move(params)) {}

Complex HarmonicMap::eval_F(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return F_.eval(b);
}

Complex HarmonicMap::eval_G(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return G_.eval(b);
}

Complex HarmonicMap::eval_f(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return f_.eval(b);
}

Complex HarmonicMap::eval_g(Complex z) const {
    Bindings b = params_;
    b.set("z", z);
    return g_.eval(b);
}

Complex HarmonicMap::image(Complex z) const { return eval_F(z) + std::conj(eval_G(z)); }

double HarmonicMap::jacobian(Complex z) const {
    return std::norm(eval_f(z)) - std::norm(eval_g(z));
}

Complex HarmonicMap::dilatation(Complex z) const {
    Complex fp = eval_f(z);
    if (fp == Complex(0.0, 0.0)) {
        throw EvalError("dilatation undefined: F'(z) = 0");
    }
    return eval_g(z) / fp;
}

Orientation orientation(const HarmonicMap& m) {
    bool any_positive = false;
    bool any_negative = false;
    for (const GridPoint& p : m.domain().grid()) {
        double J = m.jacobian(p.z);
        if (std::abs(J) <= kDegeneracyTol) return Orientation::Degenerate;
        (J > 0.0 ? any_positive : any_negative) = true;
        if (any_positive && any_negative) return Orientation::Degenerate;
    }
    return any_positive ? Orientation::SensePreserving : Orientation::SenseReversing;
}

HarmonicMap conjugate_relabel(const HarmonicMap& m) {
    Orientation o = orientation(m);
    if (o != Orientation::SenseReversing) {
        throw ValidationError(
            "NotSenseReversing",
            o == Orientation::SensePreserving
                ? "conjugate_relabel called on a sense-preserving map"
                : "conjugate_relabel called on a degenerate map");
    }
    // z -> F(conj z) + conj(G(conj z)) re-splits into analytic part
    // conj_coeffs(G) and co-analytic part conj_coeffs(F) on the mirrored
    // domain.
    return HarmonicMap(m.G().conjugate_constants(), m.F().conjugate_constants(),
                       m.domain().conjugated(), m.params());
}

bool dilatation_is_constant(const HarmonicMap& m, double tol) {
    const auto& grid = m.domain().grid();
    if (grid.empty()) throw ValidationError("InvalidDomain", "empty grid");
    Complex w0 = m.dilatation(grid.front().z);
    for (const GridPoint& p : grid) {
        if (std::abs(m.dilatation(p.z) - w0) > tol) return false;
    }
    return true;
}

namespace {

// Spatial hash over image points, cell size = search radius.
struct ImageHash {
    double cell;
    std::unordered_map<std::int64_t, std::vector<int>> buckets;

    std::int64_t key(double x, double y) const {
        auto qx = static_cast<std::int64_t>(std::floor(x / cell));
        auto qy = static_cast<std::int64_t>(std::floor(y / cell));
        return qx * 73856093ll ^ qy * 19349663ll;
    }
    void insert(int idx, Complex w) { buckets[key(w.real(), w.imag())].push_back(idx); }
};

// Separating-axis overlap test for image quadrilaterals of lattice cells.
// Images of disjoint cells of a univalent map never overlap, no matter how
// strongly the map compresses, which makes this the collision signal that
// survives boundary-collapsing maps (the harmonic Koebe arc at the slit tip).
struct CellQuad {
    Complex p[4];
    int ia, ib;
    double x0, x1, y0, y1;
};

bool axis_separates(const CellQuad& A, const CellQuad& B, Complex edge) {
    const double nx = -edge.imag(), ny = edge.real();
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const Complex& q : A.p) {
        const double d = q.real() * nx + q.imag() * ny;
        amin = std::min(amin, d);
        amax = std::max(amax, d);
    }
    for (const Complex& q : B.p) {
        const double d = q.real() * nx + q.imag() * ny;
        bmin = std::min(bmin, d);
        bmax = std::max(bmax, d);
    }
    return amax < bmin || bmax < amin;
}

bool quads_overlap(const CellQuad& A, const CellQuad& B) {
    for (int e = 0; e < 4; ++e) {
        if (axis_separates(A, B, A.p[(e + 1) % 4] - A.p[e])) return false;
        if (axis_separates(A, B, B.p[(e + 1) % 4] - B.p[e])) return false;
    }
    return true;
}

}  // namespace

UnivalenceReport univalence_check(const HarmonicMap& m, double separation_tol) {
    const Domain& dom = m.domain();
    if (dom.n_a() < 32 || dom.n_b() < 32) {
        throw ValidationError("GridTooCoarse",
                              "univalence_check requires a grid of at least 32x32");
    }
    const auto& grid = dom.grid();
    const int n = static_cast<int>(grid.size());

    std::vector<Complex> images(n);
    std::vector<double> min_j(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        images[k] = m.image(grid[k].z);
        min_j[k] = std::abs(m.jacobian(grid[k].z));
    });

    UnivalenceReport report;
    double jmin = std::numeric_limits<double>::infinity();
    for (double v : min_j) jmin = std::min(jmin, v);
    report.locally_injective = jmin > kDegeneracyTol;

    // Median nearest-neighbor image distance: per node, the closest image
    // among its 4 lattice neighbors.
    std::unordered_map<std::int64_t, int> by_index;
    by_index.reserve(grid.size() * 2);
    auto lattice_key = [](int ia, int ib) {
        return (static_cast<std::int64_t>(ia) << 32) ^ static_cast<std::int64_t>(ib & 0x7fffffff);
    };
    for (int k = 0; k < n; ++k) by_index[lattice_key(grid[k].ia, grid[k].ib)] = k;

    std::vector<double> neighbor_dist;
    neighbor_dist.reserve(grid.size());
    const int deltas[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int k = 0; k < n; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& d : deltas) {
            auto it = by_index.find(lattice_key(grid[k].ia + d[0], grid[k].ib + d[1]));
            if (it != by_index.end()) best = std::min(best, std::abs(images[k] - images[it->second]));
        }
        if (std::isfinite(best)) neighbor_dist.push_back(best);
    }
    if (neighbor_dist.empty()) {
        throw ValidationError("InvalidDomain", "grid has no adjacent label pairs");
    }
    std::nth_element(neighbor_dist.begin(), neighbor_dist.begin() + neighbor_dist.size() / 2,
                     neighbor_dist.end());
    const double median = neighbor_dist[neighbor_dist.size() / 2];
    report.median_neighbor_distance = median;

    // Search radius: wide enough to measure ratios up to max(1, separation_tol).
    const double radius = std::max(1.0, separation_tol) * median;
    ImageHash hash{radius > 0.0 ? radius : 1.0, {}};
    for (int k = 0; k < n; ++k) hash.insert(k, images[k]);

    double best_dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const Complex w = images[k];
        const auto cx = static_cast<std::int64_t>(std::floor(w.real() / hash.cell));
        const auto cy = static_cast<std::int64_t>(std::floor(w.imag() / hash.cell));
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = hash.buckets.find((cx + dx) * 73856093ll ^ (cy + dy) * 19349663ll);
                if (it == hash.buckets.end()) continue;
                for (int j : it->second) {
                    if (j <= k) continue;
                    // far in label space: more than 2 grid cells apart
                    if (std::abs(grid[j].ia - grid[k].ia) <= 2 &&
                        std::abs(grid[j].ib - grid[k].ib) <= 2)
                        continue;
                    double dist = std::abs(images[j] - w);
                    if (dist <= radius && dist < best_dist) best_dist = dist;
                }
            }
        }
    }
    report.min_image_separation_ratio =
        median > 0.0 ? std::min(best_dist, radius) / median : 0.0;

    // Collision detection: overlap between image quads of lattice cells more
    // than two cells apart. Iterated in lexicographic cell order; the first
    // overlapping pair is reported.
    std::vector<CellQuad> quads;
    quads.reserve(grid.size());
    for (int ib = 0; ib + 1 < dom.n_b(); ++ib) {
        for (int ia = 0; ia + 1 < dom.n_a(); ++ia) {
            auto k00 = by_index.find(lattice_key(ia, ib));
            auto k10 = by_index.find(lattice_key(ia + 1, ib));
            auto k01 = by_index.find(lattice_key(ia, ib + 1));
            auto k11 = by_index.find(lattice_key(ia + 1, ib + 1));
            if (k00 == by_index.end() || k10 == by_index.end() || k01 == by_index.end() ||
                k11 == by_index.end())
                continue;
            CellQuad q{{images[k00->second], images[k10->second], images[k11->second],
                        images[k01->second]},
                       ia,
                       ib,
                       0, 0, 0, 0};
            q.x0 = q.x1 = q.p[0].real();
            q.y0 = q.y1 = q.p[0].imag();
            for (int c = 1; c < 4; ++c) {
                q.x0 = std::min(q.x0, q.p[c].real());
                q.x1 = std::max(q.x1, q.p[c].real());
                q.y0 = std::min(q.y0, q.p[c].imag());
                q.y1 = std::max(q.y1, q.p[c].imag());
            }
            quads.push_back(q);
        }
    }
    for (std::size_t a = 0; a < quads.size() && !report.collision; ++a) {
        for (std::size_t b = a + 1; b < quads.size(); ++b) {
            if (std::abs(quads[a].ia - quads[b].ia) <= 2 &&
                std::abs(quads[a].ib - quads[b].ib) <= 2)
                continue;
            if (quads[a].x1 < quads[b].x0 || quads[b].x1 < quads[a].x0 ||
                quads[a].y1 < quads[b].y0 || quads[b].y1 < quads[a].y0)
                continue;
            if (quads_overlap(quads[a], quads[b])) {
                const int ka = by_index.at(lattice_key(quads[a].ia, quads[a].ib));
                const int kb = by_index.at(lattice_key(quads[b].ia, quads[b].ib));
                report.collision = std::make_pair(grid[ka], grid[kb]);
                break;
            }
        }
    }
    return report;
}

}  // namespace lagflow
