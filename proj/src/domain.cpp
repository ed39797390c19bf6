#include "lagflow/domain.hpp"

#include <cmath>

namespace lagflow {

Domain Domain::rectangle(double a_min, double a_max, double b_min, double b_max,
                         int n_a, int n_b) {
    if (!(a_max > a_min) || !(b_max > b_min)) {
        throw ValidationError("InvalidDomain", "rectangle extents must be positive");
    }
    return Domain(Rectangle{a_min, a_max, b_min, b_max}, n_a, n_b);
}

Domain Domain::disk(Complex center, double radius, int n_a, int n_b) {
    if (!(radius > 0.0)) {
        throw ValidationError("InvalidDomain", "disk radius must be positive");
    }
    return Domain(Disk{center, radius}, n_a, n_b);
}

Domain::Domain(std::variant<Rectangle, Disk> shape, int n_a, int n_b)
    : shape_(shape), n_a_(n_a), n_b_(n_b) {
    if (n_a < 2 || n_b < 2) {
        throw ValidationError("InvalidDomain", "grid counts must be at least 2 per axis");
    }
    double a0, a1, b0, b1;
    if (const auto* r = std::get_if<Rectangle>(&shape_)) {
        a0 = r->a_min;
        a1 = r->a_max;
        b0 = r->b_min;
        b1 = r->b_max;
    } else {
        const auto& d = std::get<Disk>(shape_);
        a0 = d.center.real() - d.radius;
        a1 = d.center.real() + d.radius;
        b0 = d.center.imag() - d.radius;
        b1 = d.center.imag() + d.radius;
    }
    cell_a_ = (a1 - a0) / (n_a_ - 1);
    cell_b_ = (b1 - b0) / (n_b_ - 1);
    grid_.reserve(static_cast<size_t>(n_a_) * n_b_);
    for (int ib = 0; ib < n_b_; ++ib) {
        for (int ia = 0; ia < n_a_; ++ia) {
            Complex z(a0 + ia * cell_a_, b0 + ib * cell_b_);
            if (contains(z)) grid_.push_back(GridPoint{ia, ib, z});
        }
    }
}

bool Domain::contains(Complex z) const {
    if (const auto* r = std::get_if<Rectangle>(&shape_)) {
        const double eps_a = 1e-12 * (r->a_max - r->a_min);
        const double eps_b = 1e-12 * (r->b_max - r->b_min);
        return z.real() >= r->a_min - eps_a && z.real() <= r->a_max + eps_a &&
               z.imag() >= r->b_min - eps_b && z.imag() <= r->b_max + eps_b;
    }
    const auto& d = std::get<Disk>(shape_);
    return std::abs(z - d.center) <= d.radius * (1.0 + 1e-12);
}

Complex Domain::label_at(int ia, int ib) const {
    double a0, b0;
    if (const auto* r = std::get_if<Rectangle>(&shape_)) {
        a0 = r->a_min;
        b0 = r->b_min;
    } else {
        const auto& d = std::get<Disk>(shape_);
        a0 = d.center.real() - d.radius;
        b0 = d.center.imag() - d.radius;
    }
    return Complex(a0 + ia * cell_a_, b0 + ib * cell_b_);
}

Domain Domain::with_grid(int n_a, int n_b) const { return Domain(shape_, n_a, n_b); }

Domain Domain::conjugated() const {
    if (const auto* r = std::get_if<Rectangle>(&shape_)) {
        return Domain(Rectangle{r->a_min, r->a_max, -r->b_max, -r->b_min}, n_a_, n_b_);
    }
    const auto& d = std::get<Disk>(shape_);
    return Domain(Disk{std::conj(d.center), d.radius}, n_a_, n_b_);
}

}  // namespace lagflow
