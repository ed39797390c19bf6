#pragma once

#include <variant>
#include <vector>

#include "lagflow/expr.hpp"

namespace lagflow {

// A grid node: lattice indices plus the label z = a + i b.
struct GridPoint {
    int ia = 0;
    int ib = 0;
    Complex z;
};

// Simply connected label domain sampled by a regular lattice. Disk domains
// keep the lattice of their bounding box masked to the disk, so lattice
// indices remain meaningful for neighbor queries.
class Domain {
public:
    struct Rectangle {
        double a_min, a_max, b_min, b_max;
    };
    struct Disk {
        Complex center;
        double radius;
    };

    static Domain rectangle(double a_min, double a_max, double b_min, double b_max,
                            int n_a, int n_b);
    static Domain disk(Complex center, double radius, int n_a, int n_b);

    const std::vector<GridPoint>& grid() const { return grid_; }
    int n_a() const { return n_a_; }
    int n_b() const { return n_b_; }
    double cell_a() const { return cell_a_; }
    double cell_b() const { return cell_b_; }

    bool contains(Complex z) const;
    Complex label_at(int ia, int ib) const;
    bool is_rectangle() const { return std::holds_alternative<Rectangle>(shape_); }
    const Rectangle* rectangle_shape() const { return std::get_if<Rectangle>(&shape_); }
    const Disk* disk_shape() const { return std::get_if<Disk>(&shape_); }

    // Same shape, different lattice resolution.
    Domain with_grid(int n_a, int n_b) const;

    // Mirror image across the real axis (labels b -> -b).
    Domain conjugated() const;

private:
    Domain(std::variant<Rectangle, Disk> shape, int n_a, int n_b);

    std::variant<Rectangle, Disk> shape_;
    int n_a_, n_b_;
    double cell_a_, cell_b_;
    std::vector<GridPoint> grid_;
};

}  // namespace lagflow
