#pragma once

#include <cstdint>
#include <vector>

namespace todalab {

enum class NodeKind : std::uint8_t { Outside = 0, Boundary = 1, Interior = 2 };

// Rectangular lattice over a rectangle in the plane, with an optional disc
// mask |z| < R. Node (i,j) sits at (x0 + i h, y0 + j h); the origin carries a
// sub-cell offset so polynomial zeros stay off-lattice. Boundary nodes are
// in-domain nodes with at least one 4-neighbor outside; refinements keep the
// origin fixed so grids nest.
class Grid2D {
public:
    Grid2D() = default; // empty grid, assign before use

    static Grid2D rectangle(double xmin, double xmax, double ymin, double ymax, double h,
                            double offset_x = 1.0 / 3.0, double offset_y = 1.0 / 3.0);
    static Grid2D disc(double radius, double h,
                       double offset_x = 1.0 / 3.0, double offset_y = 1.0 / 3.0);
    // Rebuild from persisted geometry (origin given directly).
    static Grid2D from_origin(double xmin, double xmax, double ymin, double ymax, double h,
                              double x0, double y0, bool is_disc, double disc_radius);

    // Same origin, spacing halved; node sets nest.
    Grid2D refined() const;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double x(int i) const { return x0_ + h_ * i; }
    double y(int j) const { return y0_ + h_ * j; }
    bool is_disc() const { return is_disc_; }
    double disc_radius() const { return disc_radius_; }
    double xmin() const { return xmin_; }
    double xmax() const { return xmax_; }
    double ymin() const { return ymin_; }
    double ymax() const { return ymax_; }

    int index(int i, int j) const { return j * nx_ + i; }
    NodeKind kind(int i, int j) const { return kinds_[index(i, j)]; }
    bool in_domain(int i, int j) const { return kinds_[index(i, j)] != NodeKind::Outside; }
    bool interior(int i, int j) const { return kinds_[index(i, j)] == NodeKind::Interior; }

    int node_count() const { return nx_ * ny_; }
    int interior_count() const { return interior_count_; }

    // Mask (1 = kept) of interior nodes at least margin_cells erosion steps
    // from any non-interior node; the verification test region.
    std::vector<std::uint8_t> eroded_interior(int margin_cells) const;

private:
    void classify();

    double xmin_ = 0, xmax_ = 0, ymin_ = 0, ymax_ = 0;
    double h_ = 0, x0_ = 0, y0_ = 0;
    int nx_ = 0, ny_ = 0;
    bool is_disc_ = false;
    double disc_radius_ = 0.0;
    std::vector<NodeKind> kinds_;
    int interior_count_ = 0;
};

} // namespace todalab
