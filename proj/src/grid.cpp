#include "todalab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace todalab {

Grid2D Grid2D::rectangle(double xmin, double xmax, double ymin, double ymax, double h,
                         double offset_x, double offset_y) {
    if (!(h > 0.0)) throw std::invalid_argument("Grid2D: h must be positive");
    if (!(xmax > xmin && ymax > ymin)) throw std::invalid_argument("Grid2D: empty rectangle");
    Grid2D g;
    g.xmin_ = xmin;
    g.xmax_ = xmax;
    g.ymin_ = ymin;
    g.ymax_ = ymax;
    g.h_ = h;
    g.x0_ = xmin + offset_x * h;
    g.y0_ = ymin + offset_y * h;
    g.nx_ = static_cast<int>(std::floor((xmax - g.x0_) / h - 1e-12)) + 1;
    g.ny_ = static_cast<int>(std::floor((ymax - g.y0_) / h - 1e-12)) + 1;
    g.classify();
    return g;
}

Grid2D Grid2D::disc(double radius, double h, double offset_x, double offset_y) {
    if (!(radius > 0.0)) throw std::invalid_argument("Grid2D: disc radius must be positive");
    Grid2D g = rectangle(-radius, radius, -radius, radius, h, offset_x, offset_y);
    g.is_disc_ = true;
    g.disc_radius_ = radius;
    g.classify();
    return g;
}

Grid2D Grid2D::from_origin(double xmin, double xmax, double ymin, double ymax, double h,
                           double x0, double y0, bool is_disc, double disc_radius) {
    if (!(h > 0.0)) throw std::invalid_argument("Grid2D: h must be positive");
    Grid2D g;
    g.xmin_ = xmin;
    g.xmax_ = xmax;
    g.ymin_ = ymin;
    g.ymax_ = ymax;
    g.h_ = h;
    g.x0_ = x0;
    g.y0_ = y0;
    g.is_disc_ = is_disc;
    g.disc_radius_ = disc_radius;
    g.nx_ = static_cast<int>(std::floor((xmax - x0) / h - 1e-12)) + 1;
    g.ny_ = static_cast<int>(std::floor((ymax - y0) / h - 1e-12)) + 1;
    g.classify();
    return g;
}

Grid2D Grid2D::refined() const {
    Grid2D g = *this;
    g.h_ = h_ / 2.0;
    g.nx_ = static_cast<int>(std::floor((xmax_ - x0_) / g.h_ - 1e-12)) + 1;
    g.ny_ = static_cast<int>(std::floor((ymax_ - y0_) / g.h_ - 1e-12)) + 1;
    g.classify();
    return g;
}

void Grid2D::classify() {
    kinds_.assign(static_cast<std::size_t>(nx_) * ny_, NodeKind::Outside);
    auto in_set = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return false;
        if (!is_disc_) return true;
        double xv = x(i), yv = y(j);
        return xv * xv + yv * yv < disc_radius_ * disc_radius_;
    };
    interior_count_ = 0;
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            if (!in_set(i, j)) continue;
            bool interior = in_set(i - 1, j) && in_set(i + 1, j) && in_set(i, j - 1) && in_set(i, j + 1);
            kinds_[index(i, j)] = interior ? NodeKind::Interior : NodeKind::Boundary;
            if (interior) ++interior_count_;
        }
    }
    if (interior_count_ < 16 * 16)
        throw std::invalid_argument("Grid2D: fewer than 16x16 interior nodes");
}

std::vector<std::uint8_t> Grid2D::eroded_interior(int margin_cells) const {
    if (margin_cells < 0) throw std::invalid_argument("eroded_interior: negative margin");
    std::vector<std::uint8_t> mask(kinds_.size(), 0);
    for (std::size_t k = 0; k < kinds_.size(); ++k) mask[k] = kinds_[k] == NodeKind::Interior;
    std::vector<std::uint8_t> next(mask.size());
    for (int pass = 0; pass < margin_cells; ++pass) {
        for (int j = 0; j < ny_; ++j) {
            for (int i = 0; i < nx_; ++i) {
                int k = index(i, j);
                bool keep = mask[k] && i > 0 && i + 1 < nx_ && j > 0 && j + 1 < ny_ &&
                            mask[index(i - 1, j)] && mask[index(i + 1, j)] &&
                            mask[index(i, j - 1)] && mask[index(i, j + 1)];
                next[k] = keep;
            }
        }
        mask.swap(next);
    }
    return mask;
}

} // namespace todalab
