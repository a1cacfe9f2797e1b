#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "todalab/spectrum.hpp"
#include "todalab/toda.hpp"

namespace todalab::toda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool zero_free_on_domain(const RDifferential& q, const Grid2D& g) {
    for (const auto& zero : q.zeros()) {
        double x = zero.position.real(), y = zero.position.imag();
        if (g.is_disc()) {
            if (std::abs(zero.position) <= g.disc_radius()) return false;
        } else {
            if (x >= g.xmin() && x <= g.xmax() && y >= g.ymin() && y <= g.ymax()) return false;
        }
    }
    return true;
}

} // namespace

SystemWeight SystemWeight::from_differential(const RDifferential& q) {
    SystemWeight w;
    w.kind_ = Kind::Differential;
    w.rank_ = q.rank();
    w.q_ = q;
    return w;
}

SystemWeight SystemWeight::minus_infinity(int rank) {
    require(rank >= 2, "SystemWeight: rank >= 2 required");
    SystemWeight w;
    w.kind_ = Kind::MinusInfinity;
    w.rank_ = rank;
    return w;
}

SystemWeight SystemWeight::from_field(int rank, std::vector<double> phi_values,
                                      std::optional<RDifferential> source,
                                      double mollify_epsilon) {
    require(rank >= 2, "SystemWeight: rank >= 2 required");
    SystemWeight w;
    w.kind_ = Kind::Field;
    w.rank_ = rank;
    w.phi_ = std::move(phi_values);
    w.q_ = std::move(source);
    w.mollify_epsilon_ = mollify_epsilon;
    return w;
}

double SystemWeight::log_w(const Grid2D& grid, int i, int j) const {
    switch (kind_) {
    case Kind::Differential:
        return q_->log_abs_sq({grid.x(i), grid.y(j)});
    case Kind::MinusInfinity:
        return -kInf;
    case Kind::Field:
        if (phi_.size() != static_cast<std::size_t>(grid.node_count()))
            throw std::invalid_argument("SystemWeight: field sampled on a different grid");
        return rank_ * phi_[grid.index(i, j)];
    }
    return -kInf;
}

std::vector<std::vector<double>> residual(const GridSolution& sol) {
    const Grid2D& g = sol.grid;
    int m = sol.rank - 1;
    double h2 = g.h() * g.h();

    // Volume densities V_j = e^{u_j} and V_0 = W e^{-sum u} at in-domain nodes.
    std::vector<std::vector<double>> V(m + 1,
                                       std::vector<double>(g.node_count(), kNaN));
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (!g.in_domain(i, j)) continue;
            int k = g.index(i, j);
            double sum = 0.0;
            for (int f = 0; f < m; ++f) {
                V[f + 1][k] = std::exp(sol.u[f][k]);
                sum += sol.u[f][k];
            }
            V[0][k] = std::exp(sol.weight.log_w(g, i, j) - sum);
        }
    }

    std::vector<std::vector<double>> R(m, std::vector<double>(g.node_count(), kNaN));
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (!g.interior(i, j)) continue;
            int k = g.index(i, j);
            int kw = g.index(i - 1, j), ke = g.index(i + 1, j);
            int ks = g.index(i, j - 1), kn = g.index(i, j + 1);
            for (int f = 0; f < m; ++f) {
                double lap = (sol.u[f][kw] + sol.u[f][ke] + sol.u[f][ks] + sol.u[f][kn] -
                              4.0 * sol.u[f][k]) / h2;
                double below = (f == 0) ? V[0][k] : V[f][k];
                double above = (f == m - 1) ? V[0][k] : V[f + 2][k];
                R[f][k] = lap - 8.0 * V[f + 1][k] + 4.0 * below + 4.0 * above;
            }
        }
    }
    return R;
}

double residual_sup(const GridSolution& sol) {
    auto R = residual(sol);
    double sup = 0.0;
    for (const auto& field : R) {
        for (double v : field) {
            if (std::isfinite(v)) sup = std::max(sup, std::abs(v));
        }
    }
    return sup;
}

double residual_sup(const GridSolution& sol, const std::vector<std::uint8_t>& region) {
    auto R = residual(sol);
    double sup = 0.0;
    for (const auto& field : R) {
        for (std::size_t k = 0; k < field.size(); ++k) {
            if (region[k] && std::isfinite(field[k])) sup = std::max(sup, std::abs(field[k]));
        }
    }
    return sup;
}

GridSolution exact_extremal_solution(ExtremalKind kind, const Grid2D& grid, int rank,
                                     const SystemWeight& weight) {
    require(rank >= 2, "exact_extremal_solution: rank >= 2 required");
    require(weight.rank() == rank, "exact_extremal_solution: weight rank mismatch");
    GridSolution sol;
    sol.rank = rank;
    sol.grid = grid;
    sol.weight = weight;
    int m = rank - 1;
    sol.u.assign(m, std::vector<double>(grid.node_count(), kNaN));

    if (kind == ExtremalKind::Flat) {
        require(weight.kind() == SystemWeight::Kind::Differential,
                "exact_extremal_solution: flat kind needs a polynomial differential");
        require(zero_free_on_domain(*weight.differential(), grid),
                "exact_extremal_solution: differential vanishes on the domain");
        sol.boundary = BoundaryKind::FlatLike;
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i < grid.nx(); ++i) {
                if (!grid.in_domain(i, j)) continue;
                double phi = weight.log_w(grid, i, j) / rank;
                for (int f = 0; f < m; ++f) sol.u[f][grid.index(i, j)] = phi;
            }
        }
    } else {
        require(weight.is_minus_infinity(),
                "exact_extremal_solution: hyperbolic kind needs the minus-infinity weight");
        require(grid.is_disc() && grid.disc_radius() < 1.0,
                "exact_extremal_solution: hyperbolic kind needs a disc of radius < 1");
        sol.boundary = BoundaryKind::HyperbolicLike;
        auto lambda = spectrum::lambda_from_cartan(rank).values;
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i < grid.nx(); ++i) {
                if (!grid.in_domain(i, j)) continue;
                double rho2 = grid.x(i) * grid.x(i) + grid.y(j) * grid.y(j);
                double base = -2.0 * std::log1p(-rho2);
                for (int f = 0; f < m; ++f)
                    sol.u[f][grid.index(i, j)] = std::log(lambda[f]) + base;
            }
        }
    }

    sol.stats.converged = true;
    sol.stats.final_residual = residual_sup(sol);
    sol.stats.reality_violation = reality_violation(sol);
    return sol;
}

double reality_violation(const GridSolution& sol) {
    int m = sol.rank - 1;
    double worst = 0.0;
    for (int f = 0; f < m; ++f) {
        int g = m - 1 - f;
        if (g <= f) break;
        for (std::size_t k = 0; k < sol.u[f].size(); ++k) {
            double a = sol.u[f][k], b = sol.u[g][k];
            if (std::isfinite(a) && std::isfinite(b)) worst = std::max(worst, std::abs(a - b));
        }
    }
    return worst;
}

MetricFields metric_fields(const GridSolution& sol) {
    const Grid2D& g = sol.grid;
    MetricFields m;
    m.rank = sol.rank;
    m.n = sol.rank / 2;
    m.delta = sol.rank - 2 * m.n;
    m.grid = g;
    m.lambda = spectrum::lambda_from_cartan(sol.rank).values;
    m.u = sol.u;
    int fields = sol.rank - 1;
    m.log_w.assign(g.node_count(), kNaN);
    m.log_v0.assign(g.node_count(), kNaN);
    m.vol.assign(sol.rank, std::vector<double>(g.node_count(), kNaN));

    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (!g.in_domain(i, j)) continue;
            int k = g.index(i, j);
            double lw = sol.weight.log_w(g, i, j);
            m.log_w[k] = lw;
            double sum = 0.0;
            for (int f = 0; f < fields; ++f) {
                m.vol[f + 1][k] = std::exp(sol.u[f][k]);
                sum += sol.u[f][k];
            }
            m.log_v0[k] = lw - sum;
            m.vol[0][k] = std::exp(m.log_v0[k]);

            // Product identity: vol_0 * prod vol_k = W nodewise.
            if (std::isfinite(lw)) {
                double prod = m.vol[0][k];
                for (int f = 0; f < fields; ++f) prod *= m.vol[f + 1][k];
                double w = std::exp(lw);
                if (std::abs(prod - w) > 1e-10 * std::max(w, 1e-300))
                    throw std::logic_error("metric_fields: product identity violated");
            }
        }
    }

    if (sol.weight.is_minus_infinity()) {
        m.from_hyperbolic_extremal = true;
    } else if (sol.weight.kind() == SystemWeight::Kind::Differential &&
               zero_free_on_domain(*sol.weight.differential(), g) &&
               sol.boundary == BoundaryKind::FlatLike) {
        m.from_flat_extremal = true;
    }
    return m;
}

std::vector<double> down_ratio_field(const MetricFields& m, int j) {
    require(j >= 1 && j <= m.n, "down_ratio_field: j must lie in 1..floor(r/2)");
    const Grid2D& g = m.grid;
    std::vector<double> out(g.node_count(), kNaN);
    for (int k = 0; k < g.node_count(); ++k) {
        if (std::isnan(m.vol[j][k])) continue;
        if (j == 1) {
            // ratio of the degenerate density to vol_1, exact in log space
            out[k] = std::exp(m.log_v0[k] - m.u[0][k]);
        } else {
            out[k] = std::exp(m.u[j - 2][k] - m.u[j - 1][k]);
        }
    }
    return out;
}

std::vector<double> up_ratio_field(const MetricFields& m, int j) {
    require(j >= 1 && j <= m.n - 1, "up_ratio_field: j must lie in 1..floor(r/2)-1");
    const Grid2D& g = m.grid;
    std::vector<double> out(g.node_count(), kNaN);
    for (int k = 0; k < g.node_count(); ++k) {
        if (std::isnan(m.vol[j][k])) continue;
        out[k] = std::exp(m.u[j][k] - m.u[j - 1][k]);
    }
    return out;
}

} // namespace todalab::toda
