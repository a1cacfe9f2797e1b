#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "todalab/spectrum.hpp"
#include "todalab/toda.hpp"

namespace todalab::toda {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

struct Workspace {
    const Grid2D& g;
    int m;                 // fields
    double h2;
    std::vector<int> iid;  // node index -> interior unknown block, or -1
    std::vector<std::pair<int, int>> inodes;
    std::vector<double> logw; // nodewise log W (possibly -inf)
};

Workspace make_workspace(const Grid2D& g, int rank, const SystemWeight& weight) {
    Workspace ws{g, rank - 1, g.h() * g.h(), {}, {}, {}};
    ws.iid.assign(g.node_count(), -1);
    ws.logw.assign(g.node_count(), -std::numeric_limits<double>::infinity());
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.interior(i, j)) {
                ws.iid[g.index(i, j)] = static_cast<int>(ws.inodes.size());
                ws.inodes.emplace_back(i, j);
            }
            if (g.in_domain(i, j)) ws.logw[g.index(i, j)] = weight.log_w(g, i, j);
        }
    }
    return ws;
}

// Residual over interior unknowns, flattened node-major; returns sup norm.
double eval_residual(const Workspace& ws, const std::vector<std::vector<double>>& u,
                     double logw_shift, Eigen::VectorXd& R) {
    const Grid2D& g = ws.g;
    int m = ws.m;
    double sup = 0.0;
    for (std::size_t p = 0; p < ws.inodes.size(); ++p) {
        auto [i, j] = ws.inodes[p];
        int k = g.index(i, j);
        int kw = g.index(i - 1, j), ke = g.index(i + 1, j);
        int ks = g.index(i, j - 1), kn = g.index(i, j + 1);
        double sum = 0.0;
        for (int f = 0; f < m; ++f) sum += u[f][k];
        double v0 = std::exp(ws.logw[k] + logw_shift - sum);
        for (int f = 0; f < m; ++f) {
            double lap = (u[f][kw] + u[f][ke] + u[f][ks] + u[f][kn] - 4.0 * u[f][k]) / ws.h2;
            double below = (f == 0) ? v0 : std::exp(u[f - 1][k]);
            double above = (f == m - 1) ? v0 : std::exp(u[f + 1][k]);
            double r = lap - 8.0 * std::exp(u[f][k]) + 4.0 * below + 4.0 * above;
            R(static_cast<Eigen::Index>(p) * m + f) = r;
            sup = std::max(sup, std::abs(r));
        }
    }
    return sup;
}

void assemble_jacobian(const Workspace& ws, const std::vector<std::vector<double>>& u,
                       double logw_shift, SpMat& J) {
    const Grid2D& g = ws.g;
    int m = ws.m;
    std::vector<Triplet> trip;
    trip.reserve(ws.inodes.size() * m * (m + 4));
    std::vector<double> block(static_cast<std::size_t>(m) * m);

    for (std::size_t p = 0; p < ws.inodes.size(); ++p) {
        auto [i, j] = ws.inodes[p];
        int k = g.index(i, j);
        double sum = 0.0;
        for (int f = 0; f < m; ++f) sum += u[f][k];
        double v0 = std::exp(ws.logw[k] + logw_shift - sum);

        std::fill(block.begin(), block.end(), 0.0);
        for (int f = 0; f < m; ++f) {
            block[f * m + f] += -4.0 / ws.h2 - 8.0 * std::exp(u[f][k]);
            if (f >= 1) block[f * m + (f - 1)] += 4.0 * std::exp(u[f - 1][k]);
            if (f + 1 < m) block[f * m + (f + 1)] += 4.0 * std::exp(u[f + 1][k]);
            double c0 = 4.0 * ((f == 0 ? 1 : 0) + (f == m - 1 ? 1 : 0));
            if (c0 != 0.0) {
                for (int kf = 0; kf < m; ++kf) block[f * m + kf] -= c0 * v0;
            }
        }
        int row0 = static_cast<int>(p) * m;
        for (int f = 0; f < m; ++f)
            for (int kf = 0; kf < m; ++kf)
                if (block[f * m + kf] != 0.0)
                    trip.emplace_back(row0 + f, row0 + kf, block[f * m + kf]);

        const int di[4] = {-1, 1, 0, 0};
        const int dj[4] = {0, 0, -1, 1};
        for (int nb = 0; nb < 4; ++nb) {
            int q = ws.iid[g.index(i + di[nb], j + dj[nb])];
            if (q < 0) continue; // boundary neighbor: fixed data
            for (int f = 0; f < m; ++f) trip.emplace_back(row0 + f, q * m + f, 1.0 / ws.h2);
        }
    }
    J.resize(static_cast<Eigen::Index>(ws.inodes.size()) * m,
             static_cast<Eigen::Index>(ws.inodes.size()) * m);
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();
}

// Dirichlet data per field at boundary nodes.
std::vector<std::vector<double>> boundary_data(const SolveRequest& req, const Workspace& ws,
                                               double logw_shift) {
    const Grid2D& g = req.grid;
    int m = req.rank - 1;
    std::vector<std::vector<double>> bd(m, std::vector<double>(g.node_count(), kNaN));

    std::vector<double> log_lambda;
    if (req.boundary == BoundaryKind::HyperbolicLike) {
        require(g.is_disc() && g.disc_radius() < 1.0,
                "solve_dirichlet: hyperbolic-like boundary needs a disc of radius < 1");
        for (double lv : spectrum::lambda_from_cartan(req.rank).values)
            log_lambda.push_back(std::log(lv));
    }
    if (req.boundary == BoundaryKind::FlatLike) {
        require(!req.weight.is_minus_infinity(),
                "solve_dirichlet: flat-like boundary undefined for the minus-infinity weight");
        if (req.weight.differential()) {
            for (const auto& zero : req.weight.differential()->zeros()) {
                for (int j = 0; j < g.ny(); ++j) {
                    for (int i = 0; i < g.nx(); ++i) {
                        if (g.kind(i, j) != NodeKind::Boundary) continue;
                        std::complex<double> z(g.x(i), g.y(j));
                        require(std::abs(z - zero.position) >= 2.0 * g.h(),
                                "solve_dirichlet: a zero of q lies on the boundary ring");
                    }
                }
            }
        }
    }
    if (req.boundary == BoundaryKind::Custom) {
        require(static_cast<int>(req.custom_boundary.size()) == m,
                "solve_dirichlet: custom boundary needs one value per field");
        for (double v : req.custom_boundary)
            require(std::isfinite(v), "solve_dirichlet: custom boundary values must be finite");
    }

    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.kind(i, j) != NodeKind::Boundary) continue;
            int k = g.index(i, j);
            switch (req.boundary) {
            case BoundaryKind::FlatLike: {
                double phi = (ws.logw[k] + logw_shift) / req.rank;
                require(std::isfinite(phi), "solve_dirichlet: boundary data not finite");
                for (int f = 0; f < m; ++f) bd[f][k] = phi;
                break;
            }
            case BoundaryKind::HyperbolicLike: {
                double rho2 = g.x(i) * g.x(i) + g.y(j) * g.y(j);
                double base = -2.0 * std::log1p(-rho2);
                for (int f = 0; f < m; ++f) bd[f][k] = log_lambda[f] + base;
                break;
            }
            case BoundaryKind::Custom:
                for (int f = 0; f < m; ++f) bd[f][k] = req.custom_boundary[f];
                break;
            }
        }
    }
    return bd;
}

// Discrete harmonic extension of the boundary data, one Laplace solve per field.
std::vector<std::vector<double>> harmonic_extension(const Workspace& ws,
                                                    const std::vector<std::vector<double>>& bd) {
    const Grid2D& g = ws.g;
    int m = ws.m;
    auto n = static_cast<Eigen::Index>(ws.inodes.size());

    std::vector<Triplet> trip;
    trip.reserve(5 * ws.inodes.size());
    for (std::size_t p = 0; p < ws.inodes.size(); ++p) {
        auto [i, j] = ws.inodes[p];
        trip.emplace_back(static_cast<int>(p), static_cast<int>(p), -4.0);
        const int di[4] = {-1, 1, 0, 0};
        const int dj[4] = {0, 0, -1, 1};
        for (int nb = 0; nb < 4; ++nb) {
            int q = ws.iid[g.index(i + di[nb], j + dj[nb])];
            if (q >= 0) trip.emplace_back(static_cast<int>(p), q, 1.0);
        }
    }
    SpMat A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_dirichlet: Laplace factorization failed");

    std::vector<std::vector<double>> u(m, std::vector<double>(g.node_count(), kNaN));
    for (int f = 0; f < m; ++f) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        for (std::size_t p = 0; p < ws.inodes.size(); ++p) {
            auto [i, j] = ws.inodes[p];
            const int di[4] = {-1, 1, 0, 0};
            const int dj[4] = {0, 0, -1, 1};
            for (int nb = 0; nb < 4; ++nb) {
                int k = g.index(i + di[nb], j + dj[nb]);
                if (ws.iid[k] < 0) rhs(static_cast<Eigen::Index>(p)) -= bd[f][k];
            }
        }
        Eigen::VectorXd x = lu.solve(rhs);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                int k = g.index(i, j);
                if (g.kind(i, j) == NodeKind::Boundary) u[f][k] = bd[f][k];
                else if (ws.iid[k] >= 0) u[f][k] = x(ws.iid[k]);
            }
    }
    return u;
}

struct StageResult {
    std::vector<std::vector<double>> u;
    SolverStats stats;
};

StageResult newton_stage(const SolveRequest& req, const Workspace& ws, double logw_shift,
                         std::vector<std::vector<double>> u) {
    const int m = ws.m;
    auto n = static_cast<Eigen::Index>(ws.inodes.size()) * m;
    Eigen::VectorXd R(n), Rtrial(n);
    StageResult out;
    out.stats.converged = false;

    double sup = eval_residual(ws, u, logw_shift, R);
    out.stats.residual_history.push_back(sup);

    std::vector<std::vector<double>> trial = u;
    SpMat J;
    int it = 0;
    for (; it < req.solver.max_iterations && sup > req.solver.tol; ++it) {
        assemble_jacobian(ws, u, logw_shift, J);
        Eigen::SparseLU<SpMat> lu(J);
        if (lu.info() != Eigen::Success) {
            out.stats.message = "Jacobian factorization failed";
            break;
        }
        Eigen::VectorXd delta = lu.solve(-R);

        // Armijo backtracking on the residual sup norm.
        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= 1.0 / 4096.0) {
            for (int f = 0; f < m; ++f) trial[f] = u[f];
            for (std::size_t p = 0; p < ws.inodes.size(); ++p) {
                int k = ws.g.index(ws.inodes[p].first, ws.inodes[p].second);
                for (int f = 0; f < m; ++f)
                    trial[f][k] = u[f][k] + alpha * delta(static_cast<Eigen::Index>(p) * m + f);
            }
            double trial_sup = eval_residual(ws, trial, logw_shift, Rtrial);
            if (trial_sup <= (1.0 - 1e-4 * alpha) * sup) {
                u.swap(trial);
                R.swap(Rtrial);
                sup = trial_sup;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            out.stats.message = "line search stalled; returning best iterate";
            break;
        }
        out.stats.residual_history.push_back(sup);
    }

    out.stats.newton_iterations = it;
    out.stats.final_residual = sup;
    out.stats.converged = sup <= req.solver.tol;
    if (!out.stats.converged && out.stats.message.empty())
        out.stats.message = "Newton did not reach tolerance within max_iterations";
    out.u = std::move(u);
    return out;
}

} // namespace

GridSolution solve_dirichlet(const SolveRequest& req) {
    require(req.rank >= 2, "solve_dirichlet: rank >= 2 required");
    require(req.weight.rank() == req.rank, "solve_dirichlet: weight rank mismatch");
    Workspace ws = make_workspace(req.grid, req.rank, req.weight);

    int stages = std::max(1, req.solver.continuation_steps);
    if (req.weight.is_minus_infinity()) stages = 1; // nothing to ramp

    StageResult result;
    bool first = true;
    for (int s = 1; s <= stages; ++s) {
        double t = static_cast<double>(s) / stages;
        double shift = (stages > 1) ? 2.0 * std::log(t) : 0.0;
        auto bd = boundary_data(req, ws, shift);
        std::vector<std::vector<double>> u0;
        if (first) {
            u0 = harmonic_extension(ws, bd);
            first = false;
        } else {
            u0 = std::move(result.u);
            // keep the warm start but refresh the boundary ring
            for (int j = 0; j < req.grid.ny(); ++j)
                for (int i = 0; i < req.grid.nx(); ++i) {
                    int k = req.grid.index(i, j);
                    if (req.grid.kind(i, j) == NodeKind::Boundary)
                        for (int f = 0; f < ws.m; ++f) u0[f][k] = bd[f][k];
                }
        }
        result = newton_stage(req, ws, shift, std::move(u0));
        if (!result.stats.converged) break;
    }

    GridSolution sol;
    sol.rank = req.rank;
    sol.grid = req.grid;
    sol.weight = req.weight;
    sol.boundary = req.boundary;
    sol.custom_boundary = req.custom_boundary;
    sol.u = std::move(result.u);
    sol.stats = std::move(result.stats);
    if (req.solver.check_reality) sol.stats.reality_violation = reality_violation(sol);
    return sol;
}

} // namespace todalab::toda
