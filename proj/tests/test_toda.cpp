#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "todalab/solution_io.hpp"
#include "todalab/spectrum.hpp"
#include "todalab/toda.hpp"

using namespace todalab;
using namespace todalab::toda;
using todalab::weights::RDifferential;

namespace {

RDifferential q_unit(int rank) { return RDifferential(rank, 1.0, {}); }
RDifferential q_z(int rank) { return RDifferential(rank, 1.0, {{{0.0, 0.0}, 1}}); }

SolveRequest z_disc_request(int rank, double h) {
    SolveRequest req;
    req.rank = rank;
    req.grid = Grid2D::disc(0.9, h);
    req.weight = SystemWeight::from_differential(q_z(rank));
    req.boundary = BoundaryKind::FlatLike;
    return req;
}

} // namespace

TEST_CASE("flat residual vanishes identically") {
    auto grid = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    for (int rank : {2, 3, 5}) {
        auto w = SystemWeight::from_differential(q_unit(rank));
        auto sol = exact_extremal_solution(ExtremalKind::Flat, grid, rank, w);
        CHECK(residual_sup(sol) <= 1e-12);
    }
}

TEST_CASE("hyperbolic solution satisfies the system") {
    SUBCASE("continuum identity via the lambda second difference") {
        for (int rank : {2, 3, 4, 5, 7}) {
            auto lambda = spectrum::lambda_from_cartan(rank).values;
            double w = 0.4; // any value of 1-|z|^2
            for (int j = 1; j <= rank - 1; ++j) {
                double vj = lambda[j - 1] / (w * w);
                double below = (j == 1) ? 0.0 : lambda[j - 2] / (w * w);
                double above = (j == rank - 1) ? 0.0 : lambda[j] / (w * w);
                CHECK(8.0 * vj - 4.0 * below - 4.0 * above ==
                      doctest::Approx(8.0 / (w * w)).epsilon(1e-13));
            }
        }
    }

    SUBCASE("discrete residual is second order, measured on the common region") {
        for (int rank : {2, 3}) {
            SolveRequest base;
            base.rank = rank;
            base.grid = Grid2D::disc(0.9, 1.0 / 12);
            base.weight = SystemWeight::minus_infinity(rank);
            auto table = refinement_study(base, 3, RefinementMode::ExactResidual);
            REQUIRE(table.residual_ratios.size() == 2);
            for (double r : table.residual_ratios) {
                CHECK(r >= 3.5);
                CHECK(r <= 4.5);
            }
        }
    }
}

TEST_CASE("flat residual is second order for a harmonic nonconstant weight") {
    // zero far outside the domain keeps phi harmonic but nonconstant
    SolveRequest base;
    base.rank = 3;
    base.grid = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    base.weight = SystemWeight::from_differential(RDifferential(3, 1.0, {{{2.0, 0.0}, 1}}));
    auto table = refinement_study(base, 3, RefinementMode::ExactResidual);
    for (double r : table.residual_ratios) CHECK(r == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("extremal constructor rejects mismatched inputs") {
    auto disc = Grid2D::disc(0.9, 1.0 / 16);
    CHECK_THROWS_AS(exact_extremal_solution(ExtremalKind::Flat, disc, 3,
                                            SystemWeight::minus_infinity(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(exact_extremal_solution(ExtremalKind::Flat, disc, 2,
                                            SystemWeight::from_differential(q_z(2))),
                    std::invalid_argument);
    CHECK_THROWS_AS(exact_extremal_solution(ExtremalKind::Hyperbolic, disc, 3,
                                            SystemWeight::from_differential(q_unit(3))),
                    std::invalid_argument);
    auto rect = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    CHECK_THROWS_AS(exact_extremal_solution(ExtremalKind::Hyperbolic, rect, 3,
                                            SystemWeight::minus_infinity(3)),
                    std::invalid_argument);
}

TEST_CASE("hyperbolic metric fields carry constant lambda ratios") {
    auto grid = Grid2D::disc(0.9, 1.0 / 16);
    auto sol = exact_extremal_solution(ExtremalKind::Hyperbolic, grid, 4,
                                       SystemWeight::minus_infinity(4));
    for (int f = 0; f + 1 < 3; ++f) {
        auto lambda = spectrum::lambda_from_cartan(4).values;
        for (int j = 0; j < grid.ny(); ++j)
            for (int i = 0; i < grid.nx(); ++i) {
                if (!grid.in_domain(i, j)) continue;
                int k = grid.index(i, j);
                CHECK(sol.u[f][k] - sol.u[f + 1][k] ==
                      doctest::Approx(std::log(lambda[f] / lambda[f + 1])).epsilon(1e-12));
            }
    }
    auto m = metric_fields(sol);
    CHECK(m.from_hyperbolic_extremal);
    for (double v : m.vol[0])
        if (!std::isnan(v)) CHECK(v == 0.0);
}

TEST_CASE("flat solve converges immediately") {
    SolveRequest req;
    req.rank = 3;
    req.grid = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    req.weight = SystemWeight::from_differential(q_unit(3));
    req.boundary = BoundaryKind::FlatLike;
    auto sol = solve_dirichlet(req);
    CHECK(sol.stats.converged);
    CHECK(sol.stats.newton_iterations <= 3);
    for (const auto& field : sol.u)
        for (double v : field)
            if (!std::isnan(v)) CHECK(std::abs(v) <= 1e-12);

    auto m = metric_fields(sol);
    CHECK(m.from_flat_extremal);
    for (int slot = 0; slot < 3; ++slot)
        for (double v : m.vol[slot])
            if (!std::isnan(v)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generic disc solve r=3") {
    auto sol = solve_dirichlet(z_disc_request(3, 1.0 / 24));
    REQUIRE(sol.stats.converged);
    CHECK(sol.stats.final_residual <= 1e-10);
    CHECK(sol.stats.newton_iterations <= 25);
    // residual history decreases monotonically under damping
    for (std::size_t i = 1; i < sol.stats.residual_history.size(); ++i)
        CHECK(sol.stats.residual_history[i] < sol.stats.residual_history[i - 1]);
    // reality: H_1 = H_2 for r = 3
    CHECK(sol.stats.reality_violation <= 1e-10);

    auto m = metric_fields(sol);
    CHECK_FALSE(m.from_flat_extremal);
    CHECK_FALSE(m.from_hyperbolic_extremal);

    auto prop = check_prop_inequalities(m, 8);
    CHECK(prop.all_hold);

    auto chain = sup_chain_check(m, 8);
    CHECK(chain.all_hold);
    REQUIRE(chain.down_sup.size() == 1);
    CHECK(chain.down_sup[0].value <= 1.0);

    SUBCASE("entropy field bounds for positive beta") {
        auto ef = entropy_field(m, 1.0, 8);
        CHECK(ef.lower_bound_holds);
        CHECK(ef.upper_bound_holds);
        CHECK(ef.s_r_beta == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        // entropy approaches log 2 at the zero of q
        const auto& g = m.grid;
        int ix = static_cast<int>(std::lround(-g.x0() / g.h()));
        int iy = static_cast<int>(std::lround(-g.y0() / g.h()));
        double near = ef.entropy[g.index(ix, iy)];
        CHECK(std::abs(near - std::log(2.0)) < 0.1);
        // p sums to one nodewise
        double sum = 0.0;
        for (int slot = 0; slot < 3; ++slot) sum += ef.p[slot][g.index(ix, iy)];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("beta = 0 is rejected") {
        CHECK_THROWS_AS(entropy_field(m, 0.0, 8), std::invalid_argument);
    }

    SUBCASE("solutions round trip through the on-disk format") {
        auto dir = std::filesystem::temp_directory_path() / "todalab_sol_test";
        std::filesystem::remove_all(dir);
        io::save_solution(dir, sol);
        auto back = io::load_solution(dir);
        CHECK(back.rank == sol.rank);
        CHECK(back.grid.nx() == sol.grid.nx());
        CHECK(back.stats.final_residual == sol.stats.final_residual);
        for (std::size_t f = 0; f < sol.u.size(); ++f)
            for (std::size_t k = 0; k < sol.u[f].size(); ++k) {
                if (std::isnan(sol.u[f][k])) CHECK(std::isnan(back.u[f][k]));
                else CHECK(back.u[f][k] == sol.u[f][k]);
            }
        CHECK(residual_sup(back) == doctest::Approx(residual_sup(sol)).epsilon(1e-12));
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("extremal entropy fields sit at the bounds") {
    auto grid = Grid2D::disc(0.9, 1.0 / 16);
    auto hyp = metric_fields(exact_extremal_solution(ExtremalKind::Hyperbolic, grid, 5,
                                                     SystemWeight::minus_infinity(5)));
    for (double beta : {-0.5, 1.0, 2.0}) {
        auto ef = entropy_field(hyp, beta, 4);
        double expect = spectrum::ensemble_entropy(5, beta);
        CHECK(ef.min_entropy == doctest::Approx(expect).epsilon(1e-12));
        CHECK(ef.max_entropy == doctest::Approx(expect).epsilon(1e-12));
    }

    auto rect = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    auto flat = metric_fields(exact_extremal_solution(
        ExtremalKind::Flat, rect, 4, SystemWeight::from_differential(q_unit(4))));
    for (double beta : {-0.5, 1.0}) {
        auto ef = entropy_field(flat, beta, 4);
        CHECK(ef.min_entropy == doctest::Approx(std::log(4.0)).epsilon(1e-12));
        CHECK(ef.max_entropy == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }
}

TEST_CASE("prop checks flag extremal diagnostics") {
    auto rect = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    auto flat = metric_fields(exact_extremal_solution(
        ExtremalKind::Flat, rect, 5, SystemWeight::from_differential(q_unit(5))));
    auto frep = check_prop_inequalities(flat, 4);
    CHECK(frep.extremal_flat);
    CHECK(frep.all_hold);

    auto disc = Grid2D::disc(0.9, 1.0 / 16);
    auto hyp = metric_fields(exact_extremal_solution(ExtremalKind::Hyperbolic, disc, 5,
                                                     SystemWeight::minus_infinity(5)));
    auto hrep = check_prop_inequalities(hyp, 4);
    CHECK(hrep.extremal_hyperbolic);
    CHECK(hrep.all_hold);

    SUBCASE("hyperbolic sup chain is tight at the lambda ratios") {
        auto chain = sup_chain_check(hyp, 4);
        CHECK(chain.all_hold);
        auto lambda = spectrum::lambda_from_cartan(5).values;
        CHECK(chain.down_sup[1].value ==
              doctest::Approx(lambda[0] / lambda[1]).epsilon(1e-12));
        CHECK(chain.up_sup[0].value == doctest::Approx(lambda[1] / lambda[0]).epsilon(1e-12));
    }

    SUBCASE("flat sup chain saturates at one") {
        auto chain = sup_chain_check(flat, 4);
        CHECK(chain.all_hold);
        for (const auto& rec : chain.down_sup)
            CHECK(rec.value == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("lambda chain-term identity is exact") {
    for (int r = 4; r <= 12; ++r) CHECK(lambda_reference_identity_residual(r) < 1e-12);
}

TEST_CASE("chain checks at higher rank extremals") {
    // n >= 3 exercises the middle recursion and product branches; both
    // extremals make every inequality tight or trivially slack
    for (int rank : {6, 7, 9}) {
        auto disc = Grid2D::disc(0.9, 1.0 / 16);
        auto hyp = metric_fields(exact_extremal_solution(ExtremalKind::Hyperbolic, disc, rank,
                                                         SystemWeight::minus_infinity(rank)));
        auto hchain = sup_chain_check(hyp, 4);
        CHECK(hchain.all_hold);
        auto lambda = spectrum::lambda_from_cartan(rank).values;
        for (std::size_t j = 0; j < hchain.up_sup.size(); ++j)
            CHECK(hchain.up_sup[j].value ==
                  doctest::Approx(lambda[j + 1] / lambda[j]).epsilon(1e-12));
        // the recursion bounds are equalities at the hyperbolic point
        for (const auto& c : hchain.checks)
            if (c.name.rfind("up_sup_recursion", 0) == 0)
                CHECK(c.slack == doctest::Approx(0.0).epsilon(1e-12));

        auto rect = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
        auto flat = metric_fields(exact_extremal_solution(
            ExtremalKind::Flat, rect, rank, SystemWeight::from_differential(q_unit(rank))));
        auto fchain = sup_chain_check(flat, 4);
        CHECK(fchain.all_hold);
        for (const auto& c : fchain.checks)
            if (c.name.rfind("down_sup_recursion", 0) == 0)
                CHECK(c.slack == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("rectangle instance with two zeros") {
    SolveRequest req;
    req.rank = 4;
    req.grid = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    req.weight = SystemWeight::from_differential(
        RDifferential(4, 1.0, {{{0.5, 0.0}, 1}, {{-0.5, 0.0}, 1}}));
    req.boundary = BoundaryKind::FlatLike;
    auto sol = solve_dirichlet(req);
    REQUIRE(sol.stats.converged);
    CHECK(sol.stats.reality_violation <= 1e-10);
    for (std::size_t i = 1; i < sol.stats.residual_history.size(); ++i)
        CHECK(sol.stats.residual_history[i] < sol.stats.residual_history[i - 1]);

    SUBCASE("continuation reaches the same solution") {
        SolveRequest ramped = req;
        ramped.solver.continuation_steps = 3;
        auto sol2 = solve_dirichlet(ramped);
        REQUIRE(sol2.stats.converged);
        double worst = 0.0;
        for (std::size_t f = 0; f < sol.u.size(); ++f)
            for (std::size_t k = 0; k < sol.u[f].size(); ++k)
                if (!std::isnan(sol.u[f][k]))
                    worst = std::max(worst, std::abs(sol.u[f][k] - sol2.u[f][k]));
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("boundary preconditions") {
    SolveRequest req;
    req.rank = 3;
    req.grid = Grid2D::disc(0.9, 1.0 / 16);
    req.weight = SystemWeight::minus_infinity(3);
    req.boundary = BoundaryKind::FlatLike;
    CHECK_THROWS_AS(solve_dirichlet(req), std::invalid_argument); // token has no flat data

    SolveRequest rect;
    rect.rank = 3;
    rect.grid = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    rect.weight = SystemWeight::minus_infinity(3);
    rect.boundary = BoundaryKind::HyperbolicLike;
    CHECK_THROWS_AS(solve_dirichlet(rect), std::invalid_argument); // needs a disc

    SolveRequest edge;
    edge.rank = 2;
    edge.grid = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    edge.weight = SystemWeight::from_differential(
        RDifferential(2, 1.0, {{{0.999, 0.001}, 1}}));
    edge.boundary = BoundaryKind::FlatLike;
    CHECK_THROWS_AS(solve_dirichlet(edge), std::invalid_argument); // zero on the boundary ring

    SolveRequest custom;
    custom.rank = 3;
    custom.grid = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    custom.weight = SystemWeight::from_differential(q_unit(3));
    custom.boundary = BoundaryKind::Custom;
    custom.custom_boundary = {0.1}; // needs one value per field
    CHECK_THROWS_AS(solve_dirichlet(custom), std::invalid_argument);
    custom.custom_boundary = {0.1, -0.1};
    auto sol = solve_dirichlet(custom);
    CHECK(sol.stats.converged);
}

TEST_CASE("token-weight solve reproduces the hyperbolic closed form") {
    SolveRequest req;
    req.rank = 4;
    req.grid = Grid2D::disc(0.9, 1.0 / 16);
    req.weight = SystemWeight::minus_infinity(4);
    req.boundary = BoundaryKind::HyperbolicLike;
    auto sol = solve_dirichlet(req);
    REQUIRE(sol.stats.converged);
    auto exact = exact_extremal_solution(ExtremalKind::Hyperbolic, req.grid, 4, req.weight);
    // Dirichlet solution of the discrete system differs from the sampled
    // continuum solution by the truncation error scale, largest near the rim
    double worst = 0.0;
    for (std::size_t f = 0; f < sol.u.size(); ++f)
        for (std::size_t k = 0; k < sol.u[f].size(); ++k)
            if (!std::isnan(sol.u[f][k]))
                worst = std::max(worst, std::abs(sol.u[f][k] - exact.u[f][k]));
    CHECK(worst < 0.05);
}

TEST_CASE("solve refinement study shrinks the field differences") {
    SolveRequest base = z_disc_request(3, 1.0 / 12);
    auto table = refinement_study(base, 3, RefinementMode::Solve);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1].solution_change > table.rows[2].solution_change);
    // away from the zero the scheme is second order; the change ratio sits
    // near 4 but the log singularity at the zero slows it slightly
    CHECK(table.change_ratios[0] > 2.0);
}

TEST_CASE("grid construction guards") {
    CHECK_THROWS_AS(Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Grid2D::disc(0.2, 1.0 / 16), std::invalid_argument);
    auto g = Grid2D::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
    CHECK(g.interior_count() >= 16 * 16);
    // refinement keeps the origin, so coarse nodes reappear on the fine grid
    auto f = g.refined();
    CHECK(f.x(2) == doctest::Approx(g.x(1)).epsilon(1e-15));
    CHECK(f.h() == g.h() / 2.0);
}

TEST_CASE("grid-bound field weights cannot drive a refinement study") {
    auto grid = Grid2D::disc(0.9, 1.0 / 16);
    auto w = weights::sample_weight(q_z(2), grid);
    auto mw = weights::mollify(w, 4 * grid.h());
    SolveRequest req;
    req.rank = 2;
    req.grid = grid;
    req.weight = SystemWeight::from_field(2, mw.values, q_z(2), 4 * grid.h());
    req.boundary = BoundaryKind::FlatLike;
    CHECK_THROWS_AS(refinement_study(req, 2, RefinementMode::Solve), std::invalid_argument);
}

TEST_CASE("mollified weight solves are monotone in the kernel radius") {
    int rank = 2;
    auto grid = Grid2D::disc(0.9, 1.0 / 16);
    double h = grid.h();
    auto w = weights::sample_weight(q_z(rank), grid);

    std::vector<GridSolution> sols;
    for (double eps : {8 * h, 4 * h, 2 * h}) {
        auto mw = weights::mollify(w, eps);
        SolveRequest req;
        req.rank = rank;
        req.grid = grid;
        req.weight = SystemWeight::from_field(rank, mw.values, q_z(rank), eps);
        req.boundary = BoundaryKind::FlatLike;
        sols.push_back(solve_dirichlet(req));
        REQUIRE(sols.back().stats.converged);
    }
    auto direct = solve_dirichlet(z_disc_request(rank, 1.0 / 16));
    REQUIRE(direct.stats.converged);

    double change_84 = 0.0, change_42 = 0.0;
    for (std::size_t k = 0; k < sols[0].u[0].size(); ++k) {
        double a = sols[0].u[0][k], b = sols[1].u[0][k], c = sols[2].u[0][k];
        double d = direct.u[0][k];
        if (std::isnan(a)) continue;
        CHECK(b <= a + 1e-8);
        CHECK(c <= b + 1e-8);
        CHECK(d <= c + 1e-8);
        change_84 = std::max(change_84, std::abs(a - b));
        change_42 = std::max(change_42, std::abs(b - c));
    }
    CHECK(change_42 < change_84);
}
