#pragma once

#include <optional>
#include <string>
#include <vector>

#include "todalab/grid.hpp"
#include "todalab/weights.hpp"

namespace todalab::toda {

using weights::RDifferential;

// Weight data feeding the degenerate density e^{u_0} = W e^{-sum_k u_k}:
// either |q|^2 of a polynomial differential, the identically minus-infinity
// token (W == 0), or a sampled phi field (mollified weights).
class SystemWeight {
public:
    enum class Kind { Differential, MinusInfinity, Field };

    SystemWeight() = default; // placeholder; assign before use

    static SystemWeight from_differential(const RDifferential& q);
    static SystemWeight minus_infinity(int rank);
    static SystemWeight from_field(int rank, std::vector<double> phi_values,
                                   std::optional<RDifferential> source = {},
                                   double mollify_epsilon = 0.0);

    Kind kind() const { return kind_; }
    int rank() const { return rank_; }
    bool is_minus_infinity() const { return kind_ == Kind::MinusInfinity; }
    const std::optional<RDifferential>& differential() const { return q_; }
    double mollify_epsilon() const { return mollify_epsilon_; }
    const std::vector<double>& field_values() const { return phi_; }

    // log W at a node; -infinity for the token. Field weights are nodewise
    // and require the grid they were sampled on.
    double log_w(const Grid2D& grid, int i, int j) const;

private:
    Kind kind_ = Kind::MinusInfinity;
    int rank_ = 0;
    std::optional<RDifferential> q_;
    std::vector<double> phi_;
    double mollify_epsilon_ = 0.0;
};

enum class BoundaryKind { FlatLike, HyperbolicLike, Custom };

struct SolverConfig {
    double tol = 1e-10;          // sup-norm residual target
    int max_iterations = 50;     // Newton steps
    int continuation_steps = 0;  // 0 = direct solve; k = ramp q over k stages
    bool check_reality = true;
};

struct SolveRequest {
    int rank = 2;
    Grid2D grid;
    SystemWeight weight;
    BoundaryKind boundary = BoundaryKind::FlatLike;
    std::vector<double> custom_boundary; // one constant per field when Custom
    SolverConfig solver;
};

struct SolverStats {
    int newton_iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history; // sup residual after each accepted step
    double reality_violation = 0.0;       // max |u_j - u_{r-j}|
    std::string message;
};

struct GridSolution {
    int rank = 0;
    Grid2D grid;
    SystemWeight weight;
    BoundaryKind boundary = BoundaryKind::FlatLike;
    std::vector<double> custom_boundary;
    std::vector<std::vector<double>> u; // fields j = 1..r-1; NaN outside the domain
    SolverStats stats;
};

// Discrete residual R_j = Delta_h u_j - 8 e^{u_j} + 4 e^{u_{j-1}} + 4 e^{u_{j+1}}
// at interior nodes (NaN elsewhere), with e^{u_0} = e^{u_r} = W e^{-sum u}.
std::vector<std::vector<double>> residual(const GridSolution& sol);
double residual_sup(const GridSolution& sol);
double residual_sup(const GridSolution& sol, const std::vector<std::uint8_t>& region);

enum class ExtremalKind { Flat, Hyperbolic };

// Closed-form fields of the two extremal cases: u_j = phi (flat; q nowhere
// zero on the domain) or u_j = log lambda_j - 2 log(1-|z|^2) (hyperbolic;
// minus-infinity weight on a disc of radius < 1).
GridSolution exact_extremal_solution(ExtremalKind kind, const Grid2D& grid, int rank,
                                     const SystemWeight& weight);

// Damped Newton on the discrete system with Dirichlet data from the chosen
// boundary kind. Initial guess is the discrete harmonic extension of the
// boundary data.
GridSolution solve_dirichlet(const SolveRequest& req);

double reality_violation(const GridSolution& sol);

struct MetricFields {
    int rank = 0;
    int n = 0;     // floor(r/2)
    int delta = 0; // r - 2n
    Grid2D grid;
    std::vector<double> lambda;          // lambda_1..lambda_{r-1}
    std::vector<double> log_w;           // nodewise log W (-inf for the token)
    std::vector<std::vector<double>> u;  // fields j = 1..r-1
    std::vector<double> log_v0;          // log W - sum_k u_k (-inf where W = 0)
    std::vector<std::vector<double>> vol; // r fields: vol[0] = e^{u_0}, vol[j] = e^{u_j}
    bool from_flat_extremal = false;
    bool from_hyperbolic_extremal = false;
};

MetricFields metric_fields(const GridSolution& sol);

// e^{sigma_j} = vol_{j-1}/vol_j nodewise for j = 1..n (j = 1 uses the
// degenerate density). NaN outside the domain.
std::vector<double> down_ratio_field(const MetricFields& m, int j);
// e^{sigma'_j} = vol_{j+1}/vol_j nodewise for j = 1..n-1.
std::vector<double> up_ratio_field(const MetricFields& m, int j);

struct NamedCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0; // rhs - lhs
    bool holds = false;
    int ix = -1, iy = -1; // witness node when pointwise
};

struct SupRecord {
    double value = 0.0;
    int ix = -1, iy = -1;
};

// Pointwise bounds on the test region (interior eroded by margin_cells):
// lambda_{j-1}/lambda_j < vol_{j-1}/vol_j < 1 for 2 <= j <= n, and
// vol_0/vol_1 <= 1 everywhere. Extremal inputs route to equality
// diagnostics instead of strictness checks.
struct PropReport {
    bool extremal_flat = false;
    bool extremal_hyperbolic = false;
    int region_nodes = 0;
    std::vector<NamedCheck> checks;
    bool all_hold = false;
};

PropReport check_prop_inequalities(const MetricFields& m, int margin_cells = 8);

// Sup-quantities of the ratio fields over the test region and the
// maximum-principle chain between them, each reported with its slack.
struct SupChainReport {
    int n = 0, delta = 0;
    int region_nodes = 0;
    std::vector<SupRecord> down_sup;        // sup vol_{j-1}/vol_j, j = 1..n
    std::vector<SupRecord> up_sup;          // sup vol_{j+1}/vol_j, j = 1..n-1
    std::vector<double> down_terms;         // chain terms from down_sup (index 1..n+1)
    std::vector<double> up_terms;           // chain terms from up_sup (index 0..n-1)
    std::vector<double> lambda_up_ratio;    // lambda_{j+1}/lambda_j, j = 1..n-1
    std::vector<double> lambda_up_terms;    // same chain terms built from lambda ratios
    std::vector<NamedCheck> checks;
    bool all_hold = false;
};

SupChainReport sup_chain_check(const MetricFields& m, int margin_cells = 8);

// The lambda reference ratios satisfy the chain-term identity exactly;
// returns the max absolute residual over j (pure lambda algebra, r >= 4).
double lambda_reference_identity_residual(int r);

struct EntropyField {
    double beta = 0.0;
    double s_r_beta = 0.0;
    double log_r = 0.0;
    std::vector<std::vector<double>> p; // r fields nodewise
    std::vector<double> entropy;        // S nodewise
    int region_nodes = 0;
    double min_entropy = 0.0, max_entropy = 0.0;
    int min_ix = -1, min_iy = -1, max_ix = -1, max_iy = -1;
    bool lower_bound_holds = false; // min >= S_{r,beta} - 1e-8 on the region
    bool upper_bound_holds = false; // max < log r on the region
    double upper_margin = 0.0;      // log r - max
};

// p_j proportional to vol_j^beta over j = 0..r-1, log-sum-exp throughout;
// the j = 0 slot is dropped exactly where vol_0 = 0. beta must be nonzero.
EntropyField entropy_field(const MetricFields& m, double beta, int margin_cells = 8);

enum class RefinementMode { ExactResidual, Solve };

struct RefinementRow {
    double h = 0.0;
    double residual_sup = 0.0;    // over the coarsest level's interior nodes
    double solution_change = 0.0; // vs previous level on common nodes (Solve mode)
    int newton_iterations = 0;
};

struct RefinementTable {
    std::vector<RefinementRow> rows;
    std::vector<double> residual_ratios;
    std::vector<double> change_ratios;
};

// Halves the spacing per level keeping the grid origin, so levels nest and
// norms are comparable on the shared coarse node set.
RefinementTable refinement_study(const SolveRequest& base, int levels, RefinementMode mode);

} // namespace todalab::toda
