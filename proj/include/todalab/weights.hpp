#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "todalab/grid.hpp"

namespace todalab::weights {

struct Zero {
    std::complex<double> position;
    int multiplicity = 1;
};

// Holomorphic r-differential q(z) = c * prod_i (z - a_i)^{m_i} in the fixed
// global coordinate. The induced weight is phi_q = (1/r) log|q|^2.
class RDifferential {
public:
    RDifferential(int rank, std::complex<double> leading, std::vector<Zero> zeros);

    int rank() const { return rank_; }
    std::complex<double> leading() const { return leading_; }
    const std::vector<Zero>& zeros() const { return zeros_; }
    int degree() const;

    std::complex<double> eval(std::complex<double> z) const;
    // log|q(z)|^2 accumulated from the zero list; -infinity exactly at zeros.
    double log_abs_sq(std::complex<double> z) const;

private:
    int rank_;
    std::complex<double> leading_;
    std::vector<Zero> zeros_;
};

// (1/r) log|q(z)|^2 = (2/r) sum m_i log|z - a_i| + (2/r) log|c|.
double phi_q(const RDifferential& q, std::complex<double> z);

// Token for the weight that is identically -infinity.
struct MinusInfinityWeight {};

enum class WeightClass { Flat, IdenticallyMinusInfinity, Generic };

WeightClass classify_weight(const RDifferential& q);
WeightClass classify_weight(MinusInfinityWeight);

enum class NodeFlag : std::uint8_t { Finite = 0, NegInfinity = 1 };

// phi_q sampled on a grid. Values at nodes outside the domain are NaN.
class WeightField {
public:
    WeightField(Grid2D grid, std::vector<double> values, std::vector<NodeFlag> flags,
                std::optional<RDifferential> source);

    const Grid2D& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double value(int i, int j) const { return values_[grid_.index(i, j)]; }
    NodeFlag flag(int i, int j) const { return flags_[grid_.index(i, j)]; }
    const std::optional<RDifferential>& source() const { return source_; }

private:
    Grid2D grid_;
    std::vector<double> values_;
    std::vector<NodeFlag> flags_;
    std::optional<RDifferential> source_;
};

// Requires every zero of q to sit off-lattice; rejects otherwise with an
// instruction to perturb the grid offset.
WeightField sample_weight(const RDifferential& q, const Grid2D& grid);

struct SubharmonicityReport {
    double min_laplacian = 0.0;     // most negative discrete Laplacian found
    double worst_allowance = 0.0;   // envelope at the offending node
    bool holds = true;              // Delta_h phi >= -allowance everywhere checked
    int nodes_checked = 0;
};

// Checks Delta_h phi >= -(1e-8 + truncation envelope) at interior nodes at
// distance >= 2h from every zero. The envelope (2/r) sum_i m_i h^2/d_i^4
// is the exact five-point truncation scale of the log singularities.
SubharmonicityReport check_subharmonicity(const WeightField& w);

struct MollifiedWeight {
    WeightField base;
    double epsilon = 0.0;
    std::vector<double> values; // phi_eps at nodes, finite on the domain
    double value(int i, int j) const { return values[base.grid().index(i, j)]; }
};

// Mollification by a radially symmetric, mass-one kernel of radius eps
// (radial density 8t(1-t^2)^3 dt on [0,1] after rescaling). For weights with
// a polynomial source the kernel acts analytically on each log potential, so
// the monotone-family and majorization properties hold to roundoff; generic
// fields fall back to discrete convolution. Requires eps >= 2h.
MollifiedWeight mollify(const WeightField& w, double epsilon);

// Radial profile of the mollified log: (log|.| * rho_eps)(d); equals log d
// for d >= eps and stays finite at d = 0.
double mollified_log_profile(double d, double epsilon);

// Line integral of the outward normal derivative of phi_q over the circle of
// the given radius around zero i; equals 4 pi m_i / r.
double flux_mass(const RDifferential& q, std::size_t zero_index, double radius);

} // namespace todalab::weights
