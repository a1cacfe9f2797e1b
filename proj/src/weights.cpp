#include "todalab/weights.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace todalab::weights {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

RDifferential::RDifferential(int rank, std::complex<double> leading, std::vector<Zero> zeros)
    : rank_(rank), leading_(leading), zeros_(std::move(zeros)) {
    require(rank_ >= 2, "RDifferential: rank >= 2 required");
    require(std::abs(leading_) > 0.0, "RDifferential: leading coefficient must be nonzero");
    for (const auto& z : zeros_)
        require(z.multiplicity >= 1, "RDifferential: multiplicities must be positive");
}

int RDifferential::degree() const {
    int d = 0;
    for (const auto& z : zeros_) d += z.multiplicity;
    return d;
}

std::complex<double> RDifferential::eval(std::complex<double> z) const {
    std::complex<double> v = leading_;
    for (const auto& zero : zeros_) {
        std::complex<double> f = z - zero.position;
        for (int k = 0; k < zero.multiplicity; ++k) v *= f;
    }
    return v;
}

double RDifferential::log_abs_sq(std::complex<double> z) const {
    double acc = 2.0 * std::log(std::abs(leading_));
    for (const auto& zero : zeros_) {
        acc += 2.0 * zero.multiplicity * std::log(std::abs(z - zero.position));
    }
    return acc;
}

double phi_q(const RDifferential& q, std::complex<double> z) {
    return q.log_abs_sq(z) / q.rank();
}

WeightClass classify_weight(const RDifferential& q) {
    return q.zeros().empty() ? WeightClass::Flat : WeightClass::Generic;
}

WeightClass classify_weight(MinusInfinityWeight) { return WeightClass::IdenticallyMinusInfinity; }

WeightField::WeightField(Grid2D grid, std::vector<double> values, std::vector<NodeFlag> flags,
                         std::optional<RDifferential> source)
    : grid_(std::move(grid)), values_(std::move(values)), flags_(std::move(flags)),
      source_(std::move(source)) {
    if (values_.size() != static_cast<std::size_t>(grid_.node_count()) ||
        flags_.size() != values_.size())
        throw std::invalid_argument("WeightField: value/flag size mismatch");
}

WeightField sample_weight(const RDifferential& q, const Grid2D& grid) {
    std::vector<double> values(grid.node_count(), std::numeric_limits<double>::quiet_NaN());
    std::vector<NodeFlag> flags(grid.node_count(), NodeFlag::Finite);
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (!grid.in_domain(i, j)) continue;
            std::complex<double> z(grid.x(i), grid.y(j));
            for (const auto& zero : q.zeros()) {
                if (std::abs(z - zero.position) < 1e-12 * std::max(1.0, std::abs(zero.position)))
                    throw std::invalid_argument(
                        "sample_weight: a zero of q coincides with a grid node; "
                        "perturb the grid offset");
            }
            values[grid.index(i, j)] = phi_q(q, z);
        }
    }
    return WeightField(grid, std::move(values), std::move(flags), q);
}

SubharmonicityReport check_subharmonicity(const WeightField& w) {
    const Grid2D& g = w.grid();
    double h = g.h();
    SubharmonicityReport rep;
    rep.min_laplacian = std::numeric_limits<double>::infinity();
    const RDifferential* q = w.source() ? &*w.source() : nullptr;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (!g.interior(i, j)) continue;
            std::complex<double> z(g.x(i), g.y(j));
            double envelope = 1e-8;
            bool skip = false;
            if (q) {
                for (const auto& zero : q->zeros()) {
                    double d = std::abs(z - zero.position);
                    if (d < 2.0 * h) { skip = true; break; }
                    envelope += 1.2 * (2.0 / q->rank()) * zero.multiplicity * h * h / (d * d * d * d);
                }
            }
            if (skip) continue;
            double lap = (w.value(i - 1, j) + w.value(i + 1, j) + w.value(i, j - 1) +
                          w.value(i, j + 1) - 4.0 * w.value(i, j)) / (h * h);
            ++rep.nodes_checked;
            if (lap < rep.min_laplacian) rep.min_laplacian = lap;
            if (lap < -envelope) {
                rep.holds = false;
                rep.worst_allowance = envelope;
            }
        }
    }
    return rep;
}

double mollified_log_profile(double d, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("mollified_log_profile: epsilon > 0");
    if (d >= epsilon) return std::log(d);
    double tau = d / epsilon;
    // Kernel radial density 8 t (1-t^2)^3 on [0,1]:
    //   L = log(eps) + log(tau) A(tau) + I(tau),
    //   A(tau) = 1 - (1-tau^2)^4,  I(tau) = int_tau^1 8 t (1-t^2)^3 log t dt.
    static constexpr double coef[4] = {8.0, -24.0, 24.0, -8.0}; // powers 1,3,5,7
    double acc = std::log(epsilon);
    double one_minus = 1.0 - tau * tau;
    double a = 1.0 - one_minus * one_minus * one_minus * one_minus;
    if (tau > 0.0) acc += std::log(tau) * a;
    for (int m = 0; m < 4; ++m) {
        double k1 = 2.0 * m + 2.0; // k+1 for k = 1,3,5,7
        double f1 = -1.0 / (k1 * k1);
        double ftau = 0.0;
        if (tau > 0.0) ftau = std::pow(tau, k1) * (std::log(tau) / k1 - 1.0 / (k1 * k1));
        acc += coef[m] * (f1 - ftau);
    }
    return acc;
}

MollifiedWeight mollify(const WeightField& w, double epsilon) {
    const Grid2D& g = w.grid();
    if (!(epsilon >= 2.0 * g.h()))
        throw std::invalid_argument("mollify: epsilon must be at least 2h");

    std::vector<double> values(g.node_count(), std::numeric_limits<double>::quiet_NaN());

    if (w.source()) {
        const RDifferential& q = *w.source();
        double scale = 2.0 / q.rank();
        double constant = scale * std::log(std::abs(q.leading()));
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                if (!g.in_domain(i, j)) continue;
                std::complex<double> z(g.x(i), g.y(j));
                double acc = constant;
                for (const auto& zero : q.zeros()) {
                    acc += scale * zero.multiplicity *
                           mollified_log_profile(std::abs(z - zero.position), epsilon);
                }
                values[g.index(i, j)] = acc;
            }
        }
        return MollifiedWeight{w, epsilon, std::move(values)};
    }

    // Generic field: discrete kernel, renormalized over in-domain samples.
    int reach = static_cast<int>(std::floor(epsilon / g.h()));
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (!g.in_domain(i, j)) continue;
            double wsum = 0.0, acc = 0.0;
            for (int dj = -reach; dj <= reach; ++dj) {
                for (int di = -reach; di <= reach; ++di) {
                    int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= g.nx() || jj >= g.ny()) continue;
                    if (!g.in_domain(ii, jj)) continue;
                    double t = g.h() * std::sqrt(double(di) * di + double(dj) * dj) / epsilon;
                    if (t >= 1.0) continue;
                    double k = (1.0 - t * t);
                    k = k * k * k;
                    wsum += k;
                    acc += k * w.value(ii, jj);
                }
            }
            values[g.index(i, j)] = acc / wsum;
        }
    }
    return MollifiedWeight{w, epsilon, std::move(values)};
}

double flux_mass(const RDifferential& q, std::size_t zero_index, double radius) {
    require(!q.zeros().empty(), "flux_mass: q has no zeros");
    require(zero_index < q.zeros().size(), "flux_mass: zero index out of range");
    require(radius > 0.0, "flux_mass: radius must be positive");
    std::complex<double> center = q.zeros()[zero_index].position;
    for (std::size_t k = 0; k < q.zeros().size(); ++k) {
        if (k == zero_index) continue;
        require(std::abs(q.zeros()[k].position - center) > radius,
                "flux_mass: circle encloses or touches another zero");
    }

    constexpr int n = 512;
    double integral = 0.0;
    for (int it = 0; it < n; ++it) {
        double theta = 2.0 * std::numbers::pi * it / n;
        std::complex<double> dir(std::cos(theta), std::sin(theta));
        std::complex<double> z = center + radius * dir;
        // grad phi as a complex vector; dot with the outward normal.
        std::complex<double> grad(0.0, 0.0);
        for (const auto& zero : q.zeros()) {
            std::complex<double> rel = z - zero.position;
            grad += (2.0 / q.rank()) * static_cast<double>(zero.multiplicity) * rel /
                    std::norm(rel);
        }
        integral += (grad.real() * dir.real() + grad.imag() * dir.imag());
    }
    integral *= 2.0 * std::numbers::pi * radius / n;

    double expected = 4.0 * std::numbers::pi * q.zeros()[zero_index].multiplicity / q.rank();
    if (std::abs(integral - expected) > 1e-6 * (1.0 + std::abs(expected)))
        throw std::logic_error("flux_mass: integral disagrees with 4 pi m / r");
    return integral;
}

} // namespace todalab::weights
