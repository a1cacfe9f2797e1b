#include "todalab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace todalab::spectrum {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double log_lambda(int r, int j) {
    return std::log(static_cast<double>(j)) + std::log(static_cast<double>(r - j));
}

} // namespace

CartanMatrix::CartanMatrix(int order) : order_(order) {
    require(order >= 1, "CartanMatrix: order >= 1 required");
}

int CartanMatrix::entry(int i, int j) const {
    if (i < 0 || j < 0 || i >= order_ || j >= order_)
        throw std::out_of_range("CartanMatrix::entry");
    if (i == j) return 2;
    if (i == j + 1 || j == i + 1) return -1;
    return 0;
}

Rational CartanMatrix::determinant() const {
    // Tridiagonal elimination: pivots d_k = 2 - 1/d_{k-1} = (k+1)/k.
    Rational det(1);
    Rational d(2);
    for (int k = 1; k <= order_; ++k) {
        det = det * d;
        if (k < order_) d = Rational(2) - Rational(1) / d;
    }
    return det;
}

LambdaSpectrum lambda_from_cartan(int r) {
    require(r >= 2, "lambda_from_cartan: r >= 2 required");
    int m = r - 1;
    // Thomas elimination of the tridiagonal system Cartan * x = 2*ones,
    // kept exact in rationals.
    std::vector<Rational> diag(m), rhs(m);
    diag[0] = Rational(2);
    rhs[0] = Rational(2);
    for (int i = 1; i < m; ++i) {
        diag[i] = Rational(2) - Rational(1) / diag[i - 1];
        rhs[i] = Rational(2) + rhs[i - 1] / diag[i - 1];
    }
    std::vector<Rational> x(m);
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for (int i = m - 2; i >= 0; --i) {
        x[i] = (rhs[i] + x[i + 1]) / diag[i];
    }
    LambdaSpectrum out;
    out.r = r;
    out.values.resize(m);
    for (int j = 1; j <= m; ++j) {
        Rational expected(static_cast<std::int64_t>(j) * (r - j));
        if (x[j - 1] != expected)
            throw std::logic_error("lambda_from_cartan: exact solve disagrees with j*(r-j) at j=" +
                                   std::to_string(j));
        out.values[j - 1] = expected.to_double();
    }
    return out;
}

double entropy_from_log_weights(const std::vector<double>& logw) {
    require(!logw.empty(), "entropy_from_log_weights: empty weight list");
    double m = *std::max_element(logw.begin(), logw.end());
    double z = 0.0, wmean = 0.0;
    for (double lv : logw) z += std::exp(lv - m);
    for (double lv : logw) wmean += std::exp(lv - m) / z * lv;
    double log_partition = m + std::log(z);
    return log_partition - wmean;
}

BetaEnsemble ensemble(int r, double beta) {
    require(r >= 2, "ensemble: r >= 2 required");
    require(std::isfinite(beta), "ensemble: beta must be finite");
    BetaEnsemble e;
    e.r = r;
    e.beta = beta;
    e.beta_is_zero = (beta == 0.0);
    e.log_weights.resize(r - 1);
    for (int j = 1; j < r; ++j) e.log_weights[j - 1] = beta * log_lambda(r, j);
    double m = *std::max_element(e.log_weights.begin(), e.log_weights.end());
    double z = 0.0;
    for (double lv : e.log_weights) z += std::exp(lv - m);
    e.log_partition = m + std::log(z);
    e.probs.resize(r - 1);
    double wmean = 0.0;
    for (int j = 0; j < r - 1; ++j) {
        e.probs[j] = std::exp(e.log_weights[j] - e.log_partition);
        wmean += e.probs[j] * e.log_weights[j];
    }
    e.entropy = e.log_partition - wmean;
    return e;
}

double ensemble_entropy(int r, double beta) { return ensemble(r, beta).entropy; }

double srb_decomposition_check(int r, double beta) {
    double lhs = ensemble(r, beta).entropy;
    // Right side of the decomposition, built from t_j = beta*log(lambda_j/r^2):
    // S = -h/(Z/r^{2b+1}) + log r + log(Z/r^{2b+1}),
    // with h/(Z/r^{2b+1}) the t-weighted mean.
    double logr = std::log(static_cast<double>(r));
    std::vector<double> t(r - 1);
    for (int j = 1; j < r; ++j) t[j - 1] = beta * (log_lambda(r, j) - 2.0 * logr);
    double g = *std::max_element(t.begin(), t.end());
    double a = 0.0, wmean = 0.0;
    for (double tv : t) a += std::exp(tv - g);
    for (double tv : t) wmean += std::exp(tv - g) / a * tv;
    double log_z_scaled = g + std::log(a) - logr; // log(sum (1/r) e^{t_j})
    double rhs = -wmean + logr + log_z_scaled;
    return std::abs(lhs - rhs);
}

namespace {

// Integrals on (0,1) under s = (1+tanh t)/2, which maps s^b(1-s)^b ds to
// 2^{-2b-1} sech^{2b+2}(t) dt and absorbs both endpoint singularities.
// f(t) = extra factor (1 for c_beta, log s for d_beta).

double log_sech(double t) {
    double a = std::abs(t);
    // log(1/cosh t) = log 2 - a - log1p(e^{-2a})
    return std::log(2.0) - a - std::log1p(std::exp(-2.0 * a));
}

double log_s_of_t(double t) {
    // s = 1/(1+e^{-2t})
    if (t >= 0.0) return -std::log1p(std::exp(-2.0 * t));
    return 2.0 * t - std::log1p(std::exp(2.0 * t));
}

template <typename F>
double tanh_rule(double beta, double tmin, double tmax, F&& factor) {
    auto integrand = [&](double t) {
        double lv = -(2.0 * beta + 1.0) * std::log(2.0) + (2.0 * beta + 2.0) * log_sech(t);
        return std::exp(lv) * factor(t);
    };
    double prev = 0.0;
    double value = 0.0;
    int n = 64;
    for (int pass = 0; pass < 14; ++pass) {
        double step = (tmax - tmin) / n;
        double sum = 0.5 * (integrand(tmin) + integrand(tmax));
        for (int i = 1; i < n; ++i) sum += integrand(tmin + step * i);
        value = sum * step;
        if (pass > 2 && std::abs(value - prev) <= 1e-12 * std::abs(value)) break;
        prev = value;
        n *= 2;
    }
    return value;
}

double truncation_radius(double beta) {
    // Integrand decays like e^{-(2b+2)|t|}; pick T so the tail is ~1e-16 relative.
    return 38.0 / (2.0 * beta + 2.0) + 12.0;
}

} // namespace

double c_beta(double beta) {
    if (!(beta > -1.0)) throw std::domain_error("c_beta: divergent integral for beta <= -1");
    double T = truncation_radius(beta);
    return tanh_rule(beta, -T, T, [](double) { return 1.0; });
}

double d_beta(double beta) {
    if (!(beta > -1.0)) throw std::domain_error("d_beta: divergent integral for beta <= -1");
    double T = truncation_radius(beta);
    return tanh_rule(beta, -T, T, [](double t) { return log_s_of_t(t); });
}

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: positive argument required");
    double acc = 0.0;
    while (x < 12.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x, inv2 = inv * inv;
    // Asymptotic series; |error| < 3e-15 for x >= 12.
    double series = std::log(x) - 0.5 * inv -
                    inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
                            inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    return acc + series;
}

double c_beta_closed_form(double beta) {
    if (!(beta > -1.0)) throw std::domain_error("c_beta_closed_form: beta <= -1");
    return std::exp(2.0 * std::lgamma(beta + 1.0) - std::lgamma(2.0 * beta + 2.0));
}

double d_beta_closed_form(double beta) {
    if (!(beta > -1.0)) throw std::domain_error("d_beta_closed_form: beta <= -1");
    return c_beta_closed_form(beta) * (digamma(beta + 1.0) - digamma(2.0 * beta + 2.0));
}

AsymptoticConstants asymptotic_constants(double beta) {
    AsymptoticConstants a;
    a.beta = beta;
    a.beta_is_zero = (beta == 0.0);
    a.c = c_beta(beta);
    a.d = d_beta(beta);
    if (!(a.c > 0.0)) throw std::logic_error("asymptotic_constants: c must be positive");
    if (!(a.d < 0.0)) throw std::logic_error("asymptotic_constants: d must be negative");
    double cf = c_beta_closed_form(beta);
    double df = d_beta_closed_form(beta);
    if (std::abs(a.c - cf) > 1e-9 * std::abs(cf) || std::abs(a.d - df) > 1e-9 * std::abs(df))
        throw std::logic_error("asymptotic_constants: quadrature and closed forms disagree");
    a.limit = -2.0 * beta * a.d / a.c + std::log(a.c);
    return a;
}

double large_rank_limit(double beta) {
    if (!(beta > -1.0))
        throw std::domain_error("large_rank_limit: limit is -infinity for beta <= -1");
    return asymptotic_constants(beta).limit;
}

ScanTable limit_convergence_scan(double beta, const std::vector<int>& r_values) {
    require(!r_values.empty(), "limit_convergence_scan: empty r list");
    ScanTable t;
    t.beta = beta;
    t.limit = large_rank_limit(beta);
    for (int r : r_values) {
        ScanRow row;
        row.r = r;
        row.s_minus_log_r = ensemble_entropy(r, beta) - std::log(static_cast<double>(r));
        row.gap = row.s_minus_log_r - t.limit;
        t.rows.push_back(row);
    }
    t.gaps_monotone = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        if (std::abs(t.rows[i].gap) > std::abs(t.rows[i - 1].gap)) {
            t.gaps_monotone = false;
            break;
        }
    }
    // O(1/r) decay check across doubling rows (0.75 leaves headroom over 0.5)
    t.rate_consistent = true;
    if (beta >= 0.0) {
        for (std::size_t i = 1; i < t.rows.size(); ++i) {
            if (t.rows[i].r != 2 * t.rows[i - 1].r) continue;
            if (std::abs(t.rows[i].gap) > 0.75 * std::abs(t.rows[i - 1].gap) + 1e-14)
                t.rate_consistent = false;
        }
    }
    return t;
}

SandwichVerdict sandwich_check(int r, double beta) {
    require(beta < 0.0, "sandwich_check: beta < 0 required");
    require(r >= 4, "sandwich_check: r >= 4 required");
    SandwichVerdict v;
    v.r = r;
    v.beta = beta;

    double logr = std::log(static_cast<double>(r));
    double z = 0.0;
    for (int j = 1; j < r; ++j) {
        z += std::exp(beta * (log_lambda(r, j) - 2.0 * logr)) / r;
    }
    v.z_scaled = z;

    double tmax = std::atanh(1.0 - 2.0 / r); // s = 1 - 1/r
    v.integral = tanh_rule(beta, -tmax, tmax, [](double) { return 1.0; });
    v.tail = 2.0 * std::exp(beta * std::log(static_cast<double>(r - 1)) - (2.0 * beta + 1.0) * logr);

    v.lower_slack = v.z_scaled - v.integral;
    v.upper_slack = v.integral + v.tail - v.z_scaled;
    double scale = std::max(1.0, v.z_scaled);
    v.holds = v.lower_slack >= -1e-10 * scale && v.upper_slack >= -1e-10 * scale;
    return v;
}

DivergenceFit divergence_fit(double beta, const std::vector<int>& r_values) {
    require(beta <= -1.0, "divergence_fit: beta <= -1 required");
    require(r_values.size() >= 4, "divergence_fit: need at least 4 sample points");
    for (std::size_t i = 1; i < r_values.size(); ++i)
        require(r_values[i] > r_values[i - 1], "divergence_fit: r values must increase");

    DivergenceFit fit;
    fit.beta = beta;
    for (int r : r_values) {
        ScanRow row;
        row.r = r;
        row.s_minus_log_r = ensemble_entropy(r, beta) - std::log(static_cast<double>(r));
        row.gap = row.s_minus_log_r;
        fit.samples.push_back(row);
    }

    fit.strictly_decreasing = true;
    for (std::size_t i = 1; i < fit.samples.size(); ++i) {
        if (fit.samples[i].gap >= fit.samples[i - 1].gap) fit.strictly_decreasing = false;
    }
    fit.total_drop = fit.samples.front().gap - fit.samples.back().gap;

    // Least squares of the leading form: y ~ a - C log r, with the beta = -1
    // case first stripped of its log log r correction.
    fit.model = (beta == -1.0) ? "affine_in_log_r_after_loglog_correction" : "affine_in_log_r";
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    auto n = static_cast<double>(fit.samples.size());
    for (const auto& row : fit.samples) {
        double x = std::log(static_cast<double>(row.r));
        double y = row.gap;
        if (beta == -1.0) y -= std::log(x); // log log r correction
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.leading_coefficient = -slope;
    return fit;
}

} // namespace todalab::spectrum
