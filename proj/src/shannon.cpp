#include "todalab/shannon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace todalab::shannon {

namespace {

constexpr double kSumTol = 1e-12;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    require(probs_.size() >= 2, "Distribution: need at least 2 outcomes");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        require(std::isfinite(probs_[i]), "Distribution: non-finite entry at index " + std::to_string(i));
        require(probs_[i] >= 0.0, "Distribution: negative entry at index " + std::to_string(i));
        sum += probs_[i];
    }
    require(std::abs(sum - 1.0) <= kSumTol,
            "Distribution: entries sum to " + std::to_string(sum) + ", not 1");
}

RatioChain::RatioChain(std::vector<double> ratios) : ratios_(std::move(ratios)) {
    require(!ratios_.empty(), "RatioChain: need order r >= 2");
    for (std::size_t i = 0; i < ratios_.size(); ++i) {
        require(std::isfinite(ratios_[i]) && ratios_[i] > 0.0,
                "RatioChain: ratio " + std::to_string(i) + " not strictly positive and finite");
    }
}

double entropy(const Distribution& d) {
    double s = 0.0;
    for (double p : d.probs()) {
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

BoundsReport entropy_bounds_check(const Distribution& d) {
    BoundsReport rep;
    rep.entropy = entropy(d);
    rep.log_r = std::log(static_cast<double>(d.size()));
    rep.min_attained = rep.entropy <= kSumTol;
    rep.max_attained = std::abs(rep.entropy - rep.log_r) <= kSumTol;
    if (rep.entropy < -kSumTol || rep.entropy > rep.log_r + kSumTol)
        throw std::logic_error("entropy outside [0, log r]");

    // Attainment must coincide with the extremal patterns.
    const auto& p = d.probs();
    bool point_mass = std::any_of(p.begin(), p.end(), [](double v) { return v >= 1.0 - kSumTol; });
    double uniform = 1.0 / static_cast<double>(d.size());
    bool is_uniform = std::all_of(p.begin(), p.end(),
                                  [&](double v) { return std::abs(v - uniform) <= 1e-9; });
    rep.pattern_consistent = (rep.min_attained == point_mass) && (rep.max_attained == is_uniform);
    return rep;
}

namespace {

void check_sorted_positive_tail(const Distribution& d, const char* which) {
    const auto& p = d.probs();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        if (p[i] > p[i + 1])
            throw std::invalid_argument(std::string(which) + " is not sorted ascending at index " +
                                        std::to_string(i));
    }
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] <= 0.0)
            throw std::invalid_argument(std::string(which) + " has a zero tail entry at index " +
                                        std::to_string(i));
    }
}

// Index of the first j with q_j/q_{j+1} > p_j/p_{j+1}, or -1 when dominated.
// Compared as cross products to avoid dividing by small entries.
std::ptrdiff_t first_violation(const Distribution& p, const Distribution& q) {
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        if (q[j] * p[j + 1] > p[j] * q[j + 1]) return static_cast<std::ptrdiff_t>(j);
    }
    return -1;
}

} // namespace

bool dominates(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size()) throw std::invalid_argument("dominates: size mismatch");
    check_sorted_positive_tail(p, "p");
    check_sorted_positive_tail(q, "q");
    return first_violation(p, q) == -1;
}

PqVerdict lemma_pq_verdict(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size()) throw std::invalid_argument("lemma_pq_verdict: size mismatch");
    check_sorted_positive_tail(p, "p");
    check_sorted_positive_tail(q, "q");
    std::ptrdiff_t v = first_violation(p, q);
    if (v >= 0)
        throw std::invalid_argument("lemma_pq_verdict: domination fails at ratio index " +
                                    std::to_string(v));
    PqVerdict out;
    out.margin = entropy(p) - entropy(q);
    out.holds = out.margin >= 0.0;
    out.equality = true;
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        if (std::abs(q[j] * p[j + 1] - p[j] * q[j + 1]) >
            1e-14 * std::max(1.0, std::abs(p[j] * q[j + 1]))) {
            out.equality = false;
            break;
        }
    }
    return out;
}

Distribution distribution_from_ratios(const RatioChain& c) {
    const auto& s = c.ratios();
    std::size_t r = c.order();
    // log s^(l) = sum_{k=l}^{r-2} log s_k  (terminal ratio contributes 0)
    std::vector<double> logsuffix(r, 0.0);
    for (std::size_t l = r - 1; l-- > 0;) {
        logsuffix[l] = logsuffix[l + 1] + std::log(s[l]);
    }
    double m = *std::max_element(logsuffix.begin(), logsuffix.end());
    double z = 0.0;
    for (double lv : logsuffix) z += std::exp(lv - m);
    std::vector<double> t(r);
    for (std::size_t j = 0; j < r; ++j) t[j] = std::exp(logsuffix[j] - m) / z;
    return Distribution(std::move(t));
}

RatioChain ratios_of(const Distribution& d) {
    const auto& p = d.probs();
    std::vector<double> s(p.size() - 1);
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        if (p[j] <= 0.0 || p[j + 1] <= 0.0)
            throw std::invalid_argument("ratios_of: distribution must be strictly positive");
        s[j] = p[j] / p[j + 1];
    }
    return RatioChain(std::move(s));
}

double ratio_monotonicity_probe(const RatioChain& c, std::size_t k, double step) {
    const auto& s = c.ratios();
    if (k >= s.size()) throw std::invalid_argument("ratio_monotonicity_probe: index out of range");
    if (!(step > 0.0)) throw std::invalid_argument("ratio_monotonicity_probe: step must be positive");
    if (s[k] - step <= 0.0 || s[k] + step > 1.0)
        throw std::invalid_argument("ratio_monotonicity_probe: step leaves the domain (0,1]");

    auto entropy_at = [&](double sk) {
        std::vector<double> ss = s;
        ss[k] = sk;
        return entropy(distribution_from_ratios(RatioChain(ss)));
    };
    return (entropy_at(s[k] + step) - entropy_at(s[k] - step)) / (2.0 * step);
}

std::pair<Distribution, Distribution> sample_dominating_pair(std::size_t r, SplitMix64& rng) {
    if (r < 2) throw std::invalid_argument("sample_dominating_pair: r >= 2 required");
    std::vector<double> sp(r - 1), sq(r - 1);
    for (std::size_t j = 0; j + 1 < r; ++j) {
        sp[j] = rng.uniform(0.05, 1.0);
        sq[j] = sp[j] * rng.uniform(0.05, 1.0); // shrink keeps q below p ratio-wise
    }
    return {distribution_from_ratios(RatioChain(sp)), distribution_from_ratios(RatioChain(sq))};
}

} // namespace todalab::shannon
