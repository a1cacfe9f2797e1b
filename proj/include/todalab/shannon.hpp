#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "todalab/rng.hpp"

namespace todalab::shannon {

// Finite probability distribution over r >= 2 outcomes. Entries are
// nonnegative and sum to 1 within 1e-12 (validated at construction).
class Distribution {
public:
    explicit Distribution(std::vector<double> probs);

    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }

private:
    std::vector<double> probs_;
};

// Consecutive-ratio parametrization s_0,...,s_{r-2} of a positive
// distribution; the terminal ratio s_{r-1} is fixed to 1.
class RatioChain {
public:
    explicit RatioChain(std::vector<double> ratios);

    const std::vector<double>& ratios() const { return ratios_; }
    std::size_t order() const { return ratios_.size() + 1; } // r

private:
    std::vector<double> ratios_;
};

// Shannon entropy -sum p log p, natural logarithm, 0*log 0 = 0.
double entropy(const Distribution& d);

struct BoundsReport {
    double entropy = 0.0;
    double log_r = 0.0;
    bool min_attained = false;       // S == 0 (within 1e-12)
    bool max_attained = false;       // S == log r (within 1e-12)
    bool pattern_consistent = true;  // attainment matches point mass / uniform
};
BoundsReport entropy_bounds_check(const Distribution& d);

// Consecutive-ratio domination: both inputs sorted ascending with strictly
// positive tails; true iff q[j]/q[j+1] <= p[j]/p[j+1] for all j.
bool dominates(const Distribution& p, const Distribution& q);

struct PqVerdict {
    double margin = 0.0;   // entropy(p) - entropy(q)
    bool holds = false;    // margin >= 0
    bool equality = false; // all consecutive ratios equal
};
// Requires dominates(p, q); throws naming the first violating index otherwise.
PqVerdict lemma_pq_verdict(const Distribution& p, const Distribution& q);

// t_j = s^(j) / sum_l s^(l) with s^(l) the suffix product of the chain.
// Computed in log space; never overflows for finite positive ratios.
Distribution distribution_from_ratios(const RatioChain& c);

// Recover the chain t_j/t_{j+1} of a strictly positive distribution.
RatioChain ratios_of(const Distribution& d);

// Centered finite-difference slope of S(distribution_from_ratios(.)) in s_k.
// The slope is strictly positive whenever every ratio lies in (0,1).
double ratio_monotonicity_probe(const RatioChain& c, std::size_t k, double step);

// Sample a dominating pair (p, q): draw a chain for p with ratios in (0,1),
// then shrink each ratio by an independent factor in (0,1] for q. Domination
// holds by construction.
std::pair<Distribution, Distribution> sample_dominating_pair(std::size_t r, SplitMix64& rng);

} // namespace todalab::shannon
