#include "isc/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isc {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": s_max mismatch (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
    }
}

void validate_permutation(const Permutation& perm, std::size_t n) {
    if (perm.size() != n) {
        throw std::invalid_argument("permutation size does not match s_max");
    }
    std::vector<bool> seen(n, false);
    for (auto p : perm) {
        if (p >= n || seen[p]) {
            throw std::invalid_argument("not a permutation");
        }
        seen[p] = true;
    }
}

// Weighted mixture with weights pre-normalized so a single member reproduces
// its distribution bit-for-bit.
template <class Pick>
TypeDistribution mixture(const Population& pop, std::span<const std::size_t> subset,
                         std::span<const double> weights, Pick pick) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> out(pop.s_max(), 0.0);
    for (std::size_t j = 0; j < subset.size(); ++j) {
        const double w = weights[j] / total;
        if (w == 0.0) continue;
        const auto probs = pick(pop.peer(subset[j])).probs();
        for (std::size_t s = 0; s < out.size(); ++s) {
            out[s] += w * probs[s];
        }
    }
    return TypeDistribution(std::move(out));
}

std::vector<std::size_t> all_indices(const Population& pop) {
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

// Stable descending order of values; returns perm[old] = new.
Permutation descending_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    Permutation perm(values.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        perm[order[rank]] = rank;
    }
    return perm;
}

} // namespace

Permutation invert(const Permutation& perm) {
    validate_permutation(perm, perm.size());
    Permutation inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        inv[perm[i]] = i;
    }
    return inv;
}

TypeDistribution::TypeDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("distribution must cover at least one type");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw std::invalid_argument("distribution entries must be finite and non-negative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw std::invalid_argument("distribution sums to " + std::to_string(sum) + ", not 1");
    }
}

TypeDistribution TypeDistribution::from_weights(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("weights must be finite and non-negative");
        }
        sum += w;
    }
    if (!(sum > 0.0)) {
        throw std::invalid_argument("weights must have a positive sum");
    }
    std::vector<double> probs(weights.begin(), weights.end());
    for (double& p : probs) p /= sum;
    return TypeDistribution(std::move(probs));
}

TypeDistribution TypeDistribution::uniform(std::size_t s_max) {
    if (s_max == 0) throw std::invalid_argument("s_max must be positive");
    return TypeDistribution(std::vector<double>(s_max, 1.0 / static_cast<double>(s_max)));
}

TypeDistribution TypeDistribution::point_mass(std::size_t s_max, std::size_t index) {
    if (index >= s_max) throw std::invalid_argument("point mass index out of range");
    std::vector<double> probs(s_max, 0.0);
    probs[index] = 1.0;
    return TypeDistribution(std::move(probs));
}

TypeDistribution TypeDistribution::permuted(const Permutation& perm) const {
    validate_permutation(perm, probs_.size());
    std::vector<double> out(probs_.size());
    for (std::size_t s = 0; s < probs_.size(); ++s) {
        out[perm[s]] = probs_[s];
    }
    return TypeDistribution(std::move(out));
}

double TypeDistribution::norm() const {
    double sq = 0.0;
    for (double p : probs_) sq += p * p;
    return std::sqrt(sq);
}

double inner_product(const TypeDistribution& a, const TypeDistribution& b) {
    require_same_size(a.s_max(), b.s_max(), "inner_product");
    double sum = 0.0;
    for (std::size_t s = 0; s < a.s_max(); ++s) sum += a[s] * b[s];
    return sum;
}

Population::Population(std::vector<PeerProfile> peers, std::vector<std::string> labels)
    : peers_(std::move(peers)), labels_(std::move(labels)) {
    if (peers_.empty()) {
        throw std::invalid_argument("population needs at least one peer");
    }
    const std::size_t s_max = peers_.front().supply.s_max();
    for (std::size_t i = 0; i < peers_.size(); ++i) {
        const auto& p = peers_[i];
        const std::string who = "peer " + std::to_string(i);
        require_same_size(p.supply.s_max(), s_max, who.c_str());
        require_same_size(p.demand.s_max(), s_max, who.c_str());
        if (!(p.demand_rate > 0.0) || !std::isfinite(p.demand_rate)) {
            throw std::invalid_argument(who + ": demand rate must be positive");
        }
    }
    if (!labels_.empty() && labels_.size() != s_max) {
        throw std::invalid_argument("label table must have one entry per type");
    }
    if (total_payload() == 0) {
        throw std::invalid_argument("mean payload must be positive (all payloads are zero)");
    }
}

std::uint64_t Population::total_payload() const {
    std::uint64_t total = 0;
    for (const auto& p : peers_) total += p.payload_size;
    return total;
}

double Population::mean_payload() const {
    return static_cast<double>(total_payload()) / static_cast<double>(peers_.size());
}

Population Population::permuted(const Permutation& perm) const {
    std::vector<PeerProfile> peers;
    peers.reserve(peers_.size());
    for (const auto& p : peers_) {
        peers.push_back({p.payload_size, p.supply.permuted(perm), p.demand_rate, p.demand.permuted(perm)});
    }
    std::vector<std::string> labels;
    if (!labels_.empty()) {
        labels.resize(labels_.size());
        for (std::size_t s = 0; s < labels_.size(); ++s) labels[perm[s]] = labels_[s];
    }
    return Population(std::move(peers), std::move(labels));
}

ClubParams::ClubParams(double search_efficiency, int request_size)
    : rho_(search_efficiency), d_(request_size) {
    if (!(rho_ > 0.0 && rho_ <= 1.0)) {
        throw std::invalid_argument("search efficiency must lie in (0, 1]");
    }
    if (d_ < 1) {
        throw std::invalid_argument("request size must be at least 1");
    }
}

TypeDistribution aggregate_supply(const Population& pop, std::span<const std::size_t> subset) {
    std::vector<double> weights;
    weights.reserve(subset.size());
    double total = 0.0;
    for (auto i : subset) {
        weights.push_back(static_cast<double>(pop.peer(i).payload_size));
        total += weights.back();
    }
    if (subset.empty() || total <= 0.0) {
        throw ModelError("no supply mass");
    }
    return mixture(pop, subset, weights, [](const PeerProfile& p) -> const TypeDistribution& {
        return p.supply;
    });
}

TypeDistribution aggregate_supply(const Population& pop) {
    const auto idx = all_indices(pop);
    return aggregate_supply(pop, idx);
}

TypeDistribution aggregate_demand(const Population& pop, std::span<const std::size_t> subset) {
    if (subset.empty()) {
        throw ModelError("no demand mass: empty subset");
    }
    std::vector<double> weights;
    weights.reserve(subset.size());
    for (auto i : subset) weights.push_back(pop.peer(i).demand_rate);
    return mixture(pop, subset, weights, [](const PeerProfile& p) -> const TypeDistribution& {
        return p.demand;
    });
}

TypeDistribution aggregate_demand(const Population& pop) {
    const auto idx = all_indices(pop);
    return aggregate_demand(pop, idx);
}

Canonicalized canonicalize_sranks(const Population& pop) {
    const auto g = aggregate_supply(pop);
    auto perm = descending_ranks(g.probs());
    return {pop.permuted(perm), std::move(perm)};
}

Permutation popularity_ranks(const Population& pop) {
    return descending_ranks(aggregate_demand(pop).probs());
}

} // namespace isc
