// Distributions over chunk types, peer profiles and the supply/demand
// aggregation algebra of an information sharing club.
//
// Types are indexed 0..s_max-1 internally; index s corresponds to rank s+1.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isc/errors.hpp"

namespace isc {

// Maps an old type index to its new index: perm[old] = new.
using Permutation = std::vector<std::size_t>;

Permutation invert(const Permutation& perm);

class TypeDistribution {
public:
    static constexpr double kSumTolerance = 1e-9;

    // Takes the probabilities as-is; throws std::invalid_argument if any entry
    // is negative or non-finite, or the sum is off by more than kSumTolerance.
    explicit TypeDistribution(std::vector<double> probs);

    // Normalizes non-negative weights with a positive sum.
    static TypeDistribution from_weights(std::span<const double> weights);
    static TypeDistribution uniform(std::size_t s_max);
    static TypeDistribution point_mass(std::size_t s_max, std::size_t index);

    std::size_t s_max() const { return probs_.size(); }
    double operator[](std::size_t index) const { return probs_[index]; }
    std::span<const double> probs() const { return probs_; }

    // Relabels types: result[perm[s]] = (*this)[s].
    TypeDistribution permuted(const Permutation& perm) const;

    double norm() const;

    friend bool operator==(const TypeDistribution&, const TypeDistribution&) = default;

private:
    std::vector<double> probs_;
};

double inner_product(const TypeDistribution& a, const TypeDistribution& b);

struct PeerProfile {
    std::uint64_t payload_size = 0; // K_i chunks
    TypeDistribution supply;        // g_i
    double demand_rate = 1.0;       // M_i
    TypeDistribution demand;        // h_i
};

class Population {
public:
    // Validates: at least one peer, shared s_max, positive demand rates and a
    // positive mean payload. labels may be empty or have s_max entries.
    explicit Population(std::vector<PeerProfile> peers, std::vector<std::string> labels = {});

    std::size_t size() const { return peers_.size(); }
    std::size_t s_max() const { return peers_.front().supply.s_max(); }
    std::span<const PeerProfile> peers() const { return peers_; }
    const PeerProfile& peer(std::size_t i) const { return peers_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::uint64_t total_payload() const;
    double mean_payload() const;

    // Relabels every peer's supply and demand and the label table.
    Population permuted(const Permutation& perm) const;

private:
    std::vector<PeerProfile> peers_;
    std::vector<std::string> labels_;
};

class ClubParams {
public:
    ClubParams(double search_efficiency, int request_size);

    double search_efficiency() const { return rho_; }
    int request_size() const { return d_; }

private:
    double rho_;
    int d_;
};

// K_i-weighted mixture of member supply distributions. Throws ModelError
// ("no supply mass") for an empty subset or zero total payload.
TypeDistribution aggregate_supply(const Population& pop, std::span<const std::size_t> subset);
TypeDistribution aggregate_supply(const Population& pop);

// M_i-weighted mixture of member demand distributions.
TypeDistribution aggregate_demand(const Population& pop, std::span<const std::size_t> subset);
TypeDistribution aggregate_demand(const Population& pop);

struct Canonicalized {
    Population population;
    Permutation permutation; // old label -> s-rank index
};

// Relabels types so the aggregate supply is non-increasing. Ties keep the
// original label order.
Canonicalized canonicalize_sranks(const Population& pop);

// Type -> p-rank index, by descending aggregate demand; ties by s-rank.
Permutation popularity_ranks(const Population& pop);

} // namespace isc
