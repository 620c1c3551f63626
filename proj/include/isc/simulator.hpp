// Stochastic agent-based club: materialized payloads, synchronous rounds of
// requests, join/leave decisions on request success.
//
// Each round every peer issues one request of d demand instances drawn from
// its h_i. An instance of type s succeeds if at least one visible copy of s is
// found, each copy independently with probability rho. Visible copies are the
// current members' payloads, minus the requester's own unless self_supply is
// set (in which case the requester's own payload always counts). The request
// succeeds iff all instances do; success decides next-round membership. All
// peers are evaluated against the same snapshot.
//
// Streams: run j of an ensemble uses seed (base ^ j) to seed std::mt19937_64.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <variant>
#include <vector>

#include "isc/domain.hpp"

namespace isc {

enum class PayloadMode { fixed_multinomial, poisson };

const char* to_string(PayloadMode mode);

struct SimConfig {
    std::uint64_t seed = 1;
    std::size_t rounds = 1000;
    std::size_t burn_in = 0;
    PayloadMode payload_mode = PayloadMode::fixed_multinomial;
    bool self_supply = false;

    void validate() const;
};

// Either a fraction of peers (chosen uniformly at random) or explicit indices.
using InitialMembership = std::variant<double, std::vector<std::size_t>>;

struct RoundResult {
    std::size_t joins = 0;
    std::size_t leaves = 0;
    double success_rate = 0.0; // satisfied requests / N
};

class SimState;

// Draws payloads and the initial membership; deterministic given cfg.seed.
// Throws std::invalid_argument for a fraction outside [0, 1] or bad indices.
SimState init(const Population& pop, const ClubParams& params, const SimConfig& cfg,
              const InitialMembership& initial);

// Advances one synchronous round in place.
RoundResult step(SimState& state);

class SimState {
public:
    struct Chunk {
        std::uint32_t type;
        std::uint32_t count;
    };

    std::size_t round() const { return round_; }
    std::size_t size() const { return members_; }
    std::size_t population() const { return membership_.size(); }
    bool is_member(std::size_t peer) const { return membership_[peer] != 0; }
    // Sparse payload of a peer, ascending by type.
    const std::vector<Chunk>& payload(std::size_t peer) const { return payloads_[peer]; }
    std::uint64_t payload_chunks(std::size_t peer) const;
    // Copies of each type held by current members.
    const std::vector<std::uint64_t>& shared_counts() const { return shared_; }

private:
    friend SimState init(const Population&, const ClubParams&, const SimConfig&, const InitialMembership&);
    friend RoundResult step(SimState&);

    struct Context;
    std::shared_ptr<const Context> ctx_;
    std::vector<std::vector<Chunk>> payloads_;
    std::vector<char> membership_;
    std::vector<std::uint64_t> shared_;
    std::size_t members_ = 0;
    std::size_t round_ = 0;
    std::mt19937_64 rng_;
};

struct Trajectory {
    std::vector<std::size_t> sizes;      // sizes[0] is the initial membership
    std::vector<std::size_t> joins;      // joins[0] = 0
    std::vector<std::size_t> leaves;     // leaves[0] = 0
    std::vector<double> empirical_success; // NaN at round 0

    std::size_t rounds() const { return sizes.size() - 1; }
    // Mean of sizes[t] / N over t > burn_in (over all rounds if none remain).
    double equilibrium_fraction(std::size_t burn_in, std::size_t population) const;
};

// Runs cfg.rounds rounds from the given state.
Trajectory run(SimState state, const SimConfig& cfg);

struct EnsembleSummary {
    std::size_t population = 0;
    std::vector<double> mean_frac; // per round, across seeds
    std::vector<double> std_frac;  // population standard deviation
    std::vector<double> equilibrium_fraction; // per seed, after burn-in
    std::vector<std::size_t> final_size;      // per seed
    std::size_t emptied = 0;   // seeds ending with an empty club
    std::size_t sustained = 0; // seeds ending with a non-empty club

    double mean_equilibrium_fraction() const;
    double std_equilibrium_fraction() const;
};

// n_seeds independent runs; threads > 1 runs seeds concurrently. Results do
// not depend on the thread count.
EnsembleSummary ensemble(const Population& pop, const ClubParams& params, const SimConfig& cfg,
                         const InitialMembership& initial, std::size_t n_seeds, std::size_t threads = 1);

} // namespace isc
