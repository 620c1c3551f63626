// Shared fixtures and generators for the unit tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "isc/analytics.hpp"
#include "isc/domain.hpp"
#include "isc/spec_io.hpp"

namespace isc::test {

inline std::string data_path(const std::string& rel) { return std::string(ISC_DATA_DIR) + "/" + rel; }

// Table rows of the bundled music club, types in column order.
inline const std::vector<std::vector<double>> kMusicSupply{
    {0.4, 0.3, 0.1, 0.1, 0.1},   {0.4, 0.2, 0.2, 0.15, 0.05}, {0.3, 0.3, 0.2, 0.1, 0.1},
    {0.2, 0.3, 0.3, 0.15, 0.05}, {0.5, 0.05, 0.2, 0.15, 0.1}, {0.1, 0.4, 0.1, 0.1, 0.3}};
inline const std::vector<std::vector<double>> kMusicDemand{
    {0.1, 0.4, 0.3, 0.1, 0.1},  {0.05, 0.5, 0.1, 0.3, 0.05}, {0.1, 0.2, 0.3, 0.2, 0.2},
    {0.1, 0.4, 0.3, 0.15, 0.05}, {0.1, 0.4, 0.2, 0.2, 0.1},  {0.2, 0.3, 0.1, 0.2, 0.2}};

inline Population music_club(std::uint64_t K = 2) {
    std::vector<PeerProfile> peers;
    for (std::size_t i = 0; i < kMusicSupply.size(); ++i) {
        peers.push_back({K, TypeDistribution::from_weights(kMusicSupply[i]), 1.0,
                         TypeDistribution::from_weights(kMusicDemand[i])});
    }
    return Population(std::move(peers), {"Pop", "Classical", "Oldies", "World", "Alternative"});
}

// Music club with k = 2 and rho chosen to give the requested k rho.
inline MeanFieldModel music_model(double k_rho, int d = 1) {
    return MeanFieldModel::from_population(music_club(2), ClubParams(k_rho / 2.0, d));
}

// splitmix64; small, seedable and independent of the library's generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

    // Random pmf; sparse draws zero out entries with probability 1/3 (one entry kept).
    std::vector<double> pmf(std::size_t s_max, bool sparse = false) {
        std::vector<double> w(s_max);
        double sum = 0.0;
        for (auto& x : w) {
            x = -std::log(1.0 - uniform());
            if (sparse && index(3) == 0) x = 0.0;
            sum += x;
        }
        if (sum == 0.0) {
            w[index(s_max)] = 1.0;
            sum = 1.0;
        }
        for (auto& x : w) x /= sum;
        return w;
    }

    TypeDistribution distribution(std::size_t s_max, bool sparse = false) {
        return TypeDistribution::from_weights(pmf(s_max, sparse));
    }

private:
    std::uint64_t state_;
};

// Random heterogeneous population with a common demand rate.
inline Population random_population(Rng& rng, std::size_t peers, std::size_t s_max, double M = 1.0) {
    std::vector<PeerProfile> profiles;
    for (std::size_t i = 0; i < peers; ++i) {
        profiles.push_back({1 + rng.next() % 5, rng.distribution(s_max, true), M, rng.distribution(s_max, true)});
    }
    return Population(std::move(profiles));
}

// Direct evaluation of the averaged join probability.
inline double direct_p_bar(const Population& pop, const TypeDistribution& g, double k_rho, int d, double n) {
    double total = 0.0;
    for (const auto& peer : pop.peers()) {
        double p = 0.0;
        for (std::size_t s = 0; s < g.s_max(); ++s) p += peer.demand[s] * (1.0 - std::exp(-n * k_rho * g[s]));
        double P = 1.0;
        for (int j = 0; j < d; ++j) P *= p;
        total += P;
    }
    return total / static_cast<double>(pop.size());
}

} // namespace isc::test
