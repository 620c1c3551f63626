#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "isc/domain.hpp"
#include "isc/scenarios.hpp"
#include "support.hpp"

using namespace isc;
using isc::test::Rng;

namespace {

double sum(const TypeDistribution& d) {
    const auto p = d.probs();
    return std::accumulate(p.begin(), p.end(), 0.0);
}

std::vector<std::size_t> all_peers(const Population& pop) {
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

} // namespace

TEST_CASE("type distribution validation") {
    CHECK_NOTHROW(TypeDistribution({0.5, 0.5}));
    CHECK_NOTHROW(TypeDistribution({0.5, 0.5 + 5e-10}));
    CHECK_THROWS_AS(TypeDistribution({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(TypeDistribution({1.2, -0.2}), std::invalid_argument);
    CHECK_THROWS_AS(TypeDistribution(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(TypeDistribution::from_weights(std::vector<double>{0.0, 0.0}), std::invalid_argument);

    const auto w = TypeDistribution::from_weights(std::vector<double>{1.0, 3.0});
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(TypeDistribution::uniform(4)[2] == 0.25);
    CHECK(TypeDistribution::point_mass(3, 1)[1] == 1.0);
}

TEST_CASE("population and params validation") {
    const auto g = TypeDistribution::uniform(2);
    CHECK_THROWS_AS(Population({}), std::invalid_argument);
    CHECK_THROWS_AS(Population({{0, g, 1.0, g}, {0, g, 1.0, g}}), std::invalid_argument);
    CHECK_THROWS_AS(Population({{1, g, 0.0, g}}), std::invalid_argument);
    CHECK_THROWS_AS(Population({{1, g, 1.0, TypeDistribution::uniform(3)}}), std::invalid_argument);
    CHECK_THROWS_AS(Population({{1, g, 1.0, g}}, {"only one label"}), std::invalid_argument);
    CHECK_NOTHROW(Population({{0, g, 1.0, g}, {4, g, 1.0, g}}));
    CHECK(Population({{0, g, 1.0, g}, {4, g, 1.0, g}}).mean_payload() == 2.0);

    CHECK_THROWS_AS(ClubParams(0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ClubParams(1.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ClubParams(0.5, 0), std::invalid_argument);
    CHECK_NOTHROW(ClubParams(1.0, 3));
}

TEST_CASE("music club aggregates against the table rows") {
    const auto pop = test::music_club();
    const auto g = aggregate_supply(pop);
    const auto h = aggregate_demand(pop);

    // Column means of the table rows, computed independently.
    for (std::size_t s = 0; s < 5; ++s) {
        double gs = 0.0;
        double hs = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            gs += test::kMusicSupply[i][s] / 6.0;
            hs += test::kMusicDemand[i][s] / 6.0;
        }
        CHECK(g[s] == doctest::Approx(gs).epsilon(1e-12));
        CHECK(h[s] == doctest::Approx(hs).epsilon(1e-12));
    }

    // Reference aggregate rows; three of the supply entries agree to the stated
    // precision, 0.18 and 0.12 are off by 1/300.
    const double reference_h[] = {0.108, 0.367, 0.217, 0.192, 0.117};
    for (std::size_t s = 0; s < 5; ++s) CHECK(std::abs(h[s] - reference_h[s]) < 5e-4);
    CHECK(std::abs(g[0] - 0.317) < 5e-4);
    CHECK(std::abs(g[1] - 0.258) < 5e-4);
    CHECK(std::abs(g[3] - 0.125) < 5e-4);
    CHECK(std::abs(g[2] - 0.18) == doctest::Approx(1.0 / 300.0));
    CHECK(std::abs(g[4] - 0.12) == doctest::Approx(1.0 / 300.0));
}

TEST_CASE("aggregate weighting") {
    const TypeDistribution a({1.0, 0.0});
    const TypeDistribution b({0.0, 1.0});

    SUBCASE("supply weighted by payload size") {
        const Population pop({{1, a, 1.0, a}, {3, b, 1.0, a}});
        const auto g = aggregate_supply(pop);
        CHECK(g[0] == 0.25);
        CHECK(g[1] == 0.75);
    }
    SUBCASE("demand weighted by demand rate") {
        const Population pop({{1, a, 1.0, a}, {1, a, 2.0, b}});
        const auto h = aggregate_demand(pop);
        CHECK(h[0] == doctest::Approx(1.0 / 3.0));
        CHECK(h[1] == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("singletons are exact") {
        const auto pop = test::music_club();
        for (std::size_t i = 0; i < pop.size(); ++i) {
            const std::vector<std::size_t> one{i};
            CHECK(aggregate_supply(pop, one) == pop.peer(i).supply);
            CHECK(aggregate_demand(pop, one) == pop.peer(i).demand);
        }
    }
    SUBCASE("undefined aggregates") {
        const Population pop({{0, a, 1.0, a}, {2, b, 1.0, b}});
        const std::vector<std::size_t> zero_payload{0};
        const std::vector<std::size_t> none;
        CHECK_THROWS_AS(aggregate_supply(pop, zero_payload), ModelError);
        CHECK_THROWS_AS(aggregate_supply(pop, none), ModelError);
        CHECK_THROWS_AS(aggregate_demand(pop, none), ModelError);
    }
}

TEST_CASE("supply and popularity ranks of the music club") {
    const auto pop = test::music_club();
    const auto canon = canonicalize_sranks(pop);
    CHECK(canon.permutation == Permutation{0, 1, 2, 3, 4});
    CHECK(canon.population.labels() == pop.labels());

    // Classical, Oldies, World, Alternative, Pop.
    const auto pr = popularity_ranks(pop);
    CHECK(pr == Permutation{4, 0, 1, 2, 3});
}

TEST_CASE("rank permutations") {
    SUBCASE("reversed Zipf is reversed") {
        const auto z = zipf_distribution({1.0, 3});
        const TypeDistribution rev({z[2], z[1], z[0]});
        const Population pop({{1, rev, 1.0, rev}});
        CHECK(canonicalize_sranks(pop).permutation == Permutation{2, 1, 0});
    }
    SUBCASE("uniform demand keeps s-rank order") {
        const auto g = zipf_distribution({0.7, 4});
        const Population pop({{1, g, 1.0, TypeDistribution::uniform(4)}});
        CHECK(popularity_ranks(pop) == Permutation{0, 1, 2, 3});
    }
    SUBCASE("demand equal to supply gives p-rank equal to s-rank") {
        Rng rng(7);
        const auto g = rng.distribution(6);
        const Population pop({{1, g, 1.0, g}});
        const auto canon = canonicalize_sranks(pop);
        CHECK(popularity_ranks(canon.population) == Permutation{0, 1, 2, 3, 4, 5});
    }
    SUBCASE("invert") {
        const Permutation p{2, 0, 1};
        CHECK(invert(p) == Permutation{1, 2, 0});
        CHECK_THROWS_AS(TypeDistribution::uniform(3).permuted(Permutation{0, 0, 1}), std::invalid_argument);
    }
}

TEST_CASE("aggregation properties on random populations") {
    Rng rng(20240611);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t s_max = 1 + rng.index(12);
        const std::size_t n = 1 + rng.index(10);
        const auto pop = test::random_population(rng, n, s_max);
        const auto idx = all_peers(pop);

        const auto g = aggregate_supply(pop, idx);
        const auto h = aggregate_demand(pop, idx);
        CHECK(std::abs(sum(g) - 1.0) < 1e-9);
        CHECK(std::abs(sum(h) - 1.0) < 1e-9);

        for (std::size_t s = 0; s < s_max; ++s) {
            double lo = 1.0;
            double hi = 0.0;
            for (const auto& p : pop.peers()) {
                if (p.payload_size == 0) continue;
                lo = std::min(lo, p.supply[s]);
                hi = std::max(hi, p.supply[s]);
            }
            CHECK(g[s] >= lo - 1e-12);
            CHECK(g[s] <= hi + 1e-12);
        }

        // Idempotence on a shared distribution.
        const auto q = rng.distribution(s_max);
        std::vector<PeerProfile> same;
        for (std::size_t i = 0; i < n; ++i) same.push_back({1 + rng.next() % 7, q, 1.0 + rng.uniform(), q});
        const Population shared(same);
        const auto gq = aggregate_supply(shared);
        const auto hq = aggregate_demand(shared);
        for (std::size_t s = 0; s < s_max; ++s) {
            CHECK(std::abs(gq[s] - q[s]) < 1e-12);
            CHECK(std::abs(hq[s] - q[s]) < 1e-12);
        }

        // Canonical order is non-increasing; the inverse recovers every peer exactly.
        const auto canon = canonicalize_sranks(pop);
        const auto gc = aggregate_supply(canon.population);
        for (std::size_t s = 1; s < s_max; ++s) CHECK(gc[s] <= gc[s - 1]);
        const auto back = canon.population.permuted(invert(canon.permutation));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(back.peer(i).supply == pop.peer(i).supply);
            CHECK(back.peer(i).demand == pop.peer(i).demand);
        }
        CHECK(std::abs(sum(gc) - 1.0) < 1e-9);
    }
}
