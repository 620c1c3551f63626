#include "isc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace isc {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
    return std::min(bound - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(bound)));
}

// Cumulative table whose tail (from the last positive-mass type) is exactly 1.
std::vector<double> cumulative(const TypeDistribution& dist) {
    std::vector<double> cdf(dist.s_max());
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t s = 0; s < cdf.size(); ++s) {
        acc += dist[s];
        cdf[s] = acc;
        if (dist[s] > 0.0) last = s;
    }
    std::fill(cdf.begin() + static_cast<std::ptrdiff_t>(last), cdf.end(), 1.0);
    return cdf;
}

std::uint32_t sample(const std::vector<double>& cdf, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::uint32_t>(it - cdf.begin());
}

// Inverse-transform Poisson; large means are split into summed pieces.
std::uint64_t poisson(double mean, std::mt19937_64& rng) {
    constexpr double kPiece = 30.0;
    std::uint64_t total = 0;
    while (mean > 0.0) {
        const double lambda = std::min(mean, kPiece);
        mean -= lambda;
        double p = std::exp(-lambda);
        double cdf = p;
        const double u = uniform01(rng);
        std::uint64_t k = 0;
        while (u > cdf && p > 0.0) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cdf += p;
        }
        total += k;
    }
    return total;
}

} // namespace

struct SimState::Context {
    std::vector<std::vector<double>> demand_cdfs; // per demand class
    std::vector<std::size_t> class_of_peer;
    double rho = 1.0;
    int d = 1;
    bool self_supply = false;
    std::vector<double> fail_table; // (1 - rho)^c

    double fail_probability(std::uint64_t copies) const {
        if (copies < fail_table.size()) return fail_table[copies];
        return std::pow(1.0 - rho, static_cast<double>(copies));
    }
};

const char* to_string(PayloadMode mode) {
    return mode == PayloadMode::poisson ? "poisson" : "fixed_multinomial";
}

void SimConfig::validate() const {
    if (burn_in > 0 && burn_in >= rounds) {
        throw std::invalid_argument("burn-in must be smaller than the number of rounds");
    }
}

std::uint64_t SimState::payload_chunks(std::size_t peer) const {
    std::uint64_t total = 0;
    for (const auto& c : payloads_[peer]) total += c.count;
    return total;
}

SimState init(const Population& pop, const ClubParams& params, const SimConfig& cfg,
              const InitialMembership& initial) {
    cfg.validate();
    const std::size_t N = pop.size();
    const std::size_t s_max = pop.s_max();

    auto ctx = std::make_shared<SimState::Context>();
    ctx->rho = params.search_efficiency();
    ctx->d = params.request_size();
    ctx->self_supply = cfg.self_supply;
    std::map<std::vector<double>, std::size_t> classes;
    for (const auto& peer : pop.peers()) {
        std::vector<double> key(peer.demand.probs().begin(), peer.demand.probs().end());
        auto [it, inserted] = classes.try_emplace(std::move(key), ctx->demand_cdfs.size());
        if (inserted) ctx->demand_cdfs.push_back(cumulative(peer.demand));
        ctx->class_of_peer.push_back(it->second);
    }
    const std::uint64_t total = pop.total_payload();
    ctx->fail_table.resize(static_cast<std::size_t>(std::min<std::uint64_t>(total, 1u << 20)) + 1);
    for (std::size_t c = 0; c < ctx->fail_table.size(); ++c) {
        ctx->fail_table[c] = std::pow(1.0 - ctx->rho, static_cast<double>(c));
    }

    SimState state;
    state.ctx_ = ctx;
    state.rng_.seed(cfg.seed);
    state.payloads_.resize(N);
    std::vector<std::uint64_t> counts(s_max);
    for (std::size_t i = 0; i < N; ++i) {
        const auto& peer = pop.peer(i);
        std::fill(counts.begin(), counts.end(), 0);
        if (cfg.payload_mode == PayloadMode::fixed_multinomial) {
            const auto cdf = cumulative(peer.supply);
            for (std::uint64_t k = 0; k < peer.payload_size; ++k) ++counts[sample(cdf, state.rng_)];
        } else {
            for (std::size_t s = 0; s < s_max; ++s) {
                const double mean = static_cast<double>(peer.payload_size) * peer.supply[s];
                if (mean > 0.0) counts[s] = poisson(mean, state.rng_);
            }
        }
        for (std::size_t s = 0; s < s_max; ++s) {
            if (counts[s] > 0) {
                state.payloads_[i].push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(counts[s])});
            }
        }
    }

    state.membership_.assign(N, 0);
    if (const auto* frac = std::get_if<double>(&initial)) {
        if (!(*frac >= 0.0 && *frac <= 1.0)) {
            throw std::invalid_argument("initial membership fraction must lie in [0, 1]");
        }
        const auto m = static_cast<std::size_t>(std::llround(*frac * static_cast<double>(N)));
        std::vector<std::size_t> order(N);
        for (std::size_t i = 0; i < N; ++i) order[i] = i;
        for (std::size_t i = 0; i < m; ++i) {
            std::swap(order[i], order[i + uniform_index(state.rng_, N - i)]);
            state.membership_[order[i]] = 1;
        }
    } else {
        for (auto i : std::get<std::vector<std::size_t>>(initial)) {
            if (i >= N) throw std::invalid_argument("initial member index out of range");
            state.membership_[i] = 1;
        }
    }

    state.shared_.assign(s_max, 0);
    for (std::size_t i = 0; i < N; ++i) {
        if (!state.membership_[i]) continue;
        ++state.members_;
        for (const auto& c : state.payloads_[i]) state.shared_[c.type] += c.count;
    }
    return state;
}

RoundResult step(SimState& state) {
    const auto& ctx = *state.ctx_;
    const std::size_t N = state.membership_.size();
    std::vector<char> next(N, 0);
    std::size_t satisfied = 0;

    for (std::size_t i = 0; i < N; ++i) {
        const auto& cdf = ctx.demand_cdfs[ctx.class_of_peer[i]];
        const auto& own = state.payloads_[i];
        const bool member = state.membership_[i] != 0;
        bool ok = true;
        for (int k = 0; k < ctx.d && ok; ++k) {
            const std::uint32_t type = sample(cdf, state.rng_);
            std::uint64_t copies = state.shared_[type];
            const auto it = std::lower_bound(own.begin(), own.end(), type,
                                             [](const SimState::Chunk& c, std::uint32_t t) { return c.type < t; });
            const std::uint64_t mine = (it != own.end() && it->type == type) ? it->count : 0;
            if (member && !ctx.self_supply) {
                copies -= mine;
            } else if (!member && ctx.self_supply) {
                copies += mine;
            }
            if (copies == 0) {
                ok = false;
                break;
            }
            const double fail = ctx.fail_probability(copies);
            if (fail > 0.0) ok = uniform01(state.rng_) >= fail;
        }
        next[i] = ok ? 1 : 0;
        satisfied += ok ? 1 : 0;
    }

    RoundResult result;
    result.success_rate = static_cast<double>(satisfied) / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
        if (next[i] == state.membership_[i]) continue;
        if (next[i]) {
            ++result.joins;
            for (const auto& c : state.payloads_[i]) state.shared_[c.type] += c.count;
        } else {
            ++result.leaves;
            for (const auto& c : state.payloads_[i]) state.shared_[c.type] -= c.count;
        }
    }
    state.members_ = state.members_ + result.joins - result.leaves;
    state.membership_ = std::move(next);
    ++state.round_;
    return result;
}

double Trajectory::equilibrium_fraction(std::size_t burn_in, std::size_t population) const {
    const std::size_t first = burn_in + 1 < sizes.size() ? burn_in + 1 : 0;
    double sum = 0.0;
    for (std::size_t t = first; t < sizes.size(); ++t) sum += static_cast<double>(sizes[t]);
    return sum / static_cast<double>(sizes.size() - first) / static_cast<double>(population);
}

Trajectory run(SimState state, const SimConfig& cfg) {
    cfg.validate();
    Trajectory traj;
    const std::size_t rows = cfg.rounds + 1;
    traj.sizes.reserve(rows);
    traj.joins.reserve(rows);
    traj.leaves.reserve(rows);
    traj.empirical_success.reserve(rows);
    traj.sizes.push_back(state.size());
    traj.joins.push_back(0);
    traj.leaves.push_back(0);
    traj.empirical_success.push_back(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < cfg.rounds; ++t) {
        const auto r = step(state);
        traj.sizes.push_back(state.size());
        traj.joins.push_back(r.joins);
        traj.leaves.push_back(r.leaves);
        traj.empirical_success.push_back(r.success_rate);
    }
    return traj;
}

double EnsembleSummary::mean_equilibrium_fraction() const {
    double sum = 0.0;
    for (double f : equilibrium_fraction) sum += f;
    return sum / static_cast<double>(equilibrium_fraction.size());
}

double EnsembleSummary::std_equilibrium_fraction() const {
    const double mean = mean_equilibrium_fraction();
    double sq = 0.0;
    for (double f : equilibrium_fraction) sq += (f - mean) * (f - mean);
    return std::sqrt(sq / static_cast<double>(equilibrium_fraction.size()));
}

EnsembleSummary ensemble(const Population& pop, const ClubParams& params, const SimConfig& cfg,
                         const InitialMembership& initial, std::size_t n_seeds, std::size_t threads) {
    if (n_seeds < 1) throw std::invalid_argument("ensemble needs at least one seed");
    cfg.validate();
    const std::size_t N = pop.size();
    std::vector<std::vector<std::size_t>> sizes(n_seeds);

    auto run_seed = [&](std::size_t j) {
        SimConfig c = cfg;
        c.seed = cfg.seed ^ static_cast<std::uint64_t>(j);
        sizes[j] = run(init(pop, params, c, initial), c).sizes;
    };
    threads = std::clamp<std::size_t>(threads, 1, n_seeds);
    if (threads == 1) {
        for (std::size_t j = 0; j < n_seeds; ++j) run_seed(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < n_seeds; j = next++) run_seed(j);
            });
        }
        for (auto& t : pool) t.join();
    }

    EnsembleSummary summary;
    summary.population = N;
    const std::size_t rows = cfg.rounds + 1;
    summary.mean_frac.assign(rows, 0.0);
    summary.std_frac.assign(rows, 0.0);
    const double n = static_cast<double>(N);
    const double seeds = static_cast<double>(n_seeds);
    for (std::size_t t = 0; t < rows; ++t) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_seeds; ++j) sum += static_cast<double>(sizes[j][t]) / n;
        const double mean = sum / seeds;
        double sq = 0.0;
        for (std::size_t j = 0; j < n_seeds; ++j) {
            const double dev = static_cast<double>(sizes[j][t]) / n - mean;
            sq += dev * dev;
        }
        summary.mean_frac[t] = mean;
        summary.std_frac[t] = std::sqrt(sq / seeds);
    }
    for (std::size_t j = 0; j < n_seeds; ++j) {
        Trajectory view;
        view.sizes = std::move(sizes[j]);
        summary.equilibrium_fraction.push_back(view.equilibrium_fraction(cfg.burn_in, N));
        summary.final_size.push_back(view.sizes.back());
        (view.sizes.back() == 0 ? summary.emptied : summary.sustained) += 1;
    }
    return summary;
}

} // namespace isc
