#include "isc/scenarios.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace isc {

namespace {

std::vector<double> zipf_weights(double beta, std::size_t count) {
    std::vector<double> w(count);
    for (std::size_t s = 0; s < count; ++s) {
        w[s] = std::pow(static_cast<double>(s + 1), -beta);
    }
    return w;
}

TypeDistribution shifted_profile(std::size_t s_max, double beta, long delta) {
    const auto span = static_cast<std::size_t>(std::labs(delta));
    const std::size_t support = s_max - span;
    const auto shape = zipf_weights(beta, support);
    std::vector<double> w(s_max, 0.0);
    // delta >= 0: zero on the first delta ranks, then the Zipf shape restarted.
    // delta < 0: the Zipf shape truncated to the first s_max + delta ranks.
    const std::size_t offset = delta >= 0 ? span : 0;
    for (std::size_t j = 0; j < support; ++j) w[offset + j] = shape[j];
    return TypeDistribution::from_weights(w);
}

} // namespace

void ZipfSpec::validate() const {
    if (s_max < 1) throw std::invalid_argument("s_max must be at least 1");
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("beta must be finite and >= 0");
}

TypeDistribution zipf_distribution(const ZipfSpec& spec) {
    spec.validate();
    return TypeDistribution::from_weights(zipf_weights(spec.beta, spec.s_max));
}

double zipf_norm(const ZipfSpec& spec) {
    spec.validate();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 1; s <= spec.s_max; ++s) {
        const double w = std::pow(static_cast<double>(s), -spec.beta);
        sum += w;
        sum_sq += w * w;
    }
    return std::sqrt(sum_sq) / sum;
}

SupplyDemand shifted_demand(const TypeDistribution& g, double beta, const ShiftSpec& shift) {
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("beta must be finite and >= 0");
    const std::size_t s_max = g.s_max();
    if (static_cast<std::size_t>(std::labs(shift.delta)) >= s_max) {
        throw ModelError("empty overlap");
    }
    if (shift.delta == 0) {
        return {g, g};
    }
    auto shifted = shifted_profile(s_max, beta, shift.delta);
    if (shift.direction == ShiftDirection::demand_lead) {
        return {g, std::move(shifted)};
    }
    return {std::move(shifted), g};
}

RankCoupling::RankCoupling(std::vector<std::vector<double>> joint)
    : joint_(std::move(joint)), marginal_(TypeDistribution::uniform(joint_.empty() ? 1 : joint_.size())) {
    const std::size_t n = joint_.size();
    if (n == 0) throw std::invalid_argument("coupling must be non-empty");
    std::vector<double> f(n, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (joint_[r].size() != n) throw std::invalid_argument("coupling must be square");
        for (double v : joint_[r]) {
            if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("coupling entries must be non-negative");
            f[r] += v;
        }
        total += f[r];
    }
    if (std::abs(total - 1.0) > kTolerance) {
        throw std::invalid_argument("coupling must sum to 1");
    }
    marginal_ = TypeDistribution(std::move(f));
}

TypeDistribution demand_from_pranks(const TypeDistribution& prank_demand, const RankCoupling& coupling) {
    const std::size_t n = coupling.size();
    if (prank_demand.s_max() != n) throw std::invalid_argument("p-rank demand size mismatch");
    const auto& f = coupling.marginal();
    std::vector<double> h(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        if (prank_demand[r] == 0.0) continue;
        if (f[r] == 0.0) throw ModelError("undefined conversion");
        const double scale = prank_demand[r] / f[r];
        for (std::size_t s = 0; s < n; ++s) h[s] += coupling(r, s) * scale;
    }
    return TypeDistribution(std::move(h));
}

MatchStatistics match_statistics(const TypeDistribution& demand, const TypeDistribution& supply) {
    MatchStatistics m;
    m.inner = inner_product(demand, supply);
    m.norm_demand = demand.norm();
    m.norm_supply = supply.norm();
    m.similarity = m.inner / (m.norm_demand * m.norm_supply);
    return m;
}

Population homogeneous_population(std::size_t peers, double mean_payload, const SupplyDemand& dists) {
    if (peers == 0) throw std::invalid_argument("population needs at least one peer");
    if (!(mean_payload > 0.0) || !std::isfinite(mean_payload)) {
        throw std::invalid_argument("mean payload must be positive");
    }
    const auto total = static_cast<std::uint64_t>(std::llround(mean_payload * static_cast<double>(peers)));
    const std::uint64_t base = total / peers;
    const std::uint64_t extra = total % peers;
    std::vector<PeerProfile> out;
    out.reserve(peers);
    for (std::size_t i = 0; i < peers; ++i) {
        out.push_back({base + (i < extra ? 1 : 0), dists.supply, 1.0, dists.demand});
    }
    return Population(std::move(out));
}

void ScenarioSpec::validate() const {
    ZipfSpec{beta, s_max}.validate();
    if (population < 1) throw std::invalid_argument("N must be at least 1");
    if (!(mean_payload > 0.0) || !std::isfinite(mean_payload)) throw std::invalid_argument("k must be positive");
    (void)ClubParams{search_efficiency, request_size};
    if (kind == ScenarioKind::zipf_shift && static_cast<std::size_t>(std::labs(delta)) >= s_max) {
        throw std::invalid_argument("|delta| must be smaller than s_max");
    }
}

SupplyDemand ScenarioSpec::distributions() const {
    const auto g = zipf_distribution({beta, s_max});
    if (kind == ScenarioKind::zipf_perfect) {
        return {g, g};
    }
    return shifted_demand(g, beta, {delta, direction});
}

const char* to_string(ShiftDirection dir) {
    return dir == ShiftDirection::supply_lead ? "supply_lead" : "demand_lead";
}

const char* to_string(ScenarioKind kind) {
    return kind == ScenarioKind::zipf_perfect ? "zipf_perfect" : "zipf_shift";
}

} // namespace isc
