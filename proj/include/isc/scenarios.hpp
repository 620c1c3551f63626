// Parametric supply/demand generators: truncated Zipf supply, shifted-demand
// mismatch, p-rank to s-rank demand conversion, and homogeneous populations.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "isc/domain.hpp"

namespace isc {

struct ZipfSpec {
    double beta = 1.0;
    std::size_t s_max = 1;

    void validate() const;
};

// g(s) = c s^-beta for s = 1..s_max, c normalizing.
TypeDistribution zipf_distribution(const ZipfSpec& spec);

// 2-norm of the Zipf distribution, c * sqrt(sum s^-2beta).
double zipf_norm(const ZipfSpec& spec);

enum class ShiftDirection { supply_lead, demand_lead };

struct ShiftSpec {
    long delta = 0; // ranks; positive puts the excess at the highest ranks
    ShiftDirection direction = ShiftDirection::demand_lead;
};

struct SupplyDemand {
    TypeDistribution supply;
    TypeDistribution demand;
};

// Builds the shifted Zipf(beta) profile over g's type domain and pairs it with
// g. demand_lead returns (g, shifted); supply_lead returns (shifted, g).
// Throws ModelError("empty overlap") when |delta| >= s_max.
SupplyDemand shifted_demand(const TypeDistribution& g, double beta, const ShiftSpec& shift);

// Joint distribution phi(r, s) of p-rank r and s-rank s.
class RankCoupling {
public:
    static constexpr double kTolerance = 1e-9;

    // joint[r][s]; must be square, non-negative and sum to 1.
    explicit RankCoupling(std::vector<std::vector<double>> joint);

    std::size_t size() const { return joint_.size(); }
    double operator()(std::size_t r, std::size_t s) const { return joint_[r][s]; }
    // f(r) = sum_s phi(r, s).
    const TypeDistribution& marginal() const { return marginal_; }

private:
    std::vector<std::vector<double>> joint_;
    TypeDistribution marginal_;
};

// h_i(s) = sum_r phi(r,s) / f(r) * f_i(r). Throws ModelError("undefined
// conversion") when f_i puts mass on a p-rank with f(r) = 0.
TypeDistribution demand_from_pranks(const TypeDistribution& prank_demand, const RankCoupling& coupling);

struct MatchStatistics {
    double inner = 0.0;
    double norm_demand = 0.0;
    double norm_supply = 0.0;
    double similarity = 0.0; // inner / (norm_demand * norm_supply)
};

MatchStatistics match_statistics(const TypeDistribution& demand, const TypeDistribution& supply);

// N peers with identical supply/demand. Payloads are floor(k) or ceil(k) so
// that the total is round(k * N).
Population homogeneous_population(std::size_t peers, double mean_payload, const SupplyDemand& dists);

enum class ScenarioKind { zipf_perfect, zipf_shift };

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::zipf_perfect;
    double beta = 1.0;
    std::size_t s_max = 1;
    long delta = 0;
    ShiftDirection direction = ShiftDirection::demand_lead;
    std::size_t population = 1; // N
    double mean_payload = 1.0;  // k
    double search_efficiency = 1.0;
    int request_size = 1;

    void validate() const;
    SupplyDemand distributions() const;
    ClubParams params() const { return {search_efficiency, request_size}; }
};

const char* to_string(ShiftDirection dir);
const char* to_string(ScenarioKind kind);

} // namespace isc
