// Mean-field membership dynamics: per-peer success rates, the averaged join
// probability, its fixed points and their stability, the growth threshold,
// the critical population for compound requests, and parameter sweeps.
//
// Membership size n is continuous throughout. A model carries the aggregate
// supply g, the mean payload k, search efficiency and request size, the
// population size N, and the peers' demand distributions grouped into
// classes (identical demand vectors are merged). N is a free parameter of the
// model family: with_population_size() rescales N while keeping the class
// shares fixed.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isc/domain.hpp"
#include "isc/scenarios.hpp"

namespace isc {

struct DemandClass {
    TypeDistribution demand;
    double share = 1.0; // fraction of the population with this demand
};

class MeanFieldModel {
public:
    static MeanFieldModel from_population(const Population& pop, const ClubParams& params);

    // N identical peers with the given supply/demand; N may be fractional.
    static MeanFieldModel homogeneous(TypeDistribution supply, TypeDistribution demand, double mean_payload,
                                      const ClubParams& params, double population_size);

    static MeanFieldModel from_scenario(const ScenarioSpec& spec);

    MeanFieldModel with_population_size(double population_size) const;
    MeanFieldModel with_k_rho(double k_rho) const;

    const TypeDistribution& supply() const { return supply_; }
    // M-weighted aggregate demand h.
    const TypeDistribution& aggregate_demand() const { return aggregate_demand_; }
    std::span<const DemandClass> classes() const { return classes_; }
    // Demand class of peer i (identity for homogeneous models with one class).
    std::size_t class_of_peer(std::size_t peer) const;

    double mean_payload() const { return mean_payload_; }
    double search_efficiency() const { return rho_; }
    double k_rho() const { return mean_payload_ * rho_; }
    int request_size() const { return d_; }
    double population_size() const { return population_; }

private:
    MeanFieldModel(TypeDistribution supply, TypeDistribution aggregate_demand, std::vector<DemandClass> classes,
                   std::vector<std::size_t> class_of_peer, double mean_payload, double rho, int d,
                   double population);

    TypeDistribution supply_;
    TypeDistribution aggregate_demand_;
    std::vector<DemandClass> classes_;
    std::vector<std::size_t> class_of_peer_;
    double mean_payload_;
    double rho_;
    int d_;
    double population_;
};

// p_i(n) = sum_s h_i(s) (1 - exp(-n k rho g(s))).
double success_rate(const MeanFieldModel& model, std::size_t peer, double n);

// P_i(n) = p_i(n)^d.
double join_probability(const MeanFieldModel& model, std::size_t peer, double n);

// Unweighted peer average of P_i(n).
double mean_join_probability(const MeanFieldModel& model, double n);

// Analytic dP/dn.
double slope(const MeanFieldModel& model, double n);

// pi = N k rho sum_s h(s) g(s), h the aggregate demand.
double control_parameter(const MeanFieldModel& model);

// The k rho at which pi = 1.
double critical_k_rho(const MeanFieldModel& model);

bool empty_membership_unstable(const MeanFieldModel& model);

struct FixedPoint {
    double n_eq = 0.0;
    double p_bar = 0.0;
    double slope = 0.0;
    bool stable = false;
    bool marginal = false; // slope equals 1/N within round-off; reported unstable
};

struct FixedPointOptions {
    std::size_t grid_points = 1024;
    double tolerance = 1e-12;          // absolute, in n
    double residual_tolerance = 1e-9;  // |P(n) - n/N| accepted after bisection
};

// All solutions of P(n) = n/N on [0, N], ascending, n = 0 first.
// Throws SolverError when a bracketed root does not reach the residual bound.
std::vector<FixedPoint> fixed_points(const MeanFieldModel& model, const FixedPointOptions& opts = {});

// The stable fixed point with largest n (n = 0 if the club empties).
FixedPoint stable_equilibrium(const MeanFieldModel& model);

struct CriticalPoint {
    double population = 0.0; // N_crit
    double membership = 0.0; // n_crit
    double tangency_residual = 0.0;
};

struct CriticalOptions {
    double n_ceiling = 1e12;
    std::size_t points_per_decade = 200;
};

// Smallest N admitting positive fixed points. For d = 1 this is N/pi with
// n_crit = 0; for d > 1 the minimum of n/P(n) over n > 0.
// Throws SolverError("no critical population below bound") when P is too
// small for a minimum below the ceiling.
CriticalPoint critical_population(const MeanFieldModel& model, const CriticalOptions& opts = {});

struct BifurcationRow {
    double population = 0.0;
    std::vector<FixedPoint> points;
};

std::vector<BifurcationRow> bifurcation_scan(const MeanFieldModel& model, std::span<const double> populations);

enum class Phase { growth, shrinkage, boundary };

const char* to_string(Phase phase);

struct PhaseCell {
    double n_frac = 0.0;
    double p_bar = 0.0;
    Phase phase = Phase::boundary;
};

// resolution points evenly spaced over n in [0, N].
std::vector<PhaseCell> phase_field(const MeanFieldModel& model, std::size_t resolution);

struct NcritRow {
    double beta = 0.0;
    std::size_t s_max = 0;
    double k_rho = 0.0;
    long delta = 0;
    double n_crit = 0.0; // N_crit
};

// N_crit over (beta, s_max), rows ordered by beta then s_max. Without a shift
// the perfect-match closed form 1/(k rho ||g||^2) is used; with a shift (or
// d > 1) the general critical_population solver.
std::vector<NcritRow> ncrit_sweep(std::span<const double> betas, std::span<const std::size_t> s_maxes,
                                  double k_rho, const std::optional<ShiftSpec>& shift = std::nullopt,
                                  int request_size = 1);

struct EquilibriumRow {
    double beta = 0.0;
    std::size_t s_max = 0;
    double n_k_rho = 0.0;
    double neq_frac = 0.0;
    double p_bar = 0.0;
};

// Stable equilibrium fraction n_eq/N of the perfect-match Zipf club against
// N k rho (d = 1), rows ordered by beta then N k rho.
std::vector<EquilibriumRow> equilibrium_sweep(std::span<const double> betas, std::size_t s_max,
                                              std::span<const double> n_k_rhos);

} // namespace isc
