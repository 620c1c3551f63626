#include "isc/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace isc {

namespace {

constexpr double kExpFloor = -745.0;

// exp(-n k rho g(s)) per type, clamped to 0 beyond the double range.
std::vector<double> survival(const MeanFieldModel& model, double n) {
    const auto g = model.supply().probs();
    const double scale = n * model.k_rho();
    std::vector<double> out(g.size());
    for (std::size_t s = 0; s < g.size(); ++s) {
        const double x = -scale * g[s];
        out[s] = x < kExpFloor ? 0.0 : std::exp(x);
    }
    return out;
}

double class_success(const TypeDistribution& h, const MeanFieldModel& model, double n) {
    const auto g = model.supply().probs();
    const double scale = n * model.k_rho();
    double p = 0.0;
    for (std::size_t s = 0; s < g.size(); ++s) {
        if (h[s] == 0.0) continue;
        const double x = -scale * g[s];
        p += h[s] * (x < kExpFloor ? 1.0 : -std::expm1(x));
    }
    return p;
}

double power(double base, int exponent) {
    double r = 1.0;
    for (int i = 0; i < exponent; ++i) r *= base;
    return r;
}

struct Bracket {
    double lo;
    double hi;
    int sign_lo;
};

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace

MeanFieldModel::MeanFieldModel(TypeDistribution supply, TypeDistribution aggregate_demand,
                               std::vector<DemandClass> classes, std::vector<std::size_t> class_of_peer,
                               double mean_payload, double rho, int d, double population)
    : supply_(std::move(supply)),
      aggregate_demand_(std::move(aggregate_demand)),
      classes_(std::move(classes)),
      class_of_peer_(std::move(class_of_peer)),
      mean_payload_(mean_payload),
      rho_(rho),
      d_(d),
      population_(population) {
    if (!(mean_payload_ > 0.0) || !std::isfinite(mean_payload_)) {
        throw std::invalid_argument("mean payload must be positive");
    }
    if (!(population_ > 0.0) || !std::isfinite(population_)) {
        throw std::invalid_argument("population size must be positive");
    }
    (void)ClubParams{rho_, d_};
    for (const auto& c : classes_) {
        if (c.demand.s_max() != supply_.s_max()) throw std::invalid_argument("demand/supply s_max mismatch");
    }
}

MeanFieldModel MeanFieldModel::from_population(const Population& pop, const ClubParams& params) {
    std::map<std::vector<double>, std::size_t> index;
    std::vector<DemandClass> classes;
    std::vector<std::size_t> class_of_peer;
    class_of_peer.reserve(pop.size());
    const double share = 1.0 / static_cast<double>(pop.size());
    for (const auto& peer : pop.peers()) {
        std::vector<double> key(peer.demand.probs().begin(), peer.demand.probs().end());
        auto [it, inserted] = index.try_emplace(std::move(key), classes.size());
        if (inserted) {
            classes.push_back({peer.demand, 0.0});
        }
        classes[it->second].share += share;
        class_of_peer.push_back(it->second);
    }
    return MeanFieldModel(isc::aggregate_supply(pop), isc::aggregate_demand(pop), std::move(classes),
                          std::move(class_of_peer), pop.mean_payload(), params.search_efficiency(),
                          params.request_size(), static_cast<double>(pop.size()));
}

MeanFieldModel MeanFieldModel::homogeneous(TypeDistribution supply, TypeDistribution demand, double mean_payload,
                                           const ClubParams& params, double population_size) {
    std::vector<DemandClass> classes{{demand, 1.0}};
    return MeanFieldModel(std::move(supply), std::move(demand), std::move(classes), {}, mean_payload,
                          params.search_efficiency(), params.request_size(), population_size);
}

MeanFieldModel MeanFieldModel::from_scenario(const ScenarioSpec& spec) {
    spec.validate();
    auto dists = spec.distributions();
    return homogeneous(std::move(dists.supply), std::move(dists.demand), spec.mean_payload, spec.params(),
                       static_cast<double>(spec.population));
}

MeanFieldModel MeanFieldModel::with_population_size(double population_size) const {
    MeanFieldModel copy = *this;
    if (!(population_size > 0.0) || !std::isfinite(population_size)) {
        throw std::invalid_argument("population size must be positive");
    }
    copy.population_ = population_size;
    return copy;
}

MeanFieldModel MeanFieldModel::with_k_rho(double k_rho) const {
    if (!(k_rho > 0.0) || !std::isfinite(k_rho)) throw std::invalid_argument("k rho must be positive");
    MeanFieldModel copy = *this;
    copy.mean_payload_ = k_rho / rho_;
    return copy;
}

std::size_t MeanFieldModel::class_of_peer(std::size_t peer) const {
    if (class_of_peer_.empty()) {
        if (static_cast<double>(peer) >= population_) throw std::out_of_range("peer index out of range");
        return 0;
    }
    return class_of_peer_.at(peer);
}

double success_rate(const MeanFieldModel& model, std::size_t peer, double n) {
    if (!(n >= 0.0)) throw std::invalid_argument("membership size must be non-negative");
    return class_success(model.classes()[model.class_of_peer(peer)].demand, model, n);
}

double join_probability(const MeanFieldModel& model, std::size_t peer, double n) {
    return power(success_rate(model, peer, n), model.request_size());
}

double mean_join_probability(const MeanFieldModel& model, double n) {
    if (!(n >= 0.0)) throw std::invalid_argument("membership size must be non-negative");
    double total = 0.0;
    for (const auto& c : model.classes()) {
        total += c.share * power(class_success(c.demand, model, n), model.request_size());
    }
    // Rounding in the share-weighted sum can overshoot 1 near saturation,
    // which would hide a fixed point at n = N.
    return std::min(total, 1.0);
}

double slope(const MeanFieldModel& model, double n) {
    if (!(n >= 0.0)) throw std::invalid_argument("membership size must be non-negative");
    const auto g = model.supply().probs();
    const auto e = survival(model, n);
    const int d = model.request_size();
    double total = 0.0;
    for (const auto& c : model.classes()) {
        double dp = 0.0;
        for (std::size_t s = 0; s < g.size(); ++s) dp += c.demand[s] * g[s] * e[s];
        const double lead = d == 1 ? 1.0 : power(class_success(c.demand, model, n), d - 1);
        total += c.share * lead * dp;
    }
    return static_cast<double>(d) * model.k_rho() * total;
}

double control_parameter(const MeanFieldModel& model) {
    return model.population_size() * model.k_rho() * inner_product(model.aggregate_demand(), model.supply());
}

double critical_k_rho(const MeanFieldModel& model) {
    const double inner = inner_product(model.aggregate_demand(), model.supply());
    if (inner <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (model.population_size() * inner);
}

bool empty_membership_unstable(const MeanFieldModel& model) {
    return model.request_size() == 1 && control_parameter(model) >= 1.0;
}

namespace {

FixedPoint classify(const MeanFieldModel& model, double n, double p_bar) {
    FixedPoint fp;
    fp.n_eq = n;
    fp.p_bar = p_bar;
    fp.slope = slope(model, n);
    const double threshold = 1.0 / model.population_size();
    fp.marginal = std::abs(fp.slope * model.population_size() - 1.0) <= 1e-9;
    fp.stable = !fp.marginal && fp.slope < threshold;
    return fp;
}

} // namespace

std::vector<FixedPoint> fixed_points(const MeanFieldModel& model, const FixedPointOptions& opts) {
    const double N = model.population_size();
    const std::size_t grid = std::max<std::size_t>(opts.grid_points, 2);
    const double tol = std::max(opts.tolerance, 8.0 * std::numeric_limits<double>::epsilon() * N);
    auto excess = [&](double n) { return mean_join_probability(model, n) - n / N; };

    std::vector<FixedPoint> out;
    out.push_back(classify(model, 0.0, 0.0));

    // Sign just right of the origin, from the analytic slope.
    int prev_sign = slope(model, 0.0) > 1.0 / N ? 1 : -1;
    double prev_x = 0.0;
    std::vector<Bracket> brackets;
    std::vector<double> exact_roots;
    for (std::size_t i = 1; i <= grid; ++i) {
        const double x = N * static_cast<double>(i) / static_cast<double>(grid);
        const int sgn = sign_of(excess(x));
        if (sgn == 0) {
            exact_roots.push_back(x);
            prev_sign = 0;
        } else {
            if (prev_sign != 0 && sgn != prev_sign) brackets.push_back({prev_x, x, prev_sign});
            prev_sign = sgn;
        }
        prev_x = x;
    }

    std::vector<double> roots = exact_roots;
    for (const auto& b : brackets) {
        double lo = b.lo;
        double hi = b.hi;
        double root = 0.5 * (lo + hi);
        for (int iter = 0; iter < 400 && hi - lo > tol; ++iter) {
            root = 0.5 * (lo + hi);
            const int sgn = sign_of(excess(root));
            if (sgn == 0) {
                lo = hi = root;
                break;
            }
            (sgn == b.sign_lo ? lo : hi) = root;
        }
        root = 0.5 * (lo + hi);
        const double residual = std::abs(excess(root));
        if (residual > opts.residual_tolerance) {
            std::ostringstream msg;
            msg << "fixed point bisection did not converge on [" << b.lo << ", " << b.hi
                << "]: residual " << residual << " at n = " << root;
            throw SolverError(msg.str());
        }
        roots.push_back(root);
    }
    std::sort(roots.begin(), roots.end());
    for (double r : roots) {
        out.push_back(classify(model, r, mean_join_probability(model, r)));
    }
    return out;
}

FixedPoint stable_equilibrium(const MeanFieldModel& model) {
    const auto points = fixed_points(model);
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
        if (it->stable) return *it;
    }
    return points.front();
}

CriticalPoint critical_population(const MeanFieldModel& model, const CriticalOptions& opts) {
    const double inner = inner_product(model.aggregate_demand(), model.supply());
    if (model.request_size() == 1) {
        if (inner <= 0.0) throw SolverError("no critical population below bound");
        CriticalPoint cp;
        cp.population = 1.0 / (model.k_rho() * inner);
        if (cp.population > opts.n_ceiling) throw SolverError("no critical population below bound");
        cp.membership = 0.0;
        cp.tangency_residual = slope(model, 0.0) - 1.0 / cp.population;
        return cp;
    }

    const auto g = model.supply().probs();
    const double g_max = *std::max_element(g.begin(), g.end());
    const double n_lo = 1e-6 / (model.k_rho() * g_max);
    if (!(opts.n_ceiling > n_lo)) throw SolverError("no critical population below bound");
    const double decades = std::log10(opts.n_ceiling / n_lo);
    const auto count = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(opts.points_per_decade))) + 1;
    auto ratio = [&](double n) {
        const double p = mean_join_probability(model, n);
        return p > 0.0 ? n / p : std::numeric_limits<double>::infinity();
    };
    std::vector<double> xs(count);
    std::size_t best = 0;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        xs[i] = n_lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(count - 1));
        const double r = ratio(xs[i]);
        if (r < best_ratio) {
            best_ratio = r;
            best = i;
        }
    }
    if (!std::isfinite(best_ratio) || best == 0 || best + 1 >= count) {
        throw SolverError("no critical population below bound");
    }

    // d(n/P)/dn has the sign of n P'(n) - P(n).
    auto stationarity = [&](double n) { return n * slope(model, n) - mean_join_probability(model, n); };
    double lo = xs[best - 1];
    double hi = xs[best + 1];
    double n_crit;
    if (stationarity(lo) < 0.0 && stationarity(hi) > 0.0) {
        for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (stationarity(mid) < 0.0 ? lo : hi) = mid;
        }
        n_crit = 0.5 * (lo + hi);
    } else {
        const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = lo, b = hi;
        double c = b - inv_phi * (b - a), e = a + inv_phi * (b - a);
        for (int iter = 0; iter < 200 && b - a > 1e-12 * b; ++iter) {
            if (ratio(c) < ratio(e)) {
                b = e;
            } else {
                a = c;
            }
            c = b - inv_phi * (b - a);
            e = a + inv_phi * (b - a);
        }
        n_crit = 0.5 * (a + b);
    }
    CriticalPoint cp;
    cp.membership = n_crit;
    const double p = mean_join_probability(model, n_crit);
    cp.population = n_crit / p;
    cp.tangency_residual = slope(model, n_crit) - p / n_crit;
    if (cp.population > opts.n_ceiling) throw SolverError("no critical population below bound");
    return cp;
}

std::vector<BifurcationRow> bifurcation_scan(const MeanFieldModel& model, std::span<const double> populations) {
    std::vector<BifurcationRow> rows;
    rows.reserve(populations.size());
    for (double N : populations) {
        rows.push_back({N, fixed_points(model.with_population_size(N))});
    }
    return rows;
}

const char* to_string(Phase phase) {
    switch (phase) {
    case Phase::growth: return "growth";
    case Phase::shrinkage: return "shrinkage";
    case Phase::boundary: return "boundary";
    }
    return "boundary";
}

std::vector<PhaseCell> phase_field(const MeanFieldModel& model, std::size_t resolution) {
    if (resolution < 2) throw std::invalid_argument("phase grid resolution must be at least 2");
    const double N = model.population_size();
    std::vector<PhaseCell> cells;
    cells.reserve(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(resolution - 1);
        PhaseCell cell;
        cell.n_frac = frac;
        cell.p_bar = mean_join_probability(model, frac * N);
        if (cell.p_bar > frac) {
            cell.phase = Phase::growth;
        } else if (cell.p_bar < frac) {
            cell.phase = Phase::shrinkage;
        } else {
            cell.phase = Phase::boundary;
        }
        cells.push_back(cell);
    }
    return cells;
}

std::vector<NcritRow> ncrit_sweep(std::span<const double> betas, std::span<const std::size_t> s_maxes, double k_rho,
                                  const std::optional<ShiftSpec>& shift, int request_size) {
    if (!(k_rho > 0.0)) throw std::invalid_argument("k rho must be positive");
    const ClubParams params(1.0, request_size);
    std::vector<NcritRow> rows;
    rows.reserve(betas.size() * s_maxes.size());
    for (double beta : betas) {
        for (std::size_t s_max : s_maxes) {
            NcritRow row{beta, s_max, k_rho, shift ? shift->delta : 0, 0.0};
            if (!shift && request_size == 1) {
                const double norm = zipf_norm({beta, s_max});
                row.n_crit = 1.0 / (k_rho * norm * norm);
            } else {
                const auto g = zipf_distribution({beta, s_max});
                auto dists = shift ? shifted_demand(g, beta, *shift) : SupplyDemand{g, g};
                const auto model = MeanFieldModel::homogeneous(std::move(dists.supply), std::move(dists.demand),
                                                               k_rho, params, 1.0);
                row.n_crit = critical_population(model).population;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<EquilibriumRow> equilibrium_sweep(std::span<const double> betas, std::size_t s_max,
                                              std::span<const double> n_k_rhos) {
    std::vector<EquilibriumRow> rows;
    rows.reserve(betas.size() * n_k_rhos.size());
    const ClubParams params(1.0, 1);
    for (double beta : betas) {
        const auto g = zipf_distribution({beta, s_max});
        const auto base = MeanFieldModel::homogeneous(g, g, 1.0, params, 1.0);
        for (double nkr : n_k_rhos) {
            const auto fp = stable_equilibrium(base.with_population_size(nkr));
            rows.push_back({beta, s_max, nkr, fp.n_eq / nkr, fp.p_bar});
        }
    }
    return rows;
}

} // namespace isc
