#include "isc/spec_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace isc {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail_at(const std::string& source, const std::string& pointer, const std::string& msg) {
    throw SpecError(source + ": at " + (pointer.empty() ? "/" : pointer) + ": " + msg);
}

json parse_json(std::string_view text, const std::string& source) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // byte is 1-based and points just past the offending character.
        const std::size_t pos = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < pos; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        // Strip the library's "[json.exception.parse_error.101] parse error at ..." prefix.
        if (auto colon = what.find(": "); colon != std::string::npos) what = what.substr(colon + 2);
        throw SpecError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }
}

const json& field(const json& obj, const std::string& ptr, const char* key, const std::string& source) {
    if (!obj.is_object()) fail_at(source, ptr, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail_at(source, ptr, std::string("missing field \"") + key + "\"");
    return *it;
}

double number(const json& v, const std::string& ptr, const std::string& source) {
    if (!v.is_number()) fail_at(source, ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail_at(source, ptr, "expected a finite number");
    return x;
}

long long integer(const json& v, const std::string& ptr, const std::string& source) {
    if (!v.is_number_integer()) fail_at(source, ptr, "expected an integer");
    return v.get<long long>();
}

TypeDistribution distribution(const json& v, const std::string& ptr, const std::string& source) {
    if (!v.is_array() || v.empty()) fail_at(source, ptr, "expected a non-empty array of probabilities");
    std::vector<double> probs;
    probs.reserve(v.size());
    double sum = 0.0;
    for (std::size_t s = 0; s < v.size(); ++s) {
        const double p = number(v[s], ptr + "/" + std::to_string(s), source);
        if (p < 0.0) fail_at(source, ptr + "/" + std::to_string(s), "probability must be non-negative");
        probs.push_back(p);
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSpecSumTolerance) {
        std::ostringstream msg;
        msg << "probabilities sum to " << sum << ", not 1";
        fail_at(source, ptr, msg.str());
    }
    return TypeDistribution::from_weights(probs);
}

template <class F>
auto guarded(const std::string& source, const std::string& ptr, F&& f) {
    try {
        return f();
    } catch (const SpecError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail_at(source, ptr, e.what());
    }
}

} // namespace

PopulationSpec parse_population_spec(std::string_view text, const std::string& source) {
    const json root = parse_json(text, source);
    const double rho = number(field(root, "", "rho", source), "/rho", source);
    const long long d = integer(field(root, "", "d", source), "/d", source);
    const auto params = guarded(source, "/rho", [&] { return ClubParams(rho, static_cast<int>(d)); });

    std::vector<std::string> labels;
    if (auto it = root.find("types"); it != root.end()) {
        if (!it->is_array()) fail_at(source, "/types", "expected an array of strings");
        for (std::size_t s = 0; s < it->size(); ++s) {
            if (!(*it)[s].is_string()) fail_at(source, "/types/" + std::to_string(s), "expected a string");
            labels.push_back((*it)[s].get<std::string>());
        }
    }

    const json& peers = field(root, "", "peers", source);
    if (!peers.is_array() || peers.empty()) fail_at(source, "/peers", "expected a non-empty array");
    std::vector<PeerProfile> profiles;
    for (std::size_t i = 0; i < peers.size(); ++i) {
        const std::string ptr = "/peers/" + std::to_string(i);
        const json& p = peers[i];
        const long long K = integer(field(p, ptr, "K", source), ptr + "/K", source);
        if (K < 0) fail_at(source, ptr + "/K", "payload size must be non-negative");
        const double M = number(field(p, ptr, "M", source), ptr + "/M", source);
        if (!(M > 0.0)) fail_at(source, ptr + "/M", "demand rate must be positive");
        auto g = distribution(field(p, ptr, "g", source), ptr + "/g", source);
        auto h = distribution(field(p, ptr, "h", source), ptr + "/h", source);
        if (!labels.empty() && g.s_max() != labels.size()) {
            fail_at(source, ptr + "/g", "length differs from the type table");
        }
        if (h.s_max() != g.s_max()) fail_at(source, ptr + "/h", "length differs from g");
        profiles.push_back({static_cast<std::uint64_t>(K), std::move(g), M, std::move(h)});
    }
    auto pop = guarded(source, "/peers", [&] { return Population(std::move(profiles), std::move(labels)); });
    return {std::move(pop), params};
}

ScenarioSpec parse_scenario_spec(std::string_view text, const std::string& source) {
    const json root = parse_json(text, source);
    ScenarioSpec spec;
    const json& kind = field(root, "", "kind", source);
    if (kind == "zipf_perfect") {
        spec.kind = ScenarioKind::zipf_perfect;
    } else if (kind == "zipf_shift") {
        spec.kind = ScenarioKind::zipf_shift;
    } else {
        fail_at(source, "/kind", "expected \"zipf_perfect\" or \"zipf_shift\"");
    }
    spec.beta = number(field(root, "", "beta", source), "/beta", source);
    const long long s_max = integer(field(root, "", "s_max", source), "/s_max", source);
    if (s_max < 1) fail_at(source, "/s_max", "s_max must be at least 1");
    spec.s_max = static_cast<std::size_t>(s_max);
    if (auto it = root.find("delta"); it != root.end()) spec.delta = static_cast<long>(integer(*it, "/delta", source));
    if (auto it = root.find("direction"); it != root.end()) {
        if (*it == "supply_lead") {
            spec.direction = ShiftDirection::supply_lead;
        } else if (*it == "demand_lead") {
            spec.direction = ShiftDirection::demand_lead;
        } else {
            fail_at(source, "/direction", "expected \"supply_lead\" or \"demand_lead\"");
        }
    }
    const long long N = integer(field(root, "", "N", source), "/N", source);
    if (N < 1) fail_at(source, "/N", "N must be at least 1");
    spec.population = static_cast<std::size_t>(N);
    spec.mean_payload = number(field(root, "", "k", source), "/k", source);
    spec.search_efficiency = number(field(root, "", "rho", source), "/rho", source);
    spec.request_size = static_cast<int>(integer(field(root, "", "d", source), "/d", source));
    guarded(source, "", [&] {
        spec.validate();
        return 0;
    });
    return spec;
}

Spec parse_spec(std::string_view text, const std::string& source) {
    const json root = parse_json(text, source);
    if (root.is_object() && root.contains("peers")) return parse_population_spec(text, source);
    if (root.is_object() && root.contains("kind")) return parse_scenario_spec(text, source);
    fail_at(source, "", "neither a population spec (\"peers\") nor a scenario spec (\"kind\")");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Spec load_spec(const std::filesystem::path& path) {
    return parse_spec(read_file(path), path.string());
}

} // namespace isc
