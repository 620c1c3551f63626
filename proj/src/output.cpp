#include "isc/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace isc {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 10);
    return std::string(buf, res.ptr);
}

std::string content_hash(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static constexpr char kHex[] = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = kHex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
    rows.push_back(std::move(row));
}

namespace {

std::string cell_text(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else if constexpr (std::is_same_v<T, long long>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return v;
            }
        },
        cell);
}

nlohmann::json cell_json(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
                return v;
            } else {
                return v;
            }
        },
        cell);
}

} // namespace

std::string render(const Table& table, OutputFormat format, const std::string& scenario_hash) {
    if (format == OutputFormat::json) {
        auto arr = nlohmann::json::array();
        for (const auto& row : table.rows) {
            nlohmann::json obj = nlohmann::json::object();
            for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = cell_json(row[c]);
            arr.push_back(std::move(obj));
        }
        return arr.dump(2) + "\n";
    }
    std::string out = "# scenario=" + scenario_hash + "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += cell_text(row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["artifact_version"] = version;
    j["command_line"] = command_line;
    j["config_hash"] = config_hash;
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_manifests(const std::filesystem::path& out_dir, const RunManifest& manifest) {
    const std::string body = manifest.to_json();
    for (const auto& name : manifest.outputs) {
        write_text(out_dir / (name + ".manifest.json"), body);
    }
}

} // namespace isc
