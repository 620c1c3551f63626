// Byte-stable tabular output (CSV / JSON) and run manifests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace isc {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class OutputFormat { csv, json };

// 10 significant digits, '.' decimal, locale-independent; "nan"/"inf"/"-inf".
std::string format_double(double value);

// 64-bit FNV-1a, as 16 hex digits.
std::string content_hash(std::string_view data);

using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

// CSV: a "# scenario=<hash>" comment line, a header row, then rows.
// JSON: an array of objects keyed by column name.
std::string render(const Table& table, OutputFormat format, const std::string& scenario_hash);

struct RunManifest {
    std::vector<std::string> command_line; // without --out-dir
    std::string config_hash;
    std::optional<std::uint64_t> seed;
    std::string version = kArtifactVersion;
    std::vector<std::string> outputs; // file names relative to the output directory

    std::string to_json() const;
};

void write_text(const std::filesystem::path& path, const std::string& content);

// Writes <output>.manifest.json next to each listed output.
void write_manifests(const std::filesystem::path& out_dir, const RunManifest& manifest);

} // namespace isc
