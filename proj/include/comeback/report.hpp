#pragma once

// Analysis report: the JSON document and the per-figure CSV tables that
// `comeback analyze` emits.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "comeback/dataset.hpp"
#include "comeback/resilience.hpp"

namespace comeback {

inline constexpr std::string_view kToolName = "comeback";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kReportSchemaVersion = "1.0";

enum class ReportFormat { Json, Csv };

struct AnalyzeOptions {
    std::string input;
    std::optional<std::string> periods;  // PeriodSpec::parse syntax; default 9-then-10 buckets
    LeewayMode mode = LeewayMode::Strict;
    bool compensate = false;  // headline hT(0,2)/h(win or draw) use the home/away mean
    ReportFormat format = ReportFormat::Json;
    std::vector<std::string> teams;  // empty: all teams
    ParseMode parse_mode = ParseMode::Strict;
    std::optional<std::string> output;  // JSON file, default stdout
    std::optional<std::string> output_dir;  // CSV directory
    unsigned threads = 1;
};

/// One resilience row: how often an entity fell 0:2 behind, how often it
/// still took a point, and what a constant goal share predicts.
struct ResilienceRow {
    std::string key;
    std::uint64_t matches = 0;  // perspective rows (home + away)
    Ratio leeway_counts;  // pooled counts behind the headline frequency
    Ratio comeback_counts;
    std::optional<double> trailing;  // headline hT(0,2)
    std::optional<double> empirical;  // headline h(win or draw)
    std::optional<double> share;  // p_A used for the expectation
    std::optional<double> expected;  // p(win or draw)
    std::optional<ResilienceDelta> delta;
    std::optional<double> required_share;  // p_A' reproducing the empirical value
};

/// League row: neutral-ground share 0.5 with trailing = hT(0,2).
[[nodiscard]] ResilienceRow league_resilience_row(const TableEntry& entry, bool compensate);
/// Team row: p_A = 1 - sqrt(hT(0,2)) and trailing = hT(0,2).
[[nodiscard]] ResilienceRow team_resilience_row(std::string key, const TableEntry& entry,
                                                bool compensate);

struct AnalysisInput {
    std::vector<MatchRecord> records;
    std::vector<Diagnostic> diagnostics;
    std::string sha256;  // hex digest of the raw input bytes
};

/// Builds the versioned JSON report. Throws std::invalid_argument on an
/// empty record list or an unusable period spec.
[[nodiscard]] nlohmann::ordered_json build_report(const AnalysisInput& input,
                                                  const AnalyzeOptions& options);

/// Writes the plot-ready tables (goal_histogram.csv ... team_resilience.csv)
/// into `dir`, derived from a report produced by build_report.
void write_figure_csvs(const nlohmann::ordered_json& report, const std::filesystem::path& dir);

/// Returns the file names write_figure_csvs produces, in order.
[[nodiscard]] const std::vector<std::string>& figure_csv_names();

}  // namespace comeback
