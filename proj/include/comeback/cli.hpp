#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "comeback/report.hpp"
#include "comeback/simulator.hpp"

namespace comeback::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kUsageError = 2 };

struct SimulateOptions {
    SimConfig config;
    std::optional<std::string> output;  // "-" or unset: stdout
    std::size_t teams = 0;  // synthetic pool size, 0 for HOME vs AWAY
    unsigned threads = 1;
};

struct MatchupOptions {
    std::optional<std::uint64_t> goals_for_a, goals_against_a, goals_for_b, goals_against_b;
    std::optional<double> share;
    double expected_goals = 3.1;
    bool raw_share = false;
    std::optional<std::string> score;  // "k:l"
    std::optional<double> trailing;
    std::optional<double> target;
    bool json = false;
};

[[nodiscard]] int run_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err);
[[nodiscard]] int run_simulate(const SimulateOptions& options, std::ostream& out,
                               std::ostream& err);
[[nodiscard]] int run_matchup(const MatchupOptions& options, std::ostream& out, std::ostream& err);

/// Full command line including argv[0]. Verbosity comes from COMEBACK_LOG
/// (quiet | warn | info | debug; default warn).
[[nodiscard]] int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "8:3" -> {8, 3}. Throws std::invalid_argument.
[[nodiscard]] ScoreLine parse_score(std::string_view text);

/// Lower-case hex SHA-256 of a stream's remaining bytes.
[[nodiscard]] std::string sha256_hex(std::istream& in);

}  // namespace comeback::cli
