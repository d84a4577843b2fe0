#pragma once

// Goal-event match data: CSV ingestion, leeway/comeback detection and the
// per-team, per-period frequency tables built from them.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "comeback/scoring_model.hpp"

namespace comeback {

enum class Side : std::uint8_t { Home, Away };

[[nodiscard]] constexpr Side opponent(Side side) noexcept {
    return side == Side::Home ? Side::Away : Side::Home;
}

[[nodiscard]] std::string_view to_string(Side side) noexcept;

/// One match: who played, and which side scored each goal in order.
struct MatchRecord {
    std::string season;  // "1963/64"
    std::uint32_t matchday = 1;
    std::string home_team;
    std::string away_team;
    std::vector<Side> goals;
    std::string date;  // optional ISO-8601, carried through but not analysed

    [[nodiscard]] std::uint32_t goals_for(Side side) const noexcept;
    [[nodiscard]] const std::string& team(Side side) const noexcept {
        return side == Side::Home ? home_team : away_team;
    }
};

/// Start year of a "YYYY/YY" label whose second part is the following year
/// (mod 100). Throws std::invalid_argument otherwise.
[[nodiscard]] int season_start_year(std::string_view label);
[[nodiscard]] std::string season_label(int start_year);

enum class LeewayMode { Strict, AnyDeficit };
enum class Outcome { Win, Draw, Loss };

[[nodiscard]] std::string_view to_string(LeewayMode mode) noexcept;
[[nodiscard]] std::string_view to_string(Outcome outcome) noexcept;

/// Strict: the opponent scored the match's first two goals.
/// AnyDeficit: the opponent led by two or more at some point.
[[nodiscard]] bool detect_leeway02(const MatchRecord& record, Side perspective,
                                   LeewayMode mode = LeewayMode::Strict);

/// The opponent scored the match's first goal.
[[nodiscard]] bool conceded_first_goal(const MatchRecord& record, Side perspective) noexcept;

[[nodiscard]] Outcome final_outcome(const MatchRecord& record, Side perspective) noexcept;

/// Final outcome for a side that went 0:2 down. Asserts that the leeway
/// (strict or any-deficit) actually happened.
[[nodiscard]] Outcome classify_after_leeway(const MatchRecord& record, Side perspective);

// ---------------------------------------------------------------------------
// CSV: season,matchday,home_team,away_team,goal_sequence[,date]

struct Diagnostic {
    std::size_t line = 0;
    std::string message;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class ParseMode { Strict, Lenient };

/// Streams records from a CSV source one row at a time. In strict mode the
/// first bad row throws ParseError; in lenient mode it is skipped and kept
/// as a diagnostic. A missing or malformed header always throws.
class DatasetReader {
public:
    DatasetReader(std::istream& in, ParseMode mode);

    [[nodiscard]] std::optional<MatchRecord> next();
    [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
    [[nodiscard]] bool has_date_column() const noexcept { return has_date_; }

private:
    std::istream* in_;
    ParseMode mode_;
    std::size_t line_ = 0;
    bool has_date_ = false;
    std::vector<Diagnostic> diagnostics_;
};

struct ParseResult {
    std::vector<MatchRecord> records;
    std::vector<Diagnostic> diagnostics;
};

[[nodiscard]] ParseResult parse_dataset(std::istream& in, ParseMode mode = ParseMode::Strict);

/// Decodes a single data row (no header handling). Throws std::invalid_argument.
[[nodiscard]] MatchRecord parse_record(std::string_view row);

void write_dataset_header(std::ostream& out, bool with_date = false);
void write_record(std::ostream& out, const MatchRecord& record, bool with_date = false);
void write_dataset(std::ostream& out, std::span<const MatchRecord> records);

/// Seasons whose match count differs from a full double round robin of the
/// teams seen in them. Informational only; league size varied historically.
[[nodiscard]] std::vector<std::string> season_structure_warnings(
    std::span<const MatchRecord> records);

// ---------------------------------------------------------------------------
// Season periods

struct Period {
    std::string label;
    int first_season = 0;  // start years, inclusive
    int last_season = 0;

    [[nodiscard]] bool contains(int season_start) const noexcept {
        return season_start >= first_season && season_start <= last_season;
    }
    /// Seasons are placed at [s + 0.5, s + 1.5) on the calendar axis.
    [[nodiscard]] double midpoint_year() const noexcept {
        return 0.5 * (first_season + last_season) + 1.0;
    }
};

/// "1963/64 – 1971/72"
[[nodiscard]] std::string period_label(int first_season, int last_season);

class PeriodSpec {
public:
    /// Buckets must be ordered, non-overlapping and have first <= last.
    explicit PeriodSpec(std::vector<Period> periods);

    /// A first bucket of `first_length` seasons, then `length`-season buckets
    /// until `last_season` is covered.
    static PeriodSpec decades(int first_season, int last_season, int first_length = 9,
                              int length = 10);

    /// "1963/64-1971/72,1972/73-1981/82" (either '-' or an en dash between bounds).
    static PeriodSpec parse(std::string_view text);

    /// The default bucketing for a dataset's season range.
    static PeriodSpec for_records(std::span<const MatchRecord> records);

    [[nodiscard]] const std::vector<Period>& periods() const noexcept { return periods_; }
    [[nodiscard]] std::size_t size() const noexcept { return periods_.size(); }
    [[nodiscard]] std::optional<std::size_t> index_of(int season_start) const noexcept;

    /// Appends `length`-season buckets until `season_start` is covered.
    [[nodiscard]] PeriodSpec extended_to(int season_start, int length = 10) const;

private:
    std::vector<Period> periods_;
};

// ---------------------------------------------------------------------------
// Frequency tables

inline constexpr std::string_view kLeagueKey = "ALL";

struct Ratio {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 0;

    [[nodiscard]] std::optional<double> value() const noexcept {
        if (denominator == 0) return std::nullopt;
        return static_cast<double>(numerator) / static_cast<double>(denominator);
    }
};

/// Counts for one perspective (playing at home, or away).
struct PerspectiveCounts {
    std::uint64_t matches = 0;
    std::uint64_t first_goal_conceded = 0;
    std::uint64_t leeway02 = 0;
    std::uint64_t comeback = 0;  // win or draw after the leeway
    std::uint64_t comeback_wins = 0;
    std::uint64_t goals_for = 0;
    std::uint64_t goals_against = 0;

    PerspectiveCounts& operator+=(const PerspectiveCounts& other) noexcept;
    friend bool operator==(const PerspectiveCounts&, const PerspectiveCounts&) = default;
};

struct EntryCounts {
    PerspectiveCounts home;
    PerspectiveCounts away;

    EntryCounts& operator+=(const EntryCounts& other) noexcept;
    friend bool operator==(const EntryCounts&, const EntryCounts&) = default;

    [[nodiscard]] const PerspectiveCounts& at(Side side) const noexcept {
        return side == Side::Home ? home : away;
    }
};

/// Home/away-compensated frequencies; absent when either side is absent.
struct NeutralFrequencies {
    std::optional<double> first_goal_conceded;
    std::optional<double> leeway02;
    std::optional<double> comeback;
};

struct TableEntry {
    EntryCounts counts;
    std::optional<NeutralFrequencies> neutral;

    [[nodiscard]] Ratio first_goal_conceded(Side side) const noexcept;
    [[nodiscard]] Ratio leeway(Side side) const noexcept;
    [[nodiscard]] Ratio comeback(Side side) const noexcept;
    /// Goals scored / goals in the matches played from this perspective
    /// (p_home, p_away for the league key).
    [[nodiscard]] Ratio goal_share(Side side) const noexcept;
    [[nodiscard]] Ratio leeway_pooled() const noexcept;
    [[nodiscard]] Ratio comeback_pooled() const noexcept;
};

/// Per key (team name or kLeagueKey) the counts for every period plus the
/// all-time aggregate. Counting is additive, so partial tables over disjoint
/// record partitions merge into the table of the union.
class CountTable {
public:
    CountTable(std::size_t n_periods, LeewayMode mode);

    void add(const MatchRecord& record, std::size_t period);
    CountTable& merge(const CountTable& other);

    [[nodiscard]] LeewayMode mode() const noexcept { return mode_; }
    [[nodiscard]] std::size_t n_periods() const noexcept { return n_periods_; }
    [[nodiscard]] const std::map<std::string, std::vector<EntryCounts>, std::less<>>& keys()
        const noexcept {
        return counts_;
    }
    /// Histogram of total goals per match, all periods.
    [[nodiscard]] const std::vector<std::uint64_t>& goal_histogram() const noexcept {
        return histogram_;
    }

    friend bool operator==(const CountTable&, const CountTable&) = default;

private:
    std::vector<EntryCounts>& slot(std::string_view key);

    std::size_t n_periods_;
    LeewayMode mode_;
    std::map<std::string, std::vector<EntryCounts>, std::less<>> counts_;
    std::vector<std::uint64_t> histogram_;
};

/// Throws std::invalid_argument for a record whose season no period covers.
[[nodiscard]] CountTable count_records(std::span<const MatchRecord> records,
                                       const PeriodSpec& periods, LeewayMode mode);

struct KeyTable {
    std::vector<TableEntry> periods;
    TableEntry all_time;
};

struct FrequencyTable {
    PeriodSpec periods;
    LeewayMode mode = LeewayMode::Strict;
    std::map<std::string, KeyTable, std::less<>> keys;
    std::vector<std::uint64_t> goal_histogram;

    [[nodiscard]] const KeyTable& league() const;
    [[nodiscard]] const KeyTable* find(std::string_view key) const;
};

/// Counts every match from both perspectives, per team and for kLeagueKey.
/// `threads` > 1 counts disjoint partitions concurrently and merges them.
/// Throws std::invalid_argument on an empty record list.
[[nodiscard]] FrequencyTable build_frequency_table(std::span<const MatchRecord> records,
                                                   const PeriodSpec& periods,
                                                   LeewayMode mode = LeewayMode::Strict,
                                                   unsigned threads = 1);

/// Mean of the home- and away-perspective frequency. Unweighted when the two
/// match counts agree, weighted by them otherwise.
[[nodiscard]] std::optional<double> neutral_mean(std::optional<double> home,
                                                 std::optional<double> away,
                                                 std::uint64_t home_matches,
                                                 std::uint64_t away_matches);

/// Fills the neutral frequencies of every entry. Idempotent.
[[nodiscard]] FrequencyTable neutralize_home_advantage(FrequencyTable table);

[[nodiscard]] double expected_goals_from_totals(std::uint64_t goals, std::uint64_t matches);

// ---------------------------------------------------------------------------
// Home-advantage trend

struct TrendPoint {
    double year = 0.0;
    double home_share = 0.0;
};

struct TrendFit {
    double slope_per_decade = 0.0;
    double intercept = 0.0;  // fitted home share at year 0
    std::optional<double> vanish_year;
    std::optional<std::string> vanish_period;

    [[nodiscard]] double at(double year) const noexcept {
        return intercept + slope_per_decade * year / 10.0;
    }
};

/// Ordinary least squares of home share against year. The vanish period is
/// the bucket of `grid` (extended by decades as needed) containing the year
/// where the line reaches 0.5, if that lies within 200 years of the last
/// point. Throws std::invalid_argument for fewer than two points.
[[nodiscard]] TrendFit fit_home_share_trend(std::span<const TrendPoint> series,
                                            const PeriodSpec& grid);

/// League p_home per period (period midpoint, share) for periods with goals.
[[nodiscard]] std::vector<TrendPoint> home_share_series(const FrequencyTable& table);

// ---------------------------------------------------------------------------
// Model counterparts of the leeway frequencies

struct TheoreticalLeeway {
    double home = 0.0;  // (1 - p_home)^2
    double away = 0.0;  // (1 - p_away)^2
    double neutral = 0.0;
    double sequence_home = 0.0;  // strict_leeway_prob, includes P(m >= 2)
    double sequence_away = 0.0;
    double sequence_neutral = 0.0;
};

[[nodiscard]] TheoreticalLeeway theoretical_leeway(const LeagueParams& params);

[[nodiscard]] std::vector<TheoreticalLeeway> theoretical_leeway_table(
    std::span<const LeagueParams> per_period);

}  // namespace comeback
