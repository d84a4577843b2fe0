#include "comeback/dataset.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <thread>

#include "comeback/resilience.hpp"

namespace comeback {

namespace {

constexpr std::string_view kHeader[] = {"season", "matchday", "home_team", "away_team",
                                        "goal_sequence"};
constexpr std::string_view kDateColumn = "date";
constexpr std::string_view kEnDash = "\xE2\x80\x93";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

// RFC 4180 fields on a single line: "a ""quoted"" field",plain
std::vector<std::string> split_csv(std::string_view row) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const char c = row[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < row.size() && row[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

void write_field(std::ostream& out, std::string_view value) {
    if (value.find_first_of(",\"\n") == std::string_view::npos) {
        out << value;
        return;
    }
    out << '"';
    for (const char c : value) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

void count_perspective(PerspectiveCounts& counts, const MatchRecord& record, Side side,
                       LeewayMode mode) {
    ++counts.matches;
    counts.goals_for += record.goals_for(side);
    counts.goals_against += record.goals_for(opponent(side));
    if (conceded_first_goal(record, side)) ++counts.first_goal_conceded;
    if (detect_leeway02(record, side, mode)) {
        ++counts.leeway02;
        const Outcome outcome = final_outcome(record, side);
        if (outcome != Outcome::Loss) ++counts.comeback;
        if (outcome == Outcome::Win) ++counts.comeback_wins;
    }
}

Ratio ratio(std::uint64_t numerator, std::uint64_t denominator) {
    return Ratio{numerator, denominator};
}

}  // namespace

std::string_view to_string(Side side) noexcept { return side == Side::Home ? "home" : "away"; }

std::string_view to_string(LeewayMode mode) noexcept {
    return mode == LeewayMode::Strict ? "strict" : "any";
}

std::string_view to_string(Outcome outcome) noexcept {
    switch (outcome) {
        case Outcome::Win:
            return "win";
        case Outcome::Draw:
            return "draw";
        case Outcome::Loss:
            return "loss";
    }
    return "loss";
}

std::uint32_t MatchRecord::goals_for(Side side) const noexcept {
    return static_cast<std::uint32_t>(std::count(goals.begin(), goals.end(), side));
}

int season_start_year(std::string_view label) {
    const auto bad = [&] {
        return std::invalid_argument("bad season label '" + std::string(label) +
                                     "' (expected YYYY/YY)");
    };
    if (label.size() != 7 || label[4] != '/') throw bad();
    int first = 0;
    int second = 0;
    const char* begin = label.data();
    auto r1 = std::from_chars(begin, begin + 4, first);
    auto r2 = std::from_chars(begin + 5, begin + 7, second);
    if (r1.ec != std::errc{} || r1.ptr != begin + 4 || r2.ec != std::errc{} ||
        r2.ptr != begin + 7) {
        throw bad();
    }
    if ((first + 1) % 100 != second) throw bad();
    return first;
}

std::string season_label(int start_year) {
    if (start_year < 1000 || start_year > 9999) {
        throw std::invalid_argument("season start year out of range: " +
                                    std::to_string(start_year));
    }
    const int next = (start_year + 1) % 100;
    std::string label = std::to_string(start_year) + "/";
    if (next < 10) label.push_back('0');
    label += std::to_string(next);
    return label;
}

bool detect_leeway02(const MatchRecord& record, Side perspective, LeewayMode mode) {
    const Side other = opponent(perspective);
    if (mode == LeewayMode::Strict) {
        return record.goals.size() >= 2 && record.goals[0] == other && record.goals[1] == other;
    }
    int deficit = 0;
    for (const Side scorer : record.goals) {
        deficit += scorer == other ? 1 : -1;
        if (deficit >= 2) return true;
    }
    return false;
}

bool conceded_first_goal(const MatchRecord& record, Side perspective) noexcept {
    return !record.goals.empty() && record.goals.front() == opponent(perspective);
}

Outcome final_outcome(const MatchRecord& record, Side perspective) noexcept {
    const auto own = record.goals_for(perspective);
    const auto other = record.goals_for(opponent(perspective));
    if (own > other) return Outcome::Win;
    if (own == other) return Outcome::Draw;
    return Outcome::Loss;
}

Outcome classify_after_leeway(const MatchRecord& record, Side perspective) {
    assert(detect_leeway02(record, perspective, LeewayMode::AnyDeficit) &&
           "classify_after_leeway requires a 0:2 leeway");
    return final_outcome(record, perspective);
}

// ---------------------------------------------------------------------------

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

MatchRecord parse_fields(const std::vector<std::string>& fields) {
    if (fields.size() < 5) {
        throw std::invalid_argument("missing column: expected at least 5 fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields.size() > 6) {
        throw std::invalid_argument("unexpected extra columns: got " +
                                    std::to_string(fields.size()) + " fields");
    }
    MatchRecord record;
    record.season = std::string(trim(fields[0]));
    (void)season_start_year(record.season);

    const std::string_view matchday = trim(fields[1]);
    std::uint32_t day = 0;
    auto r = std::from_chars(matchday.data(), matchday.data() + matchday.size(), day);
    if (r.ec != std::errc{} || r.ptr != matchday.data() + matchday.size() || day == 0) {
        throw std::invalid_argument("bad matchday '" + std::string(matchday) +
                                    "' (expected a positive integer)");
    }
    record.matchday = day;

    record.home_team = std::string(trim(fields[2]));
    record.away_team = std::string(trim(fields[3]));
    if (record.home_team.empty() || record.away_team.empty()) {
        throw std::invalid_argument("empty team name");
    }
    if (record.home_team == record.away_team) {
        throw std::invalid_argument("identical teams: '" + record.home_team + "'");
    }

    const std::string_view sequence = trim(fields[4]);
    record.goals.reserve(sequence.size());
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        switch (sequence[i]) {
            case 'H':
                record.goals.push_back(Side::Home);
                break;
            case 'A':
                record.goals.push_back(Side::Away);
                break;
            default:
                throw std::invalid_argument("unknown side character '" +
                                            std::string(1, sequence[i]) + "' at position " +
                                            std::to_string(i + 1) + " of goal_sequence");
        }
    }
    if (fields.size() == 6) record.date = std::string(trim(fields[5]));
    return record;
}

}  // namespace

MatchRecord parse_record(std::string_view row) { return parse_fields(split_csv(row)); }

DatasetReader::DatasetReader(std::istream& in, ParseMode mode) : in_(&in), mode_(mode) {
    std::string header;
    while (std::getline(*in_, header)) {
        ++line_;
        if (!is_blank(header)) break;
    }
    if (header.starts_with("\xEF\xBB\xBF")) header.erase(0, 3);
    if (is_blank(header)) throw ParseError(line_ == 0 ? 1 : line_, "missing header row");
    std::vector<std::string> columns;
    try {
        columns = split_csv(header);
    } catch (const std::invalid_argument& e) {
        throw ParseError(line_, std::string("malformed header: ") + e.what());
    }
    bool ok = columns.size() == 5 || columns.size() == 6;
    for (std::size_t i = 0; ok && i < 5; ++i) ok = trim(columns[i]) == kHeader[i];
    if (ok && columns.size() == 6) ok = trim(columns[5]) == kDateColumn;
    if (!ok) {
        throw ParseError(line_,
                         "bad header, expected season,matchday,home_team,away_team,"
                         "goal_sequence[,date]");
    }
    has_date_ = columns.size() == 6;
}

std::optional<MatchRecord> DatasetReader::next() {
    std::string row;
    while (std::getline(*in_, row)) {
        ++line_;
        if (is_blank(row)) continue;
        try {
            const auto fields = split_csv(row);
            if (!has_date_ && fields.size() == 6) {
                throw std::invalid_argument("date column present but not declared in header");
            }
            return parse_fields(fields);
        } catch (const std::invalid_argument& e) {
            if (mode_ == ParseMode::Strict) throw ParseError(line_, e.what());
            diagnostics_.push_back({line_, e.what()});
        }
    }
    return std::nullopt;
}

ParseResult parse_dataset(std::istream& in, ParseMode mode) {
    DatasetReader reader(in, mode);
    ParseResult result;
    while (auto record = reader.next()) result.records.push_back(std::move(*record));
    result.diagnostics = reader.diagnostics();
    return result;
}

void write_dataset_header(std::ostream& out, bool with_date) {
    out << "season,matchday,home_team,away_team,goal_sequence";
    if (with_date) out << ",date";
    out << '\n';
}

void write_record(std::ostream& out, const MatchRecord& record, bool with_date) {
    out << record.season << ',' << record.matchday << ',';
    write_field(out, record.home_team);
    out << ',';
    write_field(out, record.away_team);
    out << ',';
    for (const Side s : record.goals) out << (s == Side::Home ? 'H' : 'A');
    if (with_date) {
        out << ',';
        write_field(out, record.date);
    }
    out << '\n';
}

void write_dataset(std::ostream& out, std::span<const MatchRecord> records) {
    const bool with_date = std::any_of(records.begin(), records.end(),
                                       [](const MatchRecord& r) { return !r.date.empty(); });
    write_dataset_header(out, with_date);
    for (const auto& r : records) write_record(out, r, with_date);
}

std::vector<std::string> season_structure_warnings(std::span<const MatchRecord> records) {
    struct SeasonShape {
        std::set<std::string, std::less<>> teams;
        std::uint64_t matches = 0;
    };
    std::map<std::string, SeasonShape, std::less<>> seasons;
    for (const auto& r : records) {
        auto& shape = seasons[r.season];
        shape.teams.insert(r.home_team);
        shape.teams.insert(r.away_team);
        ++shape.matches;
    }
    std::vector<std::string> warnings;
    for (const auto& [season, shape] : seasons) {
        const std::uint64_t n = shape.teams.size();
        const std::uint64_t expected = n * (n - 1);
        if (shape.matches != expected) {
            warnings.push_back("season " + season + ": " + std::to_string(shape.matches) +
                               " matches, a double round robin of " + std::to_string(n) +
                               " teams has " + std::to_string(expected));
        }
    }
    return warnings;
}

// ---------------------------------------------------------------------------

std::string period_label(int first_season, int last_season) {
    return season_label(first_season) + " " + std::string(kEnDash) + " " +
           season_label(last_season);
}

PeriodSpec::PeriodSpec(std::vector<Period> periods) : periods_(std::move(periods)) {
    if (periods_.empty()) throw std::invalid_argument("period spec needs at least one bucket");
    for (std::size_t i = 0; i < periods_.size(); ++i) {
        const auto& p = periods_[i];
        if (p.first_season > p.last_season) {
            throw std::invalid_argument("period '" + p.label + "' ends before it starts");
        }
        if (i > 0 && p.first_season <= periods_[i - 1].last_season) {
            throw std::invalid_argument("period '" + p.label + "' overlaps or precedes '" +
                                        periods_[i - 1].label + "'");
        }
    }
}

PeriodSpec PeriodSpec::decades(int first_season, int last_season, int first_length, int length) {
    if (first_length < 1 || length < 1) throw std::invalid_argument("bucket lengths must be >= 1");
    std::vector<Period> out;
    int start = first_season;
    int span = first_length;
    do {
        const int end = start + span - 1;
        out.push_back({period_label(start, end), start, end});
        start = end + 1;
        span = length;
    } while (start <= last_season);
    return PeriodSpec(std::move(out));
}

PeriodSpec PeriodSpec::parse(std::string_view text) {
    std::vector<Period> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string_view token = trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (token.empty()) throw std::invalid_argument("empty period in period list");
        const int first = season_start_year(token.substr(0, std::min<std::size_t>(7, token.size())));
        std::string_view rest = trim(token.substr(std::min<std::size_t>(7, token.size())));
        int last = first;
        if (!rest.empty()) {
            if (rest.starts_with('-')) {
                rest.remove_prefix(1);
            } else if (rest.starts_with(kEnDash)) {
                rest.remove_prefix(kEnDash.size());
            } else {
                throw std::invalid_argument("bad period '" + std::string(token) + "'");
            }
            last = season_start_year(trim(rest));
        }
        out.push_back({period_label(first, last), first, last});
    }
    return PeriodSpec(std::move(out));
}

PeriodSpec PeriodSpec::for_records(std::span<const MatchRecord> records) {
    if (records.empty()) throw std::invalid_argument("no records to derive periods from");
    int lo = season_start_year(records.front().season);
    int hi = lo;
    for (const auto& r : records) {
        const int s = season_start_year(r.season);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return decades(lo, hi);
}

std::optional<std::size_t> PeriodSpec::index_of(int season_start) const noexcept {
    const auto it = std::lower_bound(
        periods_.begin(), periods_.end(), season_start,
        [](const Period& p, int s) { return p.last_season < s; });
    if (it == periods_.end() || !it->contains(season_start)) return std::nullopt;
    return static_cast<std::size_t>(it - periods_.begin());
}

PeriodSpec PeriodSpec::extended_to(int season_start, int length) const {
    std::vector<Period> out = periods_;
    while (out.back().last_season < season_start) {
        const int start = out.back().last_season + 1;
        const int end = start + length - 1;
        out.push_back({period_label(start, end), start, end});
    }
    return PeriodSpec(std::move(out));
}

// ---------------------------------------------------------------------------

PerspectiveCounts& PerspectiveCounts::operator+=(const PerspectiveCounts& o) noexcept {
    matches += o.matches;
    first_goal_conceded += o.first_goal_conceded;
    leeway02 += o.leeway02;
    comeback += o.comeback;
    comeback_wins += o.comeback_wins;
    goals_for += o.goals_for;
    goals_against += o.goals_against;
    return *this;
}

EntryCounts& EntryCounts::operator+=(const EntryCounts& o) noexcept {
    home += o.home;
    away += o.away;
    return *this;
}

Ratio TableEntry::first_goal_conceded(Side side) const noexcept {
    const auto& c = counts.at(side);
    return ratio(c.first_goal_conceded, c.matches);
}

Ratio TableEntry::leeway(Side side) const noexcept {
    const auto& c = counts.at(side);
    return ratio(c.leeway02, c.matches);
}

Ratio TableEntry::comeback(Side side) const noexcept {
    const auto& c = counts.at(side);
    return ratio(c.comeback, c.leeway02);
}

Ratio TableEntry::goal_share(Side side) const noexcept {
    const auto& c = counts.at(side);
    return ratio(c.goals_for, c.goals_for + c.goals_against);
}

Ratio TableEntry::leeway_pooled() const noexcept {
    return ratio(counts.home.leeway02 + counts.away.leeway02,
                 counts.home.matches + counts.away.matches);
}

Ratio TableEntry::comeback_pooled() const noexcept {
    return ratio(counts.home.comeback + counts.away.comeback,
                 counts.home.leeway02 + counts.away.leeway02);
}

CountTable::CountTable(std::size_t n_periods, LeewayMode mode)
    : n_periods_(n_periods), mode_(mode) {}

std::vector<EntryCounts>& CountTable::slot(std::string_view key) {
    auto it = counts_.find(key);
    if (it == counts_.end()) {
        it = counts_.emplace(std::string(key), std::vector<EntryCounts>(n_periods_)).first;
    }
    return it->second;
}

void CountTable::add(const MatchRecord& record, std::size_t period) {
    auto& league = slot(kLeagueKey)[period];
    auto& home = slot(record.home_team)[period];
    auto& away = slot(record.away_team)[period];
    count_perspective(league.home, record, Side::Home, mode_);
    count_perspective(league.away, record, Side::Away, mode_);
    count_perspective(home.home, record, Side::Home, mode_);
    count_perspective(away.away, record, Side::Away, mode_);
    const std::size_t m = record.goals.size();
    if (histogram_.size() <= m) histogram_.resize(m + 1, 0);
    ++histogram_[m];
}

CountTable& CountTable::merge(const CountTable& other) {
    if (other.n_periods_ != n_periods_ || other.mode_ != mode_) {
        throw std::invalid_argument("cannot merge count tables of different shape");
    }
    for (const auto& [key, entries] : other.counts_) {
        auto& mine = slot(key);
        for (std::size_t i = 0; i < n_periods_; ++i) mine[i] += entries[i];
    }
    if (histogram_.size() < other.histogram_.size()) histogram_.resize(other.histogram_.size(), 0);
    for (std::size_t i = 0; i < other.histogram_.size(); ++i) histogram_[i] += other.histogram_[i];
    return *this;
}

CountTable count_records(std::span<const MatchRecord> records, const PeriodSpec& periods,
                         LeewayMode mode) {
    CountTable table(periods.size(), mode);
    for (const auto& r : records) {
        const auto idx = periods.index_of(season_start_year(r.season));
        if (!idx) {
            throw std::invalid_argument("season " + r.season + " is not covered by any period");
        }
        table.add(r, *idx);
    }
    return table;
}

const KeyTable& FrequencyTable::league() const {
    const auto* entry = find(kLeagueKey);
    if (entry == nullptr) throw std::logic_error("frequency table has no league entry");
    return *entry;
}

const KeyTable* FrequencyTable::find(std::string_view key) const {
    const auto it = keys.find(key);
    return it == keys.end() ? nullptr : &it->second;
}

FrequencyTable build_frequency_table(std::span<const MatchRecord> records,
                                     const PeriodSpec& periods, LeewayMode mode,
                                     unsigned threads) {
    if (records.empty()) throw std::invalid_argument("build_frequency_table: no records");
    threads = std::clamp<unsigned>(threads, 1, 64);
    const std::size_t chunk = (records.size() + threads - 1) / threads;

    std::vector<CountTable> partials;
    if (threads == 1 || records.size() < 2 * threads) {
        partials.push_back(count_records(records, periods, mode));
    } else {
        partials.assign(threads, CountTable(periods.size(), mode));
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(records.size(), t * chunk);
            const std::size_t end = std::min(records.size(), begin + chunk);
            workers.emplace_back([&, t, begin, end] {
                try {
                    partials[t] = count_records(records.subspan(begin, end - begin), periods, mode);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    CountTable counts = std::move(partials.front());
    for (std::size_t i = 1; i < partials.size(); ++i) counts.merge(partials[i]);

    FrequencyTable table{periods, mode, {}, counts.goal_histogram()};
    for (const auto& [key, entries] : counts.keys()) {
        KeyTable kt;
        kt.periods.reserve(entries.size());
        for (const auto& e : entries) {
            kt.periods.push_back(TableEntry{e, std::nullopt});
            kt.all_time.counts += e;
        }
        table.keys.emplace(key, std::move(kt));
    }
    return table;
}

std::optional<double> neutral_mean(std::optional<double> home, std::optional<double> away,
                                   std::uint64_t home_matches, std::uint64_t away_matches) {
    if (!home || !away) return std::nullopt;
    if (home_matches == away_matches) return 0.5 * (*home + *away);
    const auto wh = static_cast<double>(home_matches);
    const auto wa = static_cast<double>(away_matches);
    return (wh * *home + wa * *away) / (wh + wa);
}

FrequencyTable neutralize_home_advantage(FrequencyTable table) {
    const auto fill = [](TableEntry& e) {
        const auto mh = e.counts.home.matches;
        const auto ma = e.counts.away.matches;
        e.neutral = NeutralFrequencies{
            neutral_mean(e.first_goal_conceded(Side::Home).value(),
                         e.first_goal_conceded(Side::Away).value(), mh, ma),
            neutral_mean(e.leeway(Side::Home).value(), e.leeway(Side::Away).value(), mh, ma),
            neutral_mean(e.comeback(Side::Home).value(), e.comeback(Side::Away).value(), mh, ma),
        };
    };
    for (auto& [key, kt] : table.keys) {
        for (auto& e : kt.periods) fill(e);
        fill(kt.all_time);
    }
    return table;
}

double expected_goals_from_totals(std::uint64_t goals, std::uint64_t matches) {
    if (matches == 0) throw std::invalid_argument("expected_goals_from_totals: zero matches");
    return static_cast<double>(goals) / static_cast<double>(matches);
}

// ---------------------------------------------------------------------------

TrendFit fit_home_share_trend(std::span<const TrendPoint> series, const PeriodSpec& grid) {
    if (series.size() < 2) throw std::invalid_argument("trend fit needs at least two points");
    const auto n = static_cast<double>(series.size());
    double xbar = 0.0;
    double ybar = 0.0;
    double last_x = series.front().year;
    for (const auto& pt : series) {
        xbar += pt.year;
        ybar += pt.home_share;
        last_x = std::max(last_x, pt.year);
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& pt : series) {
        sxx += (pt.year - xbar) * (pt.year - xbar);
        sxy += (pt.year - xbar) * (pt.home_share - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("trend fit needs at least two distinct years");
    const double slope = sxy / sxx;

    TrendFit fit;
    fit.slope_per_decade = 10.0 * slope;
    fit.intercept = ybar - slope * xbar;
    if (slope != 0.0) {
        const double crossing = xbar + (0.5 - ybar) / slope;
        const double grid_start = grid.periods().front().first_season + 0.5;
        if (std::isfinite(crossing) && crossing >= grid_start && crossing <= last_x + 200.0) {
            const int season = static_cast<int>(std::floor(crossing - 0.5));
            const PeriodSpec extended = grid.extended_to(season);
            if (const auto idx = extended.index_of(season)) {
                fit.vanish_year = crossing;
                fit.vanish_period = extended.periods()[*idx].label;
            }
        }
    }
    return fit;
}

std::vector<TrendPoint> home_share_series(const FrequencyTable& table) {
    std::vector<TrendPoint> out;
    const auto& league = table.league();
    for (std::size_t i = 0; i < league.periods.size(); ++i) {
        if (const auto share = league.periods[i].goal_share(Side::Home).value()) {
            out.push_back({table.periods.periods()[i].midpoint_year(), *share});
        }
    }
    return out;
}

TheoreticalLeeway theoretical_leeway(const LeagueParams& params) {
    const TeamShare home(params.home_share());
    const TeamShare away(params.away_share());
    TheoreticalLeeway row;
    row.home = trailing_prob(home);
    row.away = trailing_prob(away);
    row.neutral = 0.5 * (row.home + row.away);
    row.sequence_home = strict_leeway_prob(params, home);
    row.sequence_away = strict_leeway_prob(params, away);
    row.sequence_neutral = 0.5 * (row.sequence_home + row.sequence_away);
    return row;
}

std::vector<TheoreticalLeeway> theoretical_leeway_table(std::span<const LeagueParams> per_period) {
    std::vector<TheoreticalLeeway> out;
    out.reserve(per_period.size());
    for (const auto& p : per_period) out.push_back(theoretical_leeway(p));
    return out;
}

}  // namespace comeback
