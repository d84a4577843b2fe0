#include "comeback/report.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <stdexcept>

#include "comeback/scoring_model.hpp"

namespace comeback {

namespace {

using Json = nlohmann::ordered_json;

Json optional_number(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

Json ratio_json(const Ratio& r) {
    return Json{{"value", optional_number(r.value())},
                {"numerator", r.numerator},
                {"denominator", r.denominator}};
}

Json side_ratios(const TableEntry& e, Ratio (TableEntry::*get)(Side) const noexcept,
                 std::optional<double> neutral) {
    return Json{{"home", ratio_json((e.*get)(Side::Home))},
                {"away", ratio_json((e.*get)(Side::Away))},
                {"neutral", optional_number(neutral)}};
}

std::optional<double> headline(const Ratio& pooled, std::optional<double> neutral,
                               bool compensate) {
    return compensate ? neutral : pooled.value();
}

void finish_row(ResilienceRow& row) {
    if (!row.trailing || !row.share) return;
    row.expected = comeback_prob(*row.trailing, TeamShare(*row.share));
    if (!row.empirical) return;
    row.delta = resilience_delta(*row.empirical, *row.expected, row.leeway_counts.numerator);
    if (*row.trailing > 0.0 && *row.empirical <= 2.0 * *row.trailing) {
        row.required_share = required_strength(*row.trailing, *row.empirical).value();
    }
}

Json row_json(const ResilienceRow& row) {
    Json j;
    j["key"] = row.key;
    j["matches"] = row.matches;
    j["leeway02"] = ratio_json(row.leeway_counts);
    j["comeback"] = ratio_json(row.comeback_counts);
    j["hT02"] = optional_number(row.trailing);
    j["h_win_or_draw"] = optional_number(row.empirical);
    j["p_A"] = optional_number(row.share);
    j["p_win_or_draw"] = optional_number(row.expected);
    if (row.delta) {
        j["delta"] = row.delta->delta;
        j["std_error"] = row.delta->std_error;
        j["significant"] = row.delta->significant;
    } else {
        j["delta"] = nullptr;
        j["std_error"] = nullptr;
        j["significant"] = nullptr;
    }
    j["required_p_A"] = optional_number(row.required_share);
    return j;
}

Json config_json(const AnalyzeOptions& o) {
    Json teams = Json::array();
    for (const auto& t : o.teams) teams.push_back(t);
    return Json{{"input", o.input},
                {"periods", o.periods ? Json(*o.periods) : Json("default")},
                {"leeway_mode", std::string(to_string(o.mode))},
                {"compensate", o.compensate},
                {"format", o.format == ReportFormat::Json ? "json" : "csv"},
                {"teams", teams},
                {"lenient", o.parse_mode == ParseMode::Lenient}};
}

// ---------------------------------------------------------------------------
// CSV rendering of the report

std::string number(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) {
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, v.get<double>());
        return std::string(buf, r.ptr);
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (const char c : s) {
            if (c == '"') quoted.push_back('"');
            quoted.push_back(c);
        }
        return quoted + "\"";
    }
    return v.dump();
}

class CsvFile {
public:
    explicit CsvFile(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void resilience_csv_row(CsvFile& f, const Json& r) {
    f.row({number(r["key"]), number(r["matches"]), number(r["leeway02"]["numerator"]),
           number(r["hT02"]), number(r["comeback"]["numerator"]), number(r["h_win_or_draw"]),
           number(r["p_A"]), number(r["p_win_or_draw"]), number(r["delta"]),
           number(r["std_error"]), number(r["significant"]), number(r["required_p_A"])});
}

const std::initializer_list<std::string> kResilienceColumns = {
    "key", "matches", "leeways", "hT_02", "comebacks", "h_win_or_draw",
    "p_A", "p_win_or_draw", "delta", "std_error", "significant", "required_p_A"};

}  // namespace

ResilienceRow league_resilience_row(const TableEntry& entry, bool compensate) {
    ResilienceRow row;
    row.key = std::string(kLeagueKey);
    row.matches = entry.counts.home.matches + entry.counts.away.matches;
    row.leeway_counts = entry.leeway_pooled();
    row.comeback_counts = entry.comeback_pooled();
    const auto neutral = entry.neutral.value_or(NeutralFrequencies{});
    row.trailing = headline(row.leeway_counts, neutral.leeway02, compensate);
    row.empirical = headline(row.comeback_counts, neutral.comeback, compensate);
    row.share = 0.5;
    finish_row(row);
    return row;
}

ResilienceRow team_resilience_row(std::string key, const TableEntry& entry, bool compensate) {
    ResilienceRow row;
    row.key = std::move(key);
    row.matches = entry.counts.home.matches + entry.counts.away.matches;
    row.leeway_counts = entry.leeway_pooled();
    row.comeback_counts = entry.comeback_pooled();
    const auto neutral = entry.neutral.value_or(NeutralFrequencies{});
    row.trailing = headline(row.leeway_counts, neutral.leeway02, compensate);
    row.empirical = headline(row.comeback_counts, neutral.comeback, compensate);
    if (row.trailing) row.share = strength_from_trailing(*row.trailing).value();
    finish_row(row);
    return row;
}

Json build_report(const AnalysisInput& input, const AnalyzeOptions& options) {
    if (input.records.empty()) throw std::invalid_argument("no match records to analyse");
    const PeriodSpec periods = options.periods ? PeriodSpec::parse(*options.periods)
                                               : PeriodSpec::for_records(input.records);
    const FrequencyTable table = neutralize_home_advantage(
        build_frequency_table(input.records, periods, options.mode, options.threads));
    const KeyTable& league = table.league();
    const auto& all = league.all_time;

    Json report;
    report["schema_version"] = kReportSchemaVersion;

    Json diagnostics = Json::array();
    for (const auto& d : input.diagnostics) {
        diagnostics.push_back(Json{{"line", d.line}, {"message", d.message}});
    }
    Json structure = Json::array();
    for (const auto& w : season_structure_warnings(input.records)) structure.push_back(w);
    report["metadata"] = Json{{"tool", kToolName},
                              {"version", kToolVersion},
                              {"config", config_json(options)},
                              {"input", Json{{"sha256", input.sha256},
                                             {"records", input.records.size()},
                                             {"parse_diagnostics", diagnostics}}},
                              {"season_structure_warnings", structure},
                              {"notes",
                               Json::array({"team identity is the exact team name string",
                                            "p_win_or_draw uses a constant goal share; "
                                            "delta = h_win_or_draw - p_win_or_draw"})}};

    // League section
    const std::uint64_t matches = all.counts.home.matches;
    const std::uint64_t goals = all.counts.home.goals_for + all.counts.away.goals_for;
    const double e_all = expected_goals_from_totals(goals, matches);
    Json lg;
    lg["matches"] = matches;
    lg["goals"] = goals;
    lg["goals_home"] = all.counts.home.goals_for;
    lg["goals_away"] = all.counts.away.goals_for;
    lg["expected_goals"] = e_all;
    lg["p_home"] = ratio_json(all.goal_share(Side::Home));
    lg["p_away"] = ratio_json(all.goal_share(Side::Away));

    Json histogram = Json::array();
    for (std::size_t m = 0; m < table.goal_histogram.size(); ++m) {
        const auto count = table.goal_histogram[m];
        histogram.push_back(Json{
            {"goals", m},
            {"matches", count},
            {"relative_frequency", static_cast<double>(count) / static_cast<double>(matches)},
            {"poisson", total_goals_pmf(static_cast<std::uint32_t>(m), e_all)}});
    }
    lg["goal_histogram"] = histogram;

    Json period_rows = Json::array();
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto& p = periods.periods()[i];
        const auto& e = league.periods[i];
        const auto neutral = e.neutral.value_or(NeutralFrequencies{});
        const std::uint64_t n = e.counts.home.matches;
        Json row;
        row["label"] = p.label;
        row["first_season"] = season_label(p.first_season);
        row["last_season"] = season_label(p.last_season);
        row["midpoint_year"] = p.midpoint_year();
        row["matches"] = n;
        const std::uint64_t pg = e.counts.home.goals_for + e.counts.away.goals_for;
        row["expected_goals"] = n > 0 ? Json(expected_goals_from_totals(pg, n)) : Json(nullptr);
        row["p_home"] = ratio_json(e.goal_share(Side::Home));
        row["p_away"] = ratio_json(e.goal_share(Side::Away));
        row["first_goal_conceded"] =
            side_ratios(e, &TableEntry::first_goal_conceded, neutral.first_goal_conceded);
        row["leeway02"] = side_ratios(e, &TableEntry::leeway, neutral.leeway02);
        row["leeway02"]["pooled"] = ratio_json(e.leeway_pooled());
        row["comeback"] = side_ratios(e, &TableEntry::comeback, neutral.comeback);
        row["comeback"]["pooled"] = ratio_json(e.comeback_pooled());

        const auto p_home = e.goal_share(Side::Home).value();
        if (n > 0 && p_home) {
            const auto params = LeagueParams::from_home_share(
                expected_goals_from_totals(pg, n), *p_home);
            const auto th = theoretical_leeway(params);
            const auto pr = league_resilience_row(e, options.compensate);
            row["theory"] = Json{{"pT_home02", th.home},
                                 {"pT_away02", th.away},
                                 {"pT02", th.neutral},
                                 {"pT_sequence_home02", th.sequence_home},
                                 {"pT_sequence_away02", th.sequence_away},
                                 {"pT_sequence02", th.sequence_neutral},
                                 {"p_win_or_draw", optional_number(pr.expected)}};
        } else {
            row["theory"] = nullptr;
        }
        period_rows.push_back(row);
    }
    lg["periods"] = period_rows;

    const auto series = home_share_series(table);
    if (series.size() >= 2) {
        const auto fit = fit_home_share_trend(series, periods);
        lg["trend"] = Json{{"slope_per_decade", fit.slope_per_decade},
                           {"intercept", fit.intercept},
                           {"vanish_year", optional_number(fit.vanish_year)},
                           {"vanish_period", fit.vanish_period ? Json(*fit.vanish_period)
                                                               : Json("none")}};
    } else {
        lg["trend"] = nullptr;
    }

    const auto league_row = league_resilience_row(all, options.compensate);
    Json lrow = row_json(league_row);
    lrow["sequence_model_p_win_or_draw"] =
        exact_comeback_given_leeway(LeagueParams::neutral(e_all), TeamShare(0.5), TeamShare(0.5));
    lg["all_time"] = lrow;
    report["league"] = lg;

    // Team section
    const std::set<std::string, std::less<>> filter(options.teams.begin(), options.teams.end());
    Json teams = Json::array();
    for (const auto& [key, kt] : table.keys) {
        if (key == kLeagueKey) continue;
        if (!filter.empty() && !filter.contains(key)) continue;
        Json t = row_json(team_resilience_row(key, kt.all_time, options.compensate));
        const auto neutral = kt.all_time.neutral.value_or(NeutralFrequencies{});
        t["leeway02_by_side"] = side_ratios(kt.all_time, &TableEntry::leeway, neutral.leeway02);
        t["comeback_by_side"] = side_ratios(kt.all_time, &TableEntry::comeback, neutral.comeback);
        teams.push_back(t);
    }
    report["teams"] = teams;
    return report;
}

const std::vector<std::string>& figure_csv_names() {
    static const std::vector<std::string> names = {
        "goal_histogram.csv", "first_goal.csv",        "leeway.csv",
        "comeback.csv",       "league_resilience.csv", "team_resilience.csv"};
    return names;
}

void write_figure_csvs(const Json& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& names = figure_csv_names();
    const auto& lg = report.at("league");

    {
        CsvFile f(dir / names[0]);
        f.row({"goals", "matches", "relative_frequency", "poisson"});
        for (const auto& h : lg.at("goal_histogram")) {
            f.row({number(h["goals"]), number(h["matches"]), number(h["relative_frequency"]),
                   number(h["poisson"])});
        }
    }
    {
        CsvFile f(dir / names[1]);
        f.row({"period", "matches", "p_home", "p_away", "hT_home_01", "hT_away_01", "hT_01"});
        for (const auto& p : lg.at("periods")) {
            const auto& fg = p["first_goal_conceded"];
            f.row({number(p["label"]), number(p["matches"]), number(p["p_home"]["value"]),
                   number(p["p_away"]["value"]), number(fg["home"]["value"]),
                   number(fg["away"]["value"]), number(fg["neutral"])});
        }
    }
    {
        CsvFile f(dir / names[2]);
        f.row({"period", "hT_home_02", "hT_away_02", "hT_02", "pT_home_02", "pT_away_02", "pT_02",
               "pT_sequence_home_02", "pT_sequence_away_02", "pT_sequence_02"});
        for (const auto& p : lg.at("periods")) {
            const auto& lw = p["leeway02"];
            const Json& th = p["theory"];
            const auto t = [&](const char* k) { return th.is_null() ? std::string() : number(th[k]); };
            f.row({number(p["label"]), number(lw["home"]["value"]), number(lw["away"]["value"]),
                   number(lw["neutral"]), t("pT_home02"), t("pT_away02"), t("pT02"),
                   t("pT_sequence_home02"), t("pT_sequence_away02"), t("pT_sequence02")});
        }
    }
    {
        CsvFile f(dir / names[3]);
        f.row({"period", "leeways_home", "leeways_away", "h_home_win_or_draw",
               "h_away_win_or_draw", "h_win_or_draw", "p_win_or_draw"});
        for (const auto& p : lg.at("periods")) {
            const auto& cb = p["comeback"];
            const Json& th = p["theory"];
            f.row({number(p["label"]), number(cb["home"]["denominator"]),
                   number(cb["away"]["denominator"]), number(cb["home"]["value"]),
                   number(cb["away"]["value"]), number(cb["neutral"]),
                   th.is_null() ? std::string() : number(th["p_win_or_draw"])});
        }
    }
    {
        CsvFile f(dir / names[4]);
        f.row(kResilienceColumns);
        resilience_csv_row(f, lg.at("all_time"));
    }
    {
        CsvFile f(dir / names[5]);
        f.row(kResilienceColumns);
        for (const auto& t : report.at("teams")) resilience_csv_row(f, t);
    }
}

}  // namespace comeback
