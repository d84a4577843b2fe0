#include <doctest.h>

#include <cmath>
#include <sstream>

#include "comeback/dataset.hpp"
#include "oracles.hpp"

using namespace comeback;

namespace {

std::vector<Side> seq(std::string_view s) {
    std::vector<Side> out;
    for (char c : s) out.push_back(c == 'H' ? Side::Home : Side::Away);
    return out;
}

MatchRecord match(std::string season, std::string home, std::string away, std::string_view goals,
                  std::uint32_t matchday = 1) {
    return MatchRecord{std::move(season), matchday, std::move(home), std::move(away), seq(goals), {}};
}

std::string random_sequence(oracle::Gen& gen, unsigned max_len = 9) {
    std::string s(gen.integer(0, max_len), 'H');
    for (char& c : s) c = gen.coin() ? 'H' : 'A';
    return s;
}

constexpr std::string_view kHeader = "season,matchday,home_team,away_team,goal_sequence\n";

}  // namespace

TEST_CASE("row decoding") {
    const auto r = parse_record("1963/64,1,TeamX,TeamY,HAH");
    CHECK(r.season == "1963/64");
    CHECK(r.goals == seq("HAH"));
    CHECK(r.goals_for(Side::Home) == 2);
    CHECK(r.goals_for(Side::Away) == 1);

    const auto nil = parse_record("1963/64,1,TeamX,TeamY,");
    CHECK(nil.goals.empty());
    CHECK(final_outcome(nil, Side::Home) == Outcome::Draw);

    CHECK_THROWS_AS((void)parse_record("1963/64,1,TeamX,TeamX,H"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_record("1963/65,1,TeamX,TeamY,H"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_record("1963-64,1,TeamX,TeamY,H"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_record("1963/64,1,TeamX,TeamY,HXA"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_record("1963/64,1,TeamX,TeamY"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_record("1963/64,x,TeamX,TeamY,H"), std::invalid_argument);
    CHECK(season_start_year("1999/00") == 1999);
    CHECK(season_label(1999) == "1999/00");
}

TEST_CASE("strict and lenient parsing") {
    const std::string text = std::string(kHeader) +
                             "1963/64,1,A,B,HAH\n"
                             "1963/64,1,C,C,H\n"
                             "1963/64,2,B,A,HQ\n"
                             "1963/64,2,D,C,\n";
    {
        std::istringstream in(text);
        try {
            (void)parse_dataset(in, ParseMode::Strict);
            CHECK(false);
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    {
        std::istringstream in(text);
        const auto result = parse_dataset(in, ParseMode::Lenient);
        CHECK(result.records.size() == 2);
        REQUIRE(result.diagnostics.size() == 2);
        CHECK(result.diagnostics[0].line == 3);
        CHECK(result.diagnostics[1].line == 4);
    }
    {
        std::istringstream in("season,matchday,home,away,goals\n1963/64,1,A,B,H\n");
        CHECK_THROWS_AS((void)parse_dataset(in, ParseMode::Lenient), ParseError);
    }
    {
        std::istringstream in("\xEF\xBB\xBF" + std::string(kHeader) + "1963/64,1,A,B,H\r\n");
        const auto result = parse_dataset(in);
        REQUIRE(result.records.size() == 1);
        CHECK(result.records[0].away_team == "B");
    }
    {
        std::istringstream in(
            "season,matchday,home_team,away_team,goal_sequence,date\n"
            "1963/64,1,\"Club, One\",B,AH,1963-08-24\n");
        DatasetReader reader(in, ParseMode::Strict);
        const auto r = reader.next();
        REQUIRE(r);
        CHECK(reader.has_date_column());
        CHECK(r->home_team == "Club, One");
        CHECK(r->date == "1963-08-24");
        CHECK_FALSE(reader.next());
    }
}

TEST_CASE("write then parse is the identity") {
    oracle::Gen gen(23);
    std::vector<MatchRecord> records;
    const char* names[] = {"Alpha", "Beta FC", "Gamma, United", "Delta \"D\"", "Eps"};
    for (int i = 0; i < 500; ++i) {
        const unsigned h = gen.integer(0, 4);
        unsigned a = gen.integer(0, 3);
        if (a >= h) ++a;
        records.push_back(match(season_label(1963 + gen.integer(0, 60)), names[h], names[a],
                                random_sequence(gen), gen.integer(1, 34)));
    }
    std::ostringstream out;
    write_dataset(out, records);
    std::istringstream in(out.str());
    const auto back = parse_dataset(in);
    CHECK(back.diagnostics.empty());
    REQUIRE(back.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back.records[i].season == records[i].season);
        CHECK(back.records[i].matchday == records[i].matchday);
        CHECK(back.records[i].home_team == records[i].home_team);
        CHECK(back.records[i].away_team == records[i].away_team);
        CHECK(back.records[i].goals == records[i].goals);
    }
}

TEST_CASE("leeway detection and classification") {
    const auto bern = match("1953/54", "H", "A", "AAHHH");
    CHECK(detect_leeway02(bern, Side::Home));
    CHECK(classify_after_leeway(bern, Side::Home) == Outcome::Win);
    CHECK_FALSE(detect_leeway02(bern, Side::Away));

    const auto late = match("1953/54", "H", "A", "HAAA");
    CHECK_FALSE(detect_leeway02(late, Side::Home, LeewayMode::Strict));
    CHECK(detect_leeway02(late, Side::Home, LeewayMode::AnyDeficit));

    const auto empty = match("1953/54", "H", "A", "");
    for (auto mode : {LeewayMode::Strict, LeewayMode::AnyDeficit}) {
        CHECK_FALSE(detect_leeway02(empty, Side::Home, mode));
        CHECK_FALSE(detect_leeway02(empty, Side::Away, mode));
    }
    CHECK(classify_after_leeway(match("1953/54", "H", "A", "AAHH"), Side::Home) == Outcome::Draw);
    CHECK(classify_after_leeway(match("1953/54", "H", "A", "AAH"), Side::Home) == Outcome::Loss);

    oracle::Gen gen(31);
    for (int i = 0; i < 20000; ++i) {
        const auto r = match("1953/54", "H", "A", random_sequence(gen, 12));
        for (Side side : {Side::Home, Side::Away}) {
            if (detect_leeway02(r, side, LeewayMode::Strict)) {
                CHECK(detect_leeway02(r, side, LeewayMode::AnyDeficit));
                CHECK(conceded_first_goal(r, side));
            }
        }
        CHECK_FALSE(
            (detect_leeway02(r, Side::Home, LeewayMode::Strict) &&
             detect_leeway02(r, Side::Away, LeewayMode::Strict)));
    }
}

TEST_CASE("ten-match away-leeway fixture") {
    std::vector<MatchRecord> records = {
        match("2000/01", "A", "B", "HH"),     match("2000/01", "C", "D", "HHA"),
        match("2000/01", "B", "C", "HHAA"),   match("2000/01", "D", "A", "HHHA"),
        match("2000/01", "A", "C", "H"),      match("2000/01", "B", "D", "AH"),
        match("2000/01", "C", "A", ""),       match("2000/01", "D", "B", "HA"),
        match("2000/01", "A", "D", "AHA"),    match("2000/01", "C", "B", "AHH"),
    };
    const auto table = build_frequency_table(records, PeriodSpec::decades(2000, 2000));
    const auto& all = table.league().all_time;
    CHECK(all.leeway(Side::Away).numerator == 4);
    CHECK(all.leeway(Side::Away).denominator == 10);
    CHECK(*all.leeway(Side::Away).value() == 0.4);
    CHECK(*all.comeback(Side::Away).value() == 0.25);
    CHECK(all.leeway(Side::Home).numerator == 0);
    CHECK_FALSE(all.comeback(Side::Home).value());
}

TEST_CASE("frequency table bookkeeping") {
    oracle::Gen gen(41);
    std::vector<MatchRecord> records;
    const char* teams[] = {"T1", "T2", "T3", "T4", "T5", "T6"};
    std::uint64_t goals = 0;
    for (int i = 0; i < 3000; ++i) {
        const unsigned h = gen.integer(0, 5);
        unsigned a = gen.integer(0, 4);
        if (a >= h) ++a;
        records.push_back(
            match(season_label(1963 + gen.integer(0, 29)), teams[h], teams[a], random_sequence(gen)));
        goals += records.back().goals.size();
    }
    const auto periods = PeriodSpec::for_records(records);
    CHECK(periods.size() == 4);  // 1963..1992 start years
    CHECK(periods.periods()[0].label == "1963/64 – 1971/72");

    const auto table = build_frequency_table(records, periods, LeewayMode::Strict, 1);
    const auto& league = table.league();

    std::uint64_t team_goals = 0, team_home_rows = 0, team_away_rows = 0;
    for (const auto& [key, kt] : table.keys) {
        if (key == kLeagueKey) continue;
        team_goals += kt.all_time.counts.home.goals_for + kt.all_time.counts.away.goals_for;
        team_home_rows += kt.all_time.counts.home.matches;
        team_away_rows += kt.all_time.counts.away.matches;
    }
    CHECK(team_goals == goals);
    CHECK(team_home_rows == records.size());
    CHECK(team_away_rows == records.size());
    CHECK(league.all_time.counts.home.matches == records.size());

    for (const auto& e : league.periods) {
        const auto ph = e.goal_share(Side::Home);
        const auto pa = e.goal_share(Side::Away);
        CHECK(ph.denominator == pa.denominator);
        CHECK(ph.numerator + pa.numerator == ph.denominator);
        for (Side s : {Side::Home, Side::Away}) {
            for (const auto& r : {e.leeway(s), e.comeback(s), e.first_goal_conceded(s)}) {
                if (auto v = r.value()) {
                    CHECK(*v >= 0.0);
                    CHECK(*v <= 1.0);
                    CHECK(r.denominator > 0);
                }
            }
        }
    }

    SUBCASE("thread count does not change the table") {
        for (unsigned threads : {2u, 3u, 8u}) {
            const auto other = build_frequency_table(records, periods, LeewayMode::Strict, threads);
            REQUIRE(other.keys.size() == table.keys.size());
            for (const auto& [key, kt] : table.keys) {
                const auto* o = other.find(key);
                REQUIRE(o);
                CHECK(o->all_time.counts == kt.all_time.counts);
                for (std::size_t p = 0; p < kt.periods.size(); ++p) {
                    CHECK(o->periods[p].counts == kt.periods[p].counts);
                }
            }
            CHECK(other.goal_histogram == table.goal_histogram);
        }
    }
    SUBCASE("partial tables merge in any order") {
        const std::span<const MatchRecord> all(records);
        const auto a = count_records(all.subspan(0, 1000), periods, LeewayMode::Strict);
        const auto b = count_records(all.subspan(1000), periods, LeewayMode::Strict);
        auto ab = a;
        ab.merge(b);
        auto ba = b;
        ba.merge(a);
        CHECK(ab == ba);
        CHECK(ab == count_records(all, periods, LeewayMode::Strict));
    }
    SUBCASE("neutralization") {
        const auto once = neutralize_home_advantage(table);
        const auto twice = neutralize_home_advantage(once);
        for (const auto& [key, kt] : once.keys) {
            const auto& n1 = *kt.all_time.neutral;
            const auto& n2 = *twice.find(key)->all_time.neutral;
            CHECK(n1.leeway02 == n2.leeway02);
            CHECK(n1.comeback == n2.comeback);
        }
        CHECK(neutral_mean(0.3, 0.3, 10, 10) == 0.3);
        CHECK(neutral_mean(0.3, 0.3, 7, 13) == doctest::Approx(0.3).epsilon(1e-15));
        CHECK(neutral_mean(0.2, 0.4, 10, 10) == doctest::Approx(0.3));
        CHECK(neutral_mean(0.2, 0.4, 10, 30) == doctest::Approx(0.35));
        CHECK_FALSE(neutral_mean(std::nullopt, 0.4, 0, 10));
    }
    CHECK_THROWS_AS((void)build_frequency_table({}, periods), std::invalid_argument);
}

TEST_CASE("period specs") {
    const auto spec = PeriodSpec::decades(1963, 2013);
    REQUIRE(spec.size() == 6);
    CHECK(spec.periods()[0].first_season == 1963);
    CHECK(spec.periods()[0].last_season == 1971);
    CHECK(spec.periods()[1].first_season == 1972);
    CHECK(spec.periods()[5].label == "2012/13 – 2021/22");
    CHECK(spec.periods()[0].midpoint_year() == 1968.0);
    CHECK(spec.index_of(1980) == 1u);
    CHECK_FALSE(spec.index_of(1950));

    const auto parsed = PeriodSpec::parse("1963/64-1971/72,1972/73–1981/82");
    REQUIRE(parsed.size() == 2);
    CHECK(parsed.periods()[1].last_season == 1981);
    CHECK_THROWS_AS((void)PeriodSpec::parse("1963/64-1971/72,1970/71-1981/82"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)PeriodSpec::parse("1971/72-1963/64"), std::invalid_argument);
    CHECK(spec.extended_to(2045).periods().back().contains(2045));
}

TEST_CASE("home-share trend") {
    const auto grid = PeriodSpec::decades(1963, 2017);
    // exactly -0.02 per decade through the real (unevenly spaced) midpoints
    std::vector<TrendPoint> series;
    for (const auto& period : grid.periods()) {
        const double x = period.midpoint_year();
        series.push_back({x, 0.64 - 0.002 * (x - 1968.0)});
    }
    const auto fit = fit_home_share_trend(series, grid);
    CHECK(std::abs(fit.slope_per_decade + 0.02) < 1e-9);
    for (const auto& p : series) CHECK(std::abs(fit.at(p.year) - p.home_share) < 1e-9);
    REQUIRE(fit.vanish_year);
    CHECK(*fit.vanish_year == doctest::Approx(2038.0));
    CHECK(fit.vanish_period == std::optional<std::string>("2032/33 – 2041/42"));

    std::vector<TrendPoint> flat = {{1968, 0.6}, {1978, 0.6}};
    CHECK_FALSE(fit_home_share_trend(flat, grid).vanish_period);
    std::vector<TrendPoint> slow = {{1968, 0.6}, {2018, 0.5999}};
    CHECK_FALSE(fit_home_share_trend(slow, grid).vanish_period);
    CHECK_THROWS_AS((void)fit_home_share_trend(std::span(flat).first(1), grid),
                    std::invalid_argument);
}

TEST_CASE("theoretical leeway") {
    const auto t = theoretical_leeway(LeagueParams::from_home_share(3.1, 0.5));
    CHECK(t.home == 0.25);
    CHECK(t.sequence_home == doctest::Approx(0.20382456754660325).epsilon(1e-12));
    const auto u = theoretical_leeway(LeagueParams::from_home_share(3.0, 0.6));
    CHECK(u.home == doctest::Approx(0.16));
    CHECK(u.away == doctest::Approx(0.36));
}
