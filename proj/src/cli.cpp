#include "comeback/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "comeback/matchup.hpp"
#include "comeback/resilience.hpp"

namespace comeback::cli {

namespace {

using Json = nlohmann::ordered_json;

enum class LogLevel { Quiet, Warn, Info, Debug };

LogLevel log_level() {
    const char* env = std::getenv("COMEBACK_LOG");
    if (env == nullptr) return LogLevel::Warn;
    const std::string_view v(env);
    if (v == "quiet") return LogLevel::Quiet;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

void log(std::ostream& err, LogLevel level, std::string_view message) {
    if (level == LogLevel::Quiet || log_level() < level) return;
    static constexpr std::string_view kTags[] = {"", "warning", "info", "debug"};
    err << "comeback: " << kTags[static_cast<int>(level)] << ": " << message << '\n';
}

void error(std::ostream& err, std::string_view message) {
    err << "comeback: error: " << message << '\n';
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

std::string sha256_hex(std::istream& in) {
    const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                     &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest initialisation failed");
    }
    char buffer[1 << 16];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx.get(), buffer, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

ScoreLine parse_score(std::string_view text) {
    const auto colon = text.find(':');
    const auto bad = [&] {
        return std::invalid_argument("invalid score '" + std::string(text) + "', expected k:l");
    };
    if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) throw bad();
    ScoreLine score;
    const auto lhs = text.substr(0, colon);
    const auto rhs = text.substr(colon + 1);
    auto r1 = std::from_chars(lhs.data(), lhs.data() + lhs.size(), score.for_goals);
    auto r2 = std::from_chars(rhs.data(), rhs.data() + rhs.size(), score.against_goals);
    if (r1.ec != std::errc{} || r1.ptr != lhs.data() + lhs.size() || r2.ec != std::errc{} ||
        r2.ptr != rhs.data() + rhs.size()) {
        throw bad();
    }
    return score;
}

// ---------------------------------------------------------------------------

int run_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err) {
    AnalysisInput input;
    {
        std::ifstream digest_in(options.input, std::ios::binary);
        if (!digest_in) {
            error(err, "cannot open input file '" + options.input + "'");
            return kIoError;
        }
        input.sha256 = sha256_hex(digest_in);
    }
    std::ifstream in(options.input, std::ios::binary);
    if (!in) {
        error(err, "cannot open input file '" + options.input + "'");
        return kIoError;
    }
    try {
        DatasetReader reader(in, options.parse_mode);
        while (auto record = reader.next()) input.records.push_back(std::move(*record));
        input.diagnostics = reader.diagnostics();
    } catch (const ParseError& e) {
        error(err, options.input + ": " + e.what());
        return kUsageError;
    }
    for (const auto& d : input.diagnostics) {
        log(err, LogLevel::Warn,
            options.input + ": line " + std::to_string(d.line) + ": skipped: " + d.message);
    }
    log(err, LogLevel::Info, "parsed " + std::to_string(input.records.size()) + " matches");

    if (options.format == ReportFormat::Csv && !options.output_dir) {
        error(err, "--format csv requires --output-dir");
        return kUsageError;
    }

    Json report;
    try {
        report = build_report(input, options);
    } catch (const std::invalid_argument& e) {
        error(err, e.what());
        return kUsageError;
    }

    try {
        if (options.format == ReportFormat::Csv) {
            write_figure_csvs(report, *options.output_dir);
            log(err, LogLevel::Info, "wrote figure tables to " + *options.output_dir);
        } else if (options.output && *options.output != "-") {
            std::ofstream file(*options.output, std::ios::binary);
            if (!file) {
                error(err, "cannot write '" + *options.output + "'");
                return kIoError;
            }
            file << report.dump(2) << '\n';
        } else {
            out << report.dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        error(err, e.what());
        return kIoError;
    }
    return kOk;
}

int run_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
    SimConfig config = options.config;
    if (options.teams > 0) config.team_pool = uniform_team_pool(options.teams);
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        error(err, e.what());
        return kUsageError;
    }

    std::ofstream file;
    const bool to_stdout = !options.output || *options.output == "-";
    if (!to_stdout) {
        file.open(*options.output, std::ios::binary);
        if (!file) {
            error(err, "cannot write '" + *options.output + "'");
            return kIoError;
        }
    }
    std::ostream& sink = to_stdout ? out : static_cast<std::ostream&>(file);

    std::uint64_t goals = 0;
    std::uint64_t leeways = 0;
    std::uint64_t comebacks = 0;
    write_dataset_header(sink);
    simulate_corpus(
        config,
        [&](const MatchRecord& r) {
            write_record(sink, r);
            goals += r.goals.size();
            for (const Side side : {Side::Home, Side::Away}) {
                if (detect_leeway02(r, side)) {
                    ++leeways;
                    if (final_outcome(r, side) != Outcome::Loss) ++comebacks;
                }
            }
        },
        options.threads);
    sink.flush();
    if (!sink) {
        error(err, "write failed");
        return kIoError;
    }

    const double n = static_cast<double>(config.n_matches);
    const LeagueParams params = LeagueParams::from_home_share(config.expected_goals,
                                                              config.home_share);
    std::ostream& summary = to_stdout ? err : out;
    summary << "matches: " << config.n_matches << '\n'
            << "goals: " << goals << '\n'
            << "goals_per_match: " << fixed(goals / n) << '\n'
            << "leeway02_frequency: " << fixed(leeways / (2.0 * n)) << '\n'
            << "leeway02_model_home: "
            << fixed(strict_leeway_prob(params, TeamShare(params.home_share()))) << '\n'
            << "leeway02_model_away: "
            << fixed(strict_leeway_prob(params, TeamShare(params.away_share()))) << '\n'
            << "comeback_frequency: "
            << (leeways > 0 ? fixed(static_cast<double>(comebacks) / leeways) : "n/a") << '\n';
    return kOk;
}

int run_matchup(const MatchupOptions& o, std::ostream& out, std::ostream& err) {
    Json doc;
    std::ostringstream text;
    try {
        std::optional<TeamShare> share_a;
        std::optional<TeamShare> share_b;
        std::optional<TeamShare> used;
        const bool have_a = o.goals_for_a && o.goals_against_a;
        const bool have_b = o.goals_for_b && o.goals_against_b;
        if ((o.goals_for_a.has_value() != o.goals_against_a.has_value()) ||
            (o.goals_for_b.has_value() != o.goals_against_b.has_value())) {
            throw std::invalid_argument("goals for and against must be given together");
        }
        if (o.share && (have_a || have_b)) {
            throw std::invalid_argument("--share cannot be combined with goal records");
        }
        if (have_a) {
            share_a = share_from_goals({*o.goals_for_a, *o.goals_against_a});
            doc["share_a"] = share_a->value();
            text << "share A: " << fixed(share_a->value()) << " (" << *o.goals_for_a
                 << " for, " << *o.goals_against_a << " against)\n";
        }
        if (have_b) {
            share_b = share_from_goals({*o.goals_for_b, *o.goals_against_b});
            doc["share_b"] = share_b->value();
            text << "share B: " << fixed(share_b->value()) << " (" << *o.goals_for_b
                 << " for, " << *o.goals_against_b << " against)\n";
        }
        if (o.share) {
            used = TeamShare(*o.share);
            doc["share_mode"] = "given";
        } else if (share_a && share_b && !o.raw_share) {
            used = pairwise_share(*share_a, *share_b);
            doc["share_mode"] = "pairwise";
            text << "head-to-head share A: " << fixed(used->value())
                 << " (a / (a + b))\n";
        } else if (share_a) {
            used = share_a;
            doc["share_mode"] = "raw";
        }

        if (used) {
            const auto params = LeagueParams::neutral(o.expected_goals);
            const auto f = forecast(params, *used);
            doc["forecast_share"] = used->value();
            doc["expected_goals"] = o.expected_goals;
            doc["forecast"] = Json{{"win", f.win}, {"draw", f.draw}, {"loss", f.loss}};
            text << "expected goals: " << o.expected_goals << '\n'
                 << "forecast for A (share " << fixed(used->value()) << "): win "
                 << fixed(f.win) << "  draw " << fixed(f.draw) << "  loss " << fixed(f.loss)
                 << '\n';
        }

        if (o.score) {
            const ScoreLine score = parse_score(*o.score);
            const double c = dominance_confidence(score);
            Json conf{{"score", *o.score}, {"value", c}};
            text << "dominance confidence " << *o.score << ": " << fixed(c, 6);
            if (score.total() + 1 <= 120) {
                const auto exact = dominance_confidence_exact(score);
                std::ostringstream frac;
                frac << static_cast<std::uint64_t>(exact.numerator) << "/2^" << exact.exponent;
                if (exact.exponent <= 63) {
                    frac.str("");
                    frac << static_cast<std::uint64_t>(exact.numerator) << "/"
                         << (std::uint64_t{1} << exact.exponent);
                }
                if (exact.numerator <= std::numeric_limits<std::uint64_t>::max()) {
                    conf["exact"] = frac.str();
                    text << " (" << frac.str() << ")";
                }
            }
            conf["model"] =
                "uniform prior on the goal share, P(p_A > 1/2 | k:l); not comparable with "
                "other published score-confidence figures";
            doc["dominance_confidence"] = conf;
            text << "\n  note: " << conf["model"].get<std::string>() << '\n';
        }

        if (o.target) {
            double trailing = 0.0;
            if (o.trailing) {
                trailing = *o.trailing;
            } else if (used) {
                trailing = trailing_prob(*used);
            } else {
                throw std::invalid_argument("--target needs --trailing or a share");
            }
            const auto needed = required_strength(trailing, *o.target);
            doc["required_strength"] =
                Json{{"trailing", trailing}, {"target", *o.target}, {"share", needed.value()}};
            text << "share needed after 0:2 (trailing " << fixed(trailing) << ") to reach "
                 << fixed(*o.target) << ": " << fixed(needed.value()) << '\n';
        }

        if (doc.empty()) {
            throw std::invalid_argument(
                "nothing to do: give --share, goal records, --score or --target");
        }
    } catch (const NoSolutionError& e) {
        error(err, e.what());
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        error(err, e.what());
        return kUsageError;
    }
    if (o.json) {
        out << doc.dump(2) << '\n';
    } else {
        out << text.str();
    }
    return kOk;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Match statistics: comeback resilience, home advantage and score forecasts",
                 "comeback"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    AnalyzeOptions analyze;
    std::string leeway_mode = "strict";
    std::string format = "json";
    bool lenient = false;
    auto* a = app.add_subcommand("analyze", "Frequency tables and resilience report for a match CSV");
    a->add_option("input", analyze.input, "Match CSV")->required();
    a->add_option("--periods", analyze.periods,
                  "Season buckets, e.g. 1963/64-1971/72,1972/73-1981/82");
    a->add_option("--leeway-mode", leeway_mode, "strict | any")
        ->check(CLI::IsMember({"strict", "any"}));
    a->add_flag("--compensate", analyze.compensate,
                "Headline frequencies use the home/away mean instead of pooled counts");
    a->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    a->add_option("--team", analyze.teams, "Restrict team rows (repeatable or comma-separated)")
        ->delimiter(',');
    a->add_flag("--lenient", lenient, "Skip bad rows instead of failing");
    a->add_option("--output,-o", analyze.output, "JSON output file (default stdout)");
    a->add_option("--output-dir", analyze.output_dir, "Directory for --format csv tables");
    a->add_option("--threads", analyze.threads, "Counting threads")->check(CLI::Range(1, 64));

    SimulateOptions simulate;
    simulate.config.n_matches = 1000;
    std::optional<double> boost;
    auto* s = app.add_subcommand("simulate", "Generate a synthetic match corpus as CSV");
    s->add_option("--matches", simulate.config.n_matches, "Number of matches")
        ->check(CLI::PositiveNumber);
    s->add_option("--expected-goals", simulate.config.expected_goals, "Goals per match E")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--home-share", simulate.config.home_share, "Home goal share")
        ->check(CLI::Range(0.0, 1.0));
    s->add_option("--boost", boost, "Goal share adopted after conceding the first two goals")
        ->check(CLI::Range(0.0, 1.0));
    s->add_option("--seed", simulate.config.seed, "Master seed");
    s->add_option("--teams", simulate.teams, "Synthetic round-robin pool size (0: HOME vs AWAY)");
    s->add_option("--first-season", simulate.config.first_season, "First season start year");
    s->add_option("--output,-o", simulate.output, "Output CSV (default stdout)");
    s->add_option("--threads", simulate.threads, "Generator threads")->check(CLI::Range(1, 64));

    MatchupOptions matchup;
    auto* m = app.add_subcommand("matchup", "Head-to-head forecast and score confidence");
    m->add_option("--gf-a,--goals-for-a", matchup.goals_for_a, "Goals scored by A");
    m->add_option("--ga-a,--goals-against-a", matchup.goals_against_a, "Goals conceded by A");
    m->add_option("--gf-b,--goals-for-b", matchup.goals_for_b, "Goals scored by B");
    m->add_option("--ga-b,--goals-against-b", matchup.goals_against_b, "Goals conceded by B");
    m->add_option("--share", matchup.share, "Goal share of A")->check(CLI::Range(0.0, 1.0));
    m->add_option("--expected-goals", matchup.expected_goals, "Goals per match E")
        ->check(CLI::NonNegativeNumber);
    m->add_flag("--raw-share", matchup.raw_share, "Forecast with A's raw share, not a/(a+b)");
    m->add_option("--score", matchup.score, "Observed score k:l for the dominance confidence");
    m->add_option("--trailing", matchup.trailing, "Leeway probability for --target");
    m->add_option("--target", matchup.target, "Comeback probability to reach");
    m->add_flag("--json", matchup.json, "JSON output");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& arg : args) argv.push_back(arg.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        error(err, e.what());
        return kUsageError;
    }

    if (a->parsed()) {
        analyze.mode = leeway_mode == "any" ? LeewayMode::AnyDeficit : LeewayMode::Strict;
        analyze.format = format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
        analyze.parse_mode = lenient ? ParseMode::Lenient : ParseMode::Strict;
        return run_analyze(analyze, out, err);
    }
    if (s->parsed()) {
        if (boost) simulate.config.resilience_boost = TeamShare(*boost);
        return run_simulate(simulate, out, err);
    }
    return run_matchup(matchup, out, err);
}

}  // namespace comeback::cli
