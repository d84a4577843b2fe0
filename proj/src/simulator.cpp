#include "comeback/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace comeback {

namespace {

// Inversion stays accurate while e^-mean is far from underflow.
constexpr double kInversionLimit = 30.0;

struct Schedule {
    std::vector<Fixture> season;  // one season of fixtures, season label unset
};

Fixture pool_fixture(const SimConfig& config, std::size_t home, std::size_t away,
                     std::uint32_t matchday) {
    const auto& h = config.team_pool[home];
    const auto& a = config.team_pool[away];
    Fixture f;
    f.matchday = matchday;
    f.home_team = h.name;
    f.away_team = a.name;
    const double wh = config.home_share * h.strength;
    const double wa = (1.0 - config.home_share) * a.strength;
    f.home_share = wh + wa > 0.0 ? wh / (wh + wa) : config.home_share;
    f.home_boost = h.boost ? h.boost : config.resilience_boost;
    f.away_boost = a.boost ? a.boost : config.resilience_boost;
    return f;
}

// Circle-method double round robin; an odd pool gets a bye slot.
Schedule round_robin(const SimConfig& config) {
    const std::size_t n = config.team_pool.size();
    const std::size_t slots = n % 2 == 0 ? n : n + 1;
    const std::size_t rounds = slots - 1;
    Schedule schedule;
    for (std::size_t leg = 0; leg < 2; ++leg) {
        for (std::size_t r = 0; r < rounds; ++r) {
            const auto matchday = static_cast<std::uint32_t>(leg * rounds + r + 1);
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            pairs.emplace_back(r % 2 == 0 ? slots - 1 : r, r % 2 == 0 ? r : slots - 1);
            for (std::size_t i = 1; i < slots / 2; ++i) {
                pairs.emplace_back((r + i) % rounds, (r + rounds - i) % rounds);
            }
            for (auto [home, away] : pairs) {
                if (leg == 1) std::swap(home, away);
                if (home >= n || away >= n) continue;
                schedule.season.push_back(pool_fixture(config, home, away, matchday));
            }
        }
    }
    return schedule;
}

Fixture fixture_at(const SimConfig& config, const Schedule& schedule, std::uint64_t index) {
    if (schedule.season.empty()) {
        Fixture f;
        f.season = season_label(config.first_season);
        f.matchday = static_cast<std::uint32_t>(index + 1);
        f.home_team = "HOME";
        f.away_team = "AWAY";
        f.home_share = config.home_share;
        f.home_boost = config.resilience_boost;
        f.away_boost = config.resilience_boost;
        return f;
    }
    const std::uint64_t per_season = schedule.season.size();
    Fixture f = schedule.season[index % per_season];
    f.season = season_label(config.first_season + static_cast<int>(index / per_season));
    return f;
}

std::vector<MatchRecord> simulate_block(const SimConfig& config, const Schedule& schedule,
                                        std::uint64_t block) {
    const std::uint64_t begin = block * kBlockSize;
    const std::uint64_t end = std::min(config.n_matches, begin + kBlockSize);
    MatchRng rng(substream_seed(config.seed, block));
    std::vector<MatchRecord> out;
    out.reserve(end - begin);
    for (std::uint64_t i = begin; i < end; ++i) {
        out.push_back(simulate_match(config.expected_goals, fixture_at(config, schedule, i), rng));
    }
    return out;
}

}  // namespace

void SimConfig::validate() const {
    if (!(expected_goals >= 0.0) || !std::isfinite(expected_goals)) {
        throw std::invalid_argument("expected goals must be finite and >= 0");
    }
    (void)TeamShare(home_share);
    if (n_matches < 1) throw std::invalid_argument("n_matches must be >= 1");
    if (team_pool.size() == 1) throw std::invalid_argument("a team pool needs at least two teams");
    for (std::size_t i = 0; i < team_pool.size(); ++i) {
        const auto& t = team_pool[i];
        if (t.name.empty()) throw std::invalid_argument("team pool entry without a name");
        if (!(t.strength > 0.0) || !std::isfinite(t.strength)) {
            throw std::invalid_argument("team strength must be positive: " + t.name);
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (team_pool[j].name == t.name) {
                throw std::invalid_argument("duplicate team name in pool: " + t.name);
            }
        }
    }
    (void)season_label(first_season);
    if (!team_pool.empty()) {
        const std::uint64_t per_season = team_pool.size() * (team_pool.size() - 1);
        (void)season_label(first_season + static_cast<int>((n_matches - 1) / per_season));
    } else if (n_matches > 0xFFFFFFFFull) {
        throw std::invalid_argument("too many matches for a single synthetic season");
    }
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t block) noexcept {
    return splitmix64(master + (block + 1) * 0x9E3779B97F4A7C15ull);
}

double MatchRng::uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint32_t MatchRng::poisson(double mean) noexcept {
    if (mean <= 0.0) return 0;
    if (mean > kInversionLimit) {
        // Sum of independent Poisson draws with means <= kInversionLimit.
        const auto parts = static_cast<unsigned>(std::ceil(mean / kInversionLimit));
        std::uint32_t total = 0;
        for (unsigned i = 0; i < parts; ++i) total += poisson(mean / parts);
        return total;
    }
    const double u = uniform();
    double term = std::exp(-mean);
    double cdf = term;
    std::uint32_t k = 0;
    while (u >= cdf && k < 1000) {
        ++k;
        term *= mean / k;
        cdf += term;
        if (term == 0.0) break;
    }
    return k;
}

MatchRecord simulate_match(double expected_goals, const Fixture& fixture, MatchRng& rng) {
    MatchRecord record;
    record.season = fixture.season;
    record.matchday = fixture.matchday;
    record.home_team = fixture.home_team;
    record.away_team = fixture.away_team;

    const std::uint32_t m = rng.poisson(expected_goals);
    record.goals.reserve(m);
    double home_share = fixture.home_share;
    for (std::uint32_t g = 0; g < m; ++g) {
        record.goals.push_back(rng.uniform() < home_share ? Side::Home : Side::Away);
        if (g == 1 && record.goals[0] == record.goals[1]) {
            const Side trailing = opponent(record.goals[0]);
            if (trailing == Side::Home && fixture.home_boost) {
                home_share = fixture.home_boost->value();
            } else if (trailing == Side::Away && fixture.away_boost) {
                home_share = 1.0 - fixture.away_boost->value();
            }
        }
    }
    return record;
}

MatchRecord simulate_match(const SimConfig& config, MatchRng& rng) {
    SimConfig single = config;
    single.team_pool.clear();
    return simulate_match(config.expected_goals, fixture_at(single, Schedule{}, 0), rng);
}

void simulate_corpus(const SimConfig& config, const std::function<void(const MatchRecord&)>& sink,
                     unsigned threads) {
    config.validate();
    const Schedule schedule = config.team_pool.empty() ? Schedule{} : round_robin(config);
    const std::uint64_t n_blocks = (config.n_matches + kBlockSize - 1) / kBlockSize;
    threads = std::clamp<unsigned>(threads, 1, 64);

    for (std::uint64_t first = 0; first < n_blocks; first += threads) {
        const std::uint64_t count = std::min<std::uint64_t>(threads, n_blocks - first);
        std::vector<std::vector<MatchRecord>> blocks(count);
        if (count == 1) {
            blocks[0] = simulate_block(config, schedule, first);
        } else {
            std::vector<std::exception_ptr> errors(count);
            std::vector<std::thread> workers;
            workers.reserve(count);
            for (std::uint64_t b = 0; b < count; ++b) {
                workers.emplace_back([&, b] {
                    try {
                        blocks[b] = simulate_block(config, schedule, first + b);
                    } catch (...) {
                        errors[b] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }
        for (const auto& block : blocks) {
            for (const auto& record : block) sink(record);
        }
    }
}

std::vector<MatchRecord> simulate_corpus(const SimConfig& config, unsigned threads) {
    std::vector<MatchRecord> out;
    out.reserve(config.n_matches);
    simulate_corpus(config, [&out](const MatchRecord& r) { out.push_back(r); }, threads);
    return out;
}

std::vector<TeamSpec> uniform_team_pool(std::size_t n) {
    std::vector<TeamSpec> pool;
    pool.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        std::string name = "T";
        if (i < 10) name.push_back('0');
        name += std::to_string(i);
        pool.push_back({name, 1.0, std::nullopt});
    }
    return pool;
}

}  // namespace comeback
