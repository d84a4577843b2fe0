#pragma once

// Monte Carlo goal-sequence generator under the Poisson/Bernoulli model.
//
// Reproducibility contract: the corpus is cut into blocks of kBlockSize
// consecutive matches. Block b draws from std::mt19937_64 seeded with
// substream_seed(seed, b) = splitmix64(seed + (b + 1) * 0x9E3779B97F4A7C15).
// Uniforms are (x >> 11) * 2^-53, Poisson counts come from inversion and
// each goal is credited to the home side iff its uniform is below the
// current home share. The output therefore depends only on the config, not
// on thread count or platform.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "comeback/dataset.hpp"
#include "comeback/scoring_model.hpp"

namespace comeback {

inline constexpr std::uint64_t kBlockSize = 4096;

struct TeamSpec {
    std::string name;
    double strength = 1.0;  // relative attacking weight, > 0
    std::optional<TeamShare> boost;  // overrides SimConfig::resilience_boost
};

struct SimConfig {
    double expected_goals = 3.1;
    double home_share = 0.5;
    /// Goal share a side adopts for the rest of the match once it has
    /// conceded the first two goals.
    std::optional<TeamShare> resilience_boost;
    std::uint64_t n_matches = 1;
    std::uint64_t seed = 0;
    /// Empty: every match is "HOME" vs "AWAY" in one season with matchday = index + 1.
    /// Otherwise a double round robin per season, starting at first_season.
    std::vector<TeamSpec> team_pool;
    int first_season = 2000;

    /// Throws std::invalid_argument on an inconsistent config.
    void validate() const;
};

/// Output of the reference splitmix64 generator from state x (the state is
/// advanced by the golden-ratio increment before mixing).
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;
[[nodiscard]] std::uint64_t substream_seed(std::uint64_t master, std::uint64_t block) noexcept;

class MatchRng {
public:
    explicit MatchRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform() noexcept;
    [[nodiscard]] std::uint32_t poisson(double mean) noexcept;

private:
    std::mt19937_64 engine_;
};

/// One match of the corpus: who plays, and under which shares.
struct Fixture {
    std::string season;
    std::uint32_t matchday = 1;
    std::string home_team;
    std::string away_team;
    double home_share = 0.5;
    std::optional<TeamShare> home_boost;
    std::optional<TeamShare> away_boost;
};

/// m ~ Poisson(E) goals credited to home with the fixture's home share; a
/// side that concedes the first two goals switches to its boost share, if any.
[[nodiscard]] MatchRecord simulate_match(double expected_goals, const Fixture& fixture,
                                         MatchRng& rng);

/// A single "HOME" vs "AWAY" match under `config`'s shares and boost.
[[nodiscard]] MatchRecord simulate_match(const SimConfig& config, MatchRng& rng);

/// Streams the corpus in match order. `threads` > 1 generates blocks
/// concurrently; the emitted sequence is identical for every thread count.
void simulate_corpus(const SimConfig& config,
                     const std::function<void(const MatchRecord&)>& sink,
                     unsigned threads = 1);

[[nodiscard]] std::vector<MatchRecord> simulate_corpus(const SimConfig& config,
                                                       unsigned threads = 1);

/// n equally strong teams named T01, T02, ...
[[nodiscard]] std::vector<TeamSpec> uniform_team_pool(std::size_t n);

}  // namespace comeback
