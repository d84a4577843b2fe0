#pragma once

// Leeway and comeback probabilities for a team that concedes the first two
// goals of a match, plus the resilience offset between what a team achieved
// and what a constant goal share predicts.

#include <cstdint>
#include <stdexcept>

#include "comeback/scoring_model.hpp"

namespace comeback {

/// Raised when no goal share in [0,1] reaches a requested comeback target.
class NoSolutionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ComebackProbs {
    double trailing = 0.0;
    double draw = 0.0;
    double win = 0.0;
    double win_or_draw = 0.0;
};

struct ResilienceDelta {
    double empirical = 0.0;
    double expected = 0.0;
    double delta = 0.0;
    double std_error = 0.0;  // binomial, sqrt(expected (1 - expected) / n)
    /// |delta| > 2 standard errors, with at least one observed leeway.
    bool significant = false;
};

struct ComebackBound {
    double value = 0.0;
    TeamShare argmax{0.0};
};

/// (1 - p)^2: probability that the opponent scores two goals in a row.
[[nodiscard]] double trailing_prob(TeamShare share);

/// trailing * p^2: draw 2:2 after trailing 0:2.
[[nodiscard]] double comeback_draw_prob(double trailing, TeamShare share);

/// trailing * p^3: win 3:2 after trailing 0:2.
[[nodiscard]] double comeback_win_prob(double trailing, TeamShare share);

/// trailing * p^2 (1 + p), evaluated as draw + win so the two always add up.
[[nodiscard]] double comeback_prob(double trailing, TeamShare share);

[[nodiscard]] ComebackProbs comeback_breakdown(TeamShare share);

/// Maximum of (1-p)^2 p^2 (1+p) on [0,1], by golden-section search.
[[nodiscard]] ComebackBound max_comeback_bound();

/// 1 - sqrt(hT): the goal share implied by an observed 0:2 leeway frequency.
/// Throws std::invalid_argument outside [0,1].
[[nodiscard]] TeamShare strength_from_trailing(double trailing_frequency);

/// Solves trailing * p^2 (1+p) = target for p by bisection (|dp| < 1e-9).
/// Throws std::invalid_argument if trailing <= 0 or target < 0, and
/// NoSolutionError when target > 2 * trailing.
[[nodiscard]] TeamShare required_strength(double trailing, double target);

[[nodiscard]] ResilienceDelta resilience_delta(double empirical, double expected,
                                               std::uint64_t n_leeways);

/// P(final win or draw | opponent scored the match's first two goals) when
/// the remaining goals go to the trailing side with probability
/// `boosted_share`. Passing boosted_share == share models no resilience.
/// Returns 0 for E = 0 (the conditioning event is impossible).
[[nodiscard]] double exact_comeback_given_leeway(const LeagueParams& params, TeamShare share,
                                                 TeamShare boosted_share);

}  // namespace comeback
