#pragma once

// Head-to-head analysis: goal shares from tournament records, outcome
// forecasts and a posterior confidence that a score reflects the stronger side.

#include <cstdint>

#include "comeback/scoring_model.hpp"

namespace comeback {

struct TeamRecordSummary {
    std::uint64_t goals_for = 0;
    std::uint64_t goals_against = 0;
};

/// goals_for / (goals_for + goals_against). Throws std::invalid_argument on 0:0.
[[nodiscard]] TeamShare share_from_goals(const TeamRecordSummary& summary);

/// a / (a + b): two independently estimated shares turned into a head-to-head
/// share for `a`. Throws std::invalid_argument when both are zero.
[[nodiscard]] TeamShare pairwise_share(TeamShare a, TeamShare b);

/// Outcome probabilities for the side holding `share`.
[[nodiscard]] OutcomeProbs forecast(const LeagueParams& params, TeamShare share);

__extension__ using uint128 = unsigned __int128;

/// An exact fraction numerator / 2^exponent.
struct DyadicFraction {
    uint128 numerator = 0;
    unsigned exponent = 0;

    [[nodiscard]] double value() const noexcept;
};

/// P(p_A > 1/2 | k:l) under a uniform prior on the goal share and the
/// conditional binomial likelihood, i.e. 1 - I_{1/2}(k+1, l+1). Computed
/// exactly through I_{1/2}(a,b) = P(Binomial(a+b-1, 1/2) >= a).
///
/// This is a self-contained Beta-posterior statistic; other published
/// score-confidence procedures use different models and give other numbers.
/// Throws std::invalid_argument for 0:0 and std::out_of_range when
/// k + l + 1 > 120 (beyond exact 128-bit arithmetic; use the double overload).
[[nodiscard]] DyadicFraction dominance_confidence_exact(ScoreLine score);

/// Same statistic as a double; falls back to log-space summation for long
/// matches.
[[nodiscard]] double dominance_confidence(ScoreLine score);

}  // namespace comeback
