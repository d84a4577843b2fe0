#include "comeback/matchup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace comeback {

namespace {

constexpr unsigned kExactLimit = 120;

void require_goals(ScoreLine score) {
    if (score.total() == 0) {
        throw std::invalid_argument("dominance confidence needs at least one goal");
    }
}

}  // namespace

TeamShare share_from_goals(const TeamRecordSummary& summary) {
    const auto total = summary.goals_for + summary.goals_against;
    if (total == 0) throw std::invalid_argument("share_from_goals: no goals for or against");
    return TeamShare(static_cast<double>(summary.goals_for) / static_cast<double>(total));
}

TeamShare pairwise_share(TeamShare a, TeamShare b) {
    const double sum = a.value() + b.value();
    if (sum == 0.0) throw std::invalid_argument("pairwise_share: both shares are zero");
    // Always divide the smaller share, so (a, b) and (b, a) give one value
    // and its stored complement.
    if (a.value() <= b.value()) return TeamShare(a.value() / sum);
    return TeamShare(b.value() / sum).complement();
}

OutcomeProbs forecast(const LeagueParams& params, TeamShare share) {
    return outcome_probabilities(params, share);
}

double DyadicFraction::value() const noexcept {
    return std::ldexp(static_cast<double>(numerator), -static_cast<int>(exponent));
}

DyadicFraction dominance_confidence_exact(ScoreLine score) {
    require_goals(score);
    const unsigned n = score.total() + 1;
    if (n > kExactLimit) {
        throw std::out_of_range("dominance_confidence_exact: k + l + 1 exceeds 120");
    }
    // P(Binomial(n, 1/2) <= k) = sum_{j<=k} C(n,j) / 2^n
    uint128 coefficient = 1;
    uint128 sum = 0;
    for (unsigned j = 0; j <= score.for_goals; ++j) {
        sum += coefficient;
        coefficient = coefficient * (n - j) / (j + 1);
    }
    return {sum, n};
}

double dominance_confidence(ScoreLine score) {
    require_goals(score);
    const unsigned n = score.total() + 1;
    if (n <= kExactLimit) return dominance_confidence_exact(score).value();
    const double log_half_n = n * std::log(0.5);
    double sum = 0.0;
    for (unsigned j = 0; j <= score.for_goals; ++j) {
        sum += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                        log_half_n);
    }
    return std::min(sum, 1.0);
}

}  // namespace comeback
