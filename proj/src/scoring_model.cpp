#include "comeback/scoring_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace comeback {

namespace {

constexpr std::uint32_t kDirectPmfLimit = 20;
constexpr std::uint32_t kDirectBinomialLimit = 60;

void require_share(double value, const char* what) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " +
                                    std::to_string(value));
    }
}

}  // namespace

TeamShare::TeamShare(double value) : value_(value), complement_(1.0 - value) {
    require_share(value, "team share");
}

TeamShare TeamShare::complement() const noexcept { return TeamShare(complement_, value_); }

LeagueParams::LeagueParams(double expected_goals, double home_share, double away_share)
    : expected_goals_(expected_goals), home_share_(home_share), away_share_(away_share) {
    if (!(expected_goals >= 0.0) || !std::isfinite(expected_goals)) {
        throw std::invalid_argument("expected goals must be finite and >= 0");
    }
    require_share(home_share, "home share");
    require_share(away_share, "away share");
    if (std::abs(home_share + away_share - 1.0) > 1e-12) {
        throw std::invalid_argument("home and away shares must sum to 1");
    }
}

LeagueParams LeagueParams::from_home_share(double expected_goals, double home_share) {
    return LeagueParams(expected_goals, home_share, 1.0 - home_share);
}

LeagueParams LeagueParams::neutral(double expected_goals) {
    return LeagueParams(expected_goals, 0.5, 0.5);
}

std::uint32_t poisson_truncation(double expected_goals, double tolerance) {
    if (expected_goals <= 0.0) return 0;
    auto m = static_cast<std::uint32_t>(std::ceil(expected_goals));
    for (;; ++m) {
        const double ratio = expected_goals / (m + 2.0);
        if (ratio >= 1.0) continue;
        if (total_goals_pmf(m + 1, expected_goals) / (1.0 - ratio) < tolerance) return m;
    }
}

double total_goals_pmf(std::uint32_t m, double expected_goals) {
    if (expected_goals == 0.0) return m == 0 ? 1.0 : 0.0;
    if (m <= kDirectPmfLimit) {
        double factorial = 1.0;
        for (std::uint32_t i = 2; i <= m; ++i) factorial *= i;
        return std::pow(expected_goals, m) * std::exp(-expected_goals) / factorial;
    }
    return std::exp(m * std::log(expected_goals) - expected_goals - std::lgamma(m + 1.0));
}

double total_goals_pmf(std::uint32_t m, const LeagueParams& params) {
    return total_goals_pmf(m, params.expected_goals());
}

double binomial_coefficient(std::uint32_t n, std::uint32_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double result = 1.0;
    for (std::uint32_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

double conditional_score_pmf(std::uint32_t k, std::uint32_t m, TeamShare share) {
    if (k > m) {
        throw std::invalid_argument("conditional_score_pmf: k = " + std::to_string(k) +
                                    " exceeds m = " + std::to_string(m));
    }
    const double p = share.value();
    const double q = share.complement_value();
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (q == 0.0) return k == m ? 1.0 : 0.0;
    if (m <= kDirectBinomialLimit) {
        return binomial_coefficient(m, k) * (std::pow(p, k) * std::pow(q, m - k));
    }
    const double log_c = std::lgamma(m + 1.0) - (std::lgamma(k + 1.0) + std::lgamma(m - k + 1.0));
    return std::exp(log_c + (k * std::log(p) + (m - k) * std::log(q)));
}

double joint_score_prob(ScoreLine score, const LeagueParams& params, TeamShare share) {
    const std::uint32_t m = score.total();
    return conditional_score_pmf(score.for_goals, m, share) * total_goals_pmf(m, params);
}

OutcomeProbs outcome_probabilities(const LeagueParams& params, TeamShare share) {
    // Loss terms (k < l) and win terms (k > l) are visited in mirrored order so
    // that swapping p <-> 1-p swaps win and loss bit for bit.
    OutcomeProbs out;
    const std::uint32_t max_total = poisson_truncation(params.expected_goals());
    for (std::uint32_t m = 0; m <= max_total; ++m) {
        const double pm = total_goals_pmf(m, params);
        for (std::uint32_t j = 0; 2 * j < m; ++j) {
            out.loss += conditional_score_pmf(j, m, share) * pm;
            out.win += conditional_score_pmf(m - j, m, share) * pm;
        }
        if (m % 2 == 0) out.draw += conditional_score_pmf(m / 2, m, share) * pm;
    }
    return out;
}

double first_goal_prob(const LeagueParams& params, TeamShare share) {
    return share.value() * -std::expm1(-params.expected_goals());
}

double strict_leeway_prob(const LeagueParams& params, TeamShare share) {
    const double e = params.expected_goals();
    const double at_least_two = -std::expm1(-e) - e * std::exp(-e);
    const double q = share.complement_value();
    return q * q * at_least_two;
}

}  // namespace comeback
