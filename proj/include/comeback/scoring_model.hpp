#pragma once

// Independent-Poisson score model and its binomial x Poisson factorization.
//
// A match between team A and team B produces m ~ Poisson(E) goals; each goal
// is independently credited to A with probability p_A ("goal share"). The
// joint probability of a k:l result is then
//
//   p(k,l) = C(k+l, k) p_A^k (1-p_A)^l * E^(k+l) e^-E / (k+l)!
//
// which is identical to the product of two Poisson laws with means p_A*E and
// (1-p_A)*E. Everything here is pure and thread-safe.

#include <cstdint>

namespace comeback {

/// A goal-scoring share in [0,1]: the fraction of a match's goals expected
/// to be scored by one side.
class TeamShare {
public:
    /// Throws std::invalid_argument when value is outside [0,1] or NaN.
    explicit TeamShare(double value);

    [[nodiscard]] double value() const noexcept { return value_; }
    /// 1 - value, stored so that complement().complement() gives back the
    /// same pair of numbers and the model is exactly symmetric under it.
    [[nodiscard]] double complement_value() const noexcept { return complement_; }
    [[nodiscard]] TeamShare complement() const noexcept;

    friend bool operator==(TeamShare, TeamShare) = default;

private:
    TeamShare(double value, double complement) noexcept : value_(value), complement_(complement) {}

    double value_;
    double complement_;
};

/// Expected goals per match plus the home/away split of those goals.
class LeagueParams {
public:
    /// Throws std::invalid_argument unless expected_goals >= 0 and the two
    /// shares lie in [0,1] and sum to 1 within 1e-12.
    LeagueParams(double expected_goals, double home_share, double away_share);

    /// Convenience: away share = 1 - home share.
    static LeagueParams from_home_share(double expected_goals, double home_share);
    /// Neutral ground, shares 0.5/0.5.
    static LeagueParams neutral(double expected_goals);

    [[nodiscard]] double expected_goals() const noexcept { return expected_goals_; }
    [[nodiscard]] double home_share() const noexcept { return home_share_; }
    [[nodiscard]] double away_share() const noexcept { return away_share_; }

private:
    double expected_goals_;
    double home_share_;
    double away_share_;
};

struct ScoreLine {
    std::uint32_t for_goals = 0;
    std::uint32_t against_goals = 0;

    [[nodiscard]] std::uint32_t total() const noexcept { return for_goals + against_goals; }
    friend bool operator==(const ScoreLine&, const ScoreLine&) = default;
};

struct OutcomeProbs {
    double win = 0.0;
    double draw = 0.0;
    double loss = 0.0;
};

/// Tail tolerance used for every infinite sum over the goal count.
inline constexpr double kTailTolerance = 1e-12;

/// Smallest M such that P(m > M) < tolerance for m ~ Poisson(E).
/// Uses the geometric bound pmf(M+1) / (1 - E/(M+2)), valid once M+2 > E.
[[nodiscard]] std::uint32_t poisson_truncation(double expected_goals,
                                               double tolerance = kTailTolerance);

/// P(m) = E^m e^-E / m!. Log-space for m > 20. E = 0 gives 1 iff m = 0.
[[nodiscard]] double total_goals_pmf(std::uint32_t m, double expected_goals);
[[nodiscard]] double total_goals_pmf(std::uint32_t m, const LeagueParams& params);

/// Binomial coefficient as a double (exact while the result fits in 53 bits).
[[nodiscard]] double binomial_coefficient(std::uint32_t n, std::uint32_t k);

/// P(k | m) = C(m,k) p^k (1-p)^(m-k). Throws std::invalid_argument if k > m.
[[nodiscard]] double conditional_score_pmf(std::uint32_t k, std::uint32_t m, TeamShare share);

/// p(k,l) in factorized form: conditional_score_pmf(k, k+l) * total_goals_pmf(k+l).
[[nodiscard]] double joint_score_prob(ScoreLine score, const LeagueParams& params,
                                      TeamShare share);

/// Win/draw/loss for the side holding `share`, summed over the triangle
/// k + l <= poisson_truncation(E).
[[nodiscard]] OutcomeProbs outcome_probabilities(const LeagueParams& params, TeamShare share);

/// Probability that `share`'s side scores the first goal: p (1 - e^-E).
[[nodiscard]] double first_goal_prob(const LeagueParams& params, TeamShare share);

/// Probability that the opponent scores the first two goals:
/// (1-p)^2 (1 - e^-E (1+E)).
[[nodiscard]] double strict_leeway_prob(const LeagueParams& params, TeamShare share);

}  // namespace comeback
