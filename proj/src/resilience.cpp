#include "comeback/resilience.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace comeback {

double trailing_prob(TeamShare share) {
    const double q = share.complement_value();
    return q * q;
}

double comeback_draw_prob(double trailing, TeamShare share) {
    const double p = share.value();
    return trailing * p * p;
}

double comeback_win_prob(double trailing, TeamShare share) {
    const double p = share.value();
    return trailing * p * p * p;
}

double comeback_prob(double trailing, TeamShare share) {
    return comeback_draw_prob(trailing, share) + comeback_win_prob(trailing, share);
}

ComebackProbs comeback_breakdown(TeamShare share) {
    ComebackProbs out;
    out.trailing = trailing_prob(share);
    out.draw = comeback_draw_prob(out.trailing, share);
    out.win = comeback_win_prob(out.trailing, share);
    out.win_or_draw = out.draw + out.win;
    return out;
}

ComebackBound max_comeback_bound() {
    const auto f = [](double p) {
        const TeamShare share(p);
        return comeback_prob(trailing_prob(share), share);
    };
    // f is unimodal on [0,1]: zero at both ends, single interior maximum.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0;
    double hi = 1.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > 1e-12) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    const double argmax = 0.5 * (lo + hi);
    return {f(argmax), TeamShare(argmax)};
}

TeamShare strength_from_trailing(double trailing_frequency) {
    if (!(trailing_frequency >= 0.0 && trailing_frequency <= 1.0)) {
        throw std::invalid_argument("trailing frequency must lie in [0,1], got " +
                                    std::to_string(trailing_frequency));
    }
    return TeamShare(1.0 - std::sqrt(trailing_frequency));
}

TeamShare required_strength(double trailing, double target) {
    if (!(trailing > 0.0 && trailing <= 1.0)) {
        throw std::invalid_argument("required_strength: trailing must lie in (0,1]");
    }
    if (!(target >= 0.0)) {
        throw std::invalid_argument("required_strength: target must be >= 0");
    }
    if (target > 2.0 * trailing) {
        throw NoSolutionError("no goal share reaches comeback target " + std::to_string(target) +
                              " from trailing probability " + std::to_string(trailing));
    }
    if (target == 0.0) return TeamShare(0.0);
    const auto g = [trailing](double p) { return trailing * p * p * (1.0 + p); };
    double lo = 0.0;
    double hi = 1.0;
    // g is strictly increasing on [0,1]; 60 halvings take the bracket far below 1e-9.
    for (int i = 0; i < 60 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return TeamShare(0.5 * (lo + hi));
}

ResilienceDelta resilience_delta(double empirical, double expected, std::uint64_t n_leeways) {
    ResilienceDelta out;
    out.empirical = empirical;
    out.expected = expected;
    out.delta = empirical - expected;
    // Standard error under the model, so an empirical 0 or 1 cannot shrink it.
    out.std_error =
        n_leeways == 0 ? 0.0 : std::sqrt(expected * (1.0 - expected) / static_cast<double>(n_leeways));
    out.significant = n_leeways > 0 && std::abs(out.delta) > 2.0 * out.std_error;
    return out;
}

double exact_comeback_given_leeway(const LeagueParams& params, TeamShare /*share*/,
                                   TeamShare boosted_share) {
    // The (1-p)^2 leeway factor cancels in the conditional, so only the
    // post-leeway share matters.
    const double e = params.expected_goals();
    if (e == 0.0) return 0.0;
    const std::uint32_t max_total = std::max<std::uint32_t>(2, poisson_truncation(e));
    double numerator = 0.0;
    double normalizer = 0.0;
    for (std::uint32_t m = 2; m <= max_total; ++m) {
        const double pm = total_goals_pmf(m, e);
        normalizer += pm;
        // Trailing side finishes with j of the remaining m-2 goals against
        // m-j for the opponent; win or draw iff j >= ceil(m/2).
        const std::uint32_t remaining = m - 2;
        double tail = 0.0;
        for (std::uint32_t j = (m + 1) / 2; j <= remaining; ++j) {
            tail += conditional_score_pmf(j, remaining, boosted_share);
        }
        numerator += pm * tail;
    }
    return normalizer > 0.0 ? numerator / normalizer : 0.0;
}

}  // namespace comeback
