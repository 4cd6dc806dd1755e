#pragma once
#include <rrdps/rates.hpp>

#include <array>
#include <string>
#include <vector>

namespace rrdps {

enum class Tier { none, infinite, two, three, four };

inline int tier_decoy_count(Tier t) {
    switch (t) {
        case Tier::two: return 2;
        case Tier::three: return 3;
        case Tier::four: return 4;
        default: throw std::domain_error("tier has no decoy intensities");
    }
}

// Highest photon number the tier can bound individually.
inline int tier_nth(Tier t) { return tier_decoy_count(t) - 1; }

inline std::string to_string(Tier t) {
    switch (t) {
        case Tier::none: return "none";
        case Tier::infinite: return "infinite";
        case Tier::two: return "two";
        case Tier::three: return "three";
        case Tier::four: return "four";
    }
    throw std::logic_error("unreachable");
}

inline Tier tier_from_string(const std::string& s) {
    for (Tier t : {Tier::none, Tier::infinite, Tier::two, Tier::three, Tier::four})
        if (to_string(t) == s) return t;
    throw std::domain_error("unknown tier '" + s + "'");
}

// Geometric ladder ending in vacuum; the vacuum member anchors Y0 exactly.
inline std::vector<double> default_decoys(Tier t, double mu) {
    switch (t) {
        case Tier::two: return {mu / 2, 0.0};
        case Tier::three: return {mu / 2, mu / 4, 0.0};
        case Tier::four: return {mu / 2, mu / 4, mu / 8, 0.0};
        default: throw std::domain_error("tier has no decoy intensities");
    }
}

// What Bob actually tallies for one per-pulse intensity setting v.
struct Observation {
    double v;
    double gain;
    double qber;
};

namespace detail {
// The bound algebra runs on F(v) = Q e^{Lv} = sum Yn (Lv)^n / n! and its
// error-weighted counterpart G(v) = E Q e^{Lv}.
struct FG {
    double f, g;
};
inline FG fg(const Observation& o, int L) {
    const double s = std::exp(L * o.v);
    return {o.gain * s, o.qber * o.gain * s};
}
inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }
inline void require_descending(const Observation& a, const Observation& b) {
    if (!(a.v > b.v)) throw std::domain_error("decoy intensities must be strictly descending");
}
} // namespace detail

// Lower bound on the background yield from the two smallest intensities;
// exact when o2 is vacuum.
inline double y0_lower(const Observation& o1, const Observation& o2, int L) {
    detail::require_descending(o1, o2);
    if (o2.v < 0.0) throw std::domain_error("negative decoy intensity");
    const auto [f1, g1] = detail::fg(o1, L);
    const auto [f2, g2] = detail::fg(o2, L);
    return detail::clamp01((o1.v * f2 - o2.v * f1) / (o1.v - o2.v));
}

inline double y1_lower(const Observation& sig, const Observation& o1, const Observation& o2,
                       int L, double y0l) {
    detail::require_descending(o1, o2);
    const double mu = sig.v, v1 = o1.v, v2 = o2.v;
    if (!(mu > v1 + v2))
        throw std::domain_error("y1_lower: signal intensity must exceed v1+v2");
    const double fm = detail::fg(sig, L).f;
    const double f1 = detail::fg(o1, L).f;
    const double f2 = detail::fg(o2, L).f;
    const double den = L * (mu * v1 - mu * v2 - v1 * v1 + v2 * v2);
    const double val = (mu / den) * (f1 - f2 - (v1 * v1 - v2 * v2) / (mu * mu) * (fm - y0l));
    return detail::clamp01(val);
}

inline double y2_lower(const Observation& sig, const Observation& o1, const Observation& o2,
                       const Observation& o3, int L, double y0l, double y1l) {
    detail::require_descending(o1, o2);
    detail::require_descending(o2, o3);
    const double mu = sig.v, v1 = o1.v, v2 = o2.v, v3 = o3.v;
    const double vsum = v1 + v2 + v3;
    if (!(mu > vsum))
        throw std::domain_error("y2_lower: signal intensity must exceed v1+v2+v3");
    const double fm = detail::fg(sig, L).f;
    const double f1 = detail::fg(o1, L).f;
    const double f2 = detail::fg(o2, L).f;
    const double f3 = detail::fg(o3, L).f;
    const double pi = (v2 - v3) * (v1 - v3) * (v1 - v2);
    const double d2 = (v2 - v3) * f1 - (v1 - v3) * f2 + (v1 - v2) * f3;
    const double x = L * mu;
    const double t1 = 2.0 * mu * d2 / (static_cast<double>(L) * L * (mu - vsum) * pi);
    const double t2 = 2.0 * vsum / (x * x * (mu - vsum)) * (fm - y0l - y1l * x);
    return detail::clamp01(t1 - t2);
}

inline double y3_lower(const Observation& sig, const Observation& o1, const Observation& o2,
                       const Observation& o3, const Observation& o4, int L, double y0l,
                       double y1l, double y2l) {
    detail::require_descending(o1, o2);
    detail::require_descending(o2, o3);
    detail::require_descending(o3, o4);
    const double mu = sig.v, v1 = o1.v, v2 = o2.v, v3 = o3.v, v4 = o4.v;
    const double vsum = v1 + v2 + v3 + v4;
    if (!(mu > vsum))
        throw std::domain_error("y3_lower: signal intensity must exceed v1+v2+v3+v4");
    const double fm = detail::fg(sig, L).f;
    const double f1 = detail::fg(o1, L).f;
    const double f2 = detail::fg(o2, L).f;
    const double f3 = detail::fg(o3, L).f;
    const double f4 = detail::fg(o4, L).f;
    const double d3 = f1 / ((v1 - v2) * (v1 - v3) * (v1 - v4))
                    - f2 / ((v2 - v3) * (v1 - v2) * (v2 - v4))
                    + f3 / ((v1 - v3) * (v2 - v3) * (v3 - v4))
                    - f4 / ((v1 - v4) * (v2 - v4) * (v3 - v4));
    const double x = L * mu;
    const double l3 = static_cast<double>(L) * L * L;
    const double t1 = 6.0 * mu / (l3 * (mu - vsum)) * d3;
    const double t2 = 6.0 * vsum / (mu - vsum) * (fm - y0l - y1l * x - y2l * x * x / 2.0)
                    / (x * x * x);
    return detail::clamp01(t1 - t2);
}

// Error-rate upper bounds. A nonpositive yield bound gives no leverage, so
// the bound saturates at 1 (flagged vacuous by BoundSet::vacuous below).
inline double e1_upper(const Observation& o1, const Observation& o2, int L, double y1l) {
    detail::require_descending(o1, o2);
    if (y1l <= 0.0) return 1.0;
    const double g1 = detail::fg(o1, L).g;
    const double g2 = detail::fg(o2, L).g;
    return detail::clamp01((g1 - g2) / (L * (o1.v - o2.v) * y1l));
}

inline double e2_upper(const Observation& o1, const Observation& o2, const Observation& o3,
                       int L, double y2l) {
    detail::require_descending(o1, o2);
    detail::require_descending(o2, o3);
    if (y2l <= 0.0) return 1.0;
    const double v1 = o1.v, v2 = o2.v, v3 = o3.v;
    const double g1 = detail::fg(o1, L).g;
    const double g2 = detail::fg(o2, L).g;
    const double g3 = detail::fg(o3, L).g;
    const double pi = (v2 - v3) * (v1 - v3) * (v1 - v2);
    const double num = (v2 - v3) * g1 - (v1 - v3) * g2 + (v1 - v2) * g3;
    return detail::clamp01(2.0 * num / (static_cast<double>(L) * L * y2l * pi));
}

inline double e3_upper(const Observation& o1, const Observation& o2, const Observation& o3,
                       const Observation& o4, int L, double y3l) {
    detail::require_descending(o1, o2);
    detail::require_descending(o2, o3);
    detail::require_descending(o3, o4);
    if (y3l <= 0.0) return 1.0;
    const double v1 = o1.v, v2 = o2.v, v3 = o3.v, v4 = o4.v;
    const double g1 = detail::fg(o1, L).g;
    const double g2 = detail::fg(o2, L).g;
    const double g3 = detail::fg(o3, L).g;
    const double g4 = detail::fg(o4, L).g;
    const double d3 = g1 / ((v1 - v2) * (v1 - v3) * (v1 - v4))
                    - g2 / ((v2 - v3) * (v1 - v2) * (v2 - v4))
                    + g3 / ((v1 - v3) * (v2 - v3) * (v3 - v4))
                    - g4 / ((v1 - v4) * (v2 - v4) * (v3 - v4));
    const double l3 = static_cast<double>(L) * L * L;
    return detail::clamp01(6.0 * d3 / (y3l * l3));
}

struct BoundSet {
    int nth = 0;
    double y0 = 0.0, y1 = 0.0, y2 = 0.0, y3 = 0.0;
    double e1 = 1.0, e2 = 1.0, e3 = 1.0;

    double y(int n) const {
        const std::array<double, 4> v{y0, y1, y2, y3};
        return v.at(n);
    }
    double e(int n) const {
        const std::array<double, 4> v{0.5, e1, e2, e3};
        return v.at(n);
    }
    // A clamped lower bound of zero carries no information.
    bool vacuous(int n) const { return n > 0 && y(n) <= 0.0; }
};

// Estimate yields and error rates from intensity observations. obs must be
// strictly descending; the final (smallest) intensity anchors every pair:
// Y0 from the two smallest, Y1 from (v1, smallest), Y2 from (v1, v2,
// smallest). That keeps the low-order bounds literally identical when a
// further decoy intensity is appended, so adding information never hurts.
inline BoundSet estimate_bounds(const Observation& sig, const std::vector<Observation>& obs,
                                int L) {
    if (L < 2) throw std::domain_error("estimate_bounds: packet length below 2");
    if (obs.size() < 2 || obs.size() > 4)
        throw std::domain_error("estimate_bounds: need 2 to 4 decoy observations");
    for (size_t i = 0; i + 1 < obs.size(); ++i) detail::require_descending(obs[i], obs[i + 1]);
    if (!(sig.v > obs.front().v))
        throw std::domain_error("estimate_bounds: signal intensity must exceed every decoy");
    if (obs.back().v < 0.0) throw std::domain_error("estimate_bounds: negative decoy intensity");

    const size_t k = obs.size();
    const Observation& last = obs.back();
    BoundSet b;
    b.nth = static_cast<int>(k) - 1;
    b.y0 = y0_lower(obs[k - 2], last, L);
    b.y1 = y1_lower(sig, obs[0], last, L, b.y0);
    b.e1 = e1_upper(obs[0], last, L, b.y1);
    if (k >= 3) {
        b.y2 = y2_lower(sig, obs[0], obs[1], last, L, b.y0, b.y1);
        b.e2 = e2_upper(obs[0], obs[1], last, L, b.y2);
    }
    if (k >= 4) {
        b.y3 = y3_lower(sig, obs[0], obs[1], obs[2], obs[3], L, b.y0, b.y1, b.y2);
        b.e3 = e3_upper(obs[0], obs[1], obs[2], obs[3], L, b.y3);
    }
    return b;
}

// Observations the no-eavesdropper channel would produce for a Poisson
// source at per-pulse intensity v. Decoy estimation consumes Poisson
// statistics; heralded sources keep the none/infinite analyses.
inline Observation observe(const Channel& ch, double v, int L) {
    const auto [q, e] = wcp_gain_qber(ch, v, L);
    return {v, q, e};
}

inline BoundSet estimate_bounds(const Channel& ch, double mu, int L,
                                const std::vector<double>& decoys) {
    std::vector<Observation> obs;
    obs.reserve(decoys.size());
    for (double v : decoys) obs.push_back(observe(ch, v, L));
    return estimate_bounds(observe(ch, mu, L), obs, L);
}

struct FiniteRate {
    RateResult rr;
    BoundSet bounds;
};

// Key rate from finitely many decoy intensities. Each bounded photon
// number contributes its own bracket; brackets driven nonpositive by the
// bounds are dropped rather than charged. The n=0 bracket is 1 - f at
// best and never survives.
inline FiniteRate rate_finite(const Channel& ch, double mu, int L, Tier tier,
                              const std::vector<double>& decoys) {
    if (static_cast<int>(decoys.size()) != tier_decoy_count(tier))
        throw std::domain_error("rate_finite: tier wants " +
                                std::to_string(tier_decoy_count(tier)) + " decoy intensities, got " +
                                std::to_string(decoys.size()));
    const BoundSet b = estimate_bounds(ch, mu, L, decoys);
    const auto [q, eb] = wcp_gain_qber(ch, mu, L);
    const double x = L * mu;
    double r = 0.0;
    for (int n = 0; n <= b.nth; ++n) {
        const double br = 1.0 - ch.f * h2_cost(b.e(n)) - binary_entropy(phase_error_n(L, n));
        if (br > 0.0) r += b.y(n) * poisson_pmf(x, n) * br;
    }
    return {{r, r, q, eb, 0.0, 0.0}, b};
}

inline FiniteRate rate_finite(const Channel& ch, double mu, int L, Tier tier) {
    return rate_finite(ch, mu, L, tier, default_decoys(tier, mu));
}

} // namespace rrdps
