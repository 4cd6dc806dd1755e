#pragma once
#include <rrdps/sources.hpp>

namespace rrdps {

// No-eavesdropper channel model. eta is the end-to-end per-photon survival
// probability (fiber times detector), y0 the per-packet background click
// probability, e0 the error rate of background clicks, ed the misalignment
// error of signal clicks, f the error-correction inefficiency.
struct Channel {
    double eta;
    double y0;
    double e0 = 0.5;
    double ed = 0.033;
    double f = 1.16;
};

inline void validate(const Channel& ch) {
    if (ch.eta < 0.0 || ch.eta > 1.0) throw std::domain_error("channel: eta outside [0,1]");
    if (ch.y0 < 0.0 || ch.y0 > 1.0) throw std::domain_error("channel: y0 outside [0,1]");
    if (ch.e0 < 0.0 || ch.e0 > 1.0) throw std::domain_error("channel: e0 outside [0,1]");
    if (ch.ed < 0.0 || ch.ed > 0.5) throw std::domain_error("channel: ed outside [0,0.5]");
    if (ch.f < 1.0) throw std::domain_error("channel: f below 1");
}

// Background click probability a packet of L pulses accumulates from a
// per-pulse dark-count probability.
inline double packet_background(double dark_per_pulse, int L) {
    if (dark_per_pulse < 0.0 || dark_per_pulse >= 1.0)
        throw std::domain_error("packet_background: per-pulse dark count outside [0,1)");
    if (L < 1) throw std::domain_error("packet_background: L must be positive");
    return 1.0 - std::pow(1.0 - dark_per_pulse, L);
}

// Yield of an n-photon packet: a click from any photon or from background.
// n = 0 is y0 by definition; the general expression round-trips it through
// 1 - (1 - y0) and loses precision when y0 is small.
inline double yield_n(const Channel& ch, int n) {
    if (n < 0) throw std::domain_error("yield_n: negative n");
    if (n == 0) return ch.y0;
    return 1.0 - (1.0 - ch.y0) * std::pow(1.0 - ch.eta, n);
}

// Error rate of n-photon packets. The y=0 corner (no background, vacuum)
// never produces clicks; the background value is the natural limit.
inline double error_n(const Channel& ch, int n) {
    const double y = yield_n(ch, n);
    if (y <= 0.0) return ch.e0;
    const double s = 1.0 - std::pow(1.0 - ch.eta, n);
    return (ch.e0 * ch.y0 + ch.ed * (1.0 - ch.y0) * s) / y;
}

struct GainQber {
    double gain;
    double qber;
};

// Closed-form packet gain and error rate for Poisson statistics with
// per-packet mean x = L*mu.
inline GainQber wcp_gain_qber(const Channel& ch, double mu, int L) {
    const double x = L * mu;
    const double t = -std::expm1(-ch.eta * x);
    const double q = ch.y0 + (1.0 - ch.y0) * t;
    const double eq = ch.e0 * ch.y0 + ch.ed * (1.0 - ch.y0) * t;
    return {q, q > 0.0 ? eq / q : 0.0};
}

namespace detail {
// sum_{n>=1} a^n x^n / (1+x)^{n+1}
inline double thermal_geom(double a, double x) {
    return a * x / ((1.0 + x) * (1.0 + x - a * x));
}
} // namespace detail

// Closed-form packet gain and error rate for a heralded thermal source.
inline GainQber hsps_gain_qber(const Channel& ch, double mu, int L, const SourceParams& s) {
    const double x = L * mu;
    const double post = hsps_postselect_prob(x, s.herald_eff, s.herald_dark);
    const double s1 = detail::thermal_geom(1.0, x);
    const double sa = detail::thermal_geom(1.0 - s.herald_eff, x);
    const double se = detail::thermal_geom(1.0 - ch.eta, x);
    const double sae = detail::thermal_geom((1.0 - ch.eta) * (1.0 - s.herald_eff), x);
    const double vac = s.herald_dark / (1.0 + x);
    const double q = (ch.y0 * vac + (s1 - sa) - (1.0 - ch.y0) * (se - sae)) / post;
    const double eq = (ch.e0 * ch.y0 * vac + (ch.e0 * ch.y0 + ch.ed * (1.0 - ch.y0)) * (s1 - sa)
                       - ch.ed * (1.0 - ch.y0) * (se - sae)) / post;
    return {q, q > 0.0 ? eq / q : 0.0};
}

// Photon-number series for the same quantities. The closed forms are the
// production path; these exist so the identity can be checked on demand.
inline GainQber gain_qber_series(const SourceParams& s, const Channel& ch, double mu, int L,
                                 double tol = 1e-16) {
    const double x = L * mu;
    double q = 0.0, eq = 0.0;
    for (int n = 0; n <= 5000; ++n) {
        const double p = photon_pmf(s, x, n);
        const double y = yield_n(ch, n);
        q += y * p;
        if (y > 0.0) eq += error_n(ch, n) * y * p;
        if (n > 3) {
            // geometric majorant of the pmf tail
            const double r = s.kind == Source::wcp ? (n > x ? x / (n + 1.0) : 1.0)
                                                   : x / (1.0 + x);
            if (r < 1.0 && p * r / (1.0 - r) < tol * std::max(q, 1e-300)) break;
        }
    }
    return {q, q > 0.0 ? eq / q : 0.0};
}

inline GainQber gain_qber(const SourceParams& s, const Channel& ch, double mu, int L) {
    if (mu < 0.0) throw std::domain_error("gain_qber: negative intensity");
    if (L < 2) throw std::domain_error("gain_qber: packet length below 2");
    if (s.kind == Source::wcp) return wcp_gain_qber(ch, mu, L);
    return hsps_gain_qber(ch, mu, L, s);
}

} // namespace rrdps
