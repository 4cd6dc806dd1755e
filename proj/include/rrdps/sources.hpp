#pragma once
#include <rrdps/numerics.hpp>

namespace rrdps {

enum class Source { wcp, hsps };

// Heralded-source parameters; ignored for wcp. herald_eff is the idler-arm
// detector efficiency, herald_dark its dark-count probability per gate.
struct SourceParams {
    Source kind = Source::wcp;
    double herald_eff = 0.045;
    double herald_dark = 1.7e-6;
};

inline void validate(const SourceParams& s) {
    if (s.kind == Source::hsps) {
        if (!(s.herald_eff > 0.0) || s.herald_eff > 1.0)
            throw std::domain_error("source: herald_eff outside (0,1]");
        if (s.herald_dark < 0.0 || s.herald_dark >= 1.0)
            throw std::domain_error("source: herald_dark outside [0,1)");
    }
}

// Probability that a pump pulse yields a herald click, x = L*mu the thermal
// mean of the signal mode.
inline double hsps_postselect_prob(double x, double eta_a, double d_a) {
    if (x < 0.0) throw std::domain_error("hsps: negative mean photon number");
    const double p = d_a / (1.0 + x) + x * eta_a / (1.0 + x * eta_a);
    if (!(p > 0.0)) throw std::domain_error("hsps: post-selection probability is zero");
    return p;
}

// Photon-number pmf of a heralded packet, conditioned on the herald.
inline double hsps_pmf(double x, int n, double eta_a, double d_a) {
    if (n < 0) throw std::domain_error("hsps_pmf: negative n");
    const double post = hsps_postselect_prob(x, eta_a, d_a);
    if (n == 0) return d_a / ((1.0 + x) * post);
    const double keep = 1.0 - std::pow(1.0 - eta_a, n);
    if (n <= 64)
        return keep * std::pow(x, n) / (std::pow(1.0 + x, n + 1) * post);
    if (x == 0.0) return 0.0;
    return keep * std::exp(n * std::log(x) - (n + 1) * std::log1p(x)) / post;
}

// Packet photon-number pmf for either source; x = L*mu.
inline double photon_pmf(const SourceParams& s, double x, int n) {
    if (s.kind == Source::wcp) return poisson_pmf(x, n);
    return hsps_pmf(x, n, s.herald_eff, s.herald_dark);
}

// P(N > vth): the source-side leakage a threshold vth cannot sift away.
inline double source_tail_above(const SourceParams& s, double x, int vth) {
    if (vth < 0) return 1.0;
    if (x == 0.0) return 0.0;
    double c = 0.0;
    for (int n = 0; n <= vth; ++n) c += photon_pmf(s, x, n);
    return std::max(0.0, 1.0 - c);
}

} // namespace rrdps
