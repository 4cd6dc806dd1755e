#pragma once
#include <rrdps/channel.hpp>

namespace rrdps {

// Phase-error rate contributed by an n-photon packet of L pulses.
inline double phase_error_n(int L, int n) {
    if (L < 2) throw std::domain_error("phase_error_n: packet length below 2");
    if (n < 0) throw std::domain_error("phase_error_n: negative n");
    return (1.0 - std::pow(1.0 - 2.0 / L, static_cast<double>(n))) / 2.0;
}

// Largest admissible sifting threshold: vth must stay below (L-1)/2.
inline int vth_max(int L) {
    if (L < 3) throw std::domain_error("vth_max: packet length below 3");
    return static_cast<int>(std::ceil((L - 1) / 2.0)) - 1;
}

// Packet-level phase error once source leakage beyond vth is charged at
// the worst case. esrc >= gain means every click may be tagged; saturate.
inline double phase_error_packet(int L, int vth, double esrc, double gain) {
    if (esrc >= gain) return 0.5;
    const double w = esrc / gain;
    return w + (1.0 - w) * phase_error_n(L, vth);
}

struct RateResult {
    double rate;  // clamped at zero
    double raw;   // before clamping, for cutoff interpolation
    double gain;
    double qber;
    double e_src;
    double e_ph;
};

// Key rate without decoy states: every detection beyond the vth-photon
// tail is surrendered to the adversary.
inline RateResult rate_nodecoy(const SourceParams& s, const Channel& ch, double mu, int L,
                               int vth) {
    if (vth < 0 || vth > vth_max(L))
        throw std::domain_error("rate_nodecoy: vth outside [0, vth_max]");
    const auto [q, eb] = gain_qber(s, ch, mu, L);
    const double es = source_tail_above(s, L * mu, vth);
    const double ec = ch.f * h2_cost(eb);
    const double eph = phase_error_n(L, vth);
    const double raw = (q - es) * (1.0 - ec - binary_entropy(eph)) - es * ec;
    return {std::max(0.0, raw), raw, q, eb, es, eph};
}

// Key rate with perfect photon-number knowledge: privacy amplification is
// charged per photon number, error correction on the aggregate gain. The
// summation stops once the pmf mass beyond it is below 1e-13 and that
// remainder is charged at full entropy, so truncation only lowers the rate.
inline RateResult rate_infinite(const SourceParams& s, const Channel& ch, double mu, int L) {
    const auto [q, eb] = gain_qber(s, ch, mu, L);
    const double x = L * mu;
    double acc_p = photon_pmf(s, x, 0);
    double loss = 0.0;
    for (int n = 1; acc_p < 1.0 - 1e-13 && n < 4000; ++n) {
        const double p = photon_pmf(s, x, n);
        loss += yield_n(ch, n) * p * binary_entropy(phase_error_n(L, n));
        acc_p += p;
    }
    loss += 1.0 - acc_p;
    const double raw = q * (1.0 - ch.f * h2_cost(eb)) - loss;
    return {std::max(0.0, raw), raw, q, eb, 0.0, 0.0};
}

} // namespace rrdps
