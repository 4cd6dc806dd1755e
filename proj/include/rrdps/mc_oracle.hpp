#pragma once
#include <rrdps/channel.hpp>
#include <rrdps/parallel.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

namespace rrdps {

namespace rng {

// splitmix64, the canonical seeding chain: output k of the stream seeded
// with `seed` is mix(seed + (k+1)*gamma), so any position is O(1).
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Xoshiro256pp {
    std::array<std::uint64_t, 4> s;

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // 53-bit mantissa uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Substream i of a master seed: state words 4i..4i+3 of the splitmix64
// chain. The all-zero state is the one xoshiro fixpoint; nudge it.
inline Xoshiro256pp substream(std::uint64_t seed, unsigned i) {
    Xoshiro256pp g;
    for (unsigned j = 0; j < 4; ++j) g.s[j] = splitmix64_at(seed, 4ULL * i + j);
    if ((g.s[0] | g.s[1] | g.s[2] | g.s[3]) == 0) g.s[0] = 1;
    return g;
}

} // namespace rng

// Work is always split over this many substreams, whatever the thread
// count, so results are bit-identical from 1 thread to 64.
inline constexpr unsigned mc_substreams = 64;

struct TrialConfig {
    SourceParams src;
    Channel ch;
    double mu = 0.02;
    int L = 32;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
};

namespace detail {

// Poisson draw by CDF walk; one uniform per draw.
inline int draw_poisson(rng::Xoshiro256pp& g, double mean) {
    if (mean > 500.0) throw std::domain_error("mc: Poisson mean too large for CDF inversion");
    const double u = g.uniform();
    double p = std::exp(-mean), c = p;
    int n = 0;
    while (u > c && n < 2000) {
        ++n;
        p *= mean / n;
        c += p;
    }
    return n;
}

// Thermal draw (geometric inversion); one uniform per draw.
inline int draw_thermal(rng::Xoshiro256pp& g, double mean) {
    const double u = g.uniform();
    if (mean == 0.0) return 0;
    const double n = std::floor(std::log1p(-u) / std::log(mean / (1.0 + mean)));
    return n > 100000.0 ? 100000 : static_cast<int>(n);
}

// One heralded packet: draw the thermal photon number, keep the round only
// if the idler arm fires. Post-selection is simulated by honest rejection,
// two uniforms per round.
inline int draw_heralded(rng::Xoshiro256pp& g, double mean, double eta_a, double d_a) {
    for (std::uint64_t round = 0; round < 20'000'000; ++round) {
        const int n = draw_thermal(g, mean);
        const double accept = n == 0 ? d_a : 1.0 - std::pow(1.0 - eta_a, n);
        if (g.uniform() < accept) return n;
    }
    throw std::domain_error("mc: herald acceptance too rare to simulate");
}

inline int draw_packet_n(rng::Xoshiro256pp& g, const SourceParams& s, double x) {
    if (s.kind == Source::wcp) return draw_poisson(g, x);
    return draw_heralded(g, x, s.herald_eff, s.herald_dark);
}

} // namespace detail

struct McStats {
    double q_hat = 0.0;
    double e_hat = 0.0;
    double se_q = 0.0;
    double se_e = 0.0;
    std::uint64_t detections = 0;
    std::uint64_t errors = 0;
    std::uint64_t trials = 0;
};

// Empirical packet gain and error rate. Per trial: packet photon number
// from the source law, each photon survives with probability eta,
// background fires with probability y0; a background click is tagged with
// error probability e0, otherwise a signal click with ed. Uniform draw
// order per trial: photon number, n survival draws, background, then one
// error draw if anything clicked.
inline McStats mc_gain_qber(const TrialConfig& cfg) {
    validate(cfg.src);
    validate(cfg.ch);
    if (cfg.trials < 1) throw std::domain_error("mc: trials must be >= 1");
    const double x = cfg.L * cfg.mu;

    std::array<std::uint64_t, mc_substreams> det{}, err{};
    parallel_for_index(mc_substreams, [&](std::size_t s) {
        auto g = rng::substream(cfg.seed, static_cast<unsigned>(s));
        const std::uint64_t n_trials = cfg.trials / mc_substreams +
                                       (s < cfg.trials % mc_substreams ? 1 : 0);
        std::uint64_t d = 0, e = 0;
        for (std::uint64_t t = 0; t < n_trials; ++t) {
            const int n = detail::draw_packet_n(g, cfg.src, x);
            int survivors = 0;
            for (int k = 0; k < n; ++k)
                if (g.uniform() < cfg.ch.eta) ++survivors;
            const bool bg = g.uniform() < cfg.ch.y0;
            if (!bg && survivors == 0) continue;
            ++d;
            const double flip = bg ? cfg.ch.e0 : cfg.ch.ed;
            if (g.uniform() < flip) ++e;
        }
        det[s] = d;
        err[s] = e;
    });

    McStats out;
    out.trials = cfg.trials;
    for (unsigned s = 0; s < mc_substreams; ++s) {
        out.detections += det[s];
        out.errors += err[s];
    }
    out.q_hat = static_cast<double>(out.detections) / static_cast<double>(cfg.trials);
    out.se_q = std::sqrt(std::max(0.0, out.q_hat * (1.0 - out.q_hat) /
                                           static_cast<double>(cfg.trials)));
    if (out.detections > 0) {
        out.e_hat = static_cast<double>(out.errors) / static_cast<double>(out.detections);
        out.se_e = std::sqrt(std::max(0.0, out.e_hat * (1.0 - out.e_hat) /
                                               static_cast<double>(out.detections)));
    }
    return out;
}

struct Chi2Result {
    double stat = 0.0;
    int dof = 0;
    double p = 1.0;
};

// Goodness of fit of the sampled photon-number distribution against the
// analytic pmf. Bins with expected count below 5 are folded into the tail.
inline Chi2Result mc_pmf_chi2(const SourceParams& src, double x, std::uint64_t trials,
                              std::uint64_t seed) {
    validate(src);
    if (trials < 100) throw std::domain_error("mc: too few trials for a pmf check");
    int kmax = 0;
    while (kmax < 200 && trials * photon_pmf(src, x, kmax + 1) >= 5.0) ++kmax;

    std::array<std::vector<std::uint64_t>, mc_substreams> partial;
    parallel_for_index(mc_substreams, [&](std::size_t s) {
        auto g = rng::substream(seed, static_cast<unsigned>(s));
        const std::uint64_t n_trials = trials / mc_substreams +
                                       (s < trials % mc_substreams ? 1 : 0);
        std::vector<std::uint64_t> counts(kmax + 2, 0);
        for (std::uint64_t t = 0; t < n_trials; ++t) {
            const int n = detail::draw_packet_n(g, src, x);
            ++counts[std::min(n, kmax + 1)];
        }
        partial[s] = std::move(counts);
    });

    std::vector<std::uint64_t> counts(kmax + 2, 0);
    for (const auto& c : partial)
        for (size_t i = 0; i < c.size(); ++i) counts[i] += c[i];

    double head = 0.0;
    Chi2Result out;
    for (int n = 0; n <= kmax; ++n) {
        const double exp_n = trials * photon_pmf(src, x, n);
        head += exp_n;
        out.stat += (counts[n] - exp_n) * (counts[n] - exp_n) / exp_n;
    }
    const double exp_tail = std::max(static_cast<double>(trials) - head, 1e-9);
    out.stat += (counts[kmax + 1] - exp_tail) * (counts[kmax + 1] - exp_tail) / exp_tail;
    out.dof = kmax + 1;
    out.p = chi2_sf(out.stat, out.dof);
    return out;
}

// Desk-scale run of the packet sifting steps. Alice sends L random phase
// bits; Bob interferes pulse i with pulse (i+r) mod L for a random delay r
// and announces the pair; both sides form the XOR of the two involved
// bits. flip_prob injects bit flips on Bob's side; at zero the keys match
// exactly, which is the structural check.
inline double mc_sift_match(int L, std::uint64_t packets, std::uint64_t seed,
                            double flip_prob = 0.0) {
    if (L < 3) throw std::domain_error("mc_sift: packet length below 3");
    if (packets < 1) throw std::domain_error("mc_sift: need at least one packet");
    std::array<std::uint64_t, mc_substreams> matches{};
    parallel_for_index(mc_substreams, [&](std::size_t s) {
        auto g = rng::substream(seed, static_cast<unsigned>(s));
        const std::uint64_t n_packets = packets / mc_substreams +
                                        (s < packets % mc_substreams ? 1 : 0);
        std::uint64_t m = 0;
        std::vector<int> bits(L);
        for (std::uint64_t t = 0; t < n_packets; ++t) {
            for (int k = 0; k < L; ++k) bits[k] = g.uniform() < 0.5 ? 1 : 0;
            const int r = 1 + static_cast<int>(g.uniform() * (L - 1));
            const int i = static_cast<int>(g.uniform() * L);
            const int j = (i + r) % L;
            const int alice = bits[i] ^ bits[j];
            const int bob = alice ^ (g.uniform() < flip_prob ? 1 : 0);
            if (alice == bob) ++m;
        }
        matches[s] = m;
    });
    std::uint64_t total = 0;
    for (auto m : matches) total += m;
    return static_cast<double>(total) / static_cast<double>(packets);
}

} // namespace rrdps
