#pragma once
#include <rrdps/decoy.hpp>
#include <rrdps/parallel.hpp>

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace rrdps {

// Channel family over distance: eta(km) = detector_eff * 10^(-alpha km/10),
// background from per-pulse dark counts aggregated over the packet. Either
// piece can be overridden outright; an eta override is the full end-to-end
// transmittance and freezes the channel regardless of distance.
struct ChannelTemplate {
    double alpha = 0.2;
    double detector_eff = 0.045;
    double dark_per_pulse = 1.7e-6;
    std::optional<double> y0;
    std::optional<double> eta;
    double e0 = 0.5;
    double ed = 0.033;
    double f = 1.16;

    Channel at_eta(double eta_total, int L) const {
        Channel ch{eta_total, y0 ? *y0 : packet_background(dark_per_pulse, L), e0, ed, f};
        validate(ch);
        return ch;
    }
    Channel at_km(double km, int L) const {
        const double e = eta ? *eta : detector_eff * transmittance_from_km(km, alpha);
        return at_eta(e, L);
    }
};

struct SearchSpec {
    double mu_min = 1e-4;
    double mu_max = 1.0;
    int mu_points = 60;
    int refine_rounds = 3;
    // Threshold range for the no-decoy objective; full [0, vth_max] if unset.
    std::optional<std::pair<int, int>> vth_range;
    // Golden-section polish in log(mu) after the grid, so the result stops
    // depending on grid resolution at the 1e-12 level.
    bool polish = true;
    // Coordinate descent over decoy intensities as fractions of mu.
    bool extended_decoys = false;

    void check() const {
        if (!(mu_min > 0.0) || !(mu_max >= mu_min))
            throw std::domain_error("search: need 0 < mu_min <= mu_max");
        if (mu_points < 1 || refine_rounds < 0)
            throw std::domain_error("search: empty grid");
    }
};

struct OptResult {
    double rate = 0.0;  // clamped
    double raw = 0.0;   // best objective value found, may be <= 0
    double mu = 0.0;
    int vth = 0;
};

namespace detail {

// Log-spaced maximization with interval refinement. Ties keep the smaller
// mu (ascending scan, strict improvement only).
template <class F>
inline std::pair<double, double> maximize_mu(F&& f, const SearchSpec& spec) {
    double best_r = -std::numeric_limits<double>::infinity();
    double best_mu = spec.mu_min;
    double lo = std::log(spec.mu_min), hi = std::log(spec.mu_max);
    const double full_lo = lo, full_hi = hi;
    for (int round = 0; round <= spec.refine_rounds; ++round) {
        for (int i = 0; i < spec.mu_points; ++i) {
            const double t = spec.mu_points == 1 ? 0.5 : static_cast<double>(i) / (spec.mu_points - 1);
            const double mu = std::exp(lo + (hi - lo) * t);
            const double r = f(mu);
            if (r > best_r) {
                best_r = r;
                best_mu = mu;
            }
        }
        const double span = (hi - lo) / 4.0;
        const double c = std::log(best_mu);
        lo = std::max(full_lo, c - span / 2.0);
        hi = std::min(full_hi, c + span / 2.0);
    }
    if (spec.polish) {
        // bracket of one final-grid step around the incumbent
        const double step = spec.mu_points > 1 ? (hi - lo) / (spec.mu_points - 1)
                                               : (full_hi - full_lo);
        double a = std::max(full_lo, std::log(best_mu) - step);
        double b = std::min(full_hi, std::log(best_mu) + step);
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
        for (int it = 0; it < 80; ++it) {
            if (f1 >= f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a);
                f1 = f(std::exp(x1));
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a);
                f2 = f(std::exp(x2));
            }
        }
        for (double xm : {x1, x2}) {
            const double mu = std::exp(xm);
            const double r = f(mu);
            if (r > best_r) {
                best_r = r;
                best_mu = mu;
            }
        }
    }
    return {best_r, best_mu};
}

inline std::vector<double> default_fractions(Tier t) {
    switch (t) {
        case Tier::two: return {0.5, 0.0};
        case Tier::three: return {0.5, 0.25, 0.0};
        case Tier::four: return {0.5, 0.25, 0.125, 0.0};
        default: throw std::domain_error("tier has no decoy intensities");
    }
}

inline std::vector<double> scale(const std::vector<double>& fr, double mu) {
    std::vector<double> v(fr.size());
    for (size_t i = 0; i < fr.size(); ++i) v[i] = fr[i] * mu;
    return v;
}

} // namespace detail

// Raw (unclamped) objective for one channel and parameter point.
inline double objective_raw(const SourceParams& src, const Channel& ch, double mu, int L,
                            Tier tier, int vth, const std::vector<double>& fractions) {
    switch (tier) {
        case Tier::none: return rate_nodecoy(src, ch, mu, L, vth).raw;
        case Tier::infinite: return rate_infinite(src, ch, mu, L).raw;
        default:
            if (src.kind != Source::wcp)
                throw std::domain_error("finite decoy tiers need Poisson statistics (wcp)");
            return rate_finite(ch, mu, L, tier, detail::scale(fractions, mu)).rr.raw;
    }
}

// Grid search over (mu, vth) with refinement and tie-breaks toward smaller
// mu, then smaller vth. When nothing is positive the canonical null result
// (R*=0 at the grid minimum) is returned, with the best raw value kept for
// cutoff interpolation.
inline OptResult optimize_point(const SourceParams& src, const Channel& ch, int L, Tier tier,
                                SearchSpec spec = {},
                                std::optional<std::vector<double>> fractions = std::nullopt) {
    spec.check();
    validate(src);
    validate(ch);
    std::vector<double> fr;
    if (tier != Tier::none && tier != Tier::infinite)
        fr = fractions ? *fractions : detail::default_fractions(tier);

    int vlo = 0, vhi = 0;
    if (tier == Tier::none) {
        vlo = spec.vth_range ? spec.vth_range->first : 0;
        vhi = spec.vth_range ? spec.vth_range->second : vth_max(L);
        if (vlo < 0 || vhi > vth_max(L) || vlo > vhi)
            throw std::domain_error("search: vth range outside [0, vth_max]");
    }

    OptResult best;
    best.raw = -std::numeric_limits<double>::infinity();
    for (int vth = vlo; vth <= vhi; ++vth) {
        auto [r, mu] = detail::maximize_mu(
            [&](double m) { return objective_raw(src, ch, m, L, tier, vth, fr); }, spec);
        if (r > best.raw) best = {std::max(0.0, r), r, mu, vth};
    }

    if (spec.extended_decoys && !fr.empty()) {
        // Two passes of per-coordinate line search on the intensity
        // fractions, re-optimizing mu after each accepted move.
        for (int pass = 0; pass < 2; ++pass) {
            for (size_t i = 0; i < fr.size(); ++i) {
                if (fr[i] == 0.0) continue;  // vacuum anchor stays
                double others = 0.0;
                for (size_t j = 0; j < fr.size(); ++j)
                    if (j != i) others += fr[j];
                const double lo = (i + 1 < fr.size() ? std::max(fr[i + 1] * 1.05, 1e-5) : 1e-5);
                const double hi = std::min(i > 0 ? fr[i - 1] * 0.95 : 0.6, 0.95 - others);
                if (!(hi > lo)) continue;
                const int pts = 16;
                for (int gcand = 0; gcand < pts; ++gcand) {
                    std::vector<double> cand = fr;
                    cand[i] = lo * std::pow(hi / lo, static_cast<double>(gcand) / (pts - 1));
                    auto [r, mu] = detail::maximize_mu(
                        [&](double m) { return objective_raw(src, ch, m, L, tier, best.vth, cand); },
                        spec);
                    if (r > best.raw) {
                        best = {std::max(0.0, r), r, mu, best.vth};
                        fr = cand;
                    }
                }
            }
        }
    }

    if (!(best.raw > 0.0)) {
        const double raw = best.raw;
        best = OptResult{0.0, raw, spec.mu_min, 0};
    }
    return best;
}

struct SweepPoint {
    double km = 0.0;
    double eta = 0.0;
    OptResult opt;
    std::vector<double> decoys;  // absolute intensities actually used
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double max_positive_km = 0.0;
};

// Largest distance with positive rate, interpolating the raw objective
// between the last positive and first nonpositive grid points. Rates that
// saturate at zero (finite tiers drop negative terms) resolve to the first
// zero grid point.
inline double max_positive_distance(const std::vector<SweepPoint>& pts) {
    double last_km = 0.0, last_raw = 0.0;
    bool seen = false;
    for (const auto& p : pts) {
        if (p.opt.raw > 0.0) {
            seen = true;
            last_km = p.km;
            last_raw = p.opt.raw;
        } else if (seen) {
            return last_km + last_raw * (p.km - last_km) / (last_raw - p.opt.raw);
        }
    }
    return seen ? last_km : 0.0;
}

inline SweepResult sweep_distance(const SourceParams& src, const ChannelTemplate& tmpl, int L,
                                  Tier tier, const std::vector<double>& d_grid,
                                  SearchSpec spec = {},
                                  std::optional<std::vector<double>> fractions = std::nullopt) {
    SweepResult out;
    out.points.resize(d_grid.size());
    parallel_for_index(d_grid.size(), [&](std::size_t i) {
        const double km = d_grid[i];
        const Channel ch = tmpl.at_km(km, L);
        SweepPoint p;
        p.km = km;
        p.eta = ch.eta;
        p.opt = optimize_point(src, ch, L, tier, spec, fractions);
        if (tier != Tier::none && tier != Tier::infinite)
            p.decoys = detail::scale(fractions ? *fractions : detail::default_fractions(tier),
                                     p.opt.mu);
        out.points[i] = std::move(p);
    });
    out.max_positive_km = max_positive_distance(out.points);
    return out;
}

} // namespace rrdps
