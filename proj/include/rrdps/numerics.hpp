#pragma once
#include <cmath>
#include <stdexcept>
#include <string>

namespace rrdps {

// Shannon binary entropy in bits. Endpoints are exact zeros; inputs may
// stray outside [0,1] by at most 1e-12 (grid arithmetic slop), anything
// further is a caller bug.
inline double binary_entropy(double e) {
    if (e < -1e-12 || e > 1.0 + 1e-12)
        throw std::domain_error("binary_entropy: argument " + std::to_string(e) + " outside [0,1]");
    if (e <= 0.0 || e >= 1.0) return 0.0;
    return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

// Error-correction cost per sifted bit: saturates at e = 1/2, a rate above
// one bit per bit is never paid.
inline double h2_cost(double e) {
    return binary_entropy(std::min(e, 0.5));
}

// Poisson pmf, log-space throughout so large n and large mean behave.
inline double poisson_pmf(double mean, int n) {
    if (mean < 0.0 || n < 0)
        throw std::domain_error("poisson_pmf: negative mean or n");
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

// Bose-Einstein (thermal) pmf with mean photon number `mean`.
inline double thermal_pmf(double mean, int n) {
    if (mean < 0.0 || n < 0)
        throw std::domain_error("thermal_pmf: negative mean or n");
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    if (n <= 64)
        return std::pow(mean, n) / std::pow(1.0 + mean, n + 1);
    return std::exp(n * std::log(mean) - (n + 1) * std::log1p(mean));
}

// P(N > nmax) for Poisson. Ascending partial sum, so the small head terms
// accumulate before cancellation against 1.
inline double poisson_tail_above(double mean, int nmax) {
    if (nmax < 0) return 1.0;
    double c = 0.0;
    for (int n = 0; n <= nmax; ++n) c += poisson_pmf(mean, n);
    return std::max(0.0, 1.0 - c);
}

// Fiber loss model: alpha dB/km.
inline double transmittance_from_km(double km, double alpha_db_per_km) {
    if (km < 0.0) throw std::domain_error("transmittance_from_km: negative distance");
    return std::pow(10.0, -alpha_db_per_km * km / 10.0);
}

inline double km_from_transmittance(double eta, double alpha_db_per_km) {
    if (eta <= 0.0 || eta > 1.0)
        throw std::domain_error("km_from_transmittance: transmittance outside (0,1]");
    if (alpha_db_per_km <= 0.0)
        throw std::domain_error("km_from_transmittance: nonpositive attenuation");
    return -10.0 * std::log10(eta) / alpha_db_per_km;
}

// Standard normal survival function.
inline double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// Chi-square survival via the Wilson-Hilferty cube-root normal
// approximation. Good to a few percent for k >= 3, which is all the
// goodness-of-fit gate needs.
inline double chi2_sf(double x, int k) {
    if (k <= 0) throw std::domain_error("chi2_sf: dof must be positive");
    if (x <= 0.0) return 1.0;
    const double v = 2.0 / (9.0 * k);
    const double z = (std::cbrt(x / k) - (1.0 - v)) / std::sqrt(v);
    return normal_sf(z);
}

} // namespace rrdps
