#pragma once
#include <rrdps/rrdps.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rrdps::cli {

using nlohmann::json;

// Anything wrong with a config file, a flag value, or an input CSV. The
// message carries the offending field path; main turns this into exit 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    SourceParams src{Source::wcp, 0.045, 1.7e-6};
    std::optional<double> mu;  // unset: optimize over intensity
    ChannelTemplate tmpl;
    int L = 32;
    std::optional<int> vth;  // unset: optimize (no-decoy objective only)
    Tier tier = Tier::three;
    std::optional<std::vector<double>> fractions;  // decoys as fractions of mu

    std::vector<double> distance_km;
    std::optional<std::vector<double>> eta_grid;  // bounds sweep in transmittance

    double ls_km = 0.0;
    double ls_mu_min = 1e-4;
    double ls_mu_max = 1.0;
    int ls_mu_points = 60;
    std::optional<int> ls_vth_min;
    std::optional<int> ls_vth_max;

    std::string out_csv;  // empty: stdout
    int precision = 12;
    std::uint64_t seed = 1;
    std::uint64_t mc_trials = 1'000'000;
};

inline RunConfig default_config() {
    RunConfig c;
    for (double d = 0.0; d <= 160.0; d += 2.0) c.distance_km.push_back(d);
    return c;
}

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

inline void check_keys(const json& o, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = o.begin(); it != o.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) fail(path + "." + it.key(), "unknown field");
    }
}

inline const json& block(const json& j, const char* key) {
    const json& b = j.at(key);
    if (!b.is_object()) fail(key, "expected an object");
    return b;
}

inline double num(const json& o, const std::string& path, const char* key, double fallback) {
    if (!o.contains(key)) return fallback;
    if (!o.at(key).is_number()) fail(path + "." + key, "expected a number");
    return o.at(key).get<double>();
}

inline int integer(const json& o, const std::string& path, const char* key, int fallback) {
    if (!o.contains(key)) return fallback;
    if (!o.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
    return o.at(key).get<int>();
}

inline std::string text(const json& o, const std::string& path, const char* key,
                        const std::string& fallback) {
    if (!o.contains(key)) return fallback;
    if (!o.at(key).is_string()) fail(path + "." + key, "expected a string");
    return o.at(key).get<std::string>();
}

inline std::vector<double> num_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(path, "expected a non-empty array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline void in_unit(double x, const std::string& path, bool allow_zero) {
    if (!(x <= 1.0) || (allow_zero ? x < 0.0 : !(x > 0.0)))
        fail(path, allow_zero ? "must be in [0, 1]" : "must be in (0, 1]");
}

} // namespace detail

inline void parse_source(const json& j, RunConfig& c) {
    detail::check_keys(j, "source", {"kind", "mu", "eta_A", "d_A"});
    const std::string kind = detail::text(j, "source", "kind", "wcp");
    if (kind == "wcp")
        c.src.kind = Source::wcp;
    else if (kind == "hsps")
        c.src.kind = Source::hsps;
    else
        detail::fail("source.kind", "expected \"wcp\" or \"hsps\"");
    if (j.contains("mu")) {
        const json& v = j.at("mu");
        if (v.is_string() && v.get<std::string>() == "optimize") {
            c.mu.reset();
        } else if (v.is_number()) {
            c.mu = v.get<double>();
            if (!(*c.mu > 0.0)) detail::fail("source.mu", "must be positive");
        } else {
            detail::fail("source.mu", "expected a number or \"optimize\"");
        }
    }
    c.src.herald_eff = detail::num(j, "source", "eta_A", c.src.herald_eff);
    detail::in_unit(c.src.herald_eff, "source.eta_A", false);
    c.src.herald_dark = detail::num(j, "source", "d_A", c.src.herald_dark);
    if (c.src.herald_dark < 0.0 || c.src.herald_dark >= 1.0)
        detail::fail("source.d_A", "must be in [0, 1)");
}

inline void parse_channel(const json& j, RunConfig& c) {
    detail::check_keys(j, "channel",
                       {"alpha", "detector_eff", "dark_per_pulse", "Y0", "eta", "e0", "e_d", "f"});
    c.tmpl.alpha = detail::num(j, "channel", "alpha", c.tmpl.alpha);
    if (c.tmpl.alpha < 0.0) detail::fail("channel.alpha", "must be >= 0");
    c.tmpl.detector_eff = detail::num(j, "channel", "detector_eff", c.tmpl.detector_eff);
    detail::in_unit(c.tmpl.detector_eff, "channel.detector_eff", false);
    if (j.contains("Y0") && j.contains("dark_per_pulse"))
        detail::fail("channel.Y0", "give either Y0 or dark_per_pulse, not both");
    if (j.contains("Y0")) {
        const double y0 = detail::num(j, "channel", "Y0", 0.0);
        detail::in_unit(y0, "channel.Y0", true);
        c.tmpl.y0 = y0;
    }
    c.tmpl.dark_per_pulse = detail::num(j, "channel", "dark_per_pulse", c.tmpl.dark_per_pulse);
    if (c.tmpl.dark_per_pulse < 0.0 || c.tmpl.dark_per_pulse >= 1.0)
        detail::fail("channel.dark_per_pulse", "must be in [0, 1)");
    if (j.contains("eta")) {
        const double eta = detail::num(j, "channel", "eta", 1.0);
        detail::in_unit(eta, "channel.eta", false);
        c.tmpl.eta = eta;
    }
    c.tmpl.e0 = detail::num(j, "channel", "e0", c.tmpl.e0);
    detail::in_unit(c.tmpl.e0, "channel.e0", true);
    c.tmpl.ed = detail::num(j, "channel", "e_d", c.tmpl.ed);
    if (c.tmpl.ed < 0.0 || c.tmpl.ed > 0.5) detail::fail("channel.e_d", "must be in [0, 0.5]");
    c.tmpl.f = detail::num(j, "channel", "f", c.tmpl.f);
    if (c.tmpl.f < 1.0) detail::fail("channel.f", "must be >= 1");
}

inline void parse_protocol(const json& j, RunConfig& c) {
    detail::check_keys(j, "protocol", {"L", "v_th", "tier", "intensities"});
    c.L = detail::integer(j, "protocol", "L", c.L);
    if (c.L < 3) detail::fail("protocol.L", "packet length must be an integer >= 3");
    if (j.contains("v_th")) {
        const json& v = j.at("v_th");
        if (v.is_string() && v.get<std::string>() == "optimize") {
            c.vth.reset();
        } else if (v.is_number_integer()) {
            c.vth = v.get<int>();
            if (*c.vth < 0) detail::fail("protocol.v_th", "must be >= 0");
        } else {
            detail::fail("protocol.v_th", "expected an integer or \"optimize\"");
        }
    }
    if (j.contains("tier")) {
        try {
            c.tier = tier_from_string(detail::text(j, "protocol", "tier", ""));
        } catch (const std::exception&) {
            detail::fail("protocol.tier", "expected none, infinite, two, three, or four");
        }
    }
    if (j.contains("intensities")) {
        const json& v = j.at("intensities");
        if (v.is_string() && v.get<std::string>() == "default")
            c.fractions.reset();
        else
            c.fractions = detail::num_list(v, "protocol.intensities");
    }
}

inline void parse_sweep(const json& j, RunConfig& c) {
    detail::check_keys(j, "sweep", {"distance_km", "start_km", "stop_km", "step_km", "eta"});
    const bool stepped = j.contains("start_km") || j.contains("stop_km") || j.contains("step_km");
    if (j.contains("distance_km") && stepped)
        detail::fail("sweep.distance_km", "give either an explicit grid or start/stop/step");
    if (j.contains("distance_km")) {
        c.distance_km = detail::num_list(j.at("distance_km"), "sweep.distance_km");
        for (double d : c.distance_km)
            if (d < 0.0) detail::fail("sweep.distance_km", "distances must be >= 0");
    } else if (stepped) {
        const double start = detail::num(j, "sweep", "start_km", 0.0);
        const double stop = detail::num(j, "sweep", "stop_km", 160.0);
        const double step = detail::num(j, "sweep", "step_km", 2.0);
        if (start < 0.0 || stop < start || !(step > 0.0))
            detail::fail("sweep.start_km", "need 0 <= start <= stop and step > 0");
        c.distance_km.clear();
        for (double d = start; d <= stop + step * 1e-9; d += step) c.distance_km.push_back(d);
    }
    if (j.contains("eta")) {
        c.eta_grid = detail::num_list(j.at("eta"), "sweep.eta");
        for (double e : *c.eta_grid) detail::in_unit(e, "sweep.eta", false);
    }
}

inline void parse_landscape(const json& j, RunConfig& c) {
    detail::check_keys(j, "landscape",
                       {"distance_km", "mu_min", "mu_max", "mu_points", "vth_min", "vth_max"});
    c.ls_km = detail::num(j, "landscape", "distance_km", c.ls_km);
    if (c.ls_km < 0.0) detail::fail("landscape.distance_km", "must be >= 0");
    c.ls_mu_min = detail::num(j, "landscape", "mu_min", c.ls_mu_min);
    c.ls_mu_max = detail::num(j, "landscape", "mu_max", c.ls_mu_max);
    if (!(c.ls_mu_min > 0.0) || !(c.ls_mu_max >= c.ls_mu_min))
        detail::fail("landscape.mu_min", "need 0 < mu_min <= mu_max");
    c.ls_mu_points = detail::integer(j, "landscape", "mu_points", c.ls_mu_points);
    if (c.ls_mu_points < 1) detail::fail("landscape.mu_points", "must be >= 1");
    if (j.contains("vth_min")) c.ls_vth_min = detail::integer(j, "landscape", "vth_min", 0);
    if (j.contains("vth_max")) c.ls_vth_max = detail::integer(j, "landscape", "vth_max", 0);
}

inline void parse_output(const json& j, RunConfig& c) {
    detail::check_keys(j, "output", {"csv", "precision"});
    c.out_csv = detail::text(j, "output", "csv", c.out_csv);
    c.precision = detail::integer(j, "output", "precision", c.precision);
    if (c.precision < 1 || c.precision > 17)
        detail::fail("output.precision", "must be in [1, 17]");
}

inline RunConfig parse_config(const json& j) {
    if (!j.is_object()) detail::fail("config", "top level must be an object");
    detail::check_keys(j, "config",
                       {"source", "channel", "protocol", "sweep", "landscape", "output", "seed",
                        "validate"});
    RunConfig c = default_config();
    if (j.contains("source")) parse_source(detail::block(j, "source"), c);
    if (j.contains("channel")) parse_channel(detail::block(j, "channel"), c);
    if (j.contains("protocol")) parse_protocol(detail::block(j, "protocol"), c);
    if (j.contains("sweep")) parse_sweep(detail::block(j, "sweep"), c);
    if (j.contains("landscape")) parse_landscape(detail::block(j, "landscape"), c);
    if (j.contains("output")) parse_output(detail::block(j, "output"), c);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0)
            detail::fail("seed", "expected a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("validate")) {
        const json& v = detail::block(j, "validate");
        detail::check_keys(v, "validate", {"trials"});
        if (v.contains("trials")) {
            if (!v.at("trials").is_number_integer())
                detail::fail("validate.trials", "expected an integer");
            const auto t = v.at("trials").get<std::int64_t>();
            if (t < 100) detail::fail("validate.trials", "must be >= 100");
            c.mc_trials = static_cast<std::uint64_t>(t);
        }
    }
    return c;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open config file");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

// Cross-field checks, run after flag overrides so flags get them too.
inline void cross_validate(const RunConfig& c) {
    if (c.L < 3) detail::fail("protocol.L", "packet length must be an integer >= 3");
    if (c.vth && *c.vth > vth_max(c.L))
        detail::fail("protocol.v_th", "exceeds vth_max = " + std::to_string(vth_max(c.L)) +
                                          " for L = " + std::to_string(c.L));
    const bool finite = c.tier != Tier::none && c.tier != Tier::infinite;
    if (finite && c.src.kind != Source::wcp)
        detail::fail("protocol.tier", "finite decoy tiers need Poisson statistics (wcp source)");
    if (c.fractions) {
        if (!finite)
            detail::fail("protocol.intensities", "decoy intensities need a finite decoy tier");
        const auto& fr = *c.fractions;
        if (static_cast<int>(fr.size()) != tier_decoy_count(c.tier))
            detail::fail("protocol.intensities",
                         "tier " + to_string(c.tier) + " wants " +
                             std::to_string(tier_decoy_count(c.tier)) + " intensities, got " +
                             std::to_string(fr.size()));
        double sum = 0.0;
        for (size_t i = 0; i < fr.size(); ++i) {
            if (fr[i] < 0.0 || fr[i] >= 1.0)
                detail::fail("protocol.intensities", "fractions of mu must be in [0, 1)");
            if (i > 0 && !(fr[i] < fr[i - 1]))
                detail::fail("protocol.intensities", "must be strictly descending");
            sum += fr[i];
        }
        if (!(sum < 1.0))
            detail::fail("protocol.intensities", "fractions must sum below 1 so mu exceeds them");
    }
    if (c.distance_km.empty()) detail::fail("sweep.distance_km", "empty sweep grid");
    if (c.ls_vth_min || c.ls_vth_max) {
        const int lo = c.ls_vth_min.value_or(0);
        const int hi = c.ls_vth_max.value_or(vth_max(c.L));
        if (lo < 0 || hi > vth_max(c.L) || lo > hi)
            detail::fail("landscape.vth_min",
                         "range outside [0, " + std::to_string(vth_max(c.L)) + "]");
    }
}

inline std::string fmt(double x, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

namespace detail {

inline std::vector<double> resolved_fractions(const RunConfig& c) {
    if (c.tier == Tier::none || c.tier == Tier::infinite) return {};
    return c.fractions ? *c.fractions : rrdps::detail::default_fractions(c.tier);
}

// One sweep point: optimize whatever the config leaves free, evaluate the
// rest. The null convention matches optimize_point: R=0, best raw kept.
inline OptResult solve_point(const RunConfig& c, const Channel& ch,
                             const std::vector<double>& fr) {
    if (!c.mu) {
        SearchSpec spec;
        if (c.tier == Tier::none && c.vth) spec.vth_range = {{*c.vth, *c.vth}};
        return optimize_point(c.src, ch, c.L, c.tier, spec,
                              fr.empty() ? std::nullopt : std::optional{fr});
    }
    int vlo = 0, vhi = 0;
    if (c.tier == Tier::none) {
        vlo = c.vth ? *c.vth : 0;
        vhi = c.vth ? *c.vth : vth_max(c.L);
    }
    OptResult best;
    best.raw = -std::numeric_limits<double>::infinity();
    for (int v = vlo; v <= vhi; ++v) {
        const double r = objective_raw(c.src, ch, *c.mu, c.L, c.tier, v, fr);
        if (r > best.raw) best = {std::max(0.0, r), r, *c.mu, v};
    }
    if (!(best.raw > 0.0)) best = {0.0, best.raw, *c.mu, 0};
    return best;
}

inline RateResult describe(const RunConfig& c, const Channel& ch, const OptResult& opt,
                           const std::vector<double>& fr) {
    switch (c.tier) {
        case Tier::none: return rate_nodecoy(c.src, ch, opt.mu, c.L, opt.vth);
        case Tier::infinite: return rate_infinite(c.src, ch, opt.mu, c.L);
        default: return rate_finite(ch, opt.mu, c.L, c.tier, rrdps::detail::scale(fr, opt.mu)).rr;
    }
}

} // namespace detail

inline int cmd_rate(const RunConfig& cfg, std::ostream& os) {
    struct Row {
        double km = 0.0, eta = 0.0;
        OptResult opt;
        RateResult rr{};
    };
    const std::vector<double> fr = detail::resolved_fractions(cfg);
    std::vector<Row> rows(cfg.distance_km.size());
    parallel_for_index(rows.size(), [&](std::size_t i) {
        Row r;
        r.km = cfg.distance_km[i];
        const Channel ch = cfg.tmpl.at_km(r.km, cfg.L);
        r.eta = ch.eta;
        r.opt = detail::solve_point(cfg, ch, fr);
        r.rr = detail::describe(cfg, ch, r.opt, fr);
        rows[i] = r;
    });
    const int p = cfg.precision;
    os << "distance_km,transmittance,mu_opt,v_th_opt,tier,Q,e_bit,e_src,e_ph,R\n";
    for (const Row& r : rows) {
        os << fmt(r.km, p) << ',' << fmt(r.eta, p) << ',' << fmt(r.opt.mu, p) << ','
           << r.opt.vth << ',' << to_string(cfg.tier) << ',' << fmt(r.rr.gain, p) << ','
           << fmt(r.rr.qber, p) << ',' << fmt(r.rr.e_src, p) << ',' << fmt(r.rr.e_ph, p) << ','
           << fmt(r.rr.rate, p) << '\n';
    }
    return 0;
}

inline int cmd_landscape(const RunConfig& cfg, std::ostream& os) {
    const Channel ch = cfg.tmpl.at_km(cfg.ls_km, cfg.L);
    const int n = cfg.ls_mu_points;
    std::vector<double> mus(n);
    const double lo = std::log(cfg.ls_mu_min), hi = std::log(cfg.ls_mu_max);
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
        mus[i] = std::exp(lo + (hi - lo) * t);
    }
    int vlo = 0, vhi = 0;
    if (cfg.tier == Tier::none) {
        vlo = cfg.ls_vth_min.value_or(0);
        vhi = cfg.ls_vth_max.value_or(vth_max(cfg.L));
    }
    const std::vector<double> fr = detail::resolved_fractions(cfg);
    const int vn = vhi - vlo + 1;
    std::vector<double> rate(static_cast<std::size_t>(n) * vn);
    parallel_for_index(rate.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k) / vn;
        const int v = vlo + static_cast<int>(k) % vn;
        rate[k] = std::max(0.0, objective_raw(cfg.src, ch, mus[i], cfg.L, cfg.tier, v, fr));
    });
    const int p = cfg.precision;
    os << "mu,v_th,R\n";
    for (int i = 0; i < n; ++i)
        for (int v = vlo; v <= vhi; ++v)
            os << fmt(mus[i], p) << ',' << v << ','
               << fmt(rate[static_cast<std::size_t>(i) * vn + (v - vlo)], p) << '\n';
    return 0;
}

namespace detail {

inline void bound_row(std::ostream& os, int p, double eta, const BoundSet& b,
                      const double* truth_y, const double* truth_e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    os << fmt(eta, p);
    for (int n = 1; n <= 3; ++n)
        os << ',' << fmt(n <= b.nth ? b.y(n) : nan, p) << ','
           << fmt(truth_y ? truth_y[n] : nan, p);
    for (int n = 1; n <= 3; ++n)
        os << ',' << fmt(n <= b.nth ? b.e(n) : nan, p) << ','
           << fmt(truth_e ? truth_e[n] : nan, p);
    os << '\n';
}

inline const char* bounds_header() {
    return "eta,Y1_L,Y1_true,Y2_L,Y2_true,Y3_L,Y3_true,"
           "e1_U,e1_true,e2_U,e2_true,e3_U,e3_true\n";
}

} // namespace detail

inline int cmd_bounds(const RunConfig& cfg, std::ostream& os) {
    if (!cfg.mu)
        detail::fail("source.mu", "bounds needs a fixed signal intensity, not \"optimize\"");
    if (cfg.tier == Tier::none || cfg.tier == Tier::infinite)
        detail::fail("protocol.tier", "bounds needs a finite decoy tier (two, three, or four)");
    const std::vector<double> decoys =
        rrdps::detail::scale(detail::resolved_fractions(cfg), *cfg.mu);

    std::vector<double> etas;
    if (cfg.eta_grid) {
        etas = *cfg.eta_grid;
    } else {
        for (double d : cfg.distance_km)
            etas.push_back(cfg.tmpl.at_km(d, cfg.L).eta);
    }
    const int p = cfg.precision;
    os << detail::bounds_header();
    for (double eta : etas) {
        const Channel ch = cfg.tmpl.at_eta(eta, cfg.L);
        const BoundSet b = estimate_bounds(ch, *cfg.mu, cfg.L, decoys);
        double ty[4], te[4];
        for (int n = 0; n <= 3; ++n) {
            ty[n] = yield_n(ch, n);
            te[n] = error_n(ch, n);
        }
        detail::bound_row(os, p, eta, b, ty, te);
    }
    return 0;
}

// Bounds from measured data: CSV columns intensity_per_pulse, gain, qber.
// First row is the signal intensity, the rest are decoys in descending
// order; the row count fixes the tier. No channel model is assumed, so the
// truth columns are nan.
inline int cmd_bounds_obs(const std::string& path, const RunConfig& cfg, std::ostream& os) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open observations file");
    std::vector<Observation> all;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line.back() == '\r') {
            while (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
        }
        const std::string where = path + ":" + std::to_string(lineno);
        double v[3];
        const char* s = line.c_str();
        bool numeric = true;
        for (int i = 0; i < 3; ++i) {
            char* end = nullptr;
            v[i] = std::strtod(s, &end);
            if (end == s) {
                numeric = false;
                break;
            }
            s = end;
            while (*s == ' ' || *s == '\t') ++s;
            if (i < 2) {
                if (*s != ',') {
                    numeric = false;
                    break;
                }
                ++s;
            }
        }
        if (!numeric) {
            if (lineno == 1 && all.empty()) continue;  // header row
            throw ConfigError(where + ": expected intensity_per_pulse,gain,qber");
        }
        if (*s != '\0') throw ConfigError(where + ": trailing characters after three columns");
        all.push_back({v[0], v[1], v[2]});
    }
    if (all.size() < 3 || all.size() > 5)
        throw ConfigError(path + ": need 3 to 5 observation rows (signal plus 2 to 4 decoys)");
    std::vector<Observation> decoys(all.begin() + 1, all.end());
    BoundSet b;
    try {
        b = estimate_bounds(all[0], decoys, cfg.L);
    } catch (const std::domain_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    os << detail::bounds_header();
    detail::bound_row(os, cfg.precision, std::numeric_limits<double>::quiet_NaN(), b, nullptr,
                      nullptr);
    return 0;
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& os) {
    struct CheckRow {
        std::string name;
        bool pass = false;
        double measured = 0.0;
        double limit = 0.0;
    };
    std::vector<CheckRow> rows;
    const SourceParams wcp{Source::wcp, cfg.src.herald_eff, cfg.src.herald_dark};
    const SourceParams hsps{Source::hsps, cfg.src.herald_eff, cfg.src.herald_dark};

    // closed forms against the photon-number series on a fixed grid
    for (const SourceParams& s : {wcp, hsps}) {
        double worst = 0.0;
        for (double eta : {1.0, 0.1, 0.01, 1e-3}) {
            for (double mu : {0.005, 0.02, 0.1}) {
                for (int L : {16, 32, 64}) {
                    const Channel ch{eta, 1e-5, 0.5, 0.033, 1.16};
                    const GainQber a = gain_qber(s, ch, mu, L);
                    const GainQber b = gain_qber_series(s, ch, mu, L);
                    worst = std::max({worst, std::abs(a.gain - b.gain),
                                      std::abs(a.qber - b.qber)});
                }
            }
        }
        rows.push_back({s.kind == Source::wcp ? "series_vs_closed_wcp" : "series_vs_closed_hsps",
                        worst <= 1e-9, worst, 1e-9});
    }

    // decoy bounds stay on the safe side of the true yields
    {
        double worst = -1.0, y0_worst = 0.0;
        for (int i = 0; i < 7; ++i) {
            const double eta = std::pow(10.0, -4.0 + 4.0 * i / 6.0);
            for (double mu : {0.005, 0.02, 0.1}) {
                for (int L : {16, 32, 64}) {
                    const Channel ch{eta, 1e-5, 0.5, 0.033, 1.16};
                    const BoundSet b = estimate_bounds(ch, mu, L, default_decoys(Tier::four, mu));
                    y0_worst = std::max(y0_worst, std::abs(b.y0 - yield_n(ch, 0)));
                    for (int n = 1; n <= 3; ++n) {
                        worst = std::max(worst, b.y(n) - yield_n(ch, n));
                        worst = std::max(worst, error_n(ch, n) - b.e(n));
                    }
                }
            }
        }
        rows.push_back({"decoy_soundness", worst <= 1e-10, worst, 1e-10});
        rows.push_back({"vacuum_y0_exact", y0_worst <= 1e-12, y0_worst, 1e-12});
    }

    // more decoy intensities never hurt
    {
        double worst = 0.0;
        for (double km : {0.0, 50.0, 100.0}) {
            const Channel ch = cfg.tmpl.at_km(km, cfg.L);
            const double r2 = optimize_point(wcp, ch, cfg.L, Tier::two).rate;
            const double r3 = optimize_point(wcp, ch, cfg.L, Tier::three).rate;
            const double r4 = optimize_point(wcp, ch, cfg.L, Tier::four).rate;
            worst = std::max({worst, r2 - r3, r3 - r4});
        }
        rows.push_back({"tier_chain", worst <= 1e-15, worst, 1e-15});
    }

    // single-photon phase error at L=32 is exactly 1/32
    {
        const double diff = std::abs(phase_error_n(32, 1) - 0.03125);
        rows.push_back({"phase_error_dyadic", diff == 0.0, diff, 0.0});
    }

    // sampled statistics against the closed forms
    const Channel mc_ch = cfg.tmpl.at_km(25.0, cfg.L);
    const double mc_mu = cfg.mu.value_or(0.02);
    for (const SourceParams& s : {wcp, hsps}) {
        const TrialConfig tc{s, mc_ch, mc_mu, cfg.L, cfg.mc_trials, cfg.seed};
        const McStats m = mc_gain_qber(tc);
        const GainQber ex = gain_qber(s, mc_ch, mc_mu, cfg.L);
        double sig = std::abs(m.q_hat - ex.gain) / (m.se_q > 0.0 ? m.se_q : 1e-300);
        if (m.detections > 0)
            sig = std::max(sig, std::abs(m.e_hat - ex.qber) / (m.se_e > 0.0 ? m.se_e : 1e-300));
        rows.push_back({s.kind == Source::wcp ? "mc_gain_qber_wcp" : "mc_gain_qber_hsps",
                        sig <= 4.0, sig, 4.0});
    }
    for (const SourceParams& s : {wcp, hsps}) {
        const Chi2Result c2 = mc_pmf_chi2(s, cfg.L * mc_mu, cfg.mc_trials, cfg.seed + 1);
        rows.push_back({s.kind == Source::wcp ? "mc_pmf_chi2_wcp" : "mc_pmf_chi2_hsps",
                        c2.p >= 1e-3, c2.p, 1e-3});
    }
    {
        const double match = mc_sift_match(cfg.L, 100'000, cfg.seed);
        const double diff = std::abs(match - 1.0);
        rows.push_back({"sift_exact_noiseless", diff == 0.0, diff, 0.0});
    }

    bool all_pass = true;
    os << "check,status,measured,limit\n";
    for (const CheckRow& r : rows) {
        all_pass = all_pass && r.pass;
        os << r.name << ',' << (r.pass ? "pass" : "fail") << ',' << fmt(r.measured, cfg.precision)
           << ',' << fmt(r.limit, cfg.precision) << '\n';
    }
    return all_pass ? 0 : 2;
}

} // namespace rrdps::cli
