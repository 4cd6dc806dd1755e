#include <catch2/catch_amalgamated.hpp>
#include <rrdps/mc_oracle.hpp>

#include <cstdlib>

using namespace rrdps;

namespace {

Channel dim() { return {0.01, 1e-5, 0.5, 0.033, 1.16}; }
Channel far() { return {0.00045, 5.439856658417952e-05, 0.5, 0.033, 1.16}; }

void check_vs_closed(const SourceParams& s, const Channel& ch) {
    TrialConfig cfg{s, ch, 0.02, 32, 1'000'000, 1};
    const McStats mc = mc_gain_qber(cfg);
    const GainQber ex = gain_qber(s, ch, cfg.mu, cfg.L);
    INFO("q_hat=" << mc.q_hat << " Q=" << ex.gain << " se=" << mc.se_q);
    REQUIRE(std::abs(mc.q_hat - ex.gain) <= 4.0 * mc.se_q);
    INFO("e_hat=" << mc.e_hat << " E=" << ex.qber << " se=" << mc.se_e);
    REQUIRE(std::abs(mc.e_hat - ex.qber) <= 4.0 * mc.se_e);
}

} // namespace

TEST_CASE("seeding chain matches the published splitmix64 sequence") {
    REQUIRE(rng::splitmix64_at(0, 0) == 0xE220A8397B1DCDAFULL);
    REQUIRE(rng::splitmix64_at(0, 1) == 0x6E789E6AA1B965F4ULL);
    REQUIRE(rng::splitmix64_at(0, 2) == 0x06C45D188009454FULL);
    REQUIRE(rng::splitmix64_at(0, 3) == 0xF88BB8A8724C81ECULL);
    REQUIRE(rng::splitmix64_at(42, 0) == 0xBDD732262FEB6E95ULL);
}

TEST_CASE("generator stream is reproducible and well formed") {
    auto g = rng::substream(1, 0);
    REQUIRE(g.next() == 0xCFC5D07F6F03C29BULL);
    REQUIRE(g.next() == 0xBF424132963FE08DULL);
    REQUIRE(g.next() == 0x19A37D5757AAF520ULL);

    auto a = rng::substream(7, 3);
    auto b = rng::substream(7, 3);
    auto c = rng::substream(7, 4);
    REQUIRE(a.next() == b.next());
    REQUIRE(a.next() != c.next());

    auto u = rng::substream(9, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
    }
}

TEST_CASE("identical seeds give identical statistics") {
    TrialConfig cfg{{Source::wcp}, dim(), 0.02, 32, 200'000, 99};
    const McStats a = mc_gain_qber(cfg);
    const McStats b = mc_gain_qber(cfg);
    REQUIRE(a.detections == b.detections);
    REQUIRE(a.errors == b.errors);
    REQUIRE(a.q_hat == b.q_hat);

    cfg.seed = 100;
    const McStats c = mc_gain_qber(cfg);
    REQUIRE((a.detections != c.detections || a.errors != c.errors));
}

TEST_CASE("thread count cannot change the counts") {
    TrialConfig cfg{{Source::wcp}, dim(), 0.02, 32, 200'000, 5};
    setenv("RRDPS_THREADS", "1", 1);
    const McStats one = mc_gain_qber(cfg);
    setenv("RRDPS_THREADS", "7", 1);
    const McStats seven = mc_gain_qber(cfg);
    unsetenv("RRDPS_THREADS");
    const McStats def = mc_gain_qber(cfg);
    REQUIRE(one.detections == seven.detections);
    REQUIRE(one.errors == seven.errors);
    REQUIRE(one.detections == def.detections);
    REQUIRE(one.errors == def.errors);
}

TEST_CASE("degenerate channels are exact") {
    SECTION("no light, no background: nothing clicks") {
        TrialConfig cfg{{Source::wcp}, {0.5, 0.0}, 0.0, 32, 50'000, 3};
        const McStats s = mc_gain_qber(cfg);
        REQUIRE(s.detections == 0);
        REQUIRE(s.q_hat == 0.0);
        REQUIRE(s.e_hat == 0.0);
    }
    SECTION("noiseless detections carry no errors") {
        TrialConfig cfg{{Source::wcp}, {1.0, 0.0, 0.5, 0.0}, 0.05, 32, 50'000, 3};
        const McStats s = mc_gain_qber(cfg);
        REQUIRE(s.detections > 0);
        REQUIRE(s.errors == 0);
    }
    SECTION("background-only clicks are fair coins") {
        TrialConfig cfg{{Source::wcp}, {0.5, 1.0, 0.5, 0.033}, 0.0, 32, 200'000, 3};
        const McStats s = mc_gain_qber(cfg);
        REQUIRE(s.detections == cfg.trials);
        REQUIRE(std::abs(s.e_hat - 0.5) <= 4.0 * s.se_e);
    }
}

TEST_CASE("sampled gain and error rate match the closed forms") {
    SECTION("wcp, moderate loss") { check_vs_closed({Source::wcp}, dim()); }
    SECTION("wcp, deep loss") { check_vs_closed({Source::wcp}, far()); }
    SECTION("hsps, moderate loss") { check_vs_closed({Source::hsps, 0.045, 1.7e-6}, dim()); }
    SECTION("hsps, deep loss") { check_vs_closed({Source::hsps, 0.045, 1.7e-6}, far()); }
}

TEST_CASE("sampled photon numbers fit the source law") {
    SECTION("poisson") {
        const Chi2Result r = mc_pmf_chi2({Source::wcp}, 0.64, 1'000'000, 11);
        INFO("stat=" << r.stat << " dof=" << r.dof << " p=" << r.p);
        REQUIRE(r.dof >= 3);
        REQUIRE(r.p > 1e-3);
    }
    SECTION("heralded thermal") {
        const Chi2Result r = mc_pmf_chi2({Source::hsps, 0.045, 1.7e-6}, 0.64, 1'000'000, 11);
        INFO("stat=" << r.stat << " dof=" << r.dof << " p=" << r.p);
        REQUIRE(r.dof >= 3);
        REQUIRE(r.p > 1e-3);
    }
}

TEST_CASE("sifted keys agree exactly without noise") {
    REQUIRE(mc_sift_match(32, 100'000, 17) == 1.0);
    REQUIRE(mc_sift_match(3, 50'000, 17) == 1.0);
    REQUIRE(mc_sift_match(128, 50'000, 17) == 1.0);

    const double noisy = mc_sift_match(32, 200'000, 17, 0.1);
    REQUIRE(noisy < 1.0);
    const double se = std::sqrt(0.9 * 0.1 / 200'000.0);
    REQUIRE(std::abs(noisy - 0.9) <= 4.0 * se);
}

TEST_CASE("simulation inputs are validated") {
    TrialConfig cfg{{Source::wcp}, dim(), 0.02, 32, 0, 1};
    REQUIRE_THROWS_AS(mc_gain_qber(cfg), std::domain_error);
    cfg.trials = 100;
    cfg.mu = 20.0;  // packet mean 640 exceeds the CDF-walk range
    REQUIRE_THROWS_AS(mc_gain_qber(cfg), std::domain_error);
    REQUIRE_THROWS_AS(mc_sift_match(2, 1000, 1), std::domain_error);
    REQUIRE_THROWS_AS(mc_sift_match(32, 0, 1), std::domain_error);
    REQUIRE_THROWS_AS(mc_pmf_chi2({Source::wcp}, 0.64, 10, 1), std::domain_error);
}

TEST_CASE("error counts never exceed detections") {
    TrialConfig cfg{{Source::wcp}, dim(), 0.1, 32, 64, 21};
    const McStats s = mc_gain_qber(cfg);
    REQUIRE(s.errors <= s.detections);
    REQUIRE(s.detections <= s.trials);
    REQUIRE(s.trials == 64);
}
