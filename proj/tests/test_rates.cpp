#include <catch2/catch_amalgamated.hpp>
#include <rrdps/rates.hpp>

using namespace rrdps;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

static Channel cha() { return {0.01, 1e-5, 0.5, 0.033, 1.16}; }
static Channel good() { return {0.1, 1e-5, 0.5, 0.033, 1.16}; }
static SourceParams wcp() { return {Source::wcp}; }
static SourceParams hsps() { return {Source::hsps, 0.045, 1.7e-6}; }

TEST_CASE("single-pair phase error is exact for dyadic packet lengths") {
    REQUIRE(phase_error_n(32, 1) == 1.0 / 32.0);
    REQUIRE(phase_error_n(128, 1) == 1.0 / 128.0);
    REQUIRE(phase_error_n(32, 3) == 0.0880126953125);
    REQUIRE(phase_error_n(32, 0) == 0.0);
}

TEST_CASE("phase error saturates at one half for many photons") {
    REQUIRE_THAT(phase_error_n(32, 10000), WithinAbs(0.5, 1e-12));
    double prev = 0.0;
    for (int n = 0; n <= 40; ++n) {
        const double e = phase_error_n(32, n);
        REQUIRE(e >= prev);
        REQUIRE(e < 0.5);
        prev = e;
    }
}

TEST_CASE("threshold ceiling stays below half the pair count") {
    REQUIRE(vth_max(32) == 15);
    REQUIRE(vth_max(33) == 15);
    REQUIRE(vth_max(128) == 63);
    REQUIRE(vth_max(3) == 0);
    REQUIRE_THROWS_AS(vth_max(2), std::domain_error);
}

TEST_CASE("packet phase error blends the tagged tail") {
    REQUIRE_THAT(phase_error_packet(32, 3, 1e-4, 1e-2),
                 WithinRel(0.09713256835937499, 1e-13));
    REQUIRE(phase_error_packet(32, 3, 0.02, 0.01) == 0.5);
    REQUIRE(phase_error_packet(32, 3, 0.0, 0.01) == phase_error_n(32, 3));
}

TEST_CASE("no-decoy rate reference values") {
    const auto neg = rate_nodecoy(wcp(), cha(), 0.02, 32, 3);
    REQUIRE_THAT(neg.raw, WithinRel(-0.00033607826106004626, 1e-11));
    REQUIRE(neg.rate == 0.0);
    REQUIRE_THAT(neg.gain, WithinRel(0.006389499825214774, 1e-13));
    REQUIRE_THAT(neg.e_src, WithinRel(0.004213178590660505, 1e-12));
    REQUIRE(neg.e_ph == phase_error_n(32, 3));

    const auto negh = rate_nodecoy(hsps(), cha(), 0.02, 32, 3);
    REQUIRE_THAT(negh.raw, WithinRel(-0.08324277479250236, 1e-11));

    const auto pos = rate_nodecoy(wcp(), good(), 0.01, 32, 5);
    REQUIRE_THAT(pos.raw, WithinRel(0.005599185784593379, 1e-11));
    REQUIRE(pos.rate == pos.raw);
    const auto posh = rate_nodecoy(hsps(), good(), 0.01, 32, 5);
    REQUIRE_THAT(posh.raw, WithinRel(0.025851097553055005, 1e-11));
}

TEST_CASE("no-decoy rate rejects thresholds outside the admissible range") {
    REQUIRE_THROWS_AS(rate_nodecoy(wcp(), cha(), 0.02, 32, 16), std::domain_error);
    REQUIRE_THROWS_AS(rate_nodecoy(wcp(), cha(), 0.02, 32, -1), std::domain_error);
    REQUIRE_NOTHROW(rate_nodecoy(wcp(), cha(), 0.02, 32, 15));
}

TEST_CASE("infinite-decoy rate reference values") {
    const auto ra = rate_infinite(wcp(), cha(), 0.02, 32);
    REQUIRE_THAT(ra.raw, WithinRel(0.003042159879424745, 1e-11));
    REQUIRE(ra.rate == ra.raw);
    const auto rh = rate_infinite(hsps(), cha(), 0.02, 32);
    REQUIRE_THAT(rh.raw, WithinRel(0.007570042300157854, 1e-11));
    const auto rg = rate_infinite(wcp(), good(), 0.02, 32);
    REQUIRE_THAT(rg.raw, WithinRel(0.029935562468906707, 1e-11));
}

TEST_CASE("perfect photon knowledge beats surrendering the tail") {
    // same channel, same intensity: the per-photon analysis can only help
    for (int vth = 0; vth <= 15; ++vth) {
        const auto nd = rate_nodecoy(wcp(), good(), 0.01, 32, vth);
        const auto inf = rate_infinite(wcp(), good(), 0.01, 32);
        REQUIRE(inf.raw >= nd.raw - 1e-12);
    }
}

TEST_CASE("rates fall with loss") {
    double prev = 1.0;
    for (double eta : {0.5, 0.1, 0.02, 0.004}) {
        const Channel ch{eta, 1e-5, 0.5, 0.033, 1.16};
        const double r = rate_infinite(wcp(), ch, 0.02, 32).raw;
        REQUIRE(r < prev);
        prev = r;
    }
}

TEST_CASE("zero intensity produces no key") {
    REQUIRE(rate_nodecoy(wcp(), good(), 0.0, 32, 5).rate == 0.0);
    REQUIRE(rate_infinite(wcp(), good(), 0.0, 32).rate == 0.0);
}
