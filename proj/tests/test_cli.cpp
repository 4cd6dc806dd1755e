#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

std::string cli_path() {
    const char* p = std::getenv("RRDPS_CLI");
    if (!p) throw std::runtime_error("RRDPS_CLI not set; run through ctest");
    return p;
}

struct RunOut {
    int code = -1;
    std::string out;
};

std::string temp_name(const char* tag) {
    static int counter = 0;
    return "/tmp/rrdps_cli_" + std::to_string(getpid()) + "_" + tag + "_" +
           std::to_string(counter++);
}

RunOut run(const std::string& args, const std::string& env_prefix = "") {
    const std::string out = temp_name("out");
    const std::string cmd = env_prefix + cli_path() + " " + args + " > " + out + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    RunOut r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    r.out = ss.str();
    std::remove(out.c_str());
    return r;
}

std::string write_config(const std::string& body) {
    const std::string path = temp_name("cfg") + ".json";
    std::ofstream f(path);
    f << body;
    return path;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

int line_count(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("zero arguments run the default distance sweep") {
    const RunOut r = run("");
    REQUIRE(r.code == 0);
    REQUIRE(first_line(r.out) ==
            "distance_km,transmittance,mu_opt,v_th_opt,tier,Q,e_bit,e_src,e_ph,R");
    REQUIRE(line_count(r.out) == 82);  // header + 0..160 km step 2
    REQUIRE(r.out.find(",three,") != std::string::npos);
}

TEST_CASE("fixed parameters reproduce known columns") {
    const std::string cfg = write_config(R"({
        "source": {"mu": 0.02},
        "protocol": {"L": 32, "tier": "none", "v_th": 3},
        "sweep": {"distance_km": [0]}
    })");
    const RunOut r = run("rate --config " + cfg);
    std::remove(cfg.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(line_count(r.out) == 2);
    // e_src for a Poisson packet of mean 0.64 above 3, phase error at vth 3
    REQUIRE(r.out.find("0,0.045,0.02,3,none,") != std::string::npos);
    REQUIRE(r.out.find(",0.00421317859066,") != std::string::npos);
    REQUIRE(r.out.find(",0.0880126953125,") != std::string::npos);
}

TEST_CASE("output bytes are stable across runs and thread counts") {
    const std::string cfg = write_config(R"({
        "sweep": {"distance_km": [0, 40, 80, 120]},
        "protocol": {"tier": "two"}
    })");
    const RunOut a = run("rate --config " + cfg);
    const RunOut b = run("rate --config " + cfg);
    const RunOut one = run("rate --config " + cfg, "RRDPS_THREADS=1 ");
    const RunOut five = run("rate --config " + cfg, "RRDPS_THREADS=5 ");
    std::remove(cfg.c_str());
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE(a.out == one.out);
    REQUIRE(a.out == five.out);
}

TEST_CASE("landscape emits the requested grid") {
    const std::string cfg = write_config(R"({
        "protocol": {"tier": "none"},
        "landscape": {"mu_min": 0.02, "mu_max": 0.02, "mu_points": 1,
                      "vth_min": 2, "vth_max": 2}
    })");
    const RunOut r = run("landscape --config " + cfg);
    std::remove(cfg.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(r.out == "mu,v_th,R\n0.02,2,0\n");
}

TEST_CASE("landscape covers the threshold axis by default") {
    const std::string cfg = write_config(R"({
        "protocol": {"L": 16, "tier": "none"},
        "landscape": {"mu_min": 0.01, "mu_max": 0.1, "mu_points": 3}
    })");
    const RunOut r = run("landscape --config " + cfg);
    std::remove(cfg.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(line_count(r.out) == 1 + 3 * 8);  // vth 0..7 for L=16
}

TEST_CASE("bounds sweep pairs estimates with true values") {
    const std::string cfg = write_config(R"({
        "source": {"mu": 0.012},
        "protocol": {"tier": "three"},
        "sweep": {"eta": [0.00045]}
    })");
    const RunOut r = run("bounds --config " + cfg);
    std::remove(cfg.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(first_line(r.out) ==
            "eta,Y1_L,Y1_true,Y2_L,Y2_true,Y3_L,Y3_true,"
            "e1_U,e1_true,e2_U,e2_true,e3_U,e3_true");
    // frozen channel: eta=4.5e-4 with the default packet background
    REQUIRE(r.out.find("0.00045,0.000483449212231,0.000504374087229,") != std::string::npos);
    // three-tier rows leave the third-order columns empty
    REQUIRE(r.out.find(",nan,") != std::string::npos);
}

TEST_CASE("three observation rows infer the two-intensity tier") {
    const std::string obs = temp_name("obs") + ".csv";
    {
        std::ofstream f(obs);
        f << "intensity_per_pulse,gain,qber\n"
             "0.02,0.006389499825214774,0.03373088663083938\n"
             "0.01,0.003219646386274064,0.034169290499349744\n"
             "0.0,1.7398891485452993e-05,0.5\n";
    }
    const RunOut r = run("bounds --observations " + obs);
    std::remove(obs.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(line_count(r.out) == 2);
    const std::string row = r.out.substr(r.out.find('\n') + 1);
    REQUIRE(row.substr(0, 4) == "nan,");          // no channel model, no truth columns
    REQUIRE(row.find("nan,nan,nan,nan") != std::string::npos);
    REQUIRE(row.find(",nan,nan\n") != std::string::npos);
    // Y1_L and e1_U are real numbers for the populated order
    REQUIRE(row.substr(4, 4) != "nan,");
}

TEST_CASE("validate reports every check and exits zero") {
    const std::string cfg = write_config(R"({"validate": {"trials": 200000}})");
    const RunOut r = run("validate --config " + cfg);
    const RunOut again = run("validate --config " + cfg);
    std::remove(cfg.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(first_line(r.out) == "check,status,measured,limit");
    REQUIRE(line_count(r.out) == 12);
    REQUIRE(r.out.find(",fail,") == std::string::npos);
    for (const char* name :
         {"series_vs_closed_wcp", "series_vs_closed_hsps", "decoy_soundness", "vacuum_y0_exact",
          "tier_chain", "phase_error_dyadic", "mc_gain_qber_wcp", "mc_gain_qber_hsps",
          "mc_pmf_chi2_wcp", "mc_pmf_chi2_hsps", "sift_exact_noiseless"})
        REQUIRE(r.out.find(name) != std::string::npos);
    REQUIRE(r.out == again.out);
}

TEST_CASE("flags override the config") {
    const std::string cfg = write_config(R"({
        "protocol": {"tier": "three"},
        "sweep": {"distance_km": [0]}
    })");
    const RunOut r = run("rate --config " + cfg + " --tier infinite --packet-length 16");
    std::remove(cfg.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find(",infinite,") != std::string::npos);
    REQUIRE(r.out.find(",three,") == std::string::npos);
}

TEST_CASE("output lands in the requested file") {
    const std::string cfg = write_config(R"({"sweep": {"distance_km": [0]}})");
    const std::string dst = temp_name("csv") + ".csv";
    const RunOut r = run("rate --config " + cfg + " --out " + dst);
    std::remove(cfg.c_str());
    REQUIRE(r.code == 0);
    REQUIRE(r.out.empty());
    std::ifstream f(dst);
    std::string header;
    std::getline(f, header);
    std::remove(dst.c_str());
    REQUIRE(header == "distance_km,transmittance,mu_opt,v_th_opt,tier,Q,e_bit,e_src,e_ph,R");
}

TEST_CASE("config mistakes exit with code one and a field path") {
    struct Case {
        const char* body;
        const char* needle;
    };
    const Case cases[] = {
        {R"({"chanel": {}})", "unknown field"},
        {R"({"channel": {"e_d": 0.7}})", "e_d"},
        {R"({"source": {"kind": "laser"}})", "source.kind"},
        {R"({"protocol": {"tier": "two"}, "source": {"kind": "hsps"}})", "wcp"},
        {R"({"protocol": {"L": 2}})", "protocol.L"},
        {R"({"protocol": {"v_th": 99}})", "v_th"},
        {R"({"protocol": {"tier": "two", "intensities": [0.5, 0.6]}})", "descending"},
        {R"({"sweep": {"distance_km": []}})", "array"},
        {R"(garbage)", "parse"},
    };
    for (const Case& c : cases) {
        const std::string cfg = write_config(c.body);
        const std::string err = temp_name("err");
        const std::string cmd =
            cli_path() + std::string(" rate --config ") + cfg + " >/dev/null 2>" + err;
        const int rc = std::system(cmd.c_str());
        std::ifstream f(err);
        std::stringstream ss;
        ss << f.rdbuf();
        std::remove(cfg.c_str());
        std::remove(err.c_str());
        INFO("config: " << c.body << "\nstderr: " << ss.str());
        REQUIRE(WIFEXITED(rc));
        REQUIRE(WEXITSTATUS(rc) == 1);
        REQUIRE(ss.str().find(c.needle) != std::string::npos);
    }
}

TEST_CASE("bad invocations exit with code one") {
    REQUIRE(run("frobnicate").code == 1);
    REQUIRE(run("rate --config /nonexistent.json").code == 1);
    REQUIRE(run("rate --tier five").code == 1);
    REQUIRE(run("rate --packet-length 2").code == 1);
    REQUIRE(run("bounds --observations /nonexistent.csv").code == 1);
    REQUIRE(run("--help").code == 0);
}

TEST_CASE("bounds demand a fixed intensity and a finite tier") {
    const std::string cfg = write_config(R"({"sweep": {"eta": [0.01]}})");
    REQUIRE(run("bounds --config " + cfg).code == 1);  // default mu is "optimize"
    std::remove(cfg.c_str());
    const std::string cfg2 = write_config(
        R"({"source": {"mu": 0.02}, "protocol": {"tier": "infinite"}, "sweep": {"eta": [0.01]}})");
    REQUIRE(run("bounds --config " + cfg2).code == 1);
    std::remove(cfg2.c_str());
}
