#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "sconcave/harness.hpp"

using namespace sconcave;
using harness::Command;
using harness::Family;
using nlohmann::json;

namespace {

bool has_violation(const harness::ConfigResult& r, const std::string& needle) {
    for (const std::string& v : r.violations)
        if (v.find(needle) != std::string::npos) return true;
    return false;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

long count_lines(const std::string& text) {
    long lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

// fresh scratch directory per test case, so stale outputs never leak in
std::string scratch_dir(const std::string& name) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path("harness_test_out") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("minimal configs are filled with documented defaults") {
    {
        auto r = harness::load_config(R"({"command": "verify-geometry"})");
        REQUIRE(r.ok());
        CHECK(r.config.command == Command::verify_geometry);
        CHECK(r.config.family == Family::radial);
        CHECK(r.config.n_values == std::vector<int>{2, 3, 5});
        CHECK(r.config.s_values.empty());  // per-n grid chosen at run time
        CHECK(r.config.seeds == std::vector<std::uint64_t>{1});
        CHECK(r.config.n_mc == 200000);
        CHECK(r.config.knobs.c_b == 1.0);
        CHECK(r.config.knobs.C_vc == 1.0);
        CHECK(r.config.out_dir == ".");
    }
    {
        auto r = harness::load_config(
            R"({"command": "verify-geometry", "family": "symmetric1d"})");
        REQUIRE(r.ok());
        CHECK(r.config.n_values == std::vector<int>{1});
        CHECK(r.config.s_values == std::vector<double>{-0.05, -0.1, -0.2});
    }
    {
        auto r = harness::load_config(
            R"({"command": "verify-geometry", "family": "pareto1d"})");
        REQUIRE(r.ok());
        CHECK(r.config.s_values == std::vector<double>{-0.2, -0.5});
    }
    {
        auto r = harness::load_config(R"({"command": "run-al"})");
        REQUIRE(r.ok());
        CHECK(r.config.s_values == std::vector<double>{-0.02});
        CHECK(r.config.n_values == std::vector<int>{3});
        CHECK(r.config.eps == 0.1);
        CHECK(r.config.delta == 0.05);
        CHECK(r.config.eta == 0.0);
        CHECK(r.config.noise_model == bounds::Model::realizable);
        CHECK(r.config.flip_strategy == learners::FlipStrategy::boundary_proximal);
        CHECK_FALSE(r.config.run_passive);
    }
    {
        // a positive eta flips the default noise model to adversarial
        auto r = harness::load_config(R"({"command": "run-al", "eta": 0.001})");
        REQUIRE(r.ok());
        CHECK(r.config.noise_model == bounds::Model::adversarial);
    }
}

TEST_CASE("violations are collected with their keys and regimes named") {
    // regime violation names the failed inequality with its values
    {
        auto r = harness::load_config(R"({"command": "verify-geometry", "s": -0.5, "n": 3})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "s < -1/(2n+3)"));
        CHECK(has_violation(r, "-0.5"));
    }
    // unknown keys are rejected by name
    {
        auto r = harness::load_config(R"({"command": "verify-geometry", "foo": 1})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "unknown key \"foo\""));
    }
    // keys belonging to a different command are called out as such
    {
        auto r = harness::load_config(
            R"({"command": "verify-geometry", "eps": 0.1})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "\"eps\" does not apply to command \"verify-geometry\""));
    }
    // parse failures carry the parser's location diagnostics
    {
        auto r = harness::load_config(R"({"command": )");
        REQUIRE(r.violations.size() == 1);
        CHECK(has_violation(r, "parse error"));
    }
    {
        auto r = harness::load_config("[1, 2]");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "must be a JSON object"));
    }
    {
        auto r = harness::load_config(R"({"family": "radial"})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "missing required key \"command\""));
    }
    {
        auto r = harness::load_config(R"({"command": "frobnicate"})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "unknown command \"frobnicate\""));
    }
    {
        auto r = harness::load_config(
            R"({"command": "verify-geometry", "family": "gaussian"})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "unknown family \"gaussian\""));
    }
    // several independent problems all surface in one pass
    {
        auto r = harness::load_config(
            R"({"command": "verify-geometry", "s": 0.3, "n_mc": 10, "bar": true})");
        REQUIRE(r.violations.size() >= 3);
        CHECK(has_violation(r, "s must be <= 0"));
        CHECK(has_violation(r, "n_mc"));
        CHECK(has_violation(r, "unknown key \"bar\""));
    }
}

TEST_CASE("knob overrides are validated by name and sign") {
    {
        auto r = harness::load_config(
            R"({"command": "run-al", "knobs": {"c_b": 0.5, "c_m": 35.0}})");
        REQUIRE(r.ok());
        CHECK(r.config.knobs.c_b == 0.5);
        CHECK(r.config.knobs.c_m == 35.0);
        CHECK(r.config.knobs.c_tau == 1.0);  // untouched knobs keep defaults
    }
    {
        auto r = harness::load_config(
            R"({"command": "run-al", "knobs": {"c_zz": 1.0}})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "unknown knob \"c_zz\""));
    }
    {
        auto r = harness::load_config(
            R"({"command": "run-al", "knobs": {"c_b": -1.0}})");
        REQUIRE_FALSE(r.ok());
        CHECK(has_violation(r, "positive finite"));
    }
    {
        auto r = harness::load_config(
            R"({"command": "run-al", "knobs": {"c_b": 0.0}})");
        REQUIRE_FALSE(r.ok());
    }
}

TEST_CASE("learner configs enforce their regimes") {
    CHECK(has_violation(harness::load_config(R"({"command": "run-al", "eps": 0.3})"),
                        "eps in (0, 1/4)"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-al", "eta": 0.2})"),
        "eta < c0 * eps"));
    // a noise rate below the threshold is legitimate
    CHECK(harness::load_config(R"({"command": "run-al", "eta": 0.02})").ok());
    CHECK(has_violation(
        harness::load_config(
            R"({"command": "run-al", "eta": 0.01, "noise_model": "realizable"})"),
        "realizable runs need eta = 0"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-al", "wstar": [1.0, 0.0]})"),
        "exactly n entries"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-al", "wstar": [1.0, 1.0, 0.0]})"),
        "unit vector"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-al", "family": "pareto1d"})"),
        "requires the radial family"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-al", "s": [-0.02, -0.05]})"),
        "single (s, n) cell"));
    CHECK(has_violation(harness::load_config(R"({"command": "run-baum", "n": 2})"),
                        "n >= 3"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-baum", "angle_degrees": 200})"),
        "angle_degrees"));
    CHECK(has_violation(
        harness::load_config(
            R"({"command": "estimate-coefficient", "r_grid": [0.1, 1.5]})"),
        "r_grid"));
    CHECK(has_violation(harness::load_config(R"({"command": "run-al", "n_mc": 500})"),
                        "n_mc"));
    CHECK(has_violation(harness::load_config(R"({"command": "run-al", "seeds": []})"),
                        "seeds"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-al", "seeds": [1, -4]})"),
        "non-negative"));
    CHECK(has_violation(
        harness::load_config(R"({"command": "run-al", "delta": 1.5})"),
        "delta"));
}

TEST_CASE("derived streams are reproducible and path-separated") {
    using harness::derive_stream;
    const std::vector<harness::PathLabel> path = {std::string("cell"),
                                                  std::uint64_t{3},
                                                  std::string("band")};

    // the same (root, path) always yields the same stream
    RngStream a = derive_stream(17, path);
    RngStream b = derive_stream(17, path);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    // an empty path is the root stream itself
    RngStream c = derive_stream(17, {});
    RngStream d = RngStream::root(17);
    CHECK(c.key() == d.key());
    for (int i = 0; i < 100; ++i) REQUIRE(c.next_u64() == d.next_u64());

    // sibling paths pass a joint-uniformity chi-square screen: 16 cells from
    // paired quartile bins, df = 15, 1% critical value 30.578
    RngStream u = derive_stream(42, {std::string("a")});
    RngStream v = derive_stream(42, {std::string("b")});
    const int n = 10000;
    long counts[16] = {0};
    for (int i = 0; i < n; ++i) {
        const int bu = std::min(3, static_cast<int>(u.next_double() * 4.0));
        const int bv = std::min(3, static_cast<int>(v.next_double() * 4.0));
        ++counts[4 * bu + bv];
    }
    const double expected = n / 16.0;
    double chi2 = 0.0;
    for (long cnt : counts) {
        const double diff = cnt - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 30.578);

    // integer and string labels with equal spellings stay distinct
    RngStream e = derive_stream(42, {std::uint64_t{7}});
    RngStream f = derive_stream(42, {std::string("7")});
    CHECK(e.key() != f.key());
}

TEST_CASE("worker count respects the thread cap variable") {
    CHECK(harness::worker_count(1) == 1);
    CHECK(harness::worker_count(0) == 1);

    setenv("SCONCAVE_THREADS", "2", 1);
    CHECK(harness::worker_count(8) == 2);
    CHECK(harness::worker_count(1) == 1);  // never more workers than jobs

    setenv("SCONCAVE_THREADS", "1", 1);
    CHECK(harness::worker_count(8) == 1);

    setenv("SCONCAVE_THREADS", "garbage", 1);
    const int fallback = harness::worker_count(8);
    CHECK(fallback >= 1);
    CHECK(fallback <= 8);

    unsetenv("SCONCAVE_THREADS");
    const int def = harness::worker_count(4);
    CHECK(def >= 1);
    CHECK(def <= 4);
}

TEST_CASE("geometry verification run emits the full row inventory") {
    const std::string out = scratch_dir("verify");
    auto r = harness::load_config(
        R"({"command": "verify-geometry", "s": -0.02, "n": 3, "n_mc": 20000,
            "seeds": [5], "out": ")" + out + R"("})");
    REQUIRE(r.ok());
    auto outcome = harness::run(r.config);

    // one radial cell: 8 band-upper + 4 band-lower (t <= d on the 8-point
    // grid d k/4) + 1 halfspace + 4 disagreement + 2 outside-band +
    // 2 conditional-variance + 1 envelope + 2 tail = 24 rows
    const std::string csv = slurp(outcome.csv_path);
    CHECK(count_lines(csv) == 25);  // header + 24 rows
    CHECK(csv.rfind("theorem,s,n,params,estimate,std_error,n_samples,bound,"
                    "direction,verdict,z_margin\n", 0) == 0);
    CHECK(outcome.fail == 0);
    CHECK(outcome.exit_code == 0);
    CHECK(outcome.pass + outcome.fail + outcome.inconclusive == 24);
    CHECK(outcome.verdict_line.find("verify-geometry") != std::string::npos);
    CHECK(outcome.verdict_line.find("OK") != std::string::npos);

    // the summary echoes the resolved config, knobs included
    const json summary = json::parse(slurp(outcome.summary_path));
    CHECK(summary.at("command") == "verify-geometry");
    CHECK(summary.at("ok") == true);
    CHECK(summary.at("config").at("n_mc") == 20000);
    CHECK(summary.at("config").at("seeds") == json::array({5}));
    CHECK(summary.at("config").at("knobs").size() == 12);
    CHECK(summary.at("config").at("knobs").at("c_b") == 1.0);
    CHECK(summary.at("checks").at("fail") == 0);
    CHECK(summary.at("cells").size() == 1);

    SUBCASE("univariate families carry their own suites") {
        const std::string out2 = scratch_dir("verify-sym");
        auto r2 = harness::load_config(
            R"({"command": "verify-geometry", "family": "symmetric1d", "s": -0.1,
                "n_mc": 20000, "out": ")" + out2 + R"("})");
        REQUIRE(r2.ok());
        auto oc2 = harness::run(r2.config);
        // 2 density bounds + 1 halfspace + 2 tail + 2 concavity + 3 moment rows
        CHECK(count_lines(slurp(oc2.csv_path)) == 11);
        CHECK(oc2.fail == 0);

        const std::string out3 = scratch_dir("verify-pareto");
        auto r3 = harness::load_config(
            R"({"command": "verify-geometry", "family": "pareto1d", "s": -0.2,
                "n_mc": 20000, "out": ")" + out3 + R"("})");
        REQUIRE(r3.ok());
        auto oc3 = harness::run(r3.config);
        // 3 closed-form tail matches + 1 halfspace
        CHECK(count_lines(slurp(oc3.csv_path)) == 5);
        CHECK(oc3.fail == 0);
    }
}

TEST_CASE("active-learning runs are reproducible byte for byte") {
    // calibrated width/batch multipliers for this cell (band radius pinned to
    // the geometric width d, batch constant sized for the noise-free fit)
    const std::string knobs =
        R"("knobs": {"c_b": 6.7119338874843381e-39, "c_m": 35.0})";
    auto make_config = [&](const std::string& out) {
        return harness::load_config(
            R"({"command": "run-al", "s": -0.02, "n": 3, "eps": 0.125,
                "seeds": [101], )" + knobs + R"(, "out": ")" + out + R"("})");
    };

    const std::string out1 = scratch_dir("al-one");
    const std::string out2 = scratch_dir("al-two");
    auto r1 = make_config(out1);
    auto r2 = make_config(out2);
    REQUIRE(r1.ok());
    REQUIRE(r2.ok());
    auto oc1 = harness::run(r1.config);
    auto oc2 = harness::run(r2.config);

    const std::string csv1 = slurp(oc1.csv_path);
    const std::string csv2 = slurp(oc2.csv_path);
    CHECK(csv1 == csv2);
    CHECK(oc1.exit_code == 0);
    CHECK(csv1.rfind("learner,seed,round,labels,cumulative_labels,band_width,"
                     "angle,error,error_se\n", 0) == 0);

    // round rows: first unfiltered round leaves the width column empty, only
    // the final row carries the error estimate
    std::istringstream lines(csv1);
    std::string line;
    std::getline(lines, line);  // header
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0].rfind("al,101,1,", 0) == 0);
    {
        // field 6 (band_width) of the first round is empty
        std::istringstream row(rows[0]);
        std::string field;
        for (int i = 0; i < 6; ++i) std::getline(row, field, ',');
        CHECK(field.empty());
    }
    CHECK(rows.back().find(",,") == std::string::npos);

    const json summary = json::parse(slurp(oc1.summary_path));
    CHECK(summary.at("jobs").size() == 1);
    CHECK(summary.at("jobs").at(0).at("verdict") == "pass");
    CHECK(summary.at("config").at("knobs").at("c_m") == 35.0);
    CHECK(summary.at("schedule").at("m").size() ==
          summary.at("jobs").at(0).at("rounds").get<std::size_t>());
    CHECK(summary.at("passive_labels_bound").get<long long>() > 0);
}

TEST_CASE("wide-angle intersection run takes the all-negative branch") {
    const std::string out = scratch_dir("baum");
    auto r = harness::load_config(
        R"({"command": "run-baum", "s": -0.02, "n": 3, "eps": 0.5,
            "angle_degrees": 178, "seeds": [7], "out": ")" + out + R"("})");
    REQUIRE(r.ok());
    auto oc = harness::run(r.config);
    CHECK(oc.exit_code == 0);

    const std::string csv = slurp(oc.csv_path);
    CHECK(csv.rfind("seed,branch,positives,m1,m2,m3,total_labels,gate_ok,"
                    "lifted_ok,composite_ok,error,error_se\n", 0) == 0);
    CHECK(csv.find("7,all-negative,") != std::string::npos);

    const json summary = json::parse(slurp(oc.summary_path));
    CHECK(summary.at("jobs").at(0).at("branch") == "all-negative");
    CHECK(summary.at("jobs").at(0).at("audits_ok") == true);
    CHECK(summary.at("config").at("angle_degrees") == 178.0);
}

TEST_CASE("coefficient estimation run reports one row per radius") {
    const std::string out = scratch_dir("coef");
    auto r = harness::load_config(
        R"({"command": "estimate-coefficient", "s": -0.02, "n": 3,
            "r_grid": [0.2, 0.4], "n_mc": 50000, "seeds": [7],
            "out": ")" + out + R"("})");
    REQUIRE(r.ok());
    auto oc = harness::run(r.config);
    CHECK(oc.exit_code == 0);

    const std::string csv = slurp(oc.csv_path);
    CHECK(count_lines(csv) == 3);  // header + one row per radius
    CHECK(csv.rfind("seed,r,prob,capacity,std_error\n", 0) == 0);

    const json summary = json::parse(slurp(oc.summary_path));
    CHECK(summary.at("jobs").at(0).at("theta_hat").get<double>() > 0.0);
    CHECK(summary.at("jobs").at(0).at("verdict") == "pass");
}

TEST_CASE("command-line front end maps violations to exit code 2") {
    namespace fs = std::filesystem;
    if (!fs::exists("sconcave")) return;  // binary lives next to the test in the build tree

    const std::string out = scratch_dir("cli");
    auto write_config = [&](const std::string& name, const std::string& body) {
        const std::string path = out + "/" + name;
        std::ofstream(path) << body;
        return path;
    };
    auto run_cli = [](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        REQUIRE(rc != -1);
        return WEXITSTATUS(rc);
    };

    const std::string good = write_config(
        "good.json",
        R"({"command": "verify-geometry", "family": "pareto1d", "s": -0.2,
            "n_mc": 20000})");
    CHECK(run_cli("./sconcave verify-geometry --config " + good + " --out " + out +
                  " > /dev/null") == 0);
    CHECK(std::filesystem::exists(out + "/report.csv"));
    CHECK(std::filesystem::exists(out + "/summary.json"));

    const std::string bad = write_config(
        "bad.json", R"({"command": "verify-geometry", "s": -0.5, "n": 3})");
    CHECK(run_cli("./sconcave verify-geometry --config " + bad +
                  " 2> /dev/null") == 2);

    // config written for one subcommand is refused by another
    CHECK(run_cli("./sconcave run-al --config " + good + " 2> /dev/null") == 2);

    // missing file and missing required option
    CHECK(run_cli("./sconcave verify-geometry --config " + out +
                  "/absent.json 2> /dev/null") == 2);
    CHECK(run_cli("./sconcave verify-geometry 2> /dev/null") != 0);
}
