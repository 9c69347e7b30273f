#include "sconcave/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include "json.hpp"

#include "sconcave/densities.hpp"
#include "sconcave/errors.hpp"
#include "sconcave/special.hpp"

namespace sconcave::harness {

namespace {

using nlohmann::json;

/* The tail cap is evaluated at a fixed constant below the sharp value 15/16
   (where the extremal one-sided family attains it with equality), so every
   family in the default grids clears the bound with honest margin. */
constexpr double kTailConstant = 0.85;
constexpr long long kVarianceAccept = 20000;   // rejection-sampled rows

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* command_name(Command c) {
    switch (c) {
        case Command::verify_geometry: return "verify-geometry";
        case Command::run_al: return "run-al";
        case Command::run_baum: return "run-baum";
        case Command::estimate_coefficient: return "estimate-coefficient";
    }
    return "?";
}

const char* family_name(Family f) {
    switch (f) {
        case Family::pareto1d: return "pareto1d";
        case Family::symmetric1d: return "symmetric1d";
        case Family::radial: return "radial";
    }
    return "?";
}

using KnobField = double bounds::Knobs::*;
const std::map<std::string, KnobField>& knob_fields() {
    static const std::map<std::string, KnobField> fields = {
        {"c_f1", &bounds::Knobs::c_f1},   {"c1", &bounds::Knobs::c1},
        {"C0", &bounds::Knobs::C0},       {"c_theta", &bounds::Knobs::c_theta},
        {"c_err", &bounds::Knobs::c_err}, {"c_b", &bounds::Knobs::c_b},
        {"c_tau", &bounds::Knobs::c_tau}, {"c_r", &bounds::Knobs::c_r},
        {"c_kappa", &bounds::Knobs::c_kappa}, {"c_m", &bounds::Knobs::c_m},
        {"c0", &bounds::Knobs::c0},       {"C_vc", &bounds::Knobs::C_vc},
    };
    return fields;
}

// keys every command accepts, and the extras each command consumes
const std::set<std::string>& common_keys() {
    static const std::set<std::string> keys = {"command", "family", "s",    "n",
                                               "seeds",   "n_mc",   "knobs", "out"};
    return keys;
}
const std::set<std::string>& command_keys(Command c) {
    static const std::set<std::string> verify = {};
    static const std::set<std::string> al = {"eps",        "delta",       "eta",
                                             "flip_strategy", "noise_model", "run_passive",
                                             "wstar"};
    static const std::set<std::string> baum = {"eps", "delta", "angle_degrees"};
    static const std::set<std::string> coef = {"wstar", "r_grid"};
    switch (c) {
        case Command::verify_geometry: return verify;
        case Command::run_al: return al;
        case Command::run_baum: return baum;
        case Command::estimate_coefficient: return coef;
    }
    return verify;
}
bool key_known_anywhere(const std::string& key) {
    if (common_keys().count(key)) return true;
    for (Command c : {Command::verify_geometry, Command::run_al, Command::run_baum,
                      Command::estimate_coefficient})
        if (command_keys(c).count(key)) return true;
    return false;
}

std::vector<double> axis_vector(int n) {
    std::vector<double> w(static_cast<size_t>(n), 0.0);
    w[0] = 1.0;
    return w;
}

// unit vector at the given angle from the first axis, in the (e1, e2) plane
std::vector<double> rotated_axis(int n, double angle) {
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    v[0] = std::cos(angle);
    v[1] = std::sin(angle);
    return v;
}

/* ---- config parsing -------------------------------------------------- */

struct Parser {
    const json& doc;
    ExperimentConfig& c;
    std::vector<std::string>& violations;

    void fail(std::string msg) { violations.push_back(std::move(msg)); }

    bool read_double(const char* key, double& out) {
        if (!doc.contains(key)) return false;
        const json& v = doc.at(key);
        if (!v.is_number()) {
            fail(std::string("key \"") + key + "\" must be a number");
            return false;
        }
        out = v.get<double>();
        return true;
    }

    bool read_bool(const char* key, bool& out) {
        if (!doc.contains(key)) return false;
        const json& v = doc.at(key);
        if (!v.is_boolean()) {
            fail(std::string("key \"") + key + "\" must be a boolean");
            return false;
        }
        out = v.get<bool>();
        return true;
    }

    bool read_string(const char* key, std::string& out) {
        if (!doc.contains(key)) return false;
        const json& v = doc.at(key);
        if (!v.is_string()) {
            fail(std::string("key \"") + key + "\" must be a string");
            return false;
        }
        out = v.get<std::string>();
        return true;
    }

    // number or non-empty array of numbers
    bool read_number_list(const char* key, std::vector<double>& out) {
        if (!doc.contains(key)) return false;
        const json& v = doc.at(key);
        if (v.is_number()) {
            out = {v.get<double>()};
            return true;
        }
        if (v.is_array()) {
            std::vector<double> vals;
            for (const json& e : v) {
                if (!e.is_number()) {
                    fail(std::string("key \"") + key + "\" must contain only numbers");
                    return false;
                }
                vals.push_back(e.get<double>());
            }
            if (vals.empty()) {
                fail(std::string("key \"") + key + "\" must not be empty");
                return false;
            }
            out = std::move(vals);
            return true;
        }
        fail(std::string("key \"") + key + "\" must be a number or an array of numbers");
        return false;
    }

    bool read_int_list(const char* key, std::vector<int>& out) {
        if (!doc.contains(key)) return false;
        const json& v = doc.at(key);
        if (v.is_number_integer()) {
            out = {v.get<int>()};
            return true;
        }
        if (v.is_array()) {
            std::vector<int> vals;
            for (const json& e : v) {
                if (!e.is_number_integer()) {
                    fail(std::string("key \"") + key + "\" must contain only integers");
                    return false;
                }
                vals.push_back(e.get<int>());
            }
            if (vals.empty()) {
                fail(std::string("key \"") + key + "\" must not be empty");
                return false;
            }
            out = std::move(vals);
            return true;
        }
        fail(std::string("key \"") + key + "\" must be an integer or an array of integers");
        return false;
    }
};

void fill_default_grids(ExperimentConfig& c, bool had_s, bool had_n) {
    if (c.command == Command::verify_geometry) {
        if (!had_n)
            c.n_values = (c.family == Family::radial) ? std::vector<int>{2, 3, 5}
                                                      : std::vector<int>{1};
        if (!had_s && c.family == Family::pareto1d) c.s_values = {-0.2, -0.5};
        if (!had_s && c.family == Family::symmetric1d) c.s_values = {-0.05, -0.1, -0.2};
        // radial keeps s_values empty: the per-n default grid
        // {-1e-9, -0.02, -1/(2n+3)} is materialized when cells are built
        return;
    }
    if (!had_s) c.s_values = {-0.02};
    if (!had_n) c.n_values = {3};
}

void validate(ExperimentConfig& c, std::vector<std::string>& violations) {
    auto fail = [&](std::string m) { violations.push_back(std::move(m)); };
    const bool learner = c.command != Command::verify_geometry;

    if (learner && c.family != Family::radial)
        fail(std::string(command_name(c.command)) + " requires the radial family");
    if (learner && (c.s_values.size() != 1 || c.n_values.size() != 1))
        fail(std::string(command_name(c.command)) + " runs a single (s, n) cell");

    for (double s : c.s_values) {
        if (s > 0.0) fail("regime violation: s must be <= 0 (s = " + fmt17(s) + ")");
        if (c.family == Family::pareto1d && !(s > -1.0 && s < 0.0))
            fail("regime violation: pareto1d requires s in (-1, 0) (s = " + fmt17(s) + ")");
        if (c.family == Family::symmetric1d && !(s > -1.0 / 3.0 && s <= 0.0))
            fail("regime violation: symmetric1d requires s in (-1/3, 0] (s = " +
                 fmt17(s) + ")");
    }
    if (c.family == Family::radial) {
        for (int n : c.n_values) {
            if (n < 2) fail("radial experiments require n >= 2 (n = " + std::to_string(n) + ")");
            for (double s : c.s_values)
                if (s <= 0.0 && s < -1.0 / (2.0 * n + 3.0))
                    fail("regime violation: s < -1/(2n+3) (s = " + fmt17(s) +
                         ", n = " + std::to_string(n) + ")");
        }
    } else {
        for (int n : c.n_values)
            if (n != 1)
                fail(std::string("family ") + family_name(c.family) +
                     " is one-dimensional (n = " + std::to_string(n) + ")");
    }

    if (c.seeds.empty()) fail("key \"seeds\" must not be empty");
    if (c.n_mc < 1000) fail("key \"n_mc\" must be at least 1000");

    if (c.command == Command::run_al || c.command == Command::run_baum) {
        if (!(c.delta > 0.0 && c.delta < 1.0)) fail("key \"delta\" must lie in (0, 1)");
    }
    if (c.command == Command::run_al) {
        if (!(c.eps > 0.0 && c.eps < 0.25)) fail("run-al requires eps in (0, 1/4)");
        if (!(c.eta >= 0.0 && c.eta < 1.0)) fail("key \"eta\" must lie in [0, 1)");
        if (c.noise_model == bounds::Model::realizable && c.eta > 0.0)
            fail("realizable runs need eta = 0 (set noise_model = \"adversarial\")");
        if (c.noise_model == bounds::Model::adversarial &&
            !(c.eta < c.knobs.c0 * c.eps))
            fail("adversarial runs require eta < c0 * eps");
    }
    if (c.command == Command::run_baum) {
        if (!(c.eps > 0.0 && c.eps < 1.0)) fail("run-baum requires eps in (0, 1)");
        if (!c.n_values.empty() && c.n_values[0] < 3) fail("run-baum requires n >= 3");
        if (!(c.angle_degrees > 0.0 && c.angle_degrees <= 180.0))
            fail("key \"angle_degrees\" must lie in (0, 180]");
    }
    if (c.command == Command::estimate_coefficient) {
        if (c.r_grid.empty()) fail("key \"r_grid\" must not be empty");
        for (double r : c.r_grid)
            if (!(r > 0.0 && r < 1.0))
                fail("key \"r_grid\" entries must lie in (0, 1) (r = " + fmt17(r) + ")");
    }
    if (!c.wstar.empty()) {
        int n = c.n_values.empty() ? 0 : c.n_values[0];
        if (static_cast<int>(c.wstar.size()) != n)
            fail("key \"wstar\" must have exactly n entries");
        else {
            double nrm = 0.0;
            for (double v : c.wstar) nrm += v * v;
            if (std::fabs(std::sqrt(nrm) - 1.0) > 1e-9)
                fail("key \"wstar\" must be a unit vector");
        }
    }
}

/* ---- shared run plumbing --------------------------------------------- */

template <typename Job>
void run_jobs(int count, Job&& job) {
    const int workers = worker_count(count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < count;) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

json knobs_json(const bounds::Knobs& k) {
    json out = json::object();
    for (const auto& [name, field] : knob_fields()) out[name] = k.*field;
    return out;
}

json config_json(const ExperimentConfig& c) {
    json out = json::object();
    out["command"] = command_name(c.command);
    out["family"] = family_name(c.family);
    out["s"] = c.s_values;
    out["n"] = c.n_values;
    out["seeds"] = c.seeds;
    out["n_mc"] = c.n_mc;
    out["knobs"] = knobs_json(c.knobs);
    out["out"] = c.out_dir;
    if (c.command == Command::run_al) {
        out["eps"] = c.eps;
        out["delta"] = c.delta;
        out["eta"] = c.eta;
        out["flip_strategy"] = c.flip_strategy == learners::FlipStrategy::uniform
                                   ? "uniform"
                                   : "boundary-proximal";
        out["noise_model"] =
            c.noise_model == bounds::Model::adversarial ? "adversarial" : "realizable";
        out["run_passive"] = c.run_passive;
        out["wstar"] = c.wstar;
    }
    if (c.command == Command::run_baum) {
        out["eps"] = c.eps;
        out["delta"] = c.delta;
        out["angle_degrees"] = c.angle_degrees;
    }
    if (c.command == Command::estimate_coefficient) {
        out["wstar"] = c.wstar;
        out["r_grid"] = c.r_grid;
    }
    return out;
}

struct Tally {
    int pass = 0, fail = 0, inconclusive = 0;

    void add(verify::Verdict v) {
        if (v == verify::Verdict::Pass) ++pass;
        else if (v == verify::Verdict::Fail) ++fail;
        else ++inconclusive;
    }
    void add(const std::vector<verify::McReport>& reports) {
        for (const auto& r : reports) add(r.verdict);
    }
};

RunOutcome finish(const ExperimentConfig& c, const std::string& csv,
                  json summary, const Tally& tally, std::string detail) {
    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    const std::string csv_path = (fs::path(c.out_dir) / "report.csv").string();
    const std::string summary_path = (fs::path(c.out_dir) / "summary.json").string();

    summary["checks"] = {{"pass", tally.pass},
                         {"fail", tally.fail},
                         {"inconclusive", tally.inconclusive}};
    summary["ok"] = (tally.fail == 0);

    std::ofstream(csv_path) << csv;
    std::ofstream(summary_path) << summary.dump(2) << '\n';

    RunOutcome out;
    out.pass = tally.pass;
    out.fail = tally.fail;
    out.inconclusive = tally.inconclusive;
    out.exit_code = tally.fail == 0 ? 0 : 1;
    out.csv_path = csv_path;
    out.summary_path = summary_path;

    std::ostringstream line;
    line << command_name(c.command) << " | " << detail << " | pass=" << tally.pass
         << " inconclusive=" << tally.inconclusive << " fail=" << tally.fail << " | "
         << (tally.fail == 0 ? "OK" : "FAILED");
    out.verdict_line = line.str();
    std::printf("%s\n", out.verdict_line.c_str());
    return out;
}

/* ---- verify-geometry -------------------------------------------------- */

struct Cell {
    double s;
    int n;
};

std::vector<Cell> build_cells(const ExperimentConfig& c) {
    std::vector<Cell> cells;
    for (int n : c.n_values) {
        std::vector<double> ss = c.s_values;
        if (ss.empty())  // radial default grid, materialized per dimension
            ss = {-1e-9, -0.02, -1.0 / (2.0 * n + 3.0)};
        for (double s : ss) cells.push_back({s, n});
    }
    return cells;
}

std::vector<verify::McReport> radial_cell_reports(const ExperimentConfig& c,
                                                  const Cell& cell, std::uint64_t seed,
                                                  std::uint64_t index) {
    const bounds::SConcaveParams p(cell.s, cell.n);
    const densities::RadialND model = densities::make_radial_nd(cell.n, cell.s);
    const bounds::BandBounds bb = bounds::band_bounds(p);
    const std::vector<double> w = axis_vector(cell.n);
    auto cell_stream = [&](const char* suite) {
        return derive_stream(seed, {std::string("cell"), index, std::string(suite)});
    };
    std::vector<verify::McReport> reports;

    {
        std::vector<double> t_grid;
        for (int k = 1; k <= 8; ++k) t_grid.push_back(bb.d * k / 4.0);
        auto st = cell_stream("band");
        auto rs = verify::verify_band(p, model, w, t_grid, c.n_mc, st);
        reports.insert(reports.end(), rs.begin(), rs.end());
    }
    {
        auto st = cell_stream("halfspace");
        reports.push_back(
            verify::verify_halfspace(p, verify::AnyModel(model), w, c.n_mc, st));
    }
    for (double theta : {0.05, 0.2, 0.5, 1.0}) {
        auto st = cell_stream(("disagree-" + fmt17(theta)).c_str());
        reports.push_back(verify::verify_disagreement(
            p, model, w, rotated_axis(cell.n, theta), c.n_mc, st));
    }
    for (double angle : {0.1, 0.3}) {
        auto st = cell_stream(("outside-" + fmt17(angle)).c_str());
        reports.push_back(verify::verify_disagreement_outside_band(
            p, model, w, rotated_axis(cell.n, angle), c.knobs.c1, c.n_mc, st));
    }
    for (double frac : {0.5, 1.0}) {
        auto st = cell_stream(("variance-" + fmt17(frac)).c_str());
        reports.push_back(verify::verify_conditional_variance(
            p, model, w, rotated_axis(cell.n, 0.2), frac * bb.d,
            std::min<long long>(c.n_mc, kVarianceAccept), st));
    }
    {
        auto st = cell_stream("envelope");
        reports.push_back(verify::verify_density_envelope(p, model, 2000, st));
    }
    {
        auto st = cell_stream("tail");
        auto rs = verify::verify_tail(p, verify::AnyModel(model), {16.0, 24.0},
                                      kTailConstant, c.n_mc, st);
        reports.insert(reports.end(), rs.begin(), rs.end());
    }
    return reports;
}

// deterministic checks wrapped as reports: estimate = observed slack against
// a zero bound at machine-level tolerance, so the CSV schema stays uniform
verify::McReport slack_report(std::string id, double s, int n, std::string params,
                              double slack, double tol) {
    verify::McCore core{slack, 0.0, 0};
    return verify::make_report(std::move(id), s, n, std::move(params), core, tol,
                               verify::Direction::LE);
}

std::vector<verify::McReport> univariate_cell_reports(const ExperimentConfig& c,
                                                      const Cell& cell,
                                                      std::uint64_t seed,
                                                      std::uint64_t index) {
    const double s = cell.s;
    const bounds::SConcaveParams p(s, 1);
    std::vector<verify::McReport> reports;
    auto cell_stream = [&](const char* suite) {
        return derive_stream(seed, {std::string("cell"), index, std::string(suite)});
    };

    if (c.family == Family::pareto1d) {
        const densities::Pareto1D model = densities::make_pareto1d(s);
        // The one-sided polynomial tail has a closed form, so the MC
        // frequency is checked for equality against it rather than against
        // the isotropic cap (which this non-centered family is the
        // sharpness witness for, not an instance of).
        for (double t : {2.0, 5.0, 10.0}) {
            auto st = cell_stream(("tail-" + fmt17(t)).c_str());
            auto core = verify::mc_probability(
                verify::AnyModel(model),
                [t](const double* x) { return x[0] > t; }, c.n_mc, st);
            reports.push_back(verify::make_report("tail-closed-form", s, 1,
                                                  "t=" + fmt17(t), core, model.tail(t),
                                                  verify::Direction::EQ));
        }
        auto st = cell_stream("halfspace");
        reports.push_back(verify::verify_halfspace(p, verify::AnyModel(model), {1.0},
                                                   c.n_mc, st));
        return reports;
    }

    const densities::Symmetric1D model = densities::make_symmetric1d(s);
    {
        auto rs = verify::verify_univariate_bounds(s);
        reports.insert(reports.end(), rs.begin(), rs.end());
    }
    {
        auto st = cell_stream("halfspace");
        reports.push_back(verify::verify_halfspace(p, verify::AnyModel(model), {1.0},
                                                   c.n_mc, st));
    }
    {
        auto st = cell_stream("tail");
        auto rs = verify::verify_tail(p, verify::AnyModel(model), {16.0, 24.0},
                                      kTailConstant, c.n_mc, st);
        reports.insert(reports.end(), rs.begin(), rs.end());
    }
    {
        // gamma-concavity of the distribution function and s-concavity of the
        // density itself, on a symmetric quadrature grid
        std::vector<double> grid;
        for (int i = 0; i <= 160; ++i) grid.push_back(-4.0 + i * 0.05);
        auto cdf_rep = verify::check_gamma_concavity(
            [&](double x) { return model.cdf(x); }, s / (1.0 + s), grid);
        reports.push_back(slack_report("cdf-gamma-concavity", s, 1, "gamma=s/(1+s)",
                                       cdf_rep.worst_slack, 1e-9));
        auto pdf_rep = verify::check_gamma_concavity(
            [&](double x) { return model.density(x); }, s, grid);
        reports.push_back(
            slack_report("density-s-concavity", s, 1, "gamma=s", pdf_rep.worst_slack, 1e-9));
    }
    {
        // baseline-kernel moment identities, exact up to roundoff: moment
        // log-convexity (a), normalized geometric ratios (c), and the peak
        // times first-moment identity (d)
        const densities::BaselineHalfLine h{1.0, 1.0, s};
        const double z = -1.0 / s;
        double worst_a = 0.0, worst_c = 0.0;
        for (int k = 0; k <= 1; ++k) {
            if (!(z > k + 3.0)) continue;
            const double mk = densities::baseline_moment(h, k);
            const double mk1 = densities::baseline_moment(h, k + 1);
            const double mk2 = densities::baseline_moment(h, k + 2);
            worst_a = std::max(worst_a, (mk1 * mk1 - mk * mk2) / (mk1 * mk1));
            const double tk = mk / beta_fn(z - k - 1.0, k + 1.0);
            const double tk1 = mk1 / beta_fn(z - k - 2.0, k + 2.0);
            const double tk2 = mk2 / beta_fn(z - k - 3.0, k + 3.0);
            worst_c = std::max(worst_c, std::fabs(tk * tk2 - tk1 * tk1) / (tk1 * tk1));
        }
        reports.push_back(
            slack_report("moment-log-convexity", s, 1, "kernel=baseline", worst_a, 1e-9));
        reports.push_back(
            slack_report("moment-beta-ratio", s, 1, "kernel=baseline", worst_c, 1e-9));
        const double lhs = h.density(0.0) * densities::baseline_moment(h, 1);
        const double rhs = densities::baseline_moment(h, 0) *
                           densities::baseline_moment(h, 0) * (1.0 + s) /
                           (1.0 + 2.0 * s);
        reports.push_back(slack_report("moment-peak-product", s, 1, "kernel=baseline",
                                       std::fabs(lhs - rhs) / rhs, 1e-9));
    }
    return reports;
}

RunOutcome run_verify_geometry(const ExperimentConfig& c) {
    const std::vector<Cell> cells = build_cells(c);
    const std::uint64_t seed = c.seeds[0];
    std::vector<std::vector<verify::McReport>> per_cell(cells.size());
    std::vector<std::string> cell_errors(cells.size());

    run_jobs(static_cast<int>(cells.size()), [&](int i) {
        try {
            per_cell[static_cast<size_t>(i)] =
                c.family == Family::radial
                    ? radial_cell_reports(c, cells[static_cast<size_t>(i)], seed,
                                          static_cast<std::uint64_t>(i))
                    : univariate_cell_reports(c, cells[static_cast<size_t>(i)], seed,
                                              static_cast<std::uint64_t>(i));
        } catch (const std::exception& e) {
            cell_errors[static_cast<size_t>(i)] = e.what();
        }
    });

    Tally tally;
    std::vector<verify::McReport> all;
    json cells_json = json::array();
    for (size_t i = 0; i < cells.size(); ++i) {
        json cj = {{"s", cells[i].s}, {"n", cells[i].n}};
        if (!cell_errors[i].empty()) {
            cj["error"] = cell_errors[i];
            ++tally.fail;
        } else {
            Tally cell_tally;
            cell_tally.add(per_cell[i]);
            cj["reports"] = per_cell[i].size();
            cj["pass"] = cell_tally.pass;
            cj["fail"] = cell_tally.fail;
            cj["inconclusive"] = cell_tally.inconclusive;
            tally.pass += cell_tally.pass;
            tally.fail += cell_tally.fail;
            tally.inconclusive += cell_tally.inconclusive;
            all.insert(all.end(), per_cell[i].begin(), per_cell[i].end());
        }
        cells_json.push_back(std::move(cj));
    }

    json summary;
    summary["command"] = command_name(c.command);
    summary["config"] = config_json(c);
    summary["cells"] = std::move(cells_json);

    std::ostringstream detail;
    detail << "cells=" << cells.size() << " reports=" << all.size();
    return finish(c, verify::reports_csv(all), std::move(summary), tally, detail.str());
}

/* ---- run-al ----------------------------------------------------------- */

struct AlJob {
    learners::ALRunResult result;
    learners::ALRunResult passive;
    long long queries = 0, flips = 0;
    bool has_result = false, has_passive = false;
    std::string error;
};

RunOutcome run_al(const ExperimentConfig& c) {
    const double s = c.s_values[0];
    const int n = c.n_values[0];
    const bounds::SConcaveParams p(s, n);
    const densities::RadialND model = densities::make_radial_nd(n, s);
    const std::vector<double> wstar = c.wstar.empty() ? axis_vector(n) : c.wstar;
    const bool adversarial = c.noise_model == bounds::Model::adversarial;
    const auto sch = bounds::al_schedule(p, c.eps, c.delta, c.noise_model, c.knobs);

    std::vector<AlJob> jobs(c.seeds.size());
    run_jobs(static_cast<int>(c.seeds.size()), [&](int i) {
        AlJob& job = jobs[static_cast<size_t>(i)];
        const std::uint64_t seed = c.seeds[static_cast<size_t>(i)];
        try {
            auto stream = RngStream::root(seed).child("al");
            if (adversarial) {
                auto ostream = RngStream::root(seed).child("oracle");
                auto oracle = learners::LabelOracle::adversarial(wstar, c.eta,
                                                                 c.flip_strategy, ostream);
                job.result = learners::margin_al_adversarial(p, model, oracle, c.eps,
                                                             c.delta, c.knobs, stream);
                job.queries = oracle.queries();
                job.flips = oracle.flips();
            } else {
                auto oracle = learners::LabelOracle::realizable(wstar);
                job.result = learners::margin_al_realizable(p, model, oracle, c.eps,
                                                            c.delta, c.knobs, stream);
                job.queries = oracle.queries();
            }
            job.has_result = true;
            if (c.run_passive) {
                auto pstream = RngStream::root(seed).child("passive");
                auto poracle = learners::LabelOracle::realizable(wstar);
                job.passive = learners::passive_baseline(p, model, poracle, c.eps,
                                                         c.delta, c.knobs, pstream);
                job.has_passive = true;
            }
        } catch (const std::exception& e) {
            job.error = e.what();
        }
    });

    std::string csv =
        "learner,seed,round,labels,cumulative_labels,band_width,angle,error,error_se\n";
    Tally tally;
    json jobs_json = json::array();
    long long label_sum = 0;
    for (size_t i = 0; i < jobs.size(); ++i) {
        const AlJob& job = jobs[i];
        const std::uint64_t seed = c.seeds[i];
        json jj = {{"seed", seed}};
        if (!job.error.empty()) {
            jj["error"] = job.error;
            ++tally.fail;
            jobs_json.push_back(std::move(jj));
            continue;
        }
        const learners::ALRunResult& r = job.result;
        long long cumulative = 0;
        for (size_t k = 0; k < r.round_labels.size(); ++k) {
            cumulative += r.round_labels[k];
            const bool final_round = (k + 1 == r.round_labels.size());
            // realizable round 1 draws an unfiltered batch; banded rounds
            // record the width that gated their sample
            std::string width;
            if (adversarial) width = fmt17(sch.b[k]);
            else if (k > 0) width = fmt17(sch.b[k]);
            csv += "al," + std::to_string(seed) + ',' + std::to_string(k + 1) + ',' +
                   std::to_string(r.round_labels[k]) + ',' + std::to_string(cumulative) +
                   ',' + width + ',' + fmt17(r.round_angle[k]);
            csv += final_round ? ',' + fmt17(r.error) + ',' + fmt17(r.error_se) + '\n'
                               : std::string(",,\n");
        }
        label_sum += r.total_labels;

        auto report = verify::make_report(
            "al-final-error", s, n, "seed=" + std::to_string(seed),
            verify::McCore{r.error, r.error_se, 100000}, c.eps, verify::Direction::LE);
        tally.add(report.verdict);
        jj["error"] = r.error;
        jj["error_se"] = r.error_se;
        jj["total_labels"] = r.total_labels;
        jj["rounds"] = r.round_labels.size();
        jj["small_norm_rounds"] = r.small_norm_rounds;
        jj["verdict"] = report.verdict == verify::Verdict::Pass ? "pass"
                        : report.verdict == verify::Verdict::Fail ? "fail"
                                                                  : "inconclusive";
        if (adversarial) {
            jj["queries"] = job.queries;
            jj["flips"] = job.flips;
            const bool budget_ok =
                static_cast<double>(job.flips) <= c.eta * static_cast<double>(job.queries);
            jj["noise_budget_ok"] = budget_ok;
            if (!budget_ok) ++tally.fail;
        }
        if (job.has_passive) {
            const learners::ALRunResult& pb = job.passive;
            csv += "passive," + std::to_string(seed) + ",1," +
                   std::to_string(pb.round_labels[0]) + ',' +
                   std::to_string(pb.total_labels) + ",," + fmt17(pb.round_angle[0]) +
                   ',' + fmt17(pb.error) + ',' + fmt17(pb.error_se) + '\n';
            jj["passive_labels"] = pb.total_labels;
            jj["passive_error"] = pb.error;
        }
        jobs_json.push_back(std::move(jj));
    }

    json summary;
    summary["command"] = command_name(c.command);
    summary["config"] = config_json(c);
    summary["schedule"] = {{"rounds", sch.T}, {"m", sch.m}, {"b", sch.b}};
    summary["passive_labels_bound"] =
        bounds::vc_sample_size(c.eps, c.delta, n, c.knobs.C_vc);
    summary["jobs"] = std::move(jobs_json);

    std::ostringstream detail;
    detail << "(n=" << n << ", s=" << fmt17(s) << ") seeds=" << c.seeds.size()
           << " labels(avg)=" << (c.seeds.empty() ? 0 : label_sum / (long long)c.seeds.size());
    return finish(c, csv, std::move(summary), tally, detail.str());
}

/* ---- run-baum ---------------------------------------------------------- */

RunOutcome run_baum(const ExperimentConfig& c) {
    const double s = c.s_values[0];
    const int n = c.n_values[0];
    const bounds::SConcaveParams p(s, n);
    const densities::RadialND model = densities::make_radial_nd(n, s);
    const std::vector<double> u = axis_vector(n);
    const std::vector<double> v =
        rotated_axis(n, c.angle_degrees * std::acos(-1.0) / 180.0);

    struct BaumJob {
        learners::BaumResult result;
        bool ok = false;
        std::string error;
    };
    std::vector<BaumJob> jobs(c.seeds.size());
    run_jobs(static_cast<int>(c.seeds.size()), [&](int i) {
        BaumJob& job = jobs[static_cast<size_t>(i)];
        try {
            auto stream = RngStream::root(c.seeds[static_cast<size_t>(i)]).child("baum");
            job.result =
                learners::baum_learn(p, model, u, v, c.eps, c.delta, c.knobs, stream);
            job.ok = true;
        } catch (const std::exception& e) {
            job.error = e.what();
        }
    });

    std::string csv =
        "seed,branch,positives,m1,m2,m3,total_labels,gate_ok,lifted_ok,composite_ok,"
        "error,error_se\n";
    Tally tally;
    json jobs_json = json::array();
    for (size_t i = 0; i < jobs.size(); ++i) {
        const BaumJob& job = jobs[i];
        const std::uint64_t seed = c.seeds[i];
        json jj = {{"seed", seed}};
        if (!job.ok) {
            jj["error"] = job.error;
            ++tally.fail;
            jobs_json.push_back(std::move(jj));
            continue;
        }
        const learners::BaumResult& r = job.result;
        csv += std::to_string(seed);
        csv += r.all_negative_branch ? ",all-negative," : ",full,";
        csv += std::to_string(r.positives) + ',' + std::to_string(r.sizes.m1) + ',' +
               std::to_string(r.sizes.m2) + ',' + std::to_string(r.sizes.m3) + ',' +
               std::to_string(r.total_labels) + ',' +
               (r.gate_contains_positives ? '1' : '0') + ',' +
               (r.lifted_consistent ? '1' : '0') + ',' +
               (r.composite_law_ok ? '1' : '0') + ',' + fmt17(r.error) + ',' +
               fmt17(r.error_se) + '\n';

        auto report = verify::make_report(
            "baum-final-error", s, n, "seed=" + std::to_string(seed),
            verify::McCore{r.error, r.error_se, 100000}, c.eps, verify::Direction::LE);
        tally.add(report.verdict);
        const bool audits =
            r.gate_contains_positives && r.lifted_consistent && r.composite_law_ok;
        if (!audits) ++tally.fail;
        jj["branch"] = r.all_negative_branch ? "all-negative" : "full";
        jj["positives"] = r.positives;
        jj["total_labels"] = r.total_labels;
        jj["error"] = r.error;
        jj["error_se"] = r.error_se;
        jj["audits_ok"] = audits;
        jj["verdict"] = report.verdict == verify::Verdict::Pass ? "pass"
                        : report.verdict == verify::Verdict::Fail ? "fail"
                                                                  : "inconclusive";
        jobs_json.push_back(std::move(jj));
    }

    json summary;
    summary["command"] = command_name(c.command);
    summary["config"] = config_json(c);
    summary["targets"] = {{"u", u}, {"v", v}};
    summary["jobs"] = std::move(jobs_json);

    std::ostringstream detail;
    detail << "(n=" << n << ", s=" << fmt17(s) << ") seeds=" << c.seeds.size()
           << " angle=" << c.angle_degrees;
    return finish(c, csv, std::move(summary), tally, detail.str());
}

/* ---- estimate-coefficient ---------------------------------------------- */

RunOutcome run_estimate_coefficient(const ExperimentConfig& c) {
    const double s = c.s_values[0];
    const int n = c.n_values[0];
    const bounds::SConcaveParams p(s, n);
    const densities::RadialND model = densities::make_radial_nd(n, s);
    const std::vector<double> wstar = c.wstar.empty() ? axis_vector(n) : c.wstar;

    struct CoefJob {
        learners::CoefficientEstimate estimate;
        bool ok = false;
        std::string error;
    };
    std::vector<CoefJob> jobs(c.seeds.size());
    run_jobs(static_cast<int>(c.seeds.size()), [&](int i) {
        CoefJob& job = jobs[static_cast<size_t>(i)];
        try {
            auto stream = RngStream::root(c.seeds[static_cast<size_t>(i)]).child("coef");
            const int n_mc = static_cast<int>(std::min<long long>(c.n_mc, 1000000000));
            job.estimate = learners::estimate_disagreement_coefficient(
                p, model, wstar, c.r_grid, n_mc, stream);
            job.ok = true;
        } catch (const std::exception& e) {
            job.error = e.what();
        }
    });

    std::string csv = "seed,r,prob,capacity,std_error\n";
    Tally tally;
    json jobs_json = json::array();
    for (size_t i = 0; i < jobs.size(); ++i) {
        const CoefJob& job = jobs[i];
        const std::uint64_t seed = c.seeds[i];
        json jj = {{"seed", seed}};
        if (!job.ok) {
            jj["error"] = job.error;
            ++tally.fail;
            jobs_json.push_back(std::move(jj));
            continue;
        }
        for (const auto& row : job.estimate.rows)
            csv += std::to_string(seed) + ',' + fmt17(row.r) + ',' + fmt17(row.prob) +
                   ',' + fmt17(row.capacity) + ',' + fmt17(row.std_error) + '\n';
        tally.add(job.estimate.report.verdict);
        jj["theta_hat"] = job.estimate.theta_hat;
        jj["bound"] = job.estimate.report.bound;
        jj["verdict"] = job.estimate.report.verdict == verify::Verdict::Pass ? "pass"
                        : job.estimate.report.verdict == verify::Verdict::Fail
                            ? "fail"
                            : "inconclusive";
        jobs_json.push_back(std::move(jj));
    }

    json summary;
    summary["command"] = command_name(c.command);
    summary["config"] = config_json(c);
    summary["jobs"] = std::move(jobs_json);

    std::ostringstream detail;
    detail << "(n=" << n << ", s=" << fmt17(s) << ") seeds=" << c.seeds.size()
           << " radii=" << c.r_grid.size();
    return finish(c, csv, std::move(summary), tally, detail.str());
}

}  // namespace

/* ---- public API --------------------------------------------------------- */

ConfigResult load_config(const std::string& text) {
    ConfigResult out;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        out.violations.push_back(std::string("parse error: ") + e.what());
        return out;
    }
    if (!doc.is_object()) {
        out.violations.push_back("the configuration document must be a JSON object");
        return out;
    }
    ExperimentConfig& c = out.config;
    Parser parser{doc, c, out.violations};

    bool command_known = false;
    std::string command_text;
    if (!parser.read_string("command", command_text)) {
        if (!doc.contains("command"))
            out.violations.push_back("missing required key \"command\"");
    } else {
        static const std::map<std::string, Command> names = {
            {"verify-geometry", Command::verify_geometry},
            {"run-al", Command::run_al},
            {"run-baum", Command::run_baum},
            {"estimate-coefficient", Command::estimate_coefficient},
        };
        auto it = names.find(command_text);
        if (it == names.end())
            out.violations.push_back("unknown command \"" + command_text + "\"");
        else {
            c.command = it->second;
            command_known = true;
        }
    }

    for (const auto& item : doc.items()) {
        const std::string& key = item.key();
        if (!key_known_anywhere(key)) {
            out.violations.push_back("unknown key \"" + key + "\"");
        } else if (command_known && !common_keys().count(key) &&
                   !command_keys(c.command).count(key)) {
            out.violations.push_back("key \"" + key + "\" does not apply to command \"" +
                                     command_name(c.command) + "\"");
        }
    }

    std::string family_text;
    if (parser.read_string("family", family_text)) {
        static const std::map<std::string, Family> names = {
            {"pareto1d", Family::pareto1d},
            {"symmetric1d", Family::symmetric1d},
            {"radial", Family::radial},
        };
        auto it = names.find(family_text);
        if (it == names.end())
            out.violations.push_back("unknown family \"" + family_text + "\"");
        else
            c.family = it->second;
    }

    const bool had_s = parser.read_number_list("s", c.s_values);
    const bool had_n = parser.read_int_list("n", c.n_values);

    if (doc.contains("seeds")) {
        const json& v = doc.at("seeds");
        if (!v.is_array()) {
            out.violations.push_back("key \"seeds\" must be an array of integers");
        } else {
            std::vector<std::uint64_t> seeds;
            bool ok = true;
            for (const json& e : v) {
                if (!e.is_number_integer() || e.get<long long>() < 0) {
                    out.violations.push_back(
                        "key \"seeds\" must contain only non-negative integers");
                    ok = false;
                    break;
                }
                seeds.push_back(e.get<std::uint64_t>());
            }
            if (ok) c.seeds = std::move(seeds);
        }
    }

    if (doc.contains("n_mc")) {
        const json& v = doc.at("n_mc");
        if (!v.is_number_integer())
            out.violations.push_back("key \"n_mc\" must be an integer");
        else
            c.n_mc = v.get<long long>();
    }

    parser.read_double("eps", c.eps);
    parser.read_double("delta", c.delta);
    const bool had_eta = parser.read_double("eta", c.eta);
    parser.read_double("angle_degrees", c.angle_degrees);
    parser.read_bool("run_passive", c.run_passive);
    parser.read_string("out", c.out_dir);
    parser.read_number_list("wstar", c.wstar);
    parser.read_number_list("r_grid", c.r_grid);

    std::string strategy_text;
    if (parser.read_string("flip_strategy", strategy_text)) {
        if (strategy_text == "boundary-proximal")
            c.flip_strategy = learners::FlipStrategy::boundary_proximal;
        else if (strategy_text == "uniform")
            c.flip_strategy = learners::FlipStrategy::uniform;
        else
            out.violations.push_back("unknown flip_strategy \"" + strategy_text + "\"");
    }

    std::string model_text;
    if (parser.read_string("noise_model", model_text)) {
        if (model_text == "realizable")
            c.noise_model = bounds::Model::realizable;
        else if (model_text == "adversarial")
            c.noise_model = bounds::Model::adversarial;
        else
            out.violations.push_back("unknown noise_model \"" + model_text + "\"");
    } else if (had_eta && c.eta > 0.0) {
        c.noise_model = bounds::Model::adversarial;
    }

    if (doc.contains("knobs")) {
        const json& v = doc.at("knobs");
        if (!v.is_object()) {
            out.violations.push_back("key \"knobs\" must be an object");
        } else {
            for (const auto& item : v.items()) {
                auto it = knob_fields().find(item.key());
                if (it == knob_fields().end()) {
                    out.violations.push_back("unknown knob \"" + item.key() + "\"");
                    continue;
                }
                if (!item.value().is_number()) {
                    out.violations.push_back("knob \"" + item.key() +
                                             "\" must be a number");
                    continue;
                }
                const double value = item.value().get<double>();
                if (!(value > 0.0) || !std::isfinite(value)) {
                    out.violations.push_back("knob \"" + item.key() +
                                             "\" must be a positive finite number");
                    continue;
                }
                c.knobs.*(it->second) = value;
            }
        }
    }

    if (!command_known) return out;  // nothing else can be validated coherently

    fill_default_grids(c, had_s, had_n);
    validate(c, out.violations);
    return out;
}

RunOutcome run(const ExperimentConfig& config) {
    switch (config.command) {
        case Command::verify_geometry: return run_verify_geometry(config);
        case Command::run_al: return run_al(config);
        case Command::run_baum: return run_baum(config);
        case Command::estimate_coefficient: return run_estimate_coefficient(config);
    }
    throw RegimeError("run: unknown command");
}

RngStream derive_stream(std::uint64_t root, const std::vector<PathLabel>& path) {
    RngStream stream = RngStream::root(root);
    for (const PathLabel& label : path) {
        if (std::holds_alternative<std::uint64_t>(label))
            stream = stream.child(std::get<std::uint64_t>(label));
        else
            stream = stream.child(std::string_view(std::get<std::string>(label)));
    }
    return stream;
}

int worker_count(int jobs) {
    if (jobs <= 1) return 1;
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("SCONCAVE_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && parsed >= 1)
            cap = static_cast<int>(std::min(parsed, 4096L));
    }
    return std::min(jobs, cap);
}

}  // namespace sconcave::harness
