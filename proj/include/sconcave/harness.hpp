#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sconcave/bounds.hpp"
#include "sconcave/learners.hpp"
#include "sconcave/rng.hpp"
#include "sconcave/verify.hpp"

namespace sconcave::harness {

enum class Command { verify_geometry, run_al, run_baum, estimate_coefficient };
enum class Family { pareto1d, symmetric1d, radial };

/* One experiment, fully resolved: every field below is echoed into
   summary.json so results are self-describing.  Defaults (filled by
   load_config when a key is absent):

     family          "radial"
     s               verify-geometry: per-n grid {-1e-9, -0.02, -1/(2n+3)}
                     (radial), {-0.2, -0.5} (pareto1d), {-0.05, -0.1, -0.2}
                     (symmetric1d); other commands: -0.02
     n               {2, 3, 5} for verify-geometry over the radial family,
                     else 3 (1 for the one-dimensional families)
     seeds           [1]
     n_mc            200000
     eps             0.1       delta  0.05      eta  0.0
     flip_strategy   "boundary-proximal"
     noise_model     "adversarial" when eta > 0, else "realizable"
     run_passive     false
     wstar           first coordinate axis
     angle_degrees   90
     r_grid          [0.05, 0.1, 0.2, 0.4]
     knobs           all constants 1.0
     out             "."

   "s" and "n" accept a number or an array; arrays are only meaningful for
   verify-geometry (learner commands run a single cell).  An empty s_values /
   n_values pair means the per-family default grid above. */
struct ExperimentConfig {
    Command command = Command::verify_geometry;
    Family family = Family::radial;
    std::vector<double> s_values;  // empty = default grid for the command
    std::vector<int> n_values;     // empty = default grid for the command
    std::vector<std::uint64_t> seeds = {1};
    long long n_mc = 200000;

    double eps = 0.1;
    double delta = 0.05;
    double eta = 0.0;
    learners::FlipStrategy flip_strategy = learners::FlipStrategy::boundary_proximal;
    bounds::Model noise_model = bounds::Model::realizable;
    bool run_passive = false;
    std::vector<double> wstar;  // empty = first coordinate axis
    double angle_degrees = 90.0;
    std::vector<double> r_grid = {0.05, 0.1, 0.2, 0.4};

    bounds::Knobs knobs;
    std::string out_dir = ".";
};

/* Parse + validate an experiment document.  Violations are collected, not
   first-fail: a malformed value in one key does not hide problems in
   another.  Unknown keys (top level or inside "knobs") are violations that
   name the key.  A JSON parse failure is reported as a single violation
   carrying the parser's byte location. */
struct ConfigResult {
    ExperimentConfig config;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};
ConfigResult load_config(const std::string& text);

/* Executes a valid config: dispatches on command, writes report.csv and
   summary.json under out_dir, prints a one-line verdict table, and returns
   the tallies.  exit_code is 0 iff no check failed; inconclusive checks do
   not fail the run.  Numeric CSV cells carry 17 significant digits with '.'
   as the decimal mark, so a rerun with identical (config, seeds) reproduces
   both artifacts byte for byte.  Independent jobs (seeds, or grid cells for
   verify-geometry) run on a worker pool capped by SCONCAVE_THREADS; results
   are merged in job order, so the thread count never changes the output. */
struct RunOutcome {
    int exit_code = 1;
    int pass = 0;
    int fail = 0;
    int inconclusive = 0;
    std::string verdict_line;
    std::string csv_path;
    std::string summary_path;
};
RunOutcome run(const ExperimentConfig& config);

/* Pure derivation of a named RNG stream: the empty path is the root stream
   itself, and each label (string or index) applies one child split.  Distinct
   paths give streams that are independent for all practical purposes (the
   split is a counter-based hash). */
using PathLabel = std::variant<std::uint64_t, std::string>;
RngStream derive_stream(std::uint64_t root, const std::vector<PathLabel>& path);

// worker cap for a pool over `jobs` independent jobs: hardware concurrency,
// overridden by SCONCAVE_THREADS when set (minimum 1), never above jobs
int worker_count(int jobs);

}  // namespace sconcave::harness
