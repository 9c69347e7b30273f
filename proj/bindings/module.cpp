#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "sconcave/bounds.hpp"
#include "sconcave/densities.hpp"
#include "sconcave/harness.hpp"
#include "sconcave/learners.hpp"
#include "sconcave/rng.hpp"
#include "sconcave/verify.hpp"

namespace py = pybind11;
using namespace sconcave;

namespace {

py::array_t<double> to_array_1d(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_array_2d(const std::vector<double>& v, int rows, int cols) {
    py::array_t<double> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "s-concave distribution geometry: bounds, samplers, Monte Carlo "
              "verification, and active-learning experiments";

    /* ---- rng ---- */
    py::class_<RngStream>(m, "RngStream")
        .def_static("root", &RngStream::root, py::arg("seed"))
        .def("child",
             static_cast<RngStream (RngStream::*)(std::string_view) const>(
                 &RngStream::child),
             py::arg("label"))
        .def("child",
             static_cast<RngStream (RngStream::*)(std::uint64_t) const>(
                 &RngStream::child),
             py::arg("index"))
        .def("next_u64", &RngStream::next_u64)
        .def("next_double", &RngStream::next_double)
        .def("next_gaussian", &RngStream::next_gaussian)
        .def_property_readonly("key", &RngStream::key);

    /* ---- bounds ---- */
    py::class_<bounds::SConcaveParams>(m, "SConcaveParams")
        .def(py::init<double, int>(), py::arg("s"), py::arg("n"))
        .def_readonly("s", &bounds::SConcaveParams::s)
        .def_readonly("n", &bounds::SConcaveParams::n)
        .def_readonly("geometry_valid", &bounds::SConcaveParams::geometry_valid)
        .def_readonly("second_moment_1d", &bounds::SConcaveParams::second_moment_1d);

    py::class_<bounds::Knobs>(m, "Knobs")
        .def(py::init<>())
        .def_readwrite("c_f1", &bounds::Knobs::c_f1)
        .def_readwrite("c1", &bounds::Knobs::c1)
        .def_readwrite("C0", &bounds::Knobs::C0)
        .def_readwrite("c_theta", &bounds::Knobs::c_theta)
        .def_readwrite("c_err", &bounds::Knobs::c_err)
        .def_readwrite("c_b", &bounds::Knobs::c_b)
        .def_readwrite("c_tau", &bounds::Knobs::c_tau)
        .def_readwrite("c_r", &bounds::Knobs::c_r)
        .def_readwrite("c_kappa", &bounds::Knobs::c_kappa)
        .def_readwrite("c_m", &bounds::Knobs::c_m)
        .def_readwrite("c0", &bounds::Knobs::c0)
        .def_readwrite("C_vc", &bounds::Knobs::C_vc);

    py::class_<bounds::BandBounds>(m, "BandBounds")
        .def_readonly("f2", &bounds::BandBounds::f2)
        .def_readonly("f3", &bounds::BandBounds::f3)
        .def_readonly("d", &bounds::BandBounds::d);

    py::class_<bounds::GeometryBounds>(m, "GeometryBounds")
        .def_readonly("f1", &bounds::GeometryBounds::f1)
        .def_readonly("f2", &bounds::GeometryBounds::f2)
        .def_readonly("f3", &bounds::GeometryBounds::f3)
        .def_readonly("f4", &bounds::GeometryBounds::f4)
        .def_readonly("f5", &bounds::GeometryBounds::f5)
        .def_readonly("d", &bounds::GeometryBounds::d)
        .def_readonly("beta1", &bounds::GeometryBounds::beta1)
        .def_readonly("beta2", &bounds::GeometryBounds::beta2)
        .def_readonly("K", &bounds::GeometryBounds::K)
        .def_readonly("gamma_marginal", &bounds::GeometryBounds::gamma_marginal);

    py::enum_<bounds::Model>(m, "Model")
        .value("realizable", bounds::Model::realizable)
        .value("adversarial", bounds::Model::adversarial);

    py::class_<bounds::ALSchedule>(m, "ALSchedule")
        .def_readonly("T", &bounds::ALSchedule::T)
        .def_readonly("model", &bounds::ALSchedule::model)
        .def_readonly("b", &bounds::ALSchedule::b)
        .def_readonly("tau", &bounds::ALSchedule::tau)
        .def_readonly("r", &bounds::ALSchedule::r)
        .def_readonly("kappa", &bounds::ALSchedule::kappa)
        .def_readonly("m", &bounds::ALSchedule::m);

    py::class_<bounds::BaumSizes>(m, "BaumSizes")
        .def_readonly("m1", &bounds::BaumSizes::m1)
        .def_readonly("m2", &bounds::BaumSizes::m2)
        .def_readonly("m3", &bounds::BaumSizes::m3);

    m.def("band_bounds", &bounds::band_bounds, py::arg("params"));
    m.def("geometry_bounds", &bounds::geometry_bounds, py::arg("params"),
          py::arg("knobs") = bounds::Knobs{});
    m.def("disagreement_lower_f1", &bounds::disagreement_lower_f1, py::arg("params"),
          py::arg("c") = 1.0);
    m.def("marginal_gamma", &bounds::marginal_gamma, py::arg("s"), py::arg("m"));
    m.def("halfspace_mass_lower", &bounds::halfspace_mass_lower, py::arg("s"));
    m.def("tail_bound", &bounds::tail_bound, py::arg("params"), py::arg("t"),
          py::arg("c"));
    m.def("disagreement_coefficient_bound", &bounds::disagreement_coefficient_bound,
          py::arg("params"), py::arg("eps"), py::arg("knobs") = bounds::Knobs{});
    m.def("al_schedule", &bounds::al_schedule, py::arg("params"), py::arg("eps"),
          py::arg("delta"), py::arg("model"), py::arg("knobs") = bounds::Knobs{});
    m.def("vc_sample_size", &bounds::vc_sample_size, py::arg("eps"), py::arg("delta"),
          py::arg("vcdim"), py::arg("C") = 1.0);
    m.def("baum_sizes", &bounds::baum_sizes, py::arg("eps"), py::arg("delta"),
          py::arg("n"), py::arg("K"), py::arg("C") = 1.0);
    m.def("packing_lower_bound", &bounds::packing_lower_bound, py::arg("params"),
          py::arg("eps"), py::arg("c") = 1.0);

    /* ---- densities ---- */
    py::class_<densities::Pareto1D>(m, "Pareto1D")
        .def_readonly("s", &densities::Pareto1D::s)
        .def("density", &densities::Pareto1D::density, py::arg("x"))
        .def("tail", &densities::Pareto1D::tail, py::arg("t"))
        .def("cdf", &densities::Pareto1D::cdf, py::arg("x"))
        .def("quantile", &densities::Pareto1D::quantile, py::arg("u"))
        .def("mean", &densities::Pareto1D::mean);
    m.def("make_pareto1d", &densities::make_pareto1d, py::arg("s"));

    py::class_<densities::Symmetric1D>(m, "Symmetric1D")
        .def_readonly("s", &densities::Symmetric1D::s)
        .def("density", &densities::Symmetric1D::density, py::arg("x"))
        .def("cdf", &densities::Symmetric1D::cdf, py::arg("x"))
        .def("quantile", &densities::Symmetric1D::quantile, py::arg("u"));
    m.def("make_symmetric1d", &densities::make_symmetric1d, py::arg("s"));

    py::class_<densities::RadialND>(m, "RadialND")
        .def_readonly("n", &densities::RadialND::n)
        .def_readonly("s", &densities::RadialND::s)
        .def("density",
             [](const densities::RadialND& model, const std::vector<double>& x) {
                 if (static_cast<int>(x.size()) != model.n)
                     throw py::value_error("point has wrong dimension");
                 return model.density(x.data());
             },
             py::arg("x"))
        .def("density_at_radius", &densities::RadialND::density_at_radius, py::arg("r"))
        .def("radial_pdf", &densities::RadialND::radial_pdf, py::arg("r"))
        .def("radial_cdf", &densities::RadialND::radial_cdf, py::arg("r"))
        .def("radial_quantile", &densities::RadialND::radial_quantile, py::arg("p"));
    m.def("make_radial_nd", &densities::make_radial_nd, py::arg("n"), py::arg("s"));

    m.def("sample",
          [](const densities::Pareto1D& model, int count, RngStream& stream) {
              return to_array_1d(densities::sample(model, count, stream));
          },
          py::arg("model"), py::arg("count"), py::arg("stream"));
    m.def("sample",
          [](const densities::Symmetric1D& model, int count, RngStream& stream) {
              return to_array_1d(densities::sample(model, count, stream));
          },
          py::arg("model"), py::arg("count"), py::arg("stream"));
    m.def("sample",
          [](const densities::RadialND& model, int count, RngStream& stream) {
              return to_array_2d(densities::sample(model, count, stream), count, model.n);
          },
          py::arg("model"), py::arg("count"), py::arg("stream"));
    m.def("unit_vector",
          [](int n, RngStream& stream) {
              return to_array_1d(densities::unit_vector(n, stream));
          },
          py::arg("n"), py::arg("stream"));

    /* ---- verify ---- */
    py::enum_<verify::Direction>(m, "Direction")
        .value("LE", verify::Direction::LE)
        .value("GE", verify::Direction::GE)
        .value("EQ", verify::Direction::EQ);
    py::enum_<verify::Verdict>(m, "Verdict")
        .value("Pass", verify::Verdict::Pass)
        .value("Fail", verify::Verdict::Fail)
        .value("Inconclusive", verify::Verdict::Inconclusive);

    py::class_<verify::McReport>(m, "McReport")
        .def_readonly("theorem_id", &verify::McReport::theorem_id)
        .def_readonly("s", &verify::McReport::s)
        .def_readonly("n", &verify::McReport::n)
        .def_readonly("params", &verify::McReport::params)
        .def_readonly("estimate", &verify::McReport::estimate)
        .def_readonly("std_error", &verify::McReport::std_error)
        .def_readonly("n_samples", &verify::McReport::n_samples)
        .def_readonly("bound", &verify::McReport::bound)
        .def_readonly("direction", &verify::McReport::direction)
        .def_readonly("verdict", &verify::McReport::verdict)
        .def_readonly("z_margin", &verify::McReport::z_margin);

    m.def("verify_band", &verify::verify_band, py::arg("params"), py::arg("model"),
          py::arg("w"), py::arg("t_grid"), py::arg("n"), py::arg("stream"));
    m.def("verify_halfspace", &verify::verify_halfspace, py::arg("params"),
          py::arg("model"), py::arg("w"), py::arg("n"), py::arg("stream"));
    m.def("verify_disagreement", &verify::verify_disagreement, py::arg("params"),
          py::arg("model"), py::arg("u"), py::arg("v"), py::arg("n"), py::arg("stream"));
    m.def("verify_tail", &verify::verify_tail, py::arg("params"), py::arg("model"),
          py::arg("t_grid"), py::arg("c_knob"), py::arg("n"), py::arg("stream"));
    m.def("verify_density_envelope", &verify::verify_density_envelope,
          py::arg("params"), py::arg("model"), py::arg("n_points"), py::arg("stream"));
    m.def("verify_univariate_bounds", &verify::verify_univariate_bounds, py::arg("s"));
    m.def("reports_csv", &verify::reports_csv, py::arg("reports"));

    /* ---- learners ---- */
    py::enum_<learners::FlipStrategy>(m, "FlipStrategy")
        .value("uniform", learners::FlipStrategy::uniform)
        .value("boundary_proximal", learners::FlipStrategy::boundary_proximal);

    py::class_<learners::LabelOracle>(m, "LabelOracle")
        .def_static("realizable", &learners::LabelOracle::realizable, py::arg("wstar"))
        .def_static("adversarial", &learners::LabelOracle::adversarial,
                    py::arg("wstar"), py::arg("eta"), py::arg("strategy"),
                    py::arg("stream"))
        .def("query",
             [](learners::LabelOracle& oracle, const std::vector<double>& x) {
                 if (x.size() != oracle.target().size())
                     throw py::value_error("point has wrong dimension");
                 return oracle.query(x.data());
             },
             py::arg("x"))
        .def_property_readonly("queries", &learners::LabelOracle::queries)
        .def_property_readonly("flips", &learners::LabelOracle::flips);

    py::class_<learners::ALRunResult>(m, "ALRunResult")
        .def_readonly("final_w", &learners::ALRunResult::final_w)
        .def_readonly("round_labels", &learners::ALRunResult::round_labels)
        .def_readonly("total_labels", &learners::ALRunResult::total_labels)
        .def_readonly("error", &learners::ALRunResult::error)
        .def_readonly("error_se", &learners::ALRunResult::error_se)
        .def_readonly("round_angle", &learners::ALRunResult::round_angle)
        .def_readonly("round_w", &learners::ALRunResult::round_w)
        .def_readonly("small_norm_rounds", &learners::ALRunResult::small_norm_rounds);

    m.def("margin_al_realizable", &learners::margin_al_realizable,
          py::arg("params"), py::arg("model"), py::arg("oracle"), py::arg("eps"),
          py::arg("delta"), py::arg("knobs"), py::arg("stream"),
          py::call_guard<py::gil_scoped_release>());
    m.def("margin_al_adversarial", &learners::margin_al_adversarial,
          py::arg("params"), py::arg("model"), py::arg("oracle"), py::arg("eps"),
          py::arg("delta"), py::arg("knobs"), py::arg("stream"),
          py::call_guard<py::gil_scoped_release>());
    m.def("passive_baseline", &learners::passive_baseline, py::arg("params"),
          py::arg("model"), py::arg("oracle"), py::arg("eps"), py::arg("delta"),
          py::arg("knobs"), py::arg("stream"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<learners::BaumHypothesis>(m, "BaumHypothesis")
        .def_readonly("n", &learners::BaumHypothesis::n)
        .def_readonly("all_negative", &learners::BaumHypothesis::all_negative)
        .def_readonly("gate", &learners::BaumHypothesis::gate)
        .def_readonly("quad", &learners::BaumHypothesis::quad)
        .def("predict",
             [](const learners::BaumHypothesis& h, const std::vector<double>& x) {
                 if (static_cast<int>(x.size()) != h.n)
                     throw py::value_error("point has wrong dimension");
                 return h.predict(x.data());
             },
             py::arg("x"));

    py::class_<learners::BaumResult>(m, "BaumResult")
        .def_readonly("h", &learners::BaumResult::h)
        .def_readonly("positives", &learners::BaumResult::positives)
        .def_readonly("all_negative_branch", &learners::BaumResult::all_negative_branch)
        .def_readonly("gate_contains_positives",
                      &learners::BaumResult::gate_contains_positives)
        .def_readonly("lifted_consistent", &learners::BaumResult::lifted_consistent)
        .def_readonly("composite_law_ok", &learners::BaumResult::composite_law_ok)
        .def_readonly("total_labels", &learners::BaumResult::total_labels)
        .def_readonly("error", &learners::BaumResult::error)
        .def_readonly("error_se", &learners::BaumResult::error_se);

    m.def("baum_learn", &learners::baum_learn, py::arg("params"), py::arg("model"),
          py::arg("u"), py::arg("v"), py::arg("eps"), py::arg("delta"),
          py::arg("knobs"), py::arg("stream"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<learners::CapacityRow>(m, "CapacityRow")
        .def_readonly("r", &learners::CapacityRow::r)
        .def_readonly("prob", &learners::CapacityRow::prob)
        .def_readonly("capacity", &learners::CapacityRow::capacity)
        .def_readonly("std_error", &learners::CapacityRow::std_error);

    py::class_<learners::CoefficientEstimate>(m, "CoefficientEstimate")
        .def_readonly("rows", &learners::CoefficientEstimate::rows)
        .def_readonly("theta_hat", &learners::CoefficientEstimate::theta_hat)
        .def_readonly("report", &learners::CoefficientEstimate::report);

    m.def("estimate_disagreement_coefficient",
          &learners::estimate_disagreement_coefficient, py::arg("params"),
          py::arg("model"), py::arg("wstar"), py::arg("r_grid"), py::arg("n_mc"),
          py::arg("stream"), py::call_guard<py::gil_scoped_release>());

    /* ---- harness ---- */
    py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("seeds", &harness::ExperimentConfig::seeds)
        .def_readwrite("n_mc", &harness::ExperimentConfig::n_mc)
        .def_readwrite("out_dir", &harness::ExperimentConfig::out_dir);

    py::class_<harness::ConfigResult>(m, "ConfigResult")
        .def_readonly("config", &harness::ConfigResult::config)
        .def_readonly("violations", &harness::ConfigResult::violations)
        .def("ok", &harness::ConfigResult::ok);

    py::class_<harness::RunOutcome>(m, "RunOutcome")
        .def_readonly("exit_code", &harness::RunOutcome::exit_code)
        .def_readonly("pass_count", &harness::RunOutcome::pass)
        .def_readonly("fail_count", &harness::RunOutcome::fail)
        .def_readonly("inconclusive_count", &harness::RunOutcome::inconclusive)
        .def_readonly("verdict_line", &harness::RunOutcome::verdict_line)
        .def_readonly("csv_path", &harness::RunOutcome::csv_path)
        .def_readonly("summary_path", &harness::RunOutcome::summary_path);

    m.def("load_config", &harness::load_config, py::arg("text"));
    m.def("run", &harness::run, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("worker_count", &harness::worker_count, py::arg("jobs"));
    m.def("derive_stream",
          [](std::uint64_t root, const std::vector<std::variant<std::uint64_t,
                                                                std::string>>& path) {
              return harness::derive_stream(root, path);
          },
          py::arg("root"), py::arg("path"));
}
