// Python bindings. Measures, observations and summaries cross the boundary as JSON text;
// the wrapper package turns them into Python objects.
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spikebayes/diagnostics.hpp"
#include "spikebayes/errors.hpp"
#include "spikebayes/experiment.hpp"
#include "spikebayes/io.hpp"

namespace py = pybind11;
using namespace spikebayes;
using nlohmann::json;

namespace {

DiscreteMeasure measure_arg(const std::string& text) { return measure_from_json(json::parse(text)); }

Observation data_or_default(const ExperimentConfig& cfg, const std::optional<Observation>& data) {
    return data ? *data : generate_scenario(cfg).data;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bayesian inversion for sparse spike measures";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", error.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<UnsupportedLaw>(m, "UnsupportedLaw", error.ptr());

    py::class_<ExperimentConfig>(m, "Config")
        .def_readonly("digest", &ExperimentConfig::digest)
        .def_readonly("seed", &ExperimentConfig::seed)
        .def_readonly("output_dir", &ExperimentConfig::output_dir)
        .def_property_readonly("kind", [](const ExperimentConfig& c) { return std::string(to_string(c.kind)); })
        .def_property_readonly("n_obs", [](const ExperimentConfig& c) { return c.forward->n_obs(); })
        .def("to_json", [](const ExperimentConfig& c) { return c.raw.dump(); });

    m.def(
        "load_config",
        [](const std::filesystem::path& path, std::optional<std::filesystem::path> output_dir,
           std::optional<std::uint64_t> seed) { return load_config(path, ConfigOverrides{output_dir, seed}); },
        py::arg("path"), py::arg("output_dir") = py::none(), py::arg("seed") = py::none());
    m.def(
        "parse_config", [](const std::string& text, const std::filesystem::path& base_dir) {
            return parse_config(json::parse(text), base_dir);
        },
        py::arg("text"), py::arg("base_dir") = std::filesystem::path{});
    m.def("run_experiment", &run_experiment, py::arg("config"), py::call_guard<py::gil_scoped_release>());

    m.def(
        "generate_scenario",
        [](const ExperimentConfig& cfg) { return scenario_to_json(generate_scenario(cfg), cfg.forward->output_field()).dump(); },
        py::arg("config"));
    m.def(
        "sample_prior",
        [](const ExperimentConfig& cfg, std::uint64_t seed) {
            Rng rng(seed);
            return measure_to_json(sample_prior(cfg.prior, rng)).dump();
        },
        py::arg("config"), py::arg("seed"));
    m.def(
        "log_prior_density",
        [](const ExperimentConfig& cfg, const std::string& u) { return log_prior_density(cfg.prior, measure_arg(u)); },
        py::arg("config"), py::arg("measure"));
    m.def(
        "forward", [](const ExperimentConfig& cfg, const std::string& u) { return (*cfg.forward)(measure_arg(u)); },
        py::arg("config"), py::arg("measure"));
    m.def(
        "log_likelihood",
        [](const ExperimentConfig& cfg, const std::string& u, std::optional<Observation> data) {
            return log_likelihood(make_posterior(cfg, data_or_default(cfg, data)), measure_arg(u));
        },
        py::arg("config"), py::arg("measure"), py::arg("data") = py::none());
    m.def(
        "log_posterior_unnorm",
        [](const ExperimentConfig& cfg, const std::string& u, std::optional<Observation> data) {
            return log_posterior_unnorm(make_posterior(cfg, data_or_default(cfg, data)), measure_arg(u));
        },
        py::arg("config"), py::arg("measure"), py::arg("data") = py::none());
    m.def(
        "estimate_evidence",
        [](const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed, std::optional<Observation> data) {
            const Posterior post = make_posterior(cfg, data_or_default(cfg, data));
            py::gil_scoped_release release;
            Rng rng(seed);
            const auto e = estimate_evidence(post, n, rng);
            return std::make_tuple(e.log_z, e.std_error);
        },
        py::arg("config"), py::arg("n"), py::arg("seed"), py::arg("data") = py::none());
    m.def(
        "hellinger",
        [](const ExperimentConfig& cfg, const Observation& z1, const Observation& z2, std::size_t n, std::uint64_t seed) {
            const Posterior p1 = make_posterior(cfg, z1);
            const Posterior p2 = p1.with_data(z2);
            py::gil_scoped_release release;
            return hellinger_to_json(hellinger(p1, p2, n, seed)).dump();
        },
        py::arg("config"), py::arg("data1"), py::arg("data2"), py::arg("n"), py::arg("seed"));
    m.def(
        "run_chain",
        [](const ExperimentConfig& cfg, std::optional<Observation> data, bool keep_records) {
            const Posterior post = make_posterior(cfg, data_or_default(cfg, data));
            std::vector<std::string> records;
            ChainSummary summary;
            {
                py::gil_scoped_release release;
                Rng rng = make_rng(cfg.sampler.seed, "chain-0");
                RecordSink sink;
                if (keep_records) sink = [&records](const ChainRecord& r) { records.push_back(record_to_json(r).dump()); };
                summary = run_chain(post, cfg.sampler, rng, sink);
            }
            return std::make_pair(summary_to_json(summary).dump(), records);
        },
        py::arg("config"), py::arg("data") = py::none(), py::arg("keep_records") = false);
    m.def(
        "charfun",
        [](const ExperimentConfig& cfg, std::function<double(double)> f, std::size_t n, std::uint64_t seed) {
            if (cfg.prior.domain().dim() != 1) throw InvalidArgument("charfun binding supports one-dimensional domains");
            const TestFunction tf = TestFunction::scalar([&f](std::span<const double> y) {
                py::gil_scoped_acquire acquire;
                return f(y[0]);
            });
            Rng rng(seed);
            const auto emp = empirical_charfun(cfg.prior, tf, n, rng);
            py::dict out;
            out["empirical"] = emp.value;
            out["se"] = emp.std_error;
            try {
                out["closed_form"] = poisson_charfun_closed_form(cfg.prior, tf);
            } catch (const UnsupportedLaw&) {
                out["closed_form"] = py::none();
            }
            return out;
        },
        py::arg("config"), py::arg("f"), py::arg("n"), py::arg("seed"));
}
