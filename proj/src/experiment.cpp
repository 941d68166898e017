#include "spikebayes/experiment.hpp"

#include <cmath>
#include <set>

#include "spikebayes/diagnostics.hpp"
#include "spikebayes/errors.hpp"
#include "spikebayes/io.hpp"

namespace spikebayes {

using nlohmann::json;

namespace {

// Object section with strict key checking; every error names the full key path.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

    bool has(const std::string& name) const { return j_.contains(name); }

    const json& at(const std::string& name) {
        used_.insert(name);
        if (!j_.contains(name)) throw ConfigError(key(name), "missing required key");
        return j_.at(name);
    }

    Section child(const std::string& name) { return Section(at(name), key(name)); }

    double number(const std::string& name) {
        const json& v = at(name);
        if (!v.is_number()) throw ConfigError(key(name), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& name, double fallback) { return has(name) ? number(name) : fallback; }

    std::size_t count(const std::string& name) {
        const json& v = at(name);
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(key(name), "expected a nonnegative integer");
        return v.get<std::size_t>();
    }
    std::size_t count(const std::string& name, std::size_t fallback) { return has(name) ? count(name) : fallback; }

    std::string text(const std::string& name) {
        const json& v = at(name);
        if (!v.is_string()) throw ConfigError(key(name), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& name, bool fallback) {
        if (!has(name)) return fallback;
        const json& v = at(name);
        if (!v.is_boolean()) throw ConfigError(key(name), "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& name) {
        const json& v = at(name);
        if (!v.is_array()) throw ConfigError(key(name), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(key(name), "expected an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& name) {
        const json& v = at(name);
        if (!v.is_array()) throw ConfigError(key(name), "expected an array of nonnegative integers");
        std::vector<std::size_t> out;
        for (const auto& x : v) {
            if (!x.is_number_integer() || x.get<long long>() < 0)
                throw ConfigError(key(name), "expected an array of nonnegative integers");
            out.push_back(x.get<std::size_t>());
        }
        return out;
    }

    /// Array of points: [[...], ...], or plain numbers when each point is 1-D.
    std::vector<std::vector<double>> points(const std::string& name, std::size_t dim) {
        const json& v = at(name);
        if (!v.is_array()) throw ConfigError(key(name), "expected an array of points");
        std::vector<std::vector<double>> out;
        for (const auto& p : v) {
            if (p.is_number() && dim == 1) {
                out.push_back({p.get<double>()});
                continue;
            }
            if (!p.is_array() || p.size() != dim) throw ConfigError(key(name), "points must have " + std::to_string(dim) + " coordinates");
            std::vector<double> pt;
            for (const auto& c : p) {
                if (!c.is_number()) throw ConfigError(key(name), "point coordinates must be numbers");
                pt.push_back(c.get<double>());
            }
            out.push_back(std::move(pt));
        }
        return out;
    }

    Scalar scalar(const std::string& name) {
        try {
            return scalar_from_json(at(name));
        } catch (const InvalidArgument& e) {
            throw ConfigError(key(name), e.what());
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError(key(k), "unknown key");
    }

    const std::string& path() const noexcept { return path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

// Runs a constructor, re-raising library argument errors as config errors on `key`.
template <class F>
auto guarded(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(key, e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

Domain parse_domain(Section s) {
    const auto lower = s.numbers("lower");
    const auto upper = s.numbers("upper");
    s.finish();
    return guarded(s.path(), [&] { return Domain(lower, upper); });
}

CountLaw parse_count(Section s) {
    const std::string law = s.text("kind");
    CountLaw out = guarded(s.path(), [&] {
        if (law == "poisson") return CountLaw::poisson(s.number("gamma"));
        if (law == "fixed") return CountLaw::fixed(s.count("n"));
        if (law == "truncated_poisson") {
            std::optional<std::size_t> cap;
            if (s.has("k_max")) cap = s.count("k_max");
            return CountLaw::truncated_poisson(s.number("gamma"), cap);
        }
        throw ConfigError(s.key("kind"), "unknown count law '" + law + "'");
    });
    s.finish();
    return out;
}

LocationLaw parse_location(Section s, const Domain& domain) {
    const std::string law = s.text("kind");
    const std::size_t d = domain.dim();
    LocationLaw out = guarded(s.path(), [&] {
        if (law == "uniform") return LocationLaw::uniform(domain);
        if (law == "point") return LocationLaw::point(domain, s.numbers("y"));
        if (law == "nodes") {
            auto pts = s.points("points", d);
            std::vector<double> w;
            if (s.has("weights")) w = s.numbers("weights");
            return LocationLaw::nodes(domain, std::move(pts), std::move(w));
        }
        if (law == "truncated_gaussian") return LocationLaw::truncated_gaussian(domain, s.numbers("center"), s.numbers("scale"));
        throw ConfigError(s.key("kind"), "unknown location law '" + law + "'");
    });
    s.finish();
    return out;
}

MarkLaw parse_mark(Section s) {
    const std::string law = s.text("kind");
    MarkLaw out = guarded(s.path(), [&] {
        if (law == "gaussian") {
            if (s.has("cov")) {
                const auto mean = s.numbers("mean");
                const json& cj = s.at("cov");
                std::vector<double> cov;
                if (!cj.is_array() || cj.size() != mean.size()) throw ConfigError(s.key("cov"), "expected an m x m matrix");
                for (const auto& row : cj) {
                    if (!row.is_array() || row.size() != mean.size()) throw ConfigError(s.key("cov"), "expected an m x m matrix");
                    for (const auto& c : row) {
                        if (!c.is_number()) throw ConfigError(s.key("cov"), "matrix entries must be numbers");
                        cov.push_back(c.get<double>());
                    }
                }
                return MarkLaw::gaussian(mean, cov);
            }
            return MarkLaw::gaussian(s.number("mean", 0.0), s.number("variance"));
        }
        if (law == "lognormal") return MarkLaw::lognormal(s.number("mu"), s.number("sigma2"));
        if (law == "complex_gaussian") {
            const Scalar mean = s.has("mean") ? s.scalar("mean") : Scalar{};
            const Scalar rel = s.has("relation") ? s.scalar("relation") : Scalar{};
            return MarkLaw::complex_gaussian(mean, s.number("variance"), rel);
        }
        if (law == "categorical") {
            const ScalarField field =
                s.has("field") ? guarded(s.key("field"), [&] { return scalar_field_from_string(s.text("field")); })
                               : ScalarField::real;
            const json& vj = s.at("values");
            if (!vj.is_array()) throw ConfigError(s.key("values"), "expected an array");
            std::vector<std::vector<Scalar>> values;
            for (const auto& v : vj) {
                std::vector<Scalar> q;
                const bool scalar_entry = v.is_number() || (field == ScalarField::complex && v.is_array() &&
                                                            v.size() == 2 && v[0].is_number());
                guarded(s.key("values"), [&] {
                    if (scalar_entry) {
                        q.push_back(scalar_from_json(v));
                    } else {
                        if (!v.is_array()) throw InvalidArgument("expected amplitude vectors");
                        for (const auto& c : v) q.push_back(scalar_from_json(c));
                    }
                    return 0;
                });
                values.push_back(std::move(q));
            }
            return MarkLaw::categorical(std::move(values), s.numbers("probs"), field);
        }
        throw ConfigError(s.key("kind"), "unknown mark law '" + law + "'");
    });
    s.finish();
    return out;
}

Weights parse_weights(Section s) {
    const std::string kind = s.text("kind");
    Weights out = guarded(s.path(), [&] {
        if (kind == "unit") return Weights::unit();
        if (kind == "sequence") return Weights::sequence(s.numbers("values"));
        if (kind == "geometric") return Weights::geometric(s.number("ratio"), s.count("k_max"));
        if (kind == "power") return Weights::power(s.number("exponent"), s.count("k_max"));
        throw ConfigError(s.key("kind"), "unknown weights kind '" + kind + "'");
    });
    s.finish();
    return out;
}

PriorSpec parse_prior(Section s, const Domain& domain) {
    CountLaw count = parse_count(s.child("count"));
    LocationLaw location = parse_location(s.child("location"), domain);
    MarkLaw mark = parse_mark(s.child("mark"));
    Weights weights = s.has("weights") ? parse_weights(s.child("weights")) : Weights::unit();
    s.finish();
    return guarded(s.path(), [&] { return PriorSpec(count, location, mark, weights); });
}

SensorSet parse_sensors(Section s, std::size_t space_dim) {
    SensorSet out;
    if (s.has("points") == s.has("grid")) throw ConfigError(s.path(), "give exactly one of 'points' or 'grid'");
    if (s.has("points")) {
        out.points = s.points("points", space_dim);
    } else {
        Section g = s.child("grid");
        const auto lower = g.numbers("lower");
        const auto upper = g.numbers("upper");
        const auto counts = g.counts("counts");
        g.finish();
        out = guarded(g.path(), [&] { return SensorSet::grid(lower, upper, counts); });
    }
    s.finish();
    if (out.points.empty()) throw ConfigError(s.path(), "at least one sensor is required");
    return out;
}

std::shared_ptr<const ForwardModel> parse_forward(Section s, const Domain& domain, const std::filesystem::path& base) {
    const std::string kind = s.text("kind");
    std::shared_ptr<const KernelForward> kernel;
    if (kind == "gaussian_kernel") {
        const double sigma = s.number("sigma");
        SensorSet sensors = parse_sensors(s.child("sensors"), domain.dim());
        ScalarField field = ScalarField::real;
        if (s.has("output_field"))
            field = guarded(s.key("output_field"), [&] { return scalar_field_from_string(s.text("output_field")); });
        kernel = guarded(s.path(), [&] {
            return std::make_shared<const KernelForward>(KernelForward::gaussian_kernel(domain, sensors, sigma, field));
        });
    } else if (kind == "helmholtz") {
        const double kappa = s.number("kappa");
        const auto space_dim = static_cast<int>(s.count("space_dim", domain.dim()));
        SensorSet sensors = parse_sensors(s.child("sensors"), static_cast<std::size_t>(space_dim));
        kernel = guarded(s.path(), [&] {
            return std::make_shared<const KernelForward>(KernelForward::helmholtz_monopole(domain, sensors, kappa, space_dim));
        });
    } else if (kind == "tabulated") {
        const auto path = resolve(base, s.text("path"));
        TabulatedKernel table = load_tabulated_kernel(path);
        if (!(table.domain == domain)) throw ConfigError(s.key("path"), "tabulated kernel domain differs from 'domain'");
        kernel = guarded(s.path(), [&] { return std::make_shared<const KernelForward>(KernelForward::tabulated(table)); });
    } else {
        throw ConfigError(s.key("kind"), "unknown forward kind '" + kind + "'");
    }
    std::shared_ptr<const ForwardModel> out = kernel;
    if (s.has("grid_n")) {
        const std::size_t grid_n = s.count("grid_n");
        out = guarded(s.key("grid_n"), [&] { return std::make_shared<const DiscretizedForward>(kernel, grid_n); });
    }
    s.finish();
    return out;
}

NoiseModel parse_noise(Section s, const ForwardModel& fwd, const std::filesystem::path& base) {
    const std::size_t dim = fwd.output_field() == ScalarField::complex ? 2 * fwd.n_obs() : fwd.n_obs();
    const std::string kind = s.text("kind");
    NoiseModel out = guarded(s.path(), [&] {
        if (kind == "isotropic") return NoiseModel::isotropic(dim, s.number("variance"));
        if (kind == "flat") return NoiseModel::flat(dim);
        if (kind == "matrix") {
            Eigen::MatrixXd cov = load_matrix_csv(resolve(base, s.text("path")));
            if (static_cast<std::size_t>(cov.rows()) != dim)
                throw ConfigError(s.key("path"), "covariance must be " + std::to_string(dim) + " x " + std::to_string(dim));
            return NoiseModel::from_covariance(std::move(cov));
        }
        throw ConfigError(s.key("kind"), "unknown noise kind '" + kind + "'");
    });
    s.finish();
    return out;
}

SamplerConfig parse_sampler(Section s, std::uint64_t root_seed) {
    SamplerConfig c;
    c.n_iters = s.count("n_iters", c.n_iters);
    c.burn_in = s.count("burn_in", c.burn_in);
    c.thin = s.count("thin", c.thin);
    c.p_birth = s.number("p_birth", c.p_birth);
    c.p_death = s.number("p_death", c.p_death);
    c.p_move = s.number("p_move", c.p_move);
    c.p_perturb = s.number("p_perturb", c.p_perturb);
    if (s.has("location_step")) c.location_step = s.number("location_step");
    if (s.has("amplitude_step")) c.amplitude_step = s.number("amplitude_step");
    if (s.has("k_max")) c.k_max = s.count("k_max");
    c.seed = s.has("seed") ? static_cast<std::uint64_t>(s.count("seed")) : root_seed;
    if (s.has("intensity_points")) c.intensity_points = s.count("intensity_points");
    if (s.has("intensity_bandwidth")) c.intensity_bandwidth = s.number("intensity_bandwidth");
    s.finish();
    guarded(s.path(), [&] {
        c.validate();
        return 0;
    });
    return c;
}

DiscreteMeasure parse_atoms(Section s, const PriorSpec& prior) {
    DiscreteMeasure u = prior.empty_measure();
    const json& atoms = s.at("atoms");
    if (!atoms.is_array()) throw ConfigError(s.key("atoms"), "expected an array of atoms");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        Section a(atoms[k], s.key("atoms") + "[" + std::to_string(k) + "]");
        const auto y = a.numbers("y");
        std::vector<Scalar> q;
        const json& qj = a.at("q");
        guarded(a.key("q"), [&] {
            const bool single = qj.is_number() || (qj.is_array() && qj.size() == 2 && qj[0].is_number() &&
                                                   prior.amp_dim() == 1 && prior.field() == ScalarField::complex);
            if (single) {
                q.push_back(scalar_from_json(qj));
            } else {
                if (!qj.is_array()) throw InvalidArgument("expected an amplitude");
                for (const auto& c : qj) q.push_back(scalar_from_json(c));
            }
            if (q.size() != prior.amp_dim()) throw DimensionMismatch("amplitude has the wrong length");
            if (y.size() != prior.dim()) throw DimensionMismatch("location has the wrong dimension");
            if (!prior.domain().contains(y)) throw InvalidArgument("atom location outside the domain");
            u.push_back(y, q);
            return 0;
        });
        a.finish();
    }
    s.finish();
    return u;
}

ScenarioSpec parse_scenario(Section s, const PriorSpec& prior, const std::filesystem::path& base) {
    ScenarioSpec out;
    if (s.has("truth")) {
        const json& t = s.at("truth");
        if (t.is_string()) {
            if (t.get<std::string>() != "prior") throw ConfigError(s.key("truth"), "expected \"prior\" or an atom list");
        } else {
            out.truth = parse_atoms(Section(t, s.key("truth")), prior);
        }
    }
    out.zero_noise = s.flag("zero_noise", false);
    if (s.has("data_path")) {
        if (out.truth) throw ConfigError(s.key("data_path"), "data_path and an explicit truth are exclusive");
        out.data_path = resolve(base, s.text("data_path"));
    }
    s.finish();
    return out;
}

ExperimentKind parse_kind(const std::string& name, const std::string& key) {
    for (auto k : {ExperimentKind::sample_prior, ExperimentKind::invert, ExperimentKind::evidence, ExperimentKind::hellinger,
                   ExperimentKind::stability, ExperimentKind::consistency, ExperimentKind::recover})
        if (name == to_string(k)) return k;
    throw ConfigError(key, "unknown experiment kind '" + name + "'");
}

// Validates kind-specific parameters and fills in defaults.
json parse_params(Section s, ExperimentKind kind, const ForwardModel& fwd) {
    json p = json::object();
    switch (kind) {
        case ExperimentKind::sample_prior:
            p["n"] = s.count("n", 1000);
            break;
        case ExperimentKind::invert:
            p["chains"] = s.count("chains", 1);
            if (p["chains"].get<std::size_t>() == 0) throw ConfigError(s.key("chains"), "need at least one chain");
            break;
        case ExperimentKind::evidence:
            p["n"] = s.count("n", 10000);
            break;
        case ExperimentKind::hellinger:
            p["n"] = s.count("n", 10000);
            if (s.has("perturbation")) {
                const json& v = s.at("perturbation");
                Observation d = guarded(s.key("perturbation"), [&] { return observation_from_json(v); });
                if (d.size() != fwd.n_obs()) throw ConfigError(s.key("perturbation"), "length must equal the sensor count");
                p["perturbation"] = v;
            }
            if (s.has("grid_n")) p["grid_n"] = s.count("grid_n");
            break;
        case ExperimentKind::stability: {
            p["n"] = s.count("n", 10000);
            if (s.has("sizes")) {
                p["sizes"] = s.numbers("sizes");
            } else {
                const std::size_t steps = s.count("steps", 8);
                const double scale = s.number("scale", 1.0);
                std::vector<double> sizes;
                for (std::size_t i = 1; i <= steps; ++i) sizes.push_back(scale / static_cast<double>(i));
                p["sizes"] = sizes;
            }
            if (s.has("direction")) {
                const json& v = s.at("direction");
                Observation d = guarded(s.key("direction"), [&] { return observation_from_json(v); });
                if (d.size() != fwd.n_obs()) throw ConfigError(s.key("direction"), "length must equal the sensor count");
                p["direction"] = v;
            }
            break;
        }
        case ExperimentKind::consistency:
            p["n"] = s.count("n", 10000);
            p["grids"] = s.has("grids") ? s.counts("grids") : std::vector<std::size_t>{4, 8, 16, 32, 64, 128, 256};
            break;
        case ExperimentKind::recover:
            p["replicates"] = s.count("replicates", 10);
            p["top"] = s.count("top", 3);
            p["tolerance_steps"] = s.number("tolerance_steps", 2.0);
            break;
    }
    s.finish();
    return p;
}

json artifact_header(const ExperimentConfig& cfg, const std::string& kind) {
    return {{"schema_version", kSchemaVersion}, {"config_digest", cfg.digest}, {"artifact", kind}};
}

json with_header(const ExperimentConfig& cfg, const std::string& kind, json body) {
    json out = artifact_header(cfg, kind);
    for (auto& [k, v] : body.items()) out[k] = v;
    return out;
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"se", e.std_error}, {"ess", e.ess}}; }

class ArtifactWriter {
public:
    explicit ArtifactWriter(const ExperimentConfig& cfg) : cfg_(cfg) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.output_dir, ec);
        if (ec) throw IoError(cfg.output_dir.string() + ": cannot create output directory: " + ec.message());
    }
    std::filesystem::path path(const std::string& name) const { return cfg_.output_dir / name; }
    void json_file(const std::string& name, const std::string& kind, json body) {
        write_json_file(path(name), with_header(cfg_, kind, std::move(body)));
        names_.push_back(name);
    }
    void added(const std::string& name) { names_.push_back(name); }
    std::vector<std::string> finish() {
        json files = json::object();
        for (const auto& n : names_) files[n] = file_digest(path(n));
        json config = cfg_.raw;
        config.erase("output_dir");
        write_json_file(path("config.json"), config);
        files["config.json"] = file_digest(path("config.json"));
        write_json_file(path("manifest.json"),
                        with_header(cfg_, "manifest", {{"kind", to_string(cfg_.kind)}, {"files", files}}));
        names_.push_back("config.json");
        names_.push_back("manifest.json");
        return names_;
    }

private:
    const ExperimentConfig& cfg_;
    std::vector<std::string> names_;
};

Observation add_scaled(const Observation& z, double scale, const Observation& direction) {
    Observation out = z;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * direction[i];
    return out;
}

void write_scenario(ArtifactWriter& w, const ExperimentConfig& cfg, const Scenario& s, const std::string& name) {
    w.json_file(name, "scenario", scenario_to_json(s, cfg.forward->output_field()));
}

void run_sample_prior(const ExperimentConfig& cfg, ArtifactWriter& w) {
    const auto n = cfg.params.at("n").get<std::size_t>();
    Rng rng = make_rng(cfg.seed, "prior");
    JsonLinesWriter out(w.path("prior_samples.jsonl"), with_header(cfg, "prior_samples", {{"n", n}}));
    std::vector<double> tv(n);
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DiscreteMeasure u = sample_prior(cfg.prior, rng);
        tv[i] = total_variation(u);
        k[i] = static_cast<double>(u.size());
        out.write(measure_to_json(u));
    }
    out.close();
    w.added("prior_samples.jsonl");
    json body = {{"n", n}};
    if (n >= 2) {
        body["mean_tv"] = estimate_json(iid_estimate(tv));
        body["mean_k"] = estimate_json(iid_estimate(k));
    }
    try {
        body["prior_mean_tv"] = prior_mean_tv(cfg.prior);
    } catch (const UnsupportedLaw&) {
        body["prior_mean_tv"] = nullptr;
    }
    w.json_file("summary.json", "prior_summary", body);
}

void run_invert(const ExperimentConfig& cfg, ArtifactWriter& w) {
    const Scenario sc = generate_scenario(cfg);
    write_scenario(w, cfg, sc, "scenario.json");
    const Posterior post = make_posterior(cfg, sc.data);
    const auto chains = cfg.params.at("chains").get<std::size_t>();
    json summaries = json::array();
    for (std::size_t c = 0; c < chains; ++c) {
        const std::string stream = "chain-" + std::to_string(c);
        const std::string name = stream + ".jsonl";
        Rng rng = make_rng(cfg.sampler.seed, stream);
        JsonLinesWriter out(w.path(name), with_header(cfg, "chain", {{"chain", c}, {"seed", substream_seed(cfg.sampler.seed, stream)}}));
        const ChainSummary s = run_chain(post, cfg.sampler, rng, [&out](const ChainRecord& r) { out.write(record_to_json(r)); });
        out.close();
        w.added(name);
        json sj = summary_to_json(s);
        sj["chain"] = c;
        summaries.push_back(sj);
    }
    json body = summaries.size() == 1 ? summaries[0] : json{{"chains", summaries}};
    w.json_file("summary.json", "chain_summary", body);
}

void run_evidence(const ExperimentConfig& cfg, ArtifactWriter& w) {
    const Scenario sc = generate_scenario(cfg);
    write_scenario(w, cfg, sc, "scenario.json");
    const Posterior post = make_posterior(cfg, sc.data);
    Rng rng = make_rng(cfg.seed, "evidence");
    const EvidenceEstimate e = estimate_evidence(post, cfg.params.at("n").get<std::size_t>(), rng);
    w.json_file("evidence.json", "evidence", {{"log_z", e.log_z}, {"se", e.std_error}, {"n_samples", e.n_samples}});
}

void run_hellinger(const ExperimentConfig& cfg, ArtifactWriter& w) {
    const Scenario sc = generate_scenario(cfg);
    write_scenario(w, cfg, sc, "scenario.json");
    const Posterior p1 = make_posterior(cfg, sc.data);
    Posterior p2 = p1;
    if (cfg.params.contains("perturbation"))
        p2 = p2.with_data(add_scaled(sc.data, 1.0, observation_from_json(cfg.params.at("perturbation"))));
    if (cfg.params.contains("grid_n")) {
        auto base = std::dynamic_pointer_cast<const KernelForward>(cfg.forward);
        if (!base) throw ConfigError("experiment.grid_n", "needs an undiscretized kernel forward operator");
        p2 = p2.with_forward(std::make_shared<const DiscretizedForward>(base, cfg.params.at("grid_n").get<std::size_t>()));
    }
    const HellingerEstimate h =
        hellinger(p1, p2, cfg.params.at("n").get<std::size_t>(), substream_seed(cfg.seed, "hellinger"));
    w.json_file("hellinger.json", "hellinger", hellinger_to_json(h));
}

void run_stability(const ExperimentConfig& cfg, ArtifactWriter& w) {
    const Scenario sc = generate_scenario(cfg);
    write_scenario(w, cfg, sc, "scenario.json");
    const Posterior post = make_posterior(cfg, sc.data);
    Observation direction(sc.data.size(), Scalar{});
    if (cfg.params.contains("direction"))
        direction = observation_from_json(cfg.params.at("direction"));
    else
        direction[0] = 1.0;
    std::vector<Observation> perturbed;
    for (double size : cfg.params.at("sizes").get<std::vector<double>>()) perturbed.push_back(add_scaled(sc.data, size, direction));
    const auto curve = stability_curve(post, perturbed, cfg.params.at("n").get<std::size_t>(), substream_seed(cfg.seed, "hellinger"));
    write_stability_csv(w.path("stability.csv"), curve, cfg.digest);
    w.added("stability.csv");
}

void run_consistency(const ExperimentConfig& cfg, ArtifactWriter& w) {
    if (!std::dynamic_pointer_cast<const KernelForward>(cfg.forward))
        throw ConfigError("forward.grid_n", "consistency needs an undiscretized kernel forward operator");
    const Scenario sc = generate_scenario(cfg);
    write_scenario(w, cfg, sc, "scenario.json");
    const Posterior post = make_posterior(cfg, sc.data);
    const auto curve = consistency_curve(post, cfg.params.at("grids").get<std::vector<std::size_t>>(),
                                         cfg.params.at("n").get<std::size_t>(), substream_seed(cfg.seed, "hellinger"));
    write_consistency_csv(w.path("consistency.csv"), curve, cfg.digest);
    w.added("consistency.csv");
}

void run_recover(const ExperimentConfig& cfg, ArtifactWriter& w) {
    const auto replicates = cfg.params.at("replicates").get<std::size_t>();
    const auto top = cfg.params.at("top").get<std::size_t>();
    const double tol_steps = cfg.params.at("tolerance_steps").get<double>();
    json reps = json::array();
    std::size_t successes = 0;
    double tolerance = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        const std::string suffix = "-" + std::to_string(r);
        const Scenario sc = generate_scenario(cfg, suffix);
        if (!sc.truth) throw ConfigError("scenario.data_path", "recover needs a known truth");
        const Posterior post = make_posterior(cfg, sc.data);
        const RjmcmcSampler sampler(post, cfg.sampler);
        tolerance = tol_steps * sampler.location_step();
        Rng rng = make_rng(cfg.sampler.seed, "chain" + suffix);
        const ChainSummary s = run_chain(post, cfg.sampler, rng);
        const auto maxima = find_local_maxima(s.intensity, top);
        bool ok = maxima.size() == top;
        json mj = json::array();
        for (const auto& m : maxima) {
            double best = INFINITY;
            for (std::size_t k = 0; k < sc.truth->size(); ++k) {
                double d2 = 0.0;
                const auto y = sc.truth->location(k);
                for (std::size_t a = 0; a < y.size(); ++a) d2 += (y[a] - m.location[a]) * (y[a] - m.location[a]);
                best = std::min(best, std::sqrt(d2));
            }
            if (!(best <= tolerance)) ok = false;
            mj.push_back({{"location", m.location}, {"intensity", m.value}, {"distance_to_truth", best}});
        }
        if (ok) ++successes;
        reps.push_back({{"replicate", r},
                        {"truth", measure_to_json(*sc.truth)},
                        {"maxima", mj},
                        {"success", ok},
                        {"mean_k", estimate_json(s.mean_k)}});
    }
    w.json_file("recover.json", "recover",
                {{"replicates", reps}, {"successes", successes}, {"n_replicates", replicates}, {"tolerance", tolerance}});
}

}  // namespace

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::sample_prior: return "sample-prior";
        case ExperimentKind::invert: return "invert";
        case ExperimentKind::evidence: return "evidence";
        case ExperimentKind::hellinger: return "hellinger";
        case ExperimentKind::stability: return "stability";
        case ExperimentKind::consistency: return "consistency";
        case ExperimentKind::recover: return "recover";
    }
    return "unknown";
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    Section root(doc, "");
    if (root.count("schema_version") != static_cast<std::size_t>(kSchemaVersion))
        throw ConfigError("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    const auto seed = static_cast<std::uint64_t>(root.count("seed"));
    const std::filesystem::path output_dir = resolve(base_dir, root.text("output_dir"));
    const Domain domain = parse_domain(root.child("domain"));
    PriorSpec prior = parse_prior(root.child("prior"), domain);
    auto forward = parse_forward(root.child("forward"), domain, base_dir);
    NoiseModel noise = parse_noise(root.child("noise"), *forward, base_dir);
    SamplerConfig sampler = root.has("sampler") ? parse_sampler(root.child("sampler"), seed) : [&] {
        SamplerConfig c;
        c.seed = seed;
        return c;
    }();
    ScenarioSpec scenario = root.has("scenario") ? parse_scenario(root.child("scenario"), prior, base_dir) : ScenarioSpec{};
    Section exp = root.child("experiment");
    const ExperimentKind kind = parse_kind(exp.text("kind"), exp.key("kind"));
    json params = parse_params(exp, kind, *forward);
    root.finish();

    // Cross-section compatibility is checked by building a posterior on zero data.
    guarded("forward", [&] {
        return Posterior(prior, forward, noise, Observation(forward->n_obs(), Scalar{}));
    });

    json canonical = doc;
    canonical.erase("output_dir");
    return ExperimentConfig{doc,
                            digest_hex(canonical.dump()),
                            seed,
                            output_dir,
                            base_dir,
                            std::move(prior),
                            std::move(forward),
                            std::move(noise),
                            sampler,
                            std::move(scenario),
                            kind,
                            std::move(params)};
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    json doc = read_json_file(path);
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.output_dir) doc["output_dir"] = std::filesystem::absolute(*overrides.output_dir).string();
    return parse_config(doc, path.parent_path());
}

Scenario generate_scenario(const ExperimentConfig& cfg, const std::string& stream_suffix) {
    Scenario s;
    s.prior_seed = substream_seed(cfg.seed, "prior" + stream_suffix);
    s.noise_seed = substream_seed(cfg.seed, "noise" + stream_suffix);
    if (cfg.scenario.data_path) {
        s.data = load_observation_csv(*cfg.scenario.data_path);
        const std::size_t n_obs = cfg.forward->n_obs();
        if (cfg.forward->output_field() == ScalarField::complex && s.data.size() == 2 * n_obs) {
            Eigen::VectorXd v(2 * n_obs);
            for (std::size_t i = 0; i < 2 * n_obs; ++i) v[i] = s.data[i].real();
            s.data = unembed_observation(v, ScalarField::complex);
        }
        if (s.data.size() != n_obs)
            throw ConfigError("scenario.data_path", "data length differs from the sensor count");
        return s;
    }
    if (cfg.scenario.truth) {
        s.truth = *cfg.scenario.truth;
    } else {
        Rng rng(s.prior_seed);
        s.truth = sample_prior(cfg.prior, rng);
    }
    s.clean = (*cfg.forward)(*s.truth);
    s.data = s.clean;
    if (!cfg.scenario.zero_noise && !cfg.noise.is_flat()) {
        Rng rng(s.noise_seed);
        const Observation xi = unembed_observation(cfg.noise.sample(rng), cfg.forward->output_field());
        for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] += xi[i];
    }
    return s;
}

json scenario_to_json(const Scenario& s, ScalarField field) {
    return {{"truth", s.truth ? measure_to_json(*s.truth) : json(nullptr)},
            {"clean", observation_to_json(s.clean, field)},
            {"data", observation_to_json(s.data, field)},
            {"prior_seed", s.prior_seed},
            {"noise_seed", s.noise_seed}};
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    try {
        if (!j.at("truth").is_null()) s.truth = measure_from_json(j.at("truth"));
        s.clean = observation_from_json(j.at("clean"));
        s.data = observation_from_json(j.at("data"));
        s.prior_seed = j.at("prior_seed").get<std::uint64_t>();
        s.noise_seed = j.at("noise_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed scenario: ") + e.what());
    }
    return s;
}

Posterior make_posterior(const ExperimentConfig& cfg, const Observation& data) {
    return Posterior(cfg.prior, cfg.forward, cfg.noise, data);
}

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
    ArtifactWriter w(cfg);
    switch (cfg.kind) {
        case ExperimentKind::sample_prior: run_sample_prior(cfg, w); break;
        case ExperimentKind::invert: run_invert(cfg, w); break;
        case ExperimentKind::evidence: run_evidence(cfg, w); break;
        case ExperimentKind::hellinger: run_hellinger(cfg, w); break;
        case ExperimentKind::stability: run_stability(cfg, w); break;
        case ExperimentKind::consistency: run_consistency(cfg, w); break;
        case ExperimentKind::recover: run_recover(cfg, w); break;
    }
    return w.finish();
}

}  // namespace spikebayes
