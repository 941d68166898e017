#include "spikebayes/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spikebayes/errors.hpp"

namespace spikebayes {

using nlohmann::json;

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json estimate_to_json(const Estimate& e) {
    return {{"value", finite_or_null(e.value)}, {"se", finite_or_null(e.std_error)}, {"ess", finite_or_null(e.ess)}};
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(path.parent_path().string() + ": cannot create directory: " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    return in;
}

std::vector<double> parse_csv_row(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            row.push_back(std::stod(cell, &used));
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
        }
    }
    return row;
}

// Numeric rows of a CSV file, skipping blank lines, '#' comments and a non-numeric first line.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (rows.empty() && !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' || line[0] == '+' ||
                              line[0] == '.'))
            continue;  // header
        rows.push_back(parse_csv_row(line, path, lineno));
    }
    return rows;
}

void write_curve_header(std::ofstream& out, const std::string& digest, const char* columns) {
    out << "# schema_version=" << kSchemaVersion << "\n# config_digest=" << digest << "\n" << columns << "\n";
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string digest_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(bytes));
    return buf;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return digest_hex(ss.str());
}

json scalar_to_json(Scalar q, ScalarField field) {
    if (field == ScalarField::real) return q.real();
    return json::array({q.real(), q.imag()});
}

Scalar scalar_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw InvalidArgument("expected a number or a [re, im] pair, got " + j.dump());
}

json measure_to_json(const DiscreteMeasure& u) {
    json atoms = json::array();
    for (std::size_t k = 0; k < u.size(); ++k) {
        const auto y = u.location(k);
        json q = json::array();
        for (const Scalar& c : u.amplitude(k)) q.push_back(scalar_to_json(c, u.field()));
        atoms.push_back({{"y", std::vector<double>(y.begin(), y.end())}, {"q", q}});
    }
    return {{"d", u.dim()}, {"m", u.amp_dim()}, {"field", to_string(u.field())}, {"atoms", atoms}};
}

DiscreteMeasure measure_from_json(const json& j) {
    try {
        const auto d = j.at("d").get<std::size_t>();
        const auto m = j.at("m").get<std::size_t>();
        const ScalarField field = scalar_field_from_string(j.at("field").get<std::string>());
        DiscreteMeasure u(d, m, field);
        for (const auto& atom : j.at("atoms")) {
            const auto y = atom.at("y").get<std::vector<double>>();
            std::vector<Scalar> q;
            for (const auto& c : atom.at("q")) q.push_back(scalar_from_json(c));
            if (y.size() != d || q.size() != m) throw DimensionMismatch("atom has wrong location or amplitude size");
            u.push_back(y, q);
        }
        return u;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed measure: ") + e.what());
    }
}

json observation_to_json(const Observation& z, ScalarField field) {
    json out = json::array();
    for (const Scalar& c : z) out.push_back(scalar_to_json(c, field));
    return out;
}

Observation observation_from_json(const json& j) {
    if (!j.is_array()) throw InvalidArgument("observation must be an array");
    Observation z;
    for (const auto& c : j) z.push_back(scalar_from_json(c));
    return z;
}

json record_to_json(const ChainRecord& r) {
    return {{"iter", r.iter},
            {"measure", measure_to_json(r.measure)},
            {"log_likelihood", finite_or_null(r.log_likelihood)},
            {"move", to_string(r.move)},
            {"accepted", r.accepted}};
}

ChainRecord record_from_json(const json& j) {
    try {
        const json& ll = j.at("log_likelihood");
        return ChainRecord{j.at("iter").get<std::size_t>(), measure_from_json(j.at("measure")),
                           ll.is_null() ? -INFINITY : ll.get<double>(),
                           move_kind_from_string(j.at("move").get<std::string>()), j.at("accepted").get<bool>()};
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed chain record: ") + e.what());
    }
}

json summary_to_json(const ChainSummary& s) {
    json out;
    out["n_records"] = s.n_records;
    out["insufficient_samples"] = s.insufficient_samples;
    json acceptance;
    json proposed;
    for (std::size_t i = 0; i < kMoveKindCount; ++i) {
        const char* name = to_string(static_cast<MoveKind>(i));
        acceptance[name] = s.moves[i].rate();
        proposed[name] = s.moves[i].proposed;
    }
    out["acceptance"] = acceptance;
    out["proposed"] = proposed;
    out["k_hist"] = s.k_hist;
    out["k_max"] = s.k_max;
    out["truncated_mass"] = s.truncated_mass;
    if (s.insufficient_samples) {
        out["mean_k"] = nullptr;
        out["mean_tv"] = nullptr;
        out["mean_amplitude_sum"] = nullptr;
        out["ess"] = nullptr;
    } else {
        out["mean_k"] = estimate_to_json(s.mean_k);
        out["mean_tv"] = estimate_to_json(s.mean_tv);
        out["mean_amplitude_sum"] = estimate_to_json(s.mean_amplitude_sum);
        out["ess"] = finite_or_null(s.ess_log_likelihood);
    }
    out["intensity"] = {{"axes", s.intensity.axes}, {"values", s.intensity.values}, {"bandwidth", s.intensity.bandwidth}};
    return out;
}

json hellinger_to_json(const HellingerEstimate& h) {
    return {{"value", h.value},         {"se", h.std_error},           {"n_samples", h.n_samples},
            {"common_seed", h.common_seed}, {"clamped", h.clamped}, {"ratio_bias", h.ratio_bias}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_for_write(path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError(path.string() + ": write failed");
}

JsonLinesWriter::JsonLinesWriter(const std::filesystem::path& path, const json& header)
    : path_(path), out_(open_for_write(path)) {
    write(header);
}

void JsonLinesWriter::write(const json& line) {
    out_ << line.dump() << "\n";
    if (!out_) throw IoError(path_.string() + ": write failed");
}

void JsonLinesWriter::close() {
    out_.close();
    if (!out_) throw IoError(path_.string() + ": close failed");
}

JsonLinesFile read_json_lines(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    JsonLinesFile file;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        if (lineno == 1)
            file.header = std::move(j);
        else
            file.lines.push_back(std::move(j));
    }
    if (lineno == 0) throw IoError(path.string() + ": empty file");
    return file;
}

void save_observation_csv(const std::filesystem::path& path, const Observation& z, ScalarField field) {
    std::ofstream out = open_for_write(path);
    out << (field == ScalarField::real ? "re\n" : "re,im\n");
    for (const Scalar& c : z) {
        out << format_double(c.real());
        if (field == ScalarField::complex) out << "," << format_double(c.imag());
        out << "\n";
    }
    if (!out) throw IoError(path.string() + ": write failed");
}

Observation load_observation_csv(const std::filesystem::path& path) {
    const auto rows = read_numeric_csv(path);
    Observation z;
    if (rows.size() == 1 && rows[0].size() > 2) {
        for (double x : rows[0]) z.emplace_back(x, 0.0);
        return z;
    }
    for (const auto& row : rows) {
        if (row.size() == 1)
            z.emplace_back(row[0], 0.0);
        else if (row.size() == 2)
            z.emplace_back(row[0], row[1]);
        else
            throw IoError(path.string() + ": observation rows need 1 or 2 columns");
    }
    return z;
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
    const auto rows = read_numeric_csv(path);
    if (rows.empty()) throw IoError(path.string() + ": no matrix rows");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw IoError(path.string() + ": ragged matrix rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

void write_stability_csv(const std::filesystem::path& path, const std::vector<StabilityPoint>& curve,
                         const std::string& config_digest) {
    std::ofstream out = open_for_write(path);
    write_curve_header(out, config_digest, "perturbation_size,hellinger,se,n_samples");
    for (const auto& pt : curve)
        out << format_double(pt.perturbation_size) << "," << format_double(pt.distance.value) << ","
            << format_double(pt.distance.std_error) << "," << pt.distance.n_samples << "\n";
    if (!out) throw IoError(path.string() + ": write failed");
}

void write_consistency_csv(const std::filesystem::path& path, const std::vector<ConsistencyPoint>& curve,
                           const std::string& config_digest) {
    std::ofstream out = open_for_write(path);
    write_curve_header(out, config_digest, "grid_n,hellinger,se,n_samples");
    for (const auto& pt : curve)
        out << pt.grid_n << "," << format_double(pt.distance.value) << "," << format_double(pt.distance.std_error)
            << "," << pt.distance.n_samples << "\n";
    if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace spikebayes
