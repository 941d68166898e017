#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spikebayes/diagnostics.hpp"
#include "spikebayes/sampler.hpp"

namespace spikebayes {

inline constexpr int kSchemaVersion = 1;

/// 16-hex-digit FNV-1a digest.
std::string digest_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

nlohmann::json scalar_to_json(Scalar q, ScalarField field);
/// Accepts a number or a [re, im] pair.
Scalar scalar_from_json(const nlohmann::json& j);

/// {"d", "m", "field", "atoms": [{"y": [...], "q": [...]}]}; complex amplitudes as [re, im].
nlohmann::json measure_to_json(const DiscreteMeasure& u);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

nlohmann::json observation_to_json(const Observation& z, ScalarField field);
Observation observation_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const ChainRecord& r);
ChainRecord record_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const ChainSummary& s);
nlohmann::json hellinger_to_json(const HellingerEstimate& h);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed, keys sorted, trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// Line-oriented writer: a header object then one JSON value per line.
class JsonLinesWriter {
public:
    JsonLinesWriter(const std::filesystem::path& path, const nlohmann::json& header);
    void write(const nlohmann::json& line);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct JsonLinesFile {
    nlohmann::json header;
    std::vector<nlohmann::json> lines;
};
JsonLinesFile read_json_lines(const std::filesystem::path& path);

/// Observation CSV: one row per entry ("re" or "re,im"), or a single row of real values.
void save_observation_csv(const std::filesystem::path& path, const Observation& z, ScalarField field);
Observation load_observation_csv(const std::filesystem::path& path);

/// Dense numeric matrix, comma separated, one row per line.
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);

/// Curve CSVs carry "# schema_version" and "# config_digest" comment lines before the header.
void write_stability_csv(const std::filesystem::path& path, const std::vector<StabilityPoint>& curve,
                         const std::string& config_digest);
void write_consistency_csv(const std::filesystem::path& path, const std::vector<ConsistencyPoint>& curve,
                           const std::string& config_digest);

/// %.17g formatting.
std::string format_double(double x);

}  // namespace spikebayes
