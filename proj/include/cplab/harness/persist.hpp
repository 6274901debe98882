#pragma once

#include "cplab/harness/config.hpp"
#include "cplab/harness/metrics.hpp"
#include "cplab/harness/sweep.hpp"
#include "cplab/nn/parameters.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cplab::harness {

inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kAccuracyHeader = "k,j,accuracy";
inline constexpr std::string_view kMetricsHeader = "metric,k_or_range,value";
inline constexpr std::string_view kSweepHeader = "beta,A_mean,A_std,F_mean,F_std,I_mean,I_std";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kParamsFile = "params.bin";

class PersistError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunArtifacts {
    ExperimentConfig config;
    AccuracyMatrix accuracy{1};
    /// Fine-tuning accuracies a*_j; empty when no baseline was attached.
    std::vector<double> baseline;
    std::optional<nn::MlpSpec> spec;
    std::optional<nn::ParameterSet> params;
};

struct Manifest {
    int schema_version = kSchemaVersion;
    std::vector<std::string> files;
};

/// Writes accuracy.csv, metrics.csv, the manifest (schema version, config echo,
/// seed, PRNG name, full-precision accuracies) and, when present, params.bin.
/// Every file is written to a temporary name and renamed into place.
Manifest persist_results(const RunArtifacts& run, const std::filesystem::path& dir);

/// Reads a directory written by persist_results. Throws PersistError on a
/// missing or malformed manifest or a schema-version mismatch.
RunArtifacts load_results(const std::filesystem::path& dir);

/// Writes `content` to `path` via a sibling temporary file and rename.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string format_fixed6(double v);
std::string accuracy_csv(const AccuracyMatrix& acc);
std::string metrics_csv(const MetricsReport& report);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace cplab::harness
