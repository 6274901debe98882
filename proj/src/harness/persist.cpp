#include "cplab/harness/persist.hpp"

#include "cplab/rng.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cplab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 8> kParamsMagic = {'C', 'P', 'L', 'A', 'B', 'P', 'R', 'M'};
constexpr std::uint32_t kParamsVersion = 1;

void put_le(std::string& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

std::uint64_t get_le(const std::string& in, std::size_t offset, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= std::uint64_t{static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)])} << (8 * i);
    }
    return v;
}

std::string encode_params(const nn::ParameterSet& params) {
    std::string out(kParamsMagic.begin(), kParamsMagic.end());
    put_le(out, kParamsVersion, 4);
    put_le(out, static_cast<std::uint64_t>(params.size()), 8);
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        std::uint64_t bits = 0;
        const double v = params.values()(i);
        std::memcpy(&bits, &v, sizeof bits);
        put_le(out, bits, 8);
    }
    return out;
}

nn::ParameterSet decode_params(const std::string& bytes, const nn::MlpSpec& spec) {
    if (bytes.size() < 20 || !std::equal(kParamsMagic.begin(), kParamsMagic.end(), bytes.begin())) {
        throw PersistError("params.bin: bad header");
    }
    if (get_le(bytes, 8, 4) != kParamsVersion) {
        throw PersistError("params.bin: unsupported version");
    }
    const std::uint64_t count = get_le(bytes, 12, 8);
    auto layout = nn::make_layout(spec);
    if (count != static_cast<std::uint64_t>(layout->size()) || bytes.size() != 20 + 8 * count) {
        throw PersistError("params.bin: size does not match the network spec");
    }
    Eigen::VectorXd values(static_cast<Eigen::Index>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t bits = get_le(bytes, 20 + 8 * i, 8);
        double v = 0.0;
        std::memcpy(&v, &bits, sizeof v);
        values(static_cast<Eigen::Index>(i)) = v;
    }
    return nn::ParameterSet(std::move(layout), std::move(values));
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PersistError("cannot read " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json spec_to_json(const nn::MlpSpec& spec) {
    return json{{"input_dim", spec.input_dim},
                {"hidden_dims", spec.hidden_dims},
                {"head_dims", spec.head_dims},
                {"activation", "relu"}};
}

nn::MlpSpec spec_from_json(const json& j) {
    nn::MlpSpec spec;
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    spec.head_dims = j.at("head_dims").get<std::vector<std::size_t>>();
    spec.validate();
    return spec;
}

}  // namespace

std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string accuracy_csv(const AccuracyMatrix& acc) {
    std::string out(kAccuracyHeader);
    out += '\n';
    for (std::size_t k = 0; k < acc.tasks(); ++k) {
        for (std::size_t j = 0; j <= k; ++j) {
            if (acc.populated(k, j)) {
                out += std::to_string(k + 1) + ',' + std::to_string(j + 1) + ',' +
                       format_fixed6(acc.at(k, j)) + '\n';
            }
        }
    }
    return out;
}

std::string metrics_csv(const MetricsReport& report) {
    std::string out(kMetricsHeader);
    out += '\n';
    const std::size_t t = report.average_accuracy.size();
    for (std::size_t k = 1; k <= t; ++k) {
        out += "A," + std::to_string(k) + ',' + format_fixed6(report.average_accuracy[k - 1]) + '\n';
    }
    for (std::size_t k = 2; k <= t; ++k) {
        if (report.forgetting[k - 1]) {
            out += "F," + std::to_string(k) + ',' + format_fixed6(*report.forgetting[k - 1]) + '\n';
        }
    }
    for (std::size_t k = 1; k <= report.intransigence_terms.size(); ++k) {
        out += "I,1-" + std::to_string(k) + ',' + format_fixed6(*report.intransigence(1, k)) + '\n';
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out(kSweepHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += format_fixed6(r.beta) + ',' + format_fixed6(r.a_mean) + ',' + format_fixed6(r.a_std) +
               ',' + format_fixed6(r.f_mean) + ',' + format_fixed6(r.f_std) + ',' +
               format_fixed6(r.i_mean) + ',' + format_fixed6(r.i_std) + '\n';
    }
    return out;
}

void write_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw PersistError("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw PersistError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw PersistError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

Manifest persist_results(const RunArtifacts& run, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw PersistError("cannot create " + dir.string() + ": " + ec.message());
    }
    Manifest manifest;

    write_atomic(dir / "accuracy.csv", accuracy_csv(run.accuracy));
    manifest.files.emplace_back("accuracy.csv");
    if (run.accuracy.complete()) {
        write_atomic(dir / "metrics.csv", metrics_csv(compute_metrics(run.accuracy, run.baseline)));
        manifest.files.emplace_back("metrics.csv");
    }
    if (run.params) {
        if (!run.spec) {
            throw PersistError("parameters need a network spec to be persisted");
        }
        write_atomic(dir / kParamsFile, encode_params(*run.params));
        manifest.files.emplace_back(kParamsFile);
    }

    json accuracy = json::array();
    for (std::size_t k = 0; k < run.accuracy.tasks(); ++k) {
        json row = json::array();
        for (std::size_t j = 0; j <= k; ++j) {
            row.push_back(run.accuracy.populated(k, j) ? json(run.accuracy.at(k, j)) : json(nullptr));
        }
        accuracy.push_back(std::move(row));
    }
    json config = json::object();
    for (const auto& [k, v] : to_key_values(run.config)) {
        config[k] = v;
    }
    json doc{{"schema_version", manifest.schema_version},
             {"prng", std::string(Rng::kAlgorithm)},
             {"seed", run.config.seed},
             {"config", std::move(config)},
             {"accuracy", std::move(accuracy)},
             {"baseline", run.baseline},
             {"files", manifest.files}};
    if (run.spec) {
        doc["spec"] = spec_to_json(*run.spec);
    }
    write_atomic(dir / kManifestFile, doc.dump(2) + "\n");
    return manifest;
}

RunArtifacts load_results(const fs::path& dir) {
    const fs::path manifest_path = dir / kManifestFile;
    if (!fs::exists(manifest_path)) {
        throw PersistError("no manifest in " + dir.string());
    }
    json doc;
    try {
        doc = json::parse(read_text(manifest_path));
    } catch (const json::exception& e) {
        throw PersistError("malformed manifest: " + std::string(e.what()));
    }
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kSchemaVersion) {
            throw PersistError("manifest schema version " + std::to_string(version) +
                               " (expected " + std::to_string(kSchemaVersion) + ")");
        }
        RunArtifacts run;
        KeyValues kv;
        for (const auto& [k, v] : doc.at("config").items()) {
            kv.emplace_back(k, v.get<std::string>());
        }
        run.config = apply_key_values(ExperimentConfig{}, kv);

        const json& rows = doc.at("accuracy");
        run.accuracy = AccuracyMatrix(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t j = 0; j < rows[k].size() && j <= k; ++j) {
                if (!rows[k][j].is_null()) {
                    run.accuracy.set(k, j, rows[k][j].get<double>());
                }
            }
        }
        run.baseline = doc.at("baseline").get<std::vector<double>>();
        if (doc.contains("spec")) {
            run.spec = spec_from_json(doc.at("spec"));
            if (fs::exists(dir / kParamsFile)) {
                run.params = decode_params(read_text(dir / kParamsFile), *run.spec);
            }
        }
        return run;
    } catch (const json::exception& e) {
        throw PersistError("malformed manifest: " + std::string(e.what()));
    } catch (const std::invalid_argument& e) {
        throw PersistError("inconsistent manifest: " + std::string(e.what()));
    }
}

}  // namespace cplab::harness
