#include "cplab/harness/config.hpp"

#include "cplab/harness/idx.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cplab::harness {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::none: return "none";
        case Method::ewc: return "ewc";
        case Method::si: return "si";
        case Method::mas: return "mas";
        case Method::rwalk: return "rwalk";
    }
    return "none";
}

std::string_view to_string(WlmMode m) {
    switch (m) {
        case WlmMode::off: return "off";
        case WlmMode::cpr: return "cpr";
        case WlmMode::ls: return "ls";
    }
    return "off";
}

Method parse_method(std::string_view text) {
    if (text == "none") return Method::none;
    if (text == "ewc") return Method::ewc;
    if (text == "si") return Method::si;
    if (text == "mas") return Method::mas;
    if (text == "rwalk") return Method::rwalk;
    throw ConfigError("unknown method '" + std::string(text) + "'");
}

WlmMode parse_wlm(std::string_view text) {
    if (text == "off") return WlmMode::off;
    if (text == "cpr") return WlmMode::cpr;
    if (text == "ls") return WlmMode::ls;
    throw ConfigError("unknown wlm mode '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
    if (!(lambda >= 0.0) || !(beta >= 0.0)) {
        throw ConfigError("lambda and beta must be nonnegative");
    }
    if (!(ls_alpha >= 0.0 && ls_alpha <= 1.0)) {
        throw ConfigError("ls_alpha must lie in [0, 1]");
    }
    if (epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be at least 1");
    }
    if (!(si_damping > 0.0)) {
        throw ConfigError("si_damping must be positive");
    }
    if (!(rwalk_alpha > 0.0 && rwalk_alpha < 1.0)) {
        throw ConfigError("rwalk_alpha must lie in (0, 1)");
    }
    for (std::size_t h : hidden_dims) {
        if (h == 0) {
            throw ConfigError("hidden_dims entries must be positive");
        }
    }
    try {
        optimizer.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig ExperimentConfig::desk_defaults() {
    ExperimentConfig c;
    c.hidden_dims = {256, 256};
    c.epochs = 2;
    c.batch_size = 128;
    c.optimizer = nn::OptimizerSettings{};
    c.generator.kind = GeneratorKind::permuted;
    c.generator.num_tasks = 10;
    c.generator.rotation_step = 10.0;
    return c;
}

ExperimentConfig ExperimentConfig::published_defaults(Method method) {
    ExperimentConfig c = desk_defaults();
    c.method = method;
    c.wlm = WlmMode::cpr;
    switch (method) {
        case Method::none: c.lambda = 0.0; c.beta = 0.5; break;
        case Method::ewc: c.lambda = 12000.0; c.beta = 0.5; break;
        case Method::si: c.lambda = 1.0; c.beta = 0.8; break;
        case Method::mas: c.lambda = 3.0; c.beta = 0.5; break;
        case Method::rwalk: c.lambda = 8.0; c.beta = 0.9; break;
    }
    return c;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a nonnegative integer");
    }
    return out;
}

std::vector<std::size_t> to_dims(const std::string& key, const std::string& v) {
    std::vector<std::size_t> dims;
    if (trim(v).empty()) {
        return dims;
    }
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        dims.push_back(static_cast<std::size_t>(to_u64(key, std::string(trim(item)))));
    }
    return dims;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return out;
}

ExperimentConfig apply_key_values(ExperimentConfig c, const KeyValues& kv) {
    for (const auto& [key, v] : kv) {
        auto& g = c.generator;
        if (key == "method") c.method = parse_method(v);
        else if (key == "lambda") c.lambda = to_double(key, v);
        else if (key == "beta") c.beta = to_double(key, v);
        else if (key == "wlm") c.wlm = parse_wlm(v);
        else if (key == "ls_alpha") c.ls_alpha = to_double(key, v);
        else if (key == "epochs") c.epochs = to_u64(key, v);
        else if (key == "batch_size") c.batch_size = to_u64(key, v);
        else if (key == "optimizer") {
            if (v == "adam") c.optimizer.mode = nn::OptimizerMode::adam;
            else if (v == "sgd") c.optimizer.mode = nn::OptimizerMode::sgd;
            else throw ConfigError("unknown optimizer '" + v + "'");
        }
        else if (key == "learning_rate") c.optimizer.learning_rate = to_double(key, v);
        else if (key == "adam_beta1") c.optimizer.beta1 = to_double(key, v);
        else if (key == "adam_beta2") c.optimizer.beta2 = to_double(key, v);
        else if (key == "adam_epsilon") c.optimizer.epsilon = to_double(key, v);
        else if (key == "hidden_dims") c.hidden_dims = to_dims(key, v);
        else if (key == "generator") {
            try {
                g.kind = parse_generator(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        else if (key == "num_tasks") g.num_tasks = to_u64(key, v);
        else if (key == "classes_per_task") g.classes_per_task = to_u64(key, v);
        else if (key == "input_dim") g.input_dim = to_u64(key, v);
        else if (key == "separation") g.separation = to_double(key, v);
        else if (key == "train_per_class") g.train_per_class = to_u64(key, v);
        else if (key == "test_per_class") g.test_per_class = to_u64(key, v);
        else if (key == "rotation_step") g.rotation_step = to_double(key, v);
        else if (key == "validation_fraction") g.validation_fraction = to_double(key, v);
        else if (key == "train_images") c.train_images = v;
        else if (key == "train_labels") c.train_labels = v;
        else if (key == "test_images") c.test_images = v;
        else if (key == "test_labels") c.test_labels = v;
        else if (key == "source_limit") c.source_limit = to_u64(key, v);
        else if (key == "si_damping") c.si_damping = to_double(key, v);
        else if (key == "rwalk_alpha") c.rwalk_alpha = to_double(key, v);
        else if (key == "accumulation") {
            if (v == "sum") c.accumulation = cl::Accumulation::sum;
            else if (v == "replace") c.accumulation = cl::Accumulation::replace;
            else throw ConfigError("unknown accumulation '" + v + "'");
        }
        else if (key == "seed") c.seed = to_u64(key, v);
        else if (key == "output_dir") c.output_dir = v;
        else throw ConfigError("unknown config key '" + key + "'");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return apply_key_values(std::move(base), parse_key_values(buf.str()));
}

KeyValues to_key_values(const ExperimentConfig& c) {
    std::string dims;
    for (std::size_t i = 0; i < c.hidden_dims.size(); ++i) {
        dims += (i ? "," : "") + std::to_string(c.hidden_dims[i]);
    }
    const auto& g = c.generator;
    return {
        {"method", std::string(to_string(c.method))},
        {"lambda", format_double(c.lambda)},
        {"beta", format_double(c.beta)},
        {"wlm", std::string(to_string(c.wlm))},
        {"ls_alpha", format_double(c.ls_alpha)},
        {"epochs", std::to_string(c.epochs)},
        {"batch_size", std::to_string(c.batch_size)},
        {"optimizer", c.optimizer.mode == nn::OptimizerMode::adam ? "adam" : "sgd"},
        {"learning_rate", format_double(c.optimizer.learning_rate)},
        {"adam_beta1", format_double(c.optimizer.beta1)},
        {"adam_beta2", format_double(c.optimizer.beta2)},
        {"adam_epsilon", format_double(c.optimizer.epsilon)},
        {"hidden_dims", dims},
        {"generator", std::string(to_string(g.kind))},
        {"num_tasks", std::to_string(g.num_tasks)},
        {"classes_per_task", std::to_string(g.classes_per_task)},
        {"input_dim", std::to_string(g.input_dim)},
        {"separation", format_double(g.separation)},
        {"train_per_class", std::to_string(g.train_per_class)},
        {"test_per_class", std::to_string(g.test_per_class)},
        {"rotation_step", format_double(g.rotation_step)},
        {"validation_fraction", format_double(g.validation_fraction)},
        {"train_images", c.train_images},
        {"train_labels", c.train_labels},
        {"test_images", c.test_images},
        {"test_labels", c.test_labels},
        {"source_limit", std::to_string(c.source_limit)},
        {"si_damping", format_double(c.si_damping)},
        {"rwalk_alpha", format_double(c.rwalk_alpha)},
        {"accumulation", c.accumulation == cl::Accumulation::sum ? "sum" : "replace"},
        {"seed", std::to_string(c.seed)},
        {"output_dir", c.output_dir},
    };
}

std::string format_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k + " = " + v + "\n";
    }
    return out;
}

void attach_idx_source(ExperimentConfig& config) {
    if (config.train_images.empty()) {
        return;
    }
    if (config.train_labels.empty() || config.test_images.empty() || config.test_labels.empty()) {
        throw ConfigError("IDX source needs train_images, train_labels, test_images, test_labels");
    }
    IdxDataset train = load_idx(config.train_images, config.train_labels);
    IdxDataset test = load_idx(config.test_images, config.test_labels);
    if (train.inputs.cols() != test.inputs.cols()) {
        throw ConfigError("IDX train and test images differ in size");
    }
    auto limit = [&](IdxDataset& d) {
        if (config.source_limit > 0 && d.labels.size() > config.source_limit) {
            d.inputs.conservativeResize(static_cast<Eigen::Index>(config.source_limit), Eigen::NoChange);
            d.labels.resize(config.source_limit);
        }
    };
    limit(train);
    limit(test);
    auto src = std::make_shared<SourceData>();
    int top = 0;
    for (int y : train.labels) top = std::max(top, y);
    for (int y : test.labels) top = std::max(top, y);
    src->num_classes = static_cast<std::size_t>(top) + 1;
    src->image_rows = train.rows;
    src->image_cols = train.cols;
    src->train = nn::Batch{std::move(train.inputs), std::move(train.labels)};
    src->test = nn::Batch{std::move(test.inputs), std::move(test.labels)};
    config.generator.source = std::move(src);
}

}  // namespace cplab::harness
