#include "svi/config.hpp"

#include "svi/error.hpp"

#include <fstream>
#include <numbers>
#include <regex>
#include <set>

namespace svi {

using nlohmann::json;

json default_config() {
    return json::parse(R"({
  "seed": 0,
  "data": {
    "root": "data",
    "source_dir": "",
    "noise_dir": "",
    "train_clips": 4,
    "val_clips": 0,
    "frames": 8,
    "height": 64,
    "width": 64,
    "noise_patches": 8,
    "stroke": {
      "num_strokes": [1, 5],
      "vertices": [4, 12],
      "brush_width": [10.0, 40.0],
      "segment_length": [20.0, 64.0],
      "max_turn_deg": 60.0,
      "reference_size": 256
    },
    "smooth": {"iterations": 4, "radius": 2, "sigma": 1.0},
    "jitter": {"max_translation": 1.5, "max_rotation_deg": 1.0, "drift": [0.0, 0.0], "rotation_drift_deg": 0.0}
  },
  "model": {"channels": 32, "reference_radius": 1, "dca_blocks": 4, "encoder_blocks": 4, "decoder_blocks": 2},
  "loss": {"lambda_f": 2.5, "lambda_s": 0.25, "lambda_c": 1.0, "lambda_y": 1.0},
  "optim": {"learning_rate": 1e-4, "beta1": 0.9, "beta2": 0.999, "batch_size": 4, "total_steps": 2000, "crop_size": 64},
  "train": {"dataset": "data", "split": "train", "checkpoint_dir": "runs/desk", "checkpoint_every": 500,
            "resume": true, "threshold": 0.5},
  "infer": {"checkpoint": "runs/desk/latest.ckpt", "input": "data", "split": "train", "annotations": "",
            "annotate": [0], "output": "results", "threshold": 0.5, "references": "raw"},
  "eval": {"results": "results", "gt": "data", "output": "eval"},
  "serve": {"checkpoint": "runs/desk/latest.ckpt", "host": "127.0.0.1", "port": 8080, "workdir": "sessions",
            "static_dir": "", "threshold": 0.5, "references": "raw"}
})");
}

namespace {

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) {
        // an integer default only accepts integers
        return !a.is_number_integer() || b.is_number_integer();
    }
    return a.type() == b.type();
}

/// Merges `patch` into `base`, recording unknown or mistyped keys.
void merge_into(json& base, const json& patch, const std::string& prefix, std::vector<std::string>& bad) {
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const auto key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) {
            bad.push_back(key);
            continue;
        }
        auto& slot = base[it.key()];
        if (slot.is_object()) {
            if (!it->is_object()) {
                bad.push_back(key);
                continue;
            }
            merge_into(slot, *it, key, bad);
        } else if (!same_kind(slot, *it)) {
            bad.push_back(key);
        } else {
            slot = *it;
        }
    }
}

std::string join(const std::vector<std::string>& keys) {
    std::string out;
    for (const auto& k : keys) {
        out += (out.empty() ? "" : ", ") + k;
    }
    return out;
}

infer::PropagateOptions propagate_options(const json& section) {
    infer::PropagateOptions o;
    o.threshold = section.at("threshold").get<double>();
    o.references = section.at("references").get<std::string>() == "completed" ? infer::ReferenceSource::Completed
                                                                               : infer::ReferenceSource::Raw;
    return o;
}

}  // namespace

ExperimentConfig::ExperimentConfig() : tree_(default_config()) {}

void ExperimentConfig::merge(const json& patch) {
    if (!patch.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    std::vector<std::string> bad;
    auto next = tree_;
    merge_into(next, patch, "", bad);
    if (!bad.empty()) {
        throw ConfigError(bad, "unknown or mistyped configuration keys: " + join(bad));
    }
    tree_ = std::move(next);
}

void ExperimentConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path, "cannot read configuration file");
    }
    json patch;
    try {
        patch = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw IoError(path, std::string("malformed configuration (") + e.what() + ")");
    }
    merge(patch);
}

void ExperimentConfig::apply_overrides(const std::vector<std::string>& overrides) {
    json patch = json::object();
    std::vector<std::string> bad;
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            bad.push_back(item);
            continue;
        }
        const auto key = item.substr(0, eq);
        const auto text = item.substr(eq + 1);
        json value = json::parse(text, nullptr, false);
        if (value.is_discarded()) {
            value = text;
        }
        json* node = &patch;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
    if (!bad.empty()) {
        throw ConfigError(bad, "overrides must look like key=value: " + join(bad));
    }
    merge(patch);
}

void ExperimentConfig::set_seed(std::uint64_t seed) { tree_["seed"] = seed; }

std::uint64_t ExperimentConfig::seed() const { return tree_.at("seed").get<std::uint64_t>(); }

SynthConfig ExperimentConfig::synth() const {
    const auto& d = tree_.at("data");
    SynthConfig c;
    c.root = d.at("root").get<std::string>();
    c.source_dir = d.at("source_dir").get<std::string>();
    c.noise_dir = d.at("noise_dir").get<std::string>();
    c.train_clips = d.at("train_clips").get<std::int64_t>();
    c.val_clips = d.at("val_clips").get<std::int64_t>();
    c.frames = d.at("frames").get<std::int64_t>();
    c.height = d.at("height").get<std::int64_t>();
    c.width = d.at("width").get<std::int64_t>();
    c.noise_patches = d.at("noise_patches").get<std::int64_t>();
    const auto& s = d.at("stroke");
    c.stroke.num_strokes = {s.at("num_strokes").at(0).get<std::int64_t>(), s.at("num_strokes").at(1).get<std::int64_t>()};
    c.stroke.vertices_per_stroke = {s.at("vertices").at(0).get<std::int64_t>(), s.at("vertices").at(1).get<std::int64_t>()};
    c.stroke.brush_width = {s.at("brush_width").at(0).get<double>(), s.at("brush_width").at(1).get<double>()};
    c.stroke.segment_length = {s.at("segment_length").at(0).get<double>(), s.at("segment_length").at(1).get<double>()};
    c.stroke.max_turn_angle = s.at("max_turn_deg").get<double>() * std::numbers::pi / 180.0;
    c.stroke.reference_size = s.at("reference_size").get<std::int64_t>();
    c.stroke.seed = seed();
    const auto& m = d.at("smooth");
    c.smooth.iterations = m.at("iterations").get<int>();
    c.smooth.kernel_radius = m.at("radius").get<int>();
    c.smooth.kernel_sigma = m.at("sigma").get<double>();
    const auto& j = d.at("jitter");
    c.jitter.max_translation = j.at("max_translation").get<double>();
    c.jitter.max_rotation_deg = j.at("max_rotation_deg").get<double>();
    c.jitter.drift = {j.at("drift").at(0).get<double>(), j.at("drift").at(1).get<double>()};
    c.jitter.rotation_drift_deg = j.at("rotation_drift_deg").get<double>();
    return c;
}

model::ModelConfig ExperimentConfig::model() const { return model::ModelConfig::from_json(tree_.at("model")); }

train::LossWeights ExperimentConfig::loss() const { return train::LossWeights::from_json(tree_.at("loss")); }

train::OptimConfig ExperimentConfig::optim() const {
    auto o = train::OptimConfig::from_json(tree_.at("optim"));
    o.seed = seed();
    return o;
}

train::TrainLoopConfig ExperimentConfig::train_loop() const {
    const auto& t = tree_.at("train");
    train::TrainLoopConfig c;
    c.dataset_root = t.at("dataset").get<std::string>();
    c.split = t.at("split").get<std::string>();
    c.checkpoint_dir = t.at("checkpoint_dir").get<std::string>();
    c.checkpoint_every = t.at("checkpoint_every").get<std::int64_t>();
    c.resume = t.at("resume").get<bool>();
    return c;
}

train::CycleConfig ExperimentConfig::cycle() const {
    train::CycleConfig c;
    c.threshold = tree_.at("train").at("threshold").get<double>();
    return c;
}

InferConfig ExperimentConfig::infer() const {
    const auto& s = tree_.at("infer");
    InferConfig c;
    c.checkpoint = s.at("checkpoint").get<std::string>();
    c.input = s.at("input").get<std::string>();
    c.split = s.at("split").get<std::string>();
    c.annotations = s.at("annotations").get<std::string>();
    c.annotate = s.at("annotate").get<std::vector<std::int64_t>>();
    c.output = s.at("output").get<std::string>();
    c.options = propagate_options(s);
    return c;
}

EvalConfig ExperimentConfig::eval() const {
    const auto& s = tree_.at("eval");
    return {s.at("results").get<std::string>(), s.at("gt").get<std::string>(), s.at("output").get<std::string>()};
}

ServeConfig ExperimentConfig::serve() const {
    const auto& s = tree_.at("serve");
    ServeConfig c;
    c.checkpoint = s.at("checkpoint").get<std::string>();
    c.host = s.at("host").get<std::string>();
    c.port = s.at("port").get<int>();
    c.workdir = s.at("workdir").get<std::string>();
    c.static_dir = s.at("static_dir").get<std::string>();
    c.options = propagate_options(s);
    return c;
}

void ExperimentConfig::validate() const {
    std::set<std::string> bad;
    const auto collect = [&](const std::string& prefix, const auto& check) {
        try {
            check();
        } catch (const std::invalid_argument& e) {
            static const std::regex key_re(R"(\b([a-z_]+(?:\.[a-z_]+)+))");
            const std::string msg = e.what();
            bool found = false;
            for (std::sregex_iterator it(msg.begin(), msg.end(), key_re), end; it != end; ++it) {
                auto key = (*it)[1].str();
                key = key.rfind(prefix, 0) == 0 ? key : prefix + key.substr(key.find('.') + 1);
                // struct field names that differ from their config keys
                static const std::pair<const char*, const char*> renames[] = {
                    {"vertices_per_stroke", "vertices"}, {"max_turn_angle", "max_turn_deg"},
                    {"kernel_radius", "radius"}, {"kernel_sigma", "sigma"}};
                for (const auto& [from, to] : renames) {
                    const auto pos = key.find(from);
                    if (pos != std::string::npos) {
                        key.replace(pos, std::string(from).size(), to);
                    }
                }
                bad.insert(key);
                found = true;
            }
            if (!found) {
                bad.insert(prefix.substr(0, prefix.size() - 1));
            }
        }
    };
    const auto s = synth();
    collect("data.stroke.", [&] { s.stroke.validate(); });
    collect("data.smooth.", [&] { s.smooth.validate(); });
    collect("data.jitter.", [&] { s.jitter.validate(); });
    const std::pair<const char*, std::int64_t> sizes[] = {
        {"data.train_clips", s.train_clips}, {"data.frames", s.frames - 1}, {"data.noise_patches", s.noise_patches}};
    for (const auto& [key, value] : sizes) {
        if (value < 1) {
            bad.insert(key);
        }
    }
    if (s.val_clips < 0) {
        bad.insert("data.val_clips");
    }
    if (s.height < 32) {
        bad.insert("data.height");
    }
    if (s.width < 32) {
        bad.insert("data.width");
    }
    collect("model.", [&] { model().validate(); });
    collect("loss.", [&] { loss().validate(); });
    collect("optim.", [&] { optim().validate(); });
    if (train_loop().checkpoint_every < 1) {
        bad.insert("train.checkpoint_every");
    }
    for (const char* section : {"train", "infer", "serve"}) {
        const auto t = tree_.at(section).at("threshold").get<double>();
        if (!(t > 0.0 && t < 1.0)) {
            bad.insert(std::string(section) + ".threshold");
        }
    }
    for (const char* section : {"infer", "serve"}) {
        const auto r = tree_.at(section).at("references").get<std::string>();
        if (r != "raw" && r != "completed") {
            bad.insert(std::string(section) + ".references");
        }
    }
    if (infer().annotate.empty() && infer().annotations.empty()) {
        bad.insert("infer.annotate");
    }
    const auto port = tree_.at("serve").at("port").get<int>();
    if (port < 0 || port > 65535) {
        bad.insert("serve.port");
    }
    if (!bad.empty()) {
        std::vector<std::string> keys(bad.begin(), bad.end());
        throw ConfigError(keys, "invalid configuration values: " + join(keys));
    }
}

void ExperimentConfig::write_snapshot(const std::filesystem::path& path) const {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path, "cannot write configuration snapshot");
    }
    out << tree_.dump(2) << '\n';
}

}  // namespace svi
