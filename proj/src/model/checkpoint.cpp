#include "svi/model/checkpoint.hpp"

#include "svi/error.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace svi::model {
namespace {

constexpr std::array<char, 8> kMagic = {'S', 'V', 'I', 'A', 'R', 'C', 'H', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw IoError(path, "truncated checkpoint");
    }
    return value;
}

std::uint8_t dtype_code(torch::ScalarType t) {
    switch (t) {
        case torch::kFloat32: return 0;
        case torch::kFloat64: return 1;
        case torch::kInt64: return 2;
        default: throw std::invalid_argument("unsupported tensor dtype in checkpoint");
    }
}

torch::ScalarType dtype_from(std::uint8_t code, const std::filesystem::path& path) {
    switch (code) {
        case 0: return torch::kFloat32;
        case 1: return torch::kFloat64;
        case 2: return torch::kInt64;
        default: throw IoError(path, "unknown dtype code in checkpoint");
    }
}

}  // namespace

void write_archive(const std::filesystem::path& path, const TensorArchive& archive) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    // Write to a sibling temp file and rename so readers never see a partial archive.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(tmp, "cannot open checkpoint for writing");
        }
        out.write(kMagic.data(), kMagic.size());
        const auto meta = archive.meta.dump();
        put<std::uint64_t>(out, meta.size());
        out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
        put<std::uint64_t>(out, archive.tensors.size());
        for (const auto& [name, tensor] : archive.tensors) {
            const auto t = tensor.detach().to(torch::kCPU).contiguous();
            put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
            out.write(name.data(), static_cast<std::streamsize>(name.size()));
            put<std::uint8_t>(out, dtype_code(t.scalar_type()));
            put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
            for (auto d : t.sizes()) {
                put<std::int64_t>(out, d);
            }
            out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(t.nbytes()));
        }
        if (!out) {
            throw IoError(tmp, "failed while writing checkpoint");
        }
    }
    std::filesystem::rename(tmp, path);
}

TensorArchive read_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path, "missing checkpoint");
    }
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw IoError(path, "not a checkpoint archive");
    }
    TensorArchive archive;
    const auto meta_len = get<std::uint64_t>(in, path);
    std::string meta(meta_len, '\0');
    if (!in.read(meta.data(), static_cast<std::streamsize>(meta_len))) {
        throw IoError(path, "truncated checkpoint");
    }
    try {
        archive.meta = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception&) {
        throw IoError(path, "corrupt checkpoint metadata");
    }
    const auto count = get<std::uint64_t>(in, path);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = get<std::uint32_t>(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) {
            throw IoError(path, "truncated checkpoint");
        }
        const auto dtype = dtype_from(get<std::uint8_t>(in, path), path);
        const auto ndim = get<std::uint32_t>(in, path);
        std::vector<std::int64_t> dims(ndim);
        for (auto& d : dims) {
            d = get<std::int64_t>(in, path);
        }
        auto t = torch::empty(dims, torch::TensorOptions().dtype(dtype));
        if (!in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(t.nbytes()))) {
            throw IoError(path, "truncated checkpoint");
        }
        archive.tensors.emplace(std::move(name), std::move(t));
    }
    return archive;
}

std::map<std::string, torch::Tensor> model_state(InpaintingModelImpl& model) {
    std::map<std::string, torch::Tensor> state;
    for (const auto& item : model.named_parameters()) {
        state.emplace(item.key(), item.value().detach().clone());
    }
    return state;
}

void load_model_state(InpaintingModelImpl& model, const std::map<std::string, torch::Tensor>& state,
                      const std::string& prefix) {
    torch::NoGradGuard no_grad;
    for (auto& item : model.named_parameters()) {
        const auto it = state.find(prefix + item.key());
        if (it == state.end()) {
            throw std::invalid_argument("checkpoint lacks parameter " + item.key());
        }
        if (it->second.sizes() != item.value().sizes()) {
            throw std::invalid_argument("checkpoint parameter " + item.key() + " has the wrong shape");
        }
        item.value().copy_(it->second);
    }
}

void save_model(const std::filesystem::path& path, InpaintingModelImpl& model, const nlohmann::json& extra) {
    TensorArchive archive;
    archive.meta = extra;
    archive.meta["model"] = model.config().to_json();
    for (auto& [name, t] : model_state(model)) {
        archive.tensors.emplace("model/" + name, t);
    }
    write_archive(path, archive);
}

InpaintingModel load_model(const std::filesystem::path& path) {
    const auto archive = read_archive(path);
    if (!archive.meta.contains("model")) {
        throw IoError(path, "checkpoint has no model configuration");
    }
    InpaintingModel model(ModelConfig::from_json(archive.meta.at("model")));
    const bool is_double = !archive.tensors.empty() &&
                           archive.tensors.begin()->second.scalar_type() == torch::kFloat64;
    if (is_double) {
        model->to(torch::kFloat64);
    }
    load_model_state(*model, archive.tensors, "model/");
    return model;
}

}  // namespace svi::model
