#include <cstring>
#include <fstream>
#include <stdexcept>

#include "vclab/model.hpp"

#include "json.hpp"

// Checkpoint layout (little-endian):
//   "VCLB" magic | u8 version (=1) | u32 json length | config+seed JSON |
//   u32 tensor count | per tensor:
//     u16 name length | name | u8 ndim | u32 dims[ndim] | f64 values
// f64 payloads are raw IEEE-754 bits, so a save/load cycle is bit-exact.

namespace vclab {

namespace {

constexpr char kMagic[4] = {'V', 'C', 'L', 'B'};
constexpr uint8_t kVersion = 1;

void put_u16(std::ostream& os, uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    os.write(b, 2);
}

void put_u32(std::ostream& os, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_f64(std::ostream& os, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    os.write(b, 8);
}

uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

nlohmann::json config_json(const ModelConfig& c, uint64_t seed) {
    nlohmann::json j;
    j["n_layers"] = c.n_layers;
    j["d_model"] = c.d_model;
    j["n_heads"] = c.n_heads;
    j["d_ff"] = c.d_ff;
    j["vocab_size"] = c.vocab_size;
    j["max_seq"] = c.max_seq;
    j["visual_len"] = c.visual_len;
    j["d_patch"] = c.d_patch;
    j["n_attrs"] = c.n_attrs;
    j["seed"] = seed;
    return j;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    os.put(static_cast<char>(kVersion));
    const std::string cfg = config_json(model.config, model.seed).dump();
    put_u32(os, static_cast<uint32_t>(cfg.size()));
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

    const auto tensors = model.named_tensors();
    put_u32(os, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        put_u16(os, static_cast<uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(static_cast<char>(t.shape().size()));
        for (int d : t.shape()) put_u32(os, static_cast<uint32_t>(d));
        for (double v : t.values()) put_f64(os, v);
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    const int version = is.get();
    if (version != kVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    const uint32_t cfg_len = get_u32(is);
    std::string cfg_text(cfg_len, '\0');
    is.read(cfg_text.data(), cfg_len);
    const auto j = nlohmann::json::parse(cfg_text);

    ModelConfig cfg;
    cfg.n_layers = j.at("n_layers").get<int>();
    cfg.d_model = j.at("d_model").get<int>();
    cfg.n_heads = j.at("n_heads").get<int>();
    cfg.d_ff = j.at("d_ff").get<int>();
    cfg.vocab_size = j.at("vocab_size").get<int>();
    cfg.max_seq = j.at("max_seq").get<int>();
    cfg.visual_len = j.at("visual_len").get<int>();
    cfg.d_patch = j.at("d_patch").get<int>();
    cfg.n_attrs = j.at("n_attrs").get<int>();
    Model model = build_model(cfg, j.at("seed").get<uint64_t>());

    const uint32_t n_tensors = get_u32(is);
    auto tensors = model.named_tensors();
    if (n_tensors != tensors.size()) {
        throw std::runtime_error("checkpoint holds " + std::to_string(n_tensors) +
                                 " tensors, model expects " + std::to_string(tensors.size()));
    }
    for (auto& [name, t] : tensors) {
        const uint16_t name_len = get_u16(is);
        std::string got(name_len, '\0');
        is.read(got.data(), name_len);
        if (got != name) {
            throw std::runtime_error("checkpoint tensor '" + got + "' where '" + name +
                                     "' expected");
        }
        const int ndim = is.get();
        Shape shape(static_cast<size_t>(ndim));
        for (auto& d : shape) d = static_cast<int>(get_u32(is));
        if (shape != t.shape()) {
            throw std::runtime_error("checkpoint tensor '" + name + "' has shape " +
                                     shape_str(shape) + ", expected " + shape_str(t.shape()));
        }
        for (auto& v : t.values()) v = get_f64(is);
        if (!is) throw std::runtime_error("checkpoint truncated while reading '" + name + "'");
    }
    return model;
}

}  // namespace vclab
