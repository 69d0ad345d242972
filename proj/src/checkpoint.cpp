#include "ssrgan/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ssrgan/errors.hpp"
#include "ssrgan/png.hpp" // crc32

namespace ssrgan {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'R', 'G'};

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint32_t read_u32_le(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

std::uint64_t read_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    // payload first, so the directory knows offsets and CRCs
    std::vector<std::uint8_t> payload;
    nlohmann::json directory = nlohmann::json::array();
    for (const auto& [name, tensor] : ckpt.tensors) {
        const std::uint64_t offset = payload.size();
        for (std::size_t i = 0; i < tensor.size(); ++i)
            append_u32(payload, std::bit_cast<std::uint32_t>(tensor[i]));
        const std::uint64_t length = payload.size() - offset;
        const std::uint32_t crc =
            png::crc32(std::span(payload.data() + offset, std::size_t(length)));
        directory.push_back({{"name", name},
                             {"dtype", 0},
                             {"rank", tensor.rank()},
                             {"extents", tensor.shape()},
                             {"offset", offset},
                             {"length", length},
                             {"crc32", crc}});
    }

    nlohmann::json header{{"config", to_json(ckpt.config)},
                          {"epoch", ckpt.epoch},
                          {"rng_state", ckpt.rng_state},
                          {"adam_step_g", ckpt.adam_step_g},
                          {"adam_step_d", ckpt.adam_step_d},
                          {"tensors", directory}};
    const std::string header_str = header.dump();

    std::vector<std::uint8_t> file;
    file.reserve(16 + header_str.size() + payload.size());
    file.insert(file.end(), kMagic, kMagic + 4);
    append_u32(file, Checkpoint::kVersion);
    append_u64(file, header_str.size());
    file.insert(file.end(), header_str.begin(), header_str.end());
    file.insert(file.end(), payload.begin(), payload.end());

    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(file.data()), long(file.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    std::vector<std::uint8_t> file((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

    if (file.size() < 16 || std::memcmp(file.data(), kMagic, 4) != 0)
        throw CheckpointError(path.string() + ": bad magic");
    const std::uint32_t version = read_u32_le(file.data() + 4);
    if (version != Checkpoint::kVersion)
        throw CheckpointError(path.string() + ": unsupported version " +
                              std::to_string(version));
    const std::uint64_t header_len = read_u64_le(file.data() + 8);
    if (16 + header_len > file.size())
        throw CheckpointError(path.string() + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(file.begin() + 16, file.begin() + 16 + long(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(path.string() + ": corrupt header: " + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.config = config_from_json(header.at("config"));
        ckpt.epoch = header.at("epoch").get<std::uint64_t>();
        const auto rng = header.at("rng_state");
        for (std::size_t i = 0; i < 4; ++i) ckpt.rng_state[i] = rng.at(i).get<std::uint64_t>();
        ckpt.adam_step_g = header.at("adam_step_g").get<std::int64_t>();
        ckpt.adam_step_d = header.at("adam_step_d").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(path.string() + ": bad header field: " + e.what());
    }

    const std::uint8_t* payload = file.data() + 16 + header_len;
    const std::uint64_t payload_size = file.size() - 16 - header_len;

    for (const auto& entry : header.at("tensors")) {
        std::string name;
        try {
            name = entry.at("name").get<std::string>();
            if (entry.at("dtype").get<int>() != 0)
                throw CheckpointError(path.string() + ": tensor " + name +
                                      ": unsupported dtype");
            const auto extents = entry.at("extents").get<std::vector<std::size_t>>();
            if (extents.size() != entry.at("rank").get<std::size_t>())
                throw CheckpointError(path.string() + ": tensor " + name + ": rank mismatch");
            const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
            const std::uint64_t length = entry.at("length").get<std::uint64_t>();
            const std::uint32_t want_crc = entry.at("crc32").get<std::uint32_t>();

            const std::uint64_t numel = shape_numel(extents);
            if (length != numel * 4)
                throw CheckpointError(path.string() + ": tensor " + name + ": size mismatch (" +
                                      std::to_string(length) + " bytes for " +
                                      std::to_string(numel) + " elements)");
            if (offset + length > payload_size)
                throw CheckpointError(path.string() + ": tensor " + name +
                                      ": payload out of range");
            if (png::crc32(std::span(payload + offset, std::size_t(length))) != want_crc)
                throw CheckpointError(path.string() + ": tensor " + name + ": CRC mismatch");

            Tensor<float> tensor(extents);
            for (std::size_t i = 0; i < numel; ++i)
                tensor[i] = std::bit_cast<float>(read_u32_le(payload + offset + 4 * i));
            ckpt.tensors.emplace_back(std::move(name), std::move(tensor));
        } catch (const nlohmann::json::exception& e) {
            throw CheckpointError(path.string() + ": bad directory entry: " + e.what());
        }
    }
    return ckpt;
}

} // namespace ssrgan
