#pragma once

// SDFM checkpoint: magic "SDFM", version u32, length-prefixed key-value
// config text, then a tensor table (count u32; per tensor: name length u16,
// name bytes, ndim u8, dims u32 each, f32 little-endian data).

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core/params.hpp"
#include "core/tensor.hpp"

namespace sleepdiff {

constexpr uint32_t kCheckpointVersion = 1;

enum class CheckpointStatus {
    ok = 0,
    bad_magic,
    bad_version,
    truncated,
    unknown_tensor,
    shape_mismatch,
    io_error,
};

struct CheckpointError : std::runtime_error {
    CheckpointStatus status;
    CheckpointError(CheckpointStatus s, const std::string& m) : std::runtime_error(m), status(s) {}
};

namespace ckpt_detail {

template <typename U>
void put(std::ostream& os, U v) {
    static_assert(std::is_trivially_copyable_v<U>);
    char buf[sizeof(U)];
    std::memcpy(buf, &v, sizeof(U));
    os.write(buf, sizeof(U));
}

template <typename U>
U take(std::istream& is) {
    char buf[sizeof(U)];
    is.read(buf, sizeof(U));
    if (is.gcount() != sizeof(U))
        throw CheckpointError(CheckpointStatus::truncated, "checkpoint truncated");
    U v;
    std::memcpy(&v, buf, sizeof(U));
    return v;
}

inline std::string take_bytes(std::istream& is, size_t n) {
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(is.gcount()) != n)
        throw CheckpointError(CheckpointStatus::truncated, "checkpoint truncated");
    return s;
}

}  // namespace ckpt_detail

// Config blob is plain "key=value" lines.
inline std::string encode_config(const std::map<std::string, std::string>& kv) {
    std::string s;
    for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
    return s;
}

inline std::map<std::string, std::string> decode_config(const std::string& blob) {
    std::map<std::string, std::string> kv;
    std::istringstream is(blob);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CheckpointError(CheckpointStatus::io_error, "bad config line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

template <typename T>
void save_checkpoint(const ParamStore<T>& store, const std::map<std::string, std::string>& config,
                     const std::string& path) {
    using namespace ckpt_detail;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError(CheckpointStatus::io_error, "cannot open for write: " + path);

    os.write("SDFM", 4);
    put<uint32_t>(os, kCheckpointVersion);
    std::string blob = encode_config(config);
    put<uint32_t>(os, static_cast<uint32_t>(blob.size()));
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));

    put<uint32_t>(os, static_cast<uint32_t>(store.size()));
    for (const auto& e : store.entries()) {
        put<uint16_t>(os, static_cast<uint16_t>(e.name.size()));
        os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        const auto& t = e.var->val;
        put<uint8_t>(os, static_cast<uint8_t>(t.shape.size()));
        for (int dim : t.shape) put<uint32_t>(os, static_cast<uint32_t>(dim));
        for (size_t i = 0; i < t.numel(); ++i) put<float>(os, static_cast<float>(t[i]));
    }
    if (!os) throw CheckpointError(CheckpointStatus::io_error, "write failed: " + path);
}

struct LoadedCheckpoint {
    std::map<std::string, std::string> config;
    std::vector<std::pair<std::string, Tensor<float>>> tensors;
};

inline LoadedCheckpoint read_checkpoint(const std::string& path) {
    using namespace ckpt_detail;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError(CheckpointStatus::io_error, "cannot open: " + path);

    std::string magic = take_bytes(is, 4);
    if (magic != "SDFM")
        throw CheckpointError(CheckpointStatus::bad_magic, "bad checkpoint magic");
    uint32_t version = take<uint32_t>(is);
    if (version != kCheckpointVersion)
        throw CheckpointError(CheckpointStatus::bad_version,
                              "unsupported checkpoint version " + std::to_string(version));

    LoadedCheckpoint out;
    uint32_t blob_len = take<uint32_t>(is);
    out.config = decode_config(take_bytes(is, blob_len));

    uint32_t count = take<uint32_t>(is);
    out.tensors.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t name_len = take<uint16_t>(is);
        std::string name = take_bytes(is, name_len);
        uint8_t ndim = take<uint8_t>(is);
        std::vector<int> shape(ndim);
        size_t numel = 1;
        for (auto& d : shape) {
            d = static_cast<int>(take<uint32_t>(is));
            numel *= static_cast<size_t>(d);
        }
        Tensor<float> t(shape);
        for (size_t k = 0; k < numel; ++k) t[k] = take<float>(is);
        out.tensors.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

// Copies loaded tensors into an existing store. Every loaded name must exist
// with a matching shape; every store parameter must be covered.
template <typename T>
void apply_checkpoint(ParamStore<T>& store, const LoadedCheckpoint& ck) {
    size_t applied = 0;
    for (const auto& [name, t] : ck.tensors) {
        if (!store.has(name))
            throw CheckpointError(CheckpointStatus::unknown_tensor, "unknown tensor: " + name);
        auto var = store.get(name);
        if (var->val.shape != t.shape)
            throw CheckpointError(CheckpointStatus::shape_mismatch, "shape mismatch: " + name);
        for (size_t i = 0; i < t.numel(); ++i) var->val[i] = static_cast<T>(t[i]);
        ++applied;
    }
    if (applied != store.size())
        throw CheckpointError(CheckpointStatus::shape_mismatch,
                              "checkpoint covers " + std::to_string(applied) + " of " +
                                  std::to_string(store.size()) + " parameters");
}

}  // namespace sleepdiff
