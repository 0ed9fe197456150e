#include "container.hpp"

#include <cstring>
#include <fstream>

namespace sleepdiff {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'P', 'D'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    // Little-endian on all supported targets.
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ContainerError(ContainerStatus::truncated, "SLPD: unexpected end of file");
    return v;
}

}  // namespace

void write_container(const Recording& rec, const std::string& path) {
    for (const auto& e : rec.epochs) {
        if (static_cast<int>(e.eeg.size()) != kSamplesPerEpoch ||
            static_cast<int>(e.eog.size()) != kSamplesPerEpoch)
            throw ContainerError(ContainerStatus::bad_field, "SLPD: epoch sample count != 3000");
        if (e.label >= kNumStages)
            throw ContainerError(ContainerStatus::bad_field, "SLPD: label out of range");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContainerError(ContainerStatus::io_error, "SLPD: cannot open " + path);
    os.write(kMagic, 4);
    put<uint32_t>(os, kVersion);
    put<uint32_t>(os, static_cast<uint32_t>(rec.epochs.size()));
    put<uint8_t>(os, kNumChannels);
    put<uint32_t>(os, kSamplesPerEpoch);
    put<uint16_t>(os, 100);
    put<uint16_t>(os, rec.domain_id);
    for (const auto& e : rec.epochs) put<uint8_t>(os, e.label);
    for (const auto& e : rec.epochs) {
        os.write(reinterpret_cast<const char*>(e.eeg.data()), sizeof(float) * kSamplesPerEpoch);
        os.write(reinterpret_cast<const char*>(e.eog.data()), sizeof(float) * kSamplesPerEpoch);
    }
    if (!os) throw ContainerError(ContainerStatus::io_error, "SLPD: write failed on " + path);
}

Recording read_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ContainerError(ContainerStatus::io_error, "SLPD: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ContainerError(ContainerStatus::bad_magic, "SLPD: bad magic in " + path);
    uint32_t version = get<uint32_t>(is);
    if (version != kVersion)
        throw ContainerError(ContainerStatus::bad_version,
                             "SLPD: unsupported version " + std::to_string(version));
    uint32_t n_epochs = get<uint32_t>(is);
    uint8_t channels = get<uint8_t>(is);
    uint32_t spe = get<uint32_t>(is);
    uint16_t rate = get<uint16_t>(is);
    uint16_t domain_id = get<uint16_t>(is);
    if (channels != kNumChannels || spe != kSamplesPerEpoch || rate != 100)
        throw ContainerError(ContainerStatus::bad_field, "SLPD: unexpected geometry fields");

    Recording rec;
    rec.domain_id = domain_id;
    rec.epochs.resize(n_epochs);
    for (auto& e : rec.epochs) {
        e.label = get<uint8_t>(is);
        if (e.label >= kNumStages)
            throw ContainerError(ContainerStatus::bad_field, "SLPD: label out of range");
    }
    for (auto& e : rec.epochs) {
        e.eeg.resize(kSamplesPerEpoch);
        e.eog.resize(kSamplesPerEpoch);
        is.read(reinterpret_cast<char*>(e.eeg.data()), sizeof(float) * kSamplesPerEpoch);
        is.read(reinterpret_cast<char*>(e.eog.data()), sizeof(float) * kSamplesPerEpoch);
        if (!is) throw ContainerError(ContainerStatus::truncated, "SLPD: payload truncated");
    }
    return rec;
}

}  // namespace sleepdiff
