#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepdiff {

constexpr int kSamplesPerEpoch = 3000;  // 30 s at 100 Hz
constexpr int kNumChannels = 2;         // EEG, EOG
constexpr int kNumStages = 5;           // W, N1, N2, N3, REM

enum class ContainerStatus {
    ok = 0,
    bad_magic,
    bad_version,
    truncated,
    bad_field,
    io_error,
};

struct ContainerError : std::runtime_error {
    ContainerStatus status;
    ContainerError(ContainerStatus s, const std::string& m) : std::runtime_error(m), status(s) {}
};

struct EpochRecord {
    std::vector<float> eeg;  // 3000 samples
    std::vector<float> eog;  // 3000 samples
    uint8_t label = 0;       // W=0 N1=1 N2=2 N3=3 REM=4
};

struct Recording {
    uint16_t domain_id = 0;
    std::vector<EpochRecord> epochs;
};

// SLPD container: magic "SLPD", version u32=1, n_epochs u32, channels u8=2,
// samples_per_epoch u32=3000, rate_hz u16=100, domain_id u16, n_epochs label
// bytes, then epoch-major / channel-major / sample-major f32 LE payload.
void write_container(const Recording& rec, const std::string& path);
Recording read_container(const std::string& path);

}  // namespace sleepdiff
