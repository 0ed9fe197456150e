#pragma once

// Synthetic multi-domain EEG/EOG generator. Each sleep stage has a
// characteristic spectral signature; domain shift is a gain/polarity/
// spectral-tilt/reference-offset transform applied at the domain's native
// sampling rate before the standard preprocessing chain.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core/container.hpp"
#include "core/dsp.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

namespace sleepdiff {

struct DomainSpec {
    uint16_t domain_id = 0;
    double gain = 1.0;
    double noise_std = 0.4;
    int polarity = 1;             // +1 or -1
    double spectral_tilt = 0.0;   // >0 boosts high frequencies, <0 low
    double reference_offset = 0.0;
    int native_rate = 100;        // one of 100, 125, 200, 256

    void validate() const {
        if (gain <= 0) throw std::invalid_argument("DomainSpec: gain must be > 0");
        if (polarity != 1 && polarity != -1)
            throw std::invalid_argument("DomainSpec: polarity must be +1 or -1");
        if (native_rate != 100 && native_rate != 125 && native_rate != 200 && native_rate != 256)
            throw std::invalid_argument("DomainSpec: unsupported native_rate");
    }
};

namespace detail {

// Paul Kellet's economy pink noise filter over white gaussian input.
struct PinkNoise {
    double b0 = 0, b1 = 0, b2 = 0;
    double next(Rng& rng) {
        double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        return 0.25 * (b0 + b1 + b2 + w * 0.1848);
    }
};

inline void add_tone(std::vector<double>& x, double fs, double hz, double amp, double phase,
                     int start, int len) {
    int end = std::min<int>(x.size(), start + len);
    for (int i = std::max(0, start); i < end; ++i)
        x[i] += amp * std::sin(2.0 * M_PI * hz * (i - start) / fs + phase);
}

// One biphasic transient: sharp negative lobe then slower positive rebound.
inline void add_k_complex(std::vector<double>& x, double fs, int start, double amp) {
    int len = static_cast<int>(0.7 * fs);
    int end = std::min<int>(x.size(), start + len);
    for (int i = std::max(0, start); i < end; ++i) {
        double t = (i - start) / static_cast<double>(len);  // 0..1
        double lobe = -std::sin(2.0 * M_PI * t) * std::exp(-3.0 * t);
        x[i] += amp * lobe;
    }
}

// 30 s of stage-specific EEG/EOG at fs, before noise and domain shift.
inline void stage_signature(int stage, double fs, Rng& rng, std::vector<double>& eeg,
                            std::vector<double>& eog) {
    const int n = static_cast<int>(30 * fs);
    eeg.assign(n, 0.0);
    eog.assign(n, 0.0);
    switch (stage) {
        case 0: {  // W: 18-25 Hz beta bursts
            int pos = 0;
            while (pos < n) {
                int burst = static_cast<int>(rng.uniform(0.4, 1.2) * fs);
                double hz = rng.uniform(18.0, 25.0);
                add_tone(eeg, fs, hz, 1.0, rng.uniform(0, 2 * M_PI), pos, burst);
                pos += burst + static_cast<int>(rng.uniform(0.1, 0.5) * fs);
            }
            add_tone(eog, fs, 0.8, 0.3, rng.uniform(0, 2 * M_PI), 0, n);
            break;
        }
        case 1: {  // N1: theta plus slow rolling eye movements
            add_tone(eeg, fs, rng.uniform(4.0, 7.0), 1.2, rng.uniform(0, 2 * M_PI), 0, n);
            add_tone(eog, fs, 0.3, 1.5, rng.uniform(0, 2 * M_PI), 0, n);
            break;
        }
        case 2: {  // N2: low background + spindles + K-complexes
            add_tone(eeg, fs, rng.uniform(4.0, 6.0), 0.4, rng.uniform(0, 2 * M_PI), 0, n);
            int n_spindles = 3 + static_cast<int>(rng.below(4));
            for (int s = 0; s < n_spindles; ++s) {
                int start = static_cast<int>(rng.uniform(0, 28) * fs);
                int len = static_cast<int>(rng.uniform(0.5, 1.0) * fs);
                add_tone(eeg, fs, rng.uniform(12.0, 16.0), 1.6, rng.uniform(0, 2 * M_PI), start,
                         len);
            }
            int n_kc = 1 + static_cast<int>(rng.below(2));
            for (int k = 0; k < n_kc; ++k)
                add_k_complex(eeg, fs, static_cast<int>(rng.uniform(0, 29) * fs), 3.0);
            break;
        }
        case 3: {  // N3: high-amplitude delta
            add_tone(eeg, fs, rng.uniform(0.5, 2.0), 3.5, rng.uniform(0, 2 * M_PI), 0, n);
            add_tone(eeg, fs, rng.uniform(0.5, 2.0), 1.5, rng.uniform(0, 2 * M_PI), 0, n);
            add_tone(eog, fs, 0.7, 0.5, rng.uniform(0, 2 * M_PI), 0, n);
            break;
        }
        case 4: {  // REM: mixed low-amplitude EEG, rapid EOG deflections
            add_tone(eeg, fs, rng.uniform(4.0, 7.0), 0.5, rng.uniform(0, 2 * M_PI), 0, n);
            add_tone(eeg, fs, rng.uniform(18.0, 24.0), 0.3, rng.uniform(0, 2 * M_PI), 0, n);
            int n_saccades = 6 + static_cast<int>(rng.below(6));
            for (int s = 0; s < n_saccades; ++s) {
                int start = static_cast<int>(rng.uniform(0, 29) * fs);
                int len = static_cast<int>(0.25 * fs);
                double sign = rng.below(2) ? 1.0 : -1.0;
                int end = std::min(n, start + len);
                for (int i = start; i < end; ++i) {
                    double t = (i - start) / static_cast<double>(len);
                    eog[i] += sign * 2.0 * std::sin(M_PI * t);
                }
            }
            break;
        }
        default:
            throw std::out_of_range("stage_signature: stage out of range");
    }
}

// Fixed transition matrix with sticky diagonals for realistic dwell times.
inline int next_stage(int stage, Rng& rng) {
    static const double P[5][5] = {
        {0.80, 0.15, 0.02, 0.00, 0.03},  // W
        {0.05, 0.70, 0.20, 0.00, 0.05},  // N1
        {0.01, 0.05, 0.75, 0.12, 0.07},  // N2
        {0.00, 0.01, 0.15, 0.80, 0.04},  // N3
        {0.05, 0.10, 0.10, 0.00, 0.75},  // REM
    };
    double u = rng.uniform(0.0, 1.0), acc = 0.0;
    for (int s = 0; s < kNumStages; ++s) {
        acc += P[stage][s];
        if (u < acc) return s;
    }
    return kNumStages - 1;
}

// First-order tilt: y[n] = x[n] + tilt*(x[n]-x[n-1]) emphasizes high
// frequencies for tilt>0 and attenuates them for tilt<0.
inline void apply_tilt(std::vector<double>& x, double tilt) {
    if (tilt == 0.0) return;
    double prev = x.empty() ? 0.0 : x[0];
    for (auto& v : x) {
        double cur = v;
        v = cur + tilt * (cur - prev);
        prev = cur;
    }
}

}  // namespace detail

// One recording: Markov stage sequence, per-epoch signatures + pink noise at
// the native rate, domain shift, then bandpass -> resample -> zscore -> epoch.
inline Recording synth_recording(const DomainSpec& spec, int n_epochs, Rng rng) {
    spec.validate();
    if (n_epochs <= 0) throw std::invalid_argument("synth_recording: n_epochs must be > 0");

    Rng label_rng = rng.split(1);
    Rng signal_rng = rng.split(2);

    std::vector<uint8_t> labels(n_epochs);
    int stage = static_cast<int>(label_rng.below(kNumStages));
    for (int e = 0; e < n_epochs; ++e) {
        labels[e] = static_cast<uint8_t>(stage);
        stage = detail::next_stage(stage, label_rng);
    }

    const double fs = spec.native_rate;
    const int epoch_len = static_cast<int>(30 * fs);
    std::vector<double> eeg_full, eog_full;
    eeg_full.reserve(static_cast<size_t>(n_epochs) * epoch_len);
    eog_full.reserve(static_cast<size_t>(n_epochs) * epoch_len);

    detail::PinkNoise pink_eeg, pink_eog;
    std::vector<double> eeg, eog;
    for (int e = 0; e < n_epochs; ++e) {
        detail::stage_signature(labels[e], fs, signal_rng, eeg, eog);
        for (auto& v : eeg) v += spec.noise_std * pink_eeg.next(signal_rng);
        for (auto& v : eog) v += spec.noise_std * pink_eog.next(signal_rng);
        eeg_full.insert(eeg_full.end(), eeg.begin(), eeg.end());
        eog_full.insert(eog_full.end(), eog.begin(), eog.end());
    }

    for (auto* ch : {&eeg_full, &eog_full}) {
        detail::apply_tilt(*ch, spec.spectral_tilt);
        const double g = spec.gain * spec.polarity;
        for (auto& v : *ch) v = g * v + spec.reference_offset;
    }

    Recording rec;
    rec.domain_id = spec.domain_id;
    for (auto* ch : {&eeg_full, &eog_full}) {
        *ch = dsp::bandpass(*ch, fs);
        *ch = dsp::resample(*ch, spec.native_rate, 100);
        *ch = dsp::zscore(*ch);
    }
    if (eeg_full.size() != static_cast<size_t>(n_epochs) * kSamplesPerEpoch)
        throw std::logic_error("synth_recording: unexpected resampled length");

    rec.epochs.resize(n_epochs);
    for (int e = 0; e < n_epochs; ++e) {
        auto& ep = rec.epochs[e];
        ep.label = labels[e];
        ep.eeg.resize(kSamplesPerEpoch);
        ep.eog.resize(kSamplesPerEpoch);
        for (int i = 0; i < kSamplesPerEpoch; ++i) {
            ep.eeg[i] = static_cast<float>(eeg_full[static_cast<size_t>(e) * kSamplesPerEpoch + i]);
            ep.eog[i] = static_cast<float>(eog_full[static_cast<size_t>(e) * kSamplesPerEpoch + i]);
        }
    }
    return rec;
}

inline std::vector<Recording> synth_domain(const DomainSpec& spec, int n_recordings,
                                           int epochs_per_recording, uint64_t seed) {
    Rng root(seed);
    Rng domain_rng = root.split(spec.domain_id + 1);
    std::vector<Recording> out;
    out.reserve(n_recordings);
    for (int r = 0; r < n_recordings; ++r)
        out.push_back(synth_recording(spec, epochs_per_recording, domain_rng.split(r + 1)));
    return out;
}

// Five stock domains with distinct gain, noise, polarity, spectral tilt,
// reference offset, and native sampling rate.
inline std::vector<DomainSpec> default_domain_specs() {
    std::vector<DomainSpec> specs(5);
    specs[0] = {0, 1.0, 0.40, +1, 0.00, 0.0, 100};
    specs[1] = {1, 2.0, 0.50, -1, 0.15, 0.2, 125};
    specs[2] = {2, 0.6, 0.35, +1, -0.20, -0.1, 200};
    specs[3] = {3, 1.5, 0.60, -1, 0.10, 0.3, 256};
    specs[4] = {4, 0.8, 0.45, +1, -0.10, 0.1, 100};
    return specs;
}

// Non-overlapping windows of n_seq consecutive epochs; a trailing remainder
// is dropped and recordings never contribute to each other's sequences.
template <typename T>
std::vector<SequenceSample<T>> assemble_sequences(const Recording& rec, int n_seq = 20,
                                                  std::vector<std::string>* log = nullptr) {
    std::vector<SequenceSample<T>> out;
    int n = static_cast<int>(rec.epochs.size());
    if (n < n_seq) {
        if (log)
            log->push_back("recording with " + std::to_string(n) + " epochs yields no sequence of " +
                           std::to_string(n_seq));
        return out;
    }
    for (int start = 0; start + n_seq <= n; start += n_seq) {
        SequenceSample<T> s;
        s.domain_id = rec.domain_id;
        for (int e = start; e < start + n_seq; ++e) {
            const auto& ep = rec.epochs[e];
            Tensor<T> eeg({1, kSamplesPerEpoch}), eog({1, kSamplesPerEpoch});
            for (int i = 0; i < kSamplesPerEpoch; ++i) {
                eeg[i] = static_cast<T>(ep.eeg[i]);
                eog[i] = static_cast<T>(ep.eog[i]);
            }
            s.eeg.push_back(std::move(eeg));
            s.eog.push_back(std::move(eog));
            s.labels.push_back(ep.label);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace sleepdiff
