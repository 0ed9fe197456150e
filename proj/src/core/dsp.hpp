#pragma once

#include <stdexcept>
#include <vector>

namespace sleepdiff::dsp {

struct DspError : std::runtime_error {
    explicit DspError(const std::string& m) : std::runtime_error(m) {}
};

// Zero-phase 4th-order Butterworth band-pass (forward + backward pass,
// effective 8th order). Requires fs > 2 * high_hz.
std::vector<double> bandpass(const std::vector<double>& x, double fs, double low_hz = 0.3,
                             double high_hz = 35.0);

// Rational-rate resampling via zero-stuffing + windowed-sinc low-pass +
// decimation. fs_in == fs_out is a bitwise pass-through.
std::vector<double> resample(const std::vector<double>& x, int fs_in, int fs_out = 100);

// (x - mean) / max(std, 1e-8) over the whole signal.
std::vector<double> zscore(const std::vector<double>& x);

// Mean band power of x in [lo_hz, hi_hz] via a Goertzel-style DFT sweep.
// Test/diagnostic helper for the synthetic generator's stage signatures.
double band_power(const std::vector<double>& x, double fs, double lo_hz, double hi_hz);

}  // namespace sleepdiff::dsp
