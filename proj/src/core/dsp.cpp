#include "dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace sleepdiff::dsp {

namespace {

using cd = std::complex<double>;

// Expand a set of roots into real polynomial coefficients (highest order first).
std::vector<double> poly_from_roots(const std::vector<cd>& roots) {
    std::vector<cd> c{1.0};
    for (const cd& r : roots) {
        std::vector<cd> next(c.size() + 1, 0.0);
        for (size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * r;
        }
        c = std::move(next);
    }
    std::vector<double> out(c.size());
    for (size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

struct Iir {
    std::vector<double> b, a;  // a[0] == 1
};

// Butterworth band-pass of analog prototype order N (digital order 2N),
// designed via prewarp -> s-plane band transform -> bilinear.
Iir butter_bandpass(int N, double low_hz, double high_hz, double fs) {
    const double fs2 = 2.0 * fs;
    const double wl = fs2 * std::tan(M_PI * low_hz / fs);
    const double wh = fs2 * std::tan(M_PI * high_hz / fs);
    const double bw = wh - wl;
    const double w0 = std::sqrt(wl * wh);

    std::vector<cd> s_poles;
    for (int k = 1; k <= N; ++k) {
        double theta = M_PI * (2.0 * k + N - 1.0) / (2.0 * N);
        cd p(std::cos(theta), std::sin(theta));  // unit-circle LP prototype pole
        cd a = p * (bw / 2.0);
        cd d = std::sqrt(a * a - w0 * w0);
        s_poles.push_back(a + d);
        s_poles.push_back(a - d);
    }

    std::vector<cd> z_poles, z_zeros;
    for (const cd& s : s_poles) z_poles.push_back((fs2 + s) / (fs2 - s));
    for (int k = 0; k < N; ++k) {
        z_zeros.push_back(1.0);   // from the N analog zeros at s = 0
        z_zeros.push_back(-1.0);  // from the N analog zeros at infinity
    }

    Iir f;
    f.b = poly_from_roots(z_zeros);
    f.a = poly_from_roots(z_poles);

    // Unity gain at the geometric center frequency.
    const double wc = 2.0 * M_PI * std::sqrt(low_hz * high_hz) / fs;
    cd z = std::polar(1.0, wc);
    cd num = 0.0, den = 0.0;
    for (double c : f.b) num = num * z + c;
    for (double c : f.a) den = den * z + c;
    double g = std::abs(num / den);
    for (double& c : f.b) c /= g;
    return f;
}

// Direct-form II transposed, zero initial state.
std::vector<double> lfilter(const Iir& f, const std::vector<double>& x) {
    size_t order = std::max(f.a.size(), f.b.size()) - 1;
    std::vector<double> b = f.b, a = f.a, w(order, 0.0), y(x.size());
    b.resize(order + 1, 0.0);
    a.resize(order + 1, 0.0);
    for (size_t n = 0; n < x.size(); ++n) {
        double yn = b[0] * x[n] + w[0];
        for (size_t i = 0; i + 1 < order; ++i) w[i] = b[i + 1] * x[n] + w[i + 1] - a[i + 1] * yn;
        w[order - 1] = b[order] * x[n] - a[order] * yn;
        y[n] = yn;
    }
    return y;
}

}  // namespace

std::vector<double> bandpass(const std::vector<double>& x, double fs, double low_hz,
                             double high_hz) {
    if (fs <= 2.0 * high_hz) throw DspError("bandpass: sample rate too low for upper edge");
    if (x.empty()) return {};
    Iir f = butter_bandpass(4, low_hz, high_hz, fs);  // order-4 prototype, 8 digital poles

    // Odd-reflection padding keeps edge transients out of the signal body.
    size_t n = x.size();
    size_t pad = std::min(n - 1, static_cast<size_t>(3.0 * fs));
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    std::vector<double> y = lfilter(f, ext);
    std::reverse(y.begin(), y.end());
    y = lfilter(f, y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + pad, y.begin() + pad + n};
}

std::vector<double> resample(const std::vector<double>& x, int fs_in, int fs_out) {
    if (fs_in <= 0 || fs_out <= 0) throw DspError("resample: rates must be positive");
    if (fs_in == fs_out) return x;
    int g = std::gcd(fs_in, fs_out);
    int L = fs_out / g, M = fs_in / g;

    // Windowed-sinc low-pass at 90% of the narrower Nyquist, Blackman window.
    int half = 10 * std::max(L, M);
    int K = 2 * half + 1;
    double fc = 0.45 * std::min(fs_in, fs_out) / (static_cast<double>(fs_in) * L);
    std::vector<double> h(K);
    for (int k = 0; k < K; ++k) {
        double m = k - half;
        double sinc = m == 0.0 ? 2.0 * fc : std::sin(2.0 * M_PI * fc * m) / (M_PI * m);
        double w = 0.42 - 0.5 * std::cos(2.0 * M_PI * k / (K - 1)) +
                   0.08 * std::cos(4.0 * M_PI * k / (K - 1));
        h[k] = L * sinc * w;
    }

    long n = static_cast<long>(x.size());
    long n_out = std::lround(static_cast<double>(n) * fs_out / fs_in);
    std::vector<double> y(n_out, 0.0);
    for (long i = 0; i < n_out; ++i) {
        // Output sample i sits at upsampled index i*M; the filter is centered
        // at tap `half`, so offset by it to cancel the group delay.
        long p = i * M + half;
        long m_lo = (p - (K - 1) + L - 1) / L;
        if (m_lo < 0) m_lo = 0;
        long m_hi = p / L;
        if (m_hi > n - 1) m_hi = n - 1;
        double acc = 0.0;
        for (long m = m_lo; m <= m_hi; ++m) acc += h[p - m * L] * x[m];
        y[i] = acc;
    }
    return y;
}

std::vector<double> zscore(const std::vector<double>& x) {
    if (x.empty()) return {};
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    double sd = std::max(std::sqrt(var / x.size()), 1e-8);
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) / sd;
    return y;
}

double band_power(const std::vector<double>& x, double fs, double lo_hz, double hi_hz) {
    size_t n = x.size();
    if (n == 0) return 0.0;
    double df = fs / static_cast<double>(n);
    double total = 0.0;
    int bins = 0;
    for (double f = lo_hz; f <= hi_hz + 1e-12; f += std::max(df, 0.25)) {
        cd acc = 0.0;
        double w = 2.0 * M_PI * f / fs;
        for (size_t i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -w * static_cast<double>(i));
        total += std::norm(acc) / (static_cast<double>(n) * n);
        ++bins;
    }
    return bins ? total / bins : 0.0;
}

}  // namespace sleepdiff::dsp
