#include "csisense/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "csisense/errors.hpp"

namespace csisense {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ordered_median(std::vector<double>& w) {
    std::sort(w.begin(), w.end());
    size_t n = w.size();
    if (n % 2 == 1) return w[n / 2];
    return 0.5 * (w[n / 2 - 1] + w[n / 2]);
}

template <typename PerChannel>
AmplitudeSeries apply_per_channel(const AmplitudeSeries& series, PerChannel&& fn) {
    AmplitudeSeries out = series;
    size_t n = series.n_samples();
    if (n == 0) return out;
    std::vector<double> channel(n), filtered;
    for (size_t c = 0; c < series.n_channels; ++c) {
        for (size_t t = 0; t < n; ++t) channel[t] = series.at(t, c);
        filtered = fn(channel);
        for (size_t t = 0; t < n; ++t) out.at(t, c) = static_cast<float>(filtered[t]);
    }
    return out;
}

// Expand polynomial from its roots; conjugate-paired roots give a real result.
std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> coeffs = {1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
        for (size_t i = 0; i < coeffs.size(); ++i) {
            next[i] += coeffs[i];
            next[i + 1] -= coeffs[i] * r;
        }
        coeffs = std::move(next);
    }
    std::vector<double> out(coeffs.size());
    for (size_t i = 0; i < coeffs.size(); ++i) out[i] = coeffs[i].real();
    return out;
}

// Gaussian elimination with partial pivoting; the systems here are tiny.
std::vector<double> solve_dense(std::vector<double> m, std::vector<double> rhs, size_t n) {
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r) {
            if (std::fabs(m[r * n + col]) > std::fabs(m[pivot * n + col])) pivot = r;
        }
        if (std::fabs(m[pivot * n + col]) < 1e-300)
            throw DomainError("singular system in filter initial-condition solve");
        if (pivot != col) {
            for (size_t k = 0; k < n; ++k) std::swap(m[col * n + k], m[pivot * n + k]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (size_t r = col + 1; r < n; ++r) {
            double f = m[r * n + col] / m[col * n + col];
            for (size_t k = col; k < n; ++k) m[r * n + k] -= f * m[col * n + k];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t ri = n; ri-- > 0;) {
        double acc = rhs[ri];
        for (size_t k = ri + 1; k < n; ++k) acc -= m[ri * n + k] * x[k];
        x[ri] = acc / m[ri * n + ri];
    }
    return x;
}

// Initial filter state that makes the step response start settled, following
// the usual companion-matrix construction.
std::vector<double> steady_state_zi(const IirCoefficients& c) {
    size_t order = c.a.size() - 1;
    std::vector<double> m(order * order, 0.0);
    // I - companion(a)^T
    for (size_t i = 0; i < order; ++i) m[i * order + i] = 1.0;
    for (size_t j = 0; j < order; ++j) m[j * order + 0] += c.a[j + 1];
    for (size_t j = 0; j + 1 < order; ++j) m[j * order + (j + 1)] -= 1.0;
    std::vector<double> rhs(order);
    for (size_t j = 0; j < order; ++j) rhs[j] = c.b[j + 1] - c.a[j + 1] * c.b[0];
    return solve_dense(std::move(m), std::move(rhs), order);
}

std::vector<double> run_df2t(const IirCoefficients& c, const std::vector<double>& x,
                             std::vector<double> z) {
    size_t order = c.a.size() - 1;
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double xi = x[i];
        double yi = c.b[0] * xi + z[0];
        for (size_t j = 0; j + 1 < order; ++j) z[j] = c.b[j + 1] * xi + z[j + 1] - c.a[j + 1] * yi;
        z[order - 1] = c.b[order] * xi - c.a[order] * yi;
        y[i] = yi;
    }
    return y;
}

}  // namespace

AmplitudeSeries median_filter(const AmplitudeSeries& series, int window) {
    if (window < 1 || window % 2 == 0) throw DomainError("median filter window must be odd >= 1");
    size_t n = series.n_samples();
    if (n > 0 && static_cast<size_t>(window) > n)
        throw DomainError("median filter window exceeds sequence length");
    int half = window / 2;
    return apply_per_channel(series, [&](const std::vector<double>& ch) {
        std::vector<double> out(ch.size()), w;
        for (size_t t = 0; t < ch.size(); ++t) {
            size_t lo = t >= static_cast<size_t>(half) ? t - static_cast<size_t>(half) : 0;
            size_t hi = std::min(ch.size() - 1, t + static_cast<size_t>(half));
            w.assign(ch.begin() + static_cast<long>(lo), ch.begin() + static_cast<long>(hi) + 1);
            out[t] = ordered_median(w);
        }
        return out;
    });
}

AmplitudeSeries mean_filter(const AmplitudeSeries& series, int window) {
    if (window < 1) throw DomainError("mean filter window must be >= 1");
    size_t n = series.n_samples();
    if (n > 0 && static_cast<size_t>(window) > n)
        throw DomainError("mean filter window exceeds sequence length");
    int back = (window - 1) / 2;
    int fwd = window / 2;
    return apply_per_channel(series, [&](const std::vector<double>& ch) {
        std::vector<double> out(ch.size());
        for (size_t t = 0; t < ch.size(); ++t) {
            size_t lo = t >= static_cast<size_t>(back) ? t - static_cast<size_t>(back) : 0;
            size_t hi = std::min(ch.size() - 1, t + static_cast<size_t>(fwd));
            double acc = 0.0;
            for (size_t k = lo; k <= hi; ++k) acc += ch[k];
            out[t] = acc / static_cast<double>(hi - lo + 1);
        }
        return out;
    });
}

IirCoefficients butterworth_design(int order, double cutoff_hz, double sample_rate_hz) {
    if (order < 1) throw DomainError("butterworth order must be >= 1");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0))
        throw DomainError("butterworth cutoff must lie in (0, sample_rate/2)");

    // Prewarped analog cutoff, analog poles on the left-half-plane circle,
    // then the bilinear map s -> 2 fs (z-1)/(z+1).
    double warped = 2.0 * sample_rate_hz * std::tan(kPi * cutoff_hz / sample_rate_hz);
    double fs2 = 2.0 * sample_rate_hz;
    std::vector<std::complex<double>> zpoles(static_cast<size_t>(order));
    for (int k = 0; k < order; ++k) {
        double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
        std::complex<double> s = warped * std::polar(1.0, theta);
        zpoles[static_cast<size_t>(k)] = (fs2 + s) / (fs2 - s);
    }
    std::vector<std::complex<double>> zzeros(static_cast<size_t>(order), -1.0);

    IirCoefficients c;
    c.a = poly_from_roots(zpoles);
    c.b = poly_from_roots(zzeros);

    // Normalize to unit DC gain: H(1) = K * B(1) / A(1).
    double a1 = 0.0, b1 = 0.0;
    for (double v : c.a) a1 += v;
    for (double v : c.b) b1 += v;
    double gain = a1 / b1;
    for (double& v : c.b) v *= gain;
    return c;
}

std::vector<double> iir_filter(const IirCoefficients& c, const std::vector<double>& x) {
    if (x.empty()) return {};
    auto zi = steady_state_zi(c);
    for (double& z : zi) z *= x.front();
    return run_df2t(c, x, std::move(zi));
}

std::vector<double> filtfilt(const IirCoefficients& c, const std::vector<double>& x) {
    if (x.empty()) return {};
    size_t order = c.a.size() - 1;
    size_t padlen = std::min(x.size() - 1, 3 * (order + 1));

    std::vector<double> ext;
    ext.reserve(x.size() + 2 * padlen);
    for (size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x.back() - x[x.size() - 1 - i]);

    std::vector<double> y = iir_filter(c, ext);
    std::reverse(y.begin(), y.end());
    y = iir_filter(c, y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<long>(padlen), y.end() - static_cast<long>(padlen)};
}

AmplitudeSeries butterworth_lowpass(const AmplitudeSeries& series, int order, double cutoff_hz) {
    IirCoefficients c = butterworth_design(order, cutoff_hz, series.sample_rate);
    return apply_per_channel(series, [&](const std::vector<double>& ch) { return filtfilt(c, ch); });
}

}  // namespace csisense
