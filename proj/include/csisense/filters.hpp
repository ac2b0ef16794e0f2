#pragma once

#include <vector>

#include "csisense/csi_data.hpp"

namespace csisense {

// Time-domain denoising of amplitude series, applied per channel along the
// sample axis. Windowed filters use centred windows that shrink at the edges
// (no padding).

// window must be odd and >= 1. Shrunken edge windows of even size take the
// mean of the two middle order statistics.
AmplitudeSeries median_filter(const AmplitudeSeries& series, int window);

// Arithmetic mean over the window. Even windows are accepted and lean left:
// [t - floor((w-1)/2), t + floor(w/2)].
AmplitudeSeries mean_filter(const AmplitudeSeries& series, int window);

// Zero-phase digital Butterworth low-pass: bilinear-transform design,
// applied forward and backward. cutoff_hz must lie in (0, sample_rate/2).
AmplitudeSeries butterworth_lowpass(const AmplitudeSeries& series, int order, double cutoff_hz);

// Filter design internals, exposed for tests and offline analysis.
struct IirCoefficients {
    std::vector<double> b;  // feedforward, order + 1 taps
    std::vector<double> a;  // feedback, order + 1 taps, a[0] == 1
};

IirCoefficients butterworth_design(int order, double cutoff_hz, double sample_rate_hz);

// Single-pass direct-form II transposed filter with steady-state initial
// conditions scaled to x[0].
std::vector<double> iir_filter(const IirCoefficients& c, const std::vector<double>& x);

// Forward-backward application with odd-reflection padding.
std::vector<double> filtfilt(const IirCoefficients& c, const std::vector<double>& x);

}  // namespace csisense
