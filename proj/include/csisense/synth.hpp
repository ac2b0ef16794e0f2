#pragma once

#include <cstdint>
#include <vector>

#include "csisense/csi_data.hpp"
#include "csisense/tissue.hpp"

namespace csisense {

// Synthesizes a CSI sequence for a static body: the deterministic multipath
// channel of channel_response plus i.i.d. complex Gaussian noise. noise_sigma
// is the standard deviation of each of the real and imaginary components.
// The noise stream of sample i depends only on (seed, i), so equal seeds give
// bit-identical sequences and generation order does not matter.
CsiSequence synth_csi(const BodyModel& body, const SynthGeometry& geometry,
                      const std::vector<double>& subcarriers_hz, int n_samples,
                      double noise_sigma, uint64_t seed, double sample_rate_hz = 100.0);

// Mean squared channel magnitude over subcarriers, for SNR calibration:
// per-subcarrier SNR(dB) = 10 log10(mean |h|^2 / (2 sigma^2)).
double mean_channel_power(const BodyModel& body, const SynthGeometry& geometry,
                          const std::vector<double>& subcarriers_hz);

// Noise sigma per component that yields the requested mean per-subcarrier SNR.
double noise_sigma_for_snr(double mean_power, double snr_db);

}  // namespace csisense
