#include "csisense/synth.hpp"

#include <cmath>

#include "csisense/errors.hpp"
#include "csisense/rng.hpp"

namespace csisense {

CsiSequence synth_csi(const BodyModel& body, const SynthGeometry& geometry,
                      const std::vector<double>& subcarriers_hz, int n_samples,
                      double noise_sigma, uint64_t seed, double sample_rate_hz) {
    if (n_samples < 1) throw DomainError("n_samples must be >= 1");
    if (noise_sigma < 0.0) throw DomainError("noise_sigma must be >= 0");
    auto h = channel_response(body, geometry, subcarriers_hz);

    CsiSequence seq;
    seq.sample_rate = sample_rate_hz;
    seq.frames.reserve(static_cast<size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        CsiFrame frame;
        frame.n_sc = static_cast<uint32_t>(h.size());
        frame.n_tx = 1;
        frame.n_rx = 1;
        frame.timestamp_index = s;
        frame.values.reserve(h.size());
        // Independent stream per sample index.
        Rng rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<uint64_t>(s + 1)));
        for (const auto& channel : h) {
            double re = channel.real();
            double im = channel.imag();
            if (noise_sigma > 0.0) {
                re += noise_sigma * rng.next_gaussian();
                im += noise_sigma * rng.next_gaussian();
            }
            frame.values.emplace_back(static_cast<float>(re), static_cast<float>(im));
        }
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

double mean_channel_power(const BodyModel& body, const SynthGeometry& geometry,
                          const std::vector<double>& subcarriers_hz) {
    auto h = channel_response(body, geometry, subcarriers_hz);
    double acc = 0.0;
    for (const auto& v : h) acc += std::norm(v);
    return acc / static_cast<double>(h.size());
}

double noise_sigma_for_snr(double mean_power, double snr_db) {
    if (mean_power <= 0.0) throw DomainError("mean channel power must be > 0");
    return std::sqrt(mean_power / (2.0 * std::pow(10.0, snr_db / 10.0)));
}

}  // namespace csisense
