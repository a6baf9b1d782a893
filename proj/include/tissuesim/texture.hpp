#pragma once

#include <cstdint>
#include <vector>

#include "tissuesim/config.hpp"
#include "tissuesim/grid.hpp"
#include "tissuesim/phenotype.hpp"
#include "tissuesim/rng.hpp"

namespace tissuesim {

// C-channel intensity volume, channel-major then row-major. Values are kept
// in double precision through the pipeline; quantize_to_f32() snaps them to
// the 32-bit values that the raw writer will store.
struct MultiplexImage {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    MultiplexImage() = default;
    MultiplexImage(int c, int h, int w)
        : channels(c), height(h), width(w),
          data(static_cast<std::size_t>(c) * h * w, 0.0) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    void quantize_to_f32() {
        for (double& v : data) v = static_cast<double>(static_cast<float>(v));
    }
};

// Paints marker_expression(label, c) into channel c; background pixels stay 0.
MultiplexImage expression_map(const PhenotypeState& state, const SimulationConfig& cfg);

// Convolves each pixel's channel vector with a 1-D Gaussian (std in channel
// units, truncated at +/-2 channels, kernel normalized to sum 1, zero-padded
// past the spectrum ends). Spatial content is untouched.
MultiplexImage spectral_leakage(const MultiplexImage& img, double leakage_sigma);

// Isotropic 2-D Gaussian blur per channel, kernel truncated at +/-ceil(3*sigma)
// and normalized, borders mirrored at the half-sample boundary.
MultiplexImage psf_blur(const MultiplexImage& img, double psf_sigma);

// Noise std from the power-SNR definition: sigma^2 = mean(img^2) / 10^(db/10).
double dark_noise_sigma(const MultiplexImage& img, double snr_db);

// Adds zero-mean Gaussian noise at the sigma above (one independent deviate
// per sample index, drawn by counter so the result is order-independent) and
// clamps negative intensities to 0.
MultiplexImage add_dark_noise(const MultiplexImage& img, double snr_db,
                              const RandomStream& rng);

// expression_map -> spectral_leakage -> psf_blur -> add_dark_noise.
MultiplexImage render_multiplex(const PhenotypeState& state, const SimulationConfig& cfg,
                                const RandomStream& rng);

} // namespace tissuesim
