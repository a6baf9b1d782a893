#include "tissuesim/texture.hpp"

#include <algorithm>
#include <cmath>

namespace tissuesim {

MultiplexImage expression_map(const PhenotypeState& state, const SimulationConfig& cfg) {
    MultiplexImage img(cfg.num_markers, cfg.height, cfg.width);
    for (int c = 0; c < cfg.num_markers; ++c) {
        for (int y = 0; y < cfg.height; ++y)
            for (int x = 0; x < cfg.width; ++x)
                img.at(c, y, x) = cfg.marker_expression.at(state.labels.at(y, x) - 1, c);
    }
    return img;
}

namespace {

std::vector<double> gaussian_kernel(double sigma, int radius) {
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Mirror index at the half-sample boundary (…, 1, 0 | 0, 1, …); this keeps
// total intensity exactly conserved for symmetric kernels.
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

} // namespace

MultiplexImage spectral_leakage(const MultiplexImage& img, double leakage_sigma) {
    const int C = img.channels;
    if (C == 1) return img;
    const auto kernel = gaussian_kernel(leakage_sigma, 2);
    MultiplexImage out(C, img.height, img.width);
    for (int c = 0; c < C; ++c) {
        for (int k = -2; k <= 2; ++k) {
            const int src = c - k;
            if (src < 0 || src >= C) continue;  // off-spectrum signal is lost
            const double w = kernel[k + 2];
            const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
            const double* in = img.data.data() + static_cast<std::size_t>(src) * plane;
            double* dst = out.data.data() + static_cast<std::size_t>(c) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] += w * in[i];
        }
    }
    return out;
}

MultiplexImage psf_blur(const MultiplexImage& img, double psf_sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * psf_sigma));
    const auto kernel = gaussian_kernel(psf_sigma, radius);
    const int H = img.height;
    const int W = img.width;

    MultiplexImage tmp(img.channels, H, W);
    MultiplexImage out(img.channels, H, W);
    for (int c = 0; c < img.channels; ++c) {
        // horizontal pass
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[k + radius] * img.at(c, y, reflect(x + k, W));
                tmp.at(c, y, x) = acc;
            }
        // vertical pass
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[k + radius] * tmp.at(c, reflect(y + k, H), x);
                out.at(c, y, x) = acc;
            }
    }
    return out;
}

double dark_noise_sigma(const MultiplexImage& img, double snr_db) {
    double power = 0.0;
    for (double v : img.data) power += v * v;
    power /= static_cast<double>(img.data.size());
    if (power <= 0.0) return 0.0;
    return std::sqrt(power / std::pow(10.0, snr_db / 10.0));
}

MultiplexImage add_dark_noise(const MultiplexImage& img, double snr_db,
                              const RandomStream& rng) {
    const double sigma = dark_noise_sigma(img, snr_db);
    MultiplexImage out = img;
    if (sigma == 0.0) return out;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::max(0.0, out.data[i] + sigma * rng.normal_at(i));
    return out;
}

MultiplexImage render_multiplex(const PhenotypeState& state, const SimulationConfig& cfg,
                                const RandomStream& rng) {
    MultiplexImage img = expression_map(state, cfg);
    img = spectral_leakage(img, cfg.leakage_sigma);
    img = psf_blur(img, cfg.psf_sigma);
    img = add_dark_noise(img, cfg.snr_db, rng.substream("dark-noise"));
    return img;
}

} // namespace tissuesim
