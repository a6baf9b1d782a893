#include "tissuesim/neighborhood.hpp"

#include <algorithm>
#include <cmath>

namespace tissuesim {

NeighborhoodMask init_neighborhood_mask(const SimulationConfig& cfg, RandomStream& rng) {
    NeighborhoodMask m;
    m.labels = Grid<std::uint16_t>(cfg.height, cfg.width);
    m.unassigned = Grid<std::uint8_t>(cfg.height, cfg.width, 1);
    const auto n = static_cast<std::uint64_t>(cfg.num_neighborhoods);
    for (std::size_t i = 0; i < m.labels.size(); ++i)
        m.labels[i] = static_cast<std::uint16_t>(1 + rng.below(n));
    return m;
}

std::vector<std::int64_t> measure_abundance(const Grid<std::uint16_t>& labels, int num_labels) {
    std::vector<std::int64_t> counts(num_labels, 0);
    for (std::uint16_t v : labels) ++counts[v - 1];
    return counts;
}

namespace {

// Percentages of total with zero entries clamped to the one-pixel share, so
// the deficit ratio stays finite when a label goes extinct.
std::vector<double> clamped_percentages(const std::vector<std::int64_t>& counts,
                                        std::int64_t total) {
    const double eps = 100.0 / static_cast<double>(total);
    std::vector<double> pct(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        pct[k] = 100.0 * static_cast<double>(counts[k]) / static_cast<double>(total);
        if (pct[k] <= 0.0) pct[k] = eps;
    }
    return pct;
}

} // namespace

Matrix update_rule_matrix(const Matrix& interaction, const std::vector<double>& target_pct,
                          const std::vector<std::int64_t>& counts, std::int64_t total_pixels) {
    const int n = interaction.rows();
    const auto pct = clamped_percentages(counts, total_pixels);
    Matrix u(n, n);
    for (int j = 0; j < n; ++j) {
        const double r = target_pct[j] / pct[j];
        const double deficit = r * r;  // column j scaled by j's squared deficit
        for (int i = 0; i < n; ++i) u.at(i, j) = interaction.at(i, j) * deficit;
    }
    return u;
}

double neighborhood_loss(const Matrix& interaction, const std::vector<double>& target_pct,
                         const std::vector<std::int64_t>& counts, std::int64_t total_pixels) {
    const int n = interaction.rows();
    const auto pct = clamped_percentages(counts, total_pixels);
    double loss = 0.0;
    for (int j = 0; j < n; ++j) {
        const double r = target_pct[j] / pct[j];
        const double deficit = r * r;
        for (int i = 0; i < n; ++i) loss += std::abs(interaction.at(i, j) * deficit);
    }
    return loss;
}

NeighborhoodModel::NeighborhoodModel(const SimulationConfig& cfg, RandomStream& rng)
    : cfg_(cfg), mask_(init_neighborhood_mask(cfg, rng)) {
    counts_ = measure_abundance(mask_.labels, cfg_.num_neighborhoods);
    rebuild_pool();
}

NeighborhoodModel::NeighborhoodModel(const SimulationConfig& cfg, NeighborhoodMask mask)
    : cfg_(cfg), mask_(std::move(mask)) {
    counts_ = measure_abundance(mask_.labels, cfg_.num_neighborhoods);
    rebuild_pool();
}

void NeighborhoodModel::rebuild_pool() {
    pool_.clear();
    pool_pos_.assign(mask_.labels.size(), UINT32_MAX);
    for (std::size_t i = 0; i < mask_.unassigned.size(); ++i) {
        if (mask_.unassigned[i]) {
            pool_pos_[i] = static_cast<std::uint32_t>(pool_.size());
            pool_.push_back(static_cast<std::uint32_t>(i));
        }
    }
}

void NeighborhoodModel::set_label(int y, int x, std::uint16_t label) {
    auto& cell = mask_.labels.at(y, x);
    if (cell == label) return;
    --counts_[cell - 1];
    ++counts_[label - 1];
    cell = label;
}

void NeighborhoodModel::fix_pixel(int y, int x) {
    const auto idx = static_cast<std::uint32_t>(
        static_cast<std::size_t>(y) * mask_.labels.width() + x);
    mask_.unassigned.at(y, x) = 0;
    const std::uint32_t pos = pool_pos_[idx];
    const std::uint32_t last = pool_.back();
    pool_[pos] = last;
    pool_pos_[last] = pos;
    pool_.pop_back();
    pool_pos_[idx] = UINT32_MAX;
}

IterationTelemetry NeighborhoodModel::step(RandomStream& rng) {
    if (pool_.empty()) throw std::logic_error("neighborhood step with no unassigned pixels");

    const int n = cfg_.num_neighborhoods;
    const std::int64_t total = static_cast<std::int64_t>(mask_.labels.size());
    const Matrix u =
        update_rule_matrix(cfg_.neighborhood_interaction, cfg_.neighborhood_abundance,
                           counts_, total);
    const double loss = neighborhood_loss(cfg_.neighborhood_interaction,
                                          cfg_.neighborhood_abundance, counts_, total);

    const std::uint32_t s = pool_[rng.below(pool_.size())];
    const int w = mask_.labels.width();
    const int sy = static_cast<int>(s) / w;
    const int sx = static_cast<int>(s) % w;
    const int y0 = std::max(0, sy - (kWindowRadius - 1));
    const int y1 = std::min(mask_.labels.height() - 1, sy + (kWindowRadius - 1));
    const int x0 = std::max(0, sx - (kWindowRadius - 1));
    const int x1 = std::min(w - 1, sx + (kWindowRadius - 1));

    // Census over the window's unassigned pixels. The majority test runs on
    // these: already-fixed pixels are permanent and can never be rewritten,
    // so counting them would leave windows straddling fixed region borders
    // below the 90% bar forever.
    std::vector<std::int32_t> window_counts(n, 0);
    std::int32_t window_total = 0;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (mask_.unassigned.at(y, x)) {
                ++window_counts[mask_.labels.at(y, x) - 1];
                ++window_total;
            }

    int modal = 0;
    for (int k = 1; k < n; ++k)
        if (window_counts[k] > window_counts[modal]) modal = k;

    if (static_cast<double>(window_counts[modal]) > 0.9 * static_cast<double>(window_total)) {
        // Majority vote: assign the modal label permanently.
        const auto label = static_cast<std::uint16_t>(modal + 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (mask_.unassigned.at(y, x)) {
                    set_label(y, x, label);
                    fix_pixel(y, x);
                }
    } else {
        // Rewrite each unassigned pixel with label v to the argmax of row v
        // of U (ties to the lowest index).
        std::vector<std::uint16_t> row_argmax(n);
        for (int v = 0; v < n; ++v) {
            int best = 0;
            for (int j = 1; j < n; ++j)
                if (u.at(v, j) > u.at(v, best)) best = j;
            row_argmax[v] = static_cast<std::uint16_t>(best + 1);
        }
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (mask_.unassigned.at(y, x))
                    set_label(y, x, row_argmax[mask_.labels.at(y, x) - 1]);
    }

    return IterationTelemetry{iteration_++, loss, unassigned_count()};
}

std::vector<IterationTelemetry> NeighborhoodModel::run(RandomStream& rng) {
    const std::int64_t cap = 50 * static_cast<std::int64_t>(mask_.labels.size());
    std::vector<IterationTelemetry> telemetry;
    while (!done()) {
        if (iteration_ >= cap)
            throw ConvergenceError("neighborhood optimization did not converge within " +
                                   std::to_string(cap) + " steps (" +
                                   std::to_string(unassigned_count()) +
                                   " pixels still unassigned)");
        telemetry.push_back(step(rng));
    }
    return telemetry;
}

NeighborhoodResult run_neighborhood_model(const SimulationConfig& cfg, RandomStream& rng) {
    NeighborhoodModel model(cfg, rng);
    auto telemetry = model.run(rng);
    return NeighborhoodResult{model.mask(), std::move(telemetry)};
}

} // namespace tissuesim
