#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tissuesim/config.hpp"
#include "tissuesim/grid.hpp"
#include "tissuesim/rng.hpp"

namespace tissuesim {

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Context window half-extent: a pixel q belongs to the window of s iff its
// Chebyshev distance to s is < kWindowRadius (clipped at image borders).
constexpr int kWindowRadius = 12;

// Per-pixel neighborhood labels (1..N) plus the not-yet-permanent flags.
// Once a pixel's unassigned flag drops to 0 its label never changes.
struct NeighborhoodMask {
    Grid<std::uint16_t> labels;
    Grid<std::uint8_t> unassigned;
};

struct IterationTelemetry {
    std::int64_t iteration = 0;
    double loss = 0.0;
    std::int64_t unassigned = 0;
};

// Labels i.i.d. uniform over 1..N, all pixels unassigned.
NeighborhoodMask init_neighborhood_mask(const SimulationConfig& cfg, RandomStream& rng);

// Pixel count per label (1..N); element k-1 counts label k.
std::vector<std::int64_t> measure_abundance(const Grid<std::uint16_t>& labels, int num_labels);

// U(i,j) = interaction(i,j) * (target_pct(j) / actual_pct(j))^2, where
// actual percentages come from counts/total and zero percentages are clamped
// to the share of a single pixel (100/total).
Matrix update_rule_matrix(const Matrix& interaction, const std::vector<double>& target_pct,
                          const std::vector<std::int64_t>& counts, std::int64_t total_pixels);

// Sum of |U| over all entries; diagnostic trace only, never a stop rule.
double neighborhood_loss(const Matrix& interaction, const std::vector<double>& target_pct,
                         const std::vector<std::int64_t>& counts, std::int64_t total_pixels);

// Incremental state for the optimization loop: label census and the pool of
// unassigned pixels are maintained across steps so each step costs O(window).
class NeighborhoodModel {
public:
    NeighborhoodModel(const SimulationConfig& cfg, RandomStream& rng);
    NeighborhoodModel(const SimulationConfig& cfg, NeighborhoodMask mask);

    bool done() const { return pool_.empty(); }
    std::int64_t unassigned_count() const { return static_cast<std::int64_t>(pool_.size()); }

    // One optimization step. Picks a random unassigned pixel, then either
    // majority-fixes the window's unassigned pixels (modal label covering
    // >90% of them) or rewrites each unassigned window pixel to the argmax
    // of its label's row of U. Throws if no unassigned pixel remains.
    IterationTelemetry step(RandomStream& rng);

    // Steps until every pixel is permanently assigned; throws
    // ConvergenceError past the 50*width*height safety cap.
    std::vector<IterationTelemetry> run(RandomStream& rng);

    const NeighborhoodMask& mask() const { return mask_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }

private:
    void rebuild_pool();
    void set_label(int y, int x, std::uint16_t label);
    void fix_pixel(int y, int x);

    SimulationConfig cfg_;
    NeighborhoodMask mask_;
    std::vector<std::int64_t> counts_;       // current label census, fixed + unfixed
    std::vector<std::uint32_t> pool_;        // pixel indices with unassigned = 1
    std::vector<std::uint32_t> pool_pos_;    // pixel index -> position in pool_
    std::int64_t iteration_ = 0;
};

// Convenience wrapper: random init + run to completion.
struct NeighborhoodResult {
    NeighborhoodMask mask;
    std::vector<IterationTelemetry> telemetry;
};
NeighborhoodResult run_neighborhood_model(const SimulationConfig& cfg, RandomStream& rng);

} // namespace tissuesim
