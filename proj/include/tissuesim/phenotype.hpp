#pragma once

#include <cstdint>
#include <vector>

#include "tissuesim/config.hpp"
#include "tissuesim/grid.hpp"
#include "tissuesim/neighborhood.hpp"
#include "tissuesim/rng.hpp"

namespace tissuesim {

// One placed cell that survived to the final mask.
struct CellRecord {
    std::uint32_t id = 0;   // instance id after compaction, 1..K
    int phenotype = 0;      // 1-based label
    int center_y = 0;
    int center_x = 0;
    double theta = 0.0;     // stamp orientation, radians
    std::int32_t stamp_pixels = 0;    // full member-set size at stamp time
    std::int32_t written_pixels = 0;  // pixels actually fixed for this cell
};

// Per-pixel phenotype labels (1..P), permanence flags, and cell instance
// ids (0 = no cell). Fixed pixels never change label or id; a fixed pixel
// has id 0 exactly when it carries the background phenotype.
struct PhenotypeState {
    Grid<std::uint16_t> labels;
    Grid<std::uint8_t> unassigned;
    Grid<std::uint32_t> instance_ids;
    std::vector<CellRecord> cells;
};

// Rasterized rotated ellipse centered on a pixel, clipped to the context
// window and the image bounds. A pixel is a member iff its center satisfies
// (u/a)^2 + (v/b)^2 <= 1 in the rotated frame, with b = a*sqrt(1-e^2).
struct EllipseStamp {
    int center_y = 0;
    int center_x = 0;
    double semi_major = 0.0;
    double eccentricity = 0.0;
    double theta = 0.0;
    std::vector<std::uint32_t> pixels;  // linear indices, row-major order
};

EllipseStamp generate_ellipse(int center_y, int center_x, int phenotype,
                              const SimulationConfig& cfg, RandomStream& rng,
                              int image_height, int image_width);

// Entry (p-1, n-1) = pixels with phenotype p inside neighborhood n.
// Returned as a P x N matrix of counts.
std::vector<std::int64_t> measure_phenotype_abundance(const Grid<std::uint16_t>& ph_labels,
                                                      const Grid<std::uint16_t>& nb_labels,
                                                      int num_phenotypes,
                                                      int num_neighborhoods);

// U(i,j,n) = interaction(i,j,n) * (target(j,n)/actual_pct(j,n))^2 with
// per-neighborhood percentages; zero percentages clamp to 100/total_pixels.
Tensor3 phenotype_update_tensor(const Tensor3& interaction, const Matrix& target_pct,
                                const std::vector<std::int64_t>& counts,
                                const std::vector<std::int64_t>& nb_area,
                                std::int64_t total_pixels);

double phenotype_loss(const Tensor3& interaction, const Matrix& target_pct,
                      const std::vector<std::int64_t>& counts,
                      const std::vector<std::int64_t>& nb_area, std::int64_t total_pixels);

// Cell placement loop over a fully assigned neighborhood mask.
class PhenotypeModel {
public:
    PhenotypeModel(const SimulationConfig& cfg, const NeighborhoodMask& nb, RandomStream& rng);

    bool done() const { return pool_.empty(); }
    std::int64_t unassigned_count() const { return static_cast<std::int64_t>(pool_.size()); }

    IterationTelemetry step(RandomStream& rng);
    std::vector<IterationTelemetry> run(RandomStream& rng);

    // Valid after run(): instance ids compacted to 1..K.
    const PhenotypeState& state() const { return state_; }
    PhenotypeState take_state() { return std::move(state_); }

private:
    void set_pixel(int y, int x, std::uint16_t label, std::uint32_t id);
    void fix_pixel(int y, int x);
    void compact_instances();

    SimulationConfig cfg_;
    const NeighborhoodMask& nb_;
    PhenotypeState state_;
    std::vector<std::int64_t> counts_;   // P x N census of current labels
    std::vector<std::int64_t> nb_area_;  // pixels per neighborhood
    std::vector<std::uint32_t> pool_;
    std::vector<std::uint32_t> pool_pos_;
    std::uint32_t next_instance_ = 1;
    std::int64_t iteration_ = 0;
    std::vector<CellRecord> pending_cells_;  // records for fixed stamps, pre-compaction
};

struct PhenotypeResult {
    PhenotypeState state;
    std::vector<IterationTelemetry> telemetry;
};
PhenotypeResult run_phenotype_model(const SimulationConfig& cfg, const NeighborhoodMask& nb,
                                    RandomStream& rng);

} // namespace tissuesim
