#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tissuesim/config.hpp"
#include "tissuesim/grid.hpp"
#include "tissuesim/neighborhood.hpp"
#include "tissuesim/phenotype.hpp"
#include "tissuesim/texture.hpp"

namespace tissuesim {

struct CellNode {
    std::uint32_t id = 0;
    int phenotype = 0;
    double centroid_y = 0.0;
    double centroid_x = 0.0;
    int area = 0;
    int neighborhood = 0;  // label at the centroid's nearest pixel
};

struct CellGraph {
    std::vector<CellNode> nodes;                    // sorted by instance id
    std::vector<std::pair<int, int>> edges;         // node indices, first < second
};

// Entry (a-1, b-1) = number of 4-adjacent pixel pairs whose labels are
// {a, b}, a != b; symmetric with zero diagonal.
Matrix neighborhood_adjacency(const Grid<std::uint16_t>& labels, int num_neighborhoods);

// Nodes are cell instances (centroid = mean member pixel position); an
// undirected edge joins cells whose centroids are closer than radius.
CellGraph build_cell_graph(const PhenotypeState& state,
                           const Grid<std::uint16_t>& nb_labels, double radius = 12.0);

// Entry (p-1, q-1, n-1) = edges between phenotypes p and q attributed to
// neighborhood n (the neighborhood of the lower-id endpoint's centroid).
// Symmetric in (p, q); each edge counts once per mirrored entry.
Tensor3 phenotype_interaction_counts(const CellGraph& graph, int num_phenotypes,
                                     int num_neighborhoods);

// Per-neighborhood phenotype pixel percentages (columns sum to 100 for
// non-empty neighborhoods).
Matrix phenotype_abundance_stats(const Grid<std::uint16_t>& ph_labels,
                                 const Grid<std::uint16_t>& nb_labels, int num_phenotypes,
                                 int num_neighborhoods);

// Mean and population std of each channel over each phenotype's pixels.
struct ExpressionStats {
    Matrix mean;  // P x C
    Matrix stddev;
};
ExpressionStats marker_expression_stats(const MultiplexImage& img,
                                        const Grid<std::uint16_t>& ph_labels,
                                        int num_phenotypes);

struct MetricsReport {
    Matrix neighborhood_adjacency;   // N x N
    Tensor3 phenotype_interactions;  // P x P x N
    Matrix phenotype_abundance_pct;  // P x N
    ExpressionStats expression;      // P x C
};

MetricsReport compute_metrics(const NeighborhoodMask& nb, const PhenotypeState& state,
                              const MultiplexImage& img, const SimulationConfig& cfg);

// One CSV per table plus a combined JSON summary, written with fixed
// formatting so identical reports produce identical bytes.
void write_metrics_csv(const MetricsReport& report, const std::string& dir,
                       const std::string& stem);
void write_metrics_json(const MetricsReport& report, const std::string& path);

} // namespace tissuesim
