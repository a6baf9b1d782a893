#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tissuesim/grid.hpp"

namespace tissuesim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// All user-defined simulation parameters. Percentages are stored on a
// 0..100 scale. Phenotype and neighborhood labels are 1-based throughout.
// Immutable after validation; safe to share across worker threads.
struct SimulationConfig {
    int width = 0;   // m_x, pixels
    int height = 0;  // m_y, pixels

    int num_neighborhoods = 0;                   // N
    std::vector<double> neighborhood_abundance;  // N entries, sums to 100
    Matrix neighborhood_interaction;             // N x N; >0 attraction, <0 repulsion

    int num_phenotypes = 0;        // P, includes the background phenotype
    int background_phenotype = 0;  // 1..P
    int background_neighborhood = 0;  // 1..N
    Matrix phenotype_abundance;    // P x N; each column sums to 100
    Tensor3 phenotype_interaction; // P x P x N
    std::vector<double> phenotype_eccentricity;  // P entries in [0,1)
    std::vector<double> phenotype_size;          // P entries >= 1, semi-major axis px

    int num_markers = 0;      // C
    Matrix marker_expression; // P x C in [0,1]; background row is all zeros

    double leakage_sigma = 0.5;  // channel units
    double psf_sigma = 0.75;     // pixels
    double snr_db = 20.0;
    std::uint64_t seed = 0;
};

// Parses the JSON config document. Optional fields (leakage_sigma,
// psf_sigma, snr_db, seed) take their defaults when absent. Throws
// ConfigError for malformed documents, missing required fields, dimension
// mismatches, or violated invariants.
SimulationConfig parse_config(const std::string& text);
SimulationConfig parse_config_file(const std::string& path);

// Serializes with a fixed key order so parse -> serialize -> parse
// round-trips byte-identically.
std::string serialize_config(const SimulationConfig& cfg);

// Returns one message per violated invariant; empty means the config is ok.
std::vector<std::string> validate_config(const SimulationConfig& cfg);

enum class PresetScale { full, desk };

// Built-in disease-model preset: 6 markers, 9 phenotypes (Ph9 background),
// 6 neighborhoods (Nb1 background). full is 1000x2000, desk 256x512.
SimulationConfig preset_fig4(PresetScale scale);

} // namespace tissuesim
