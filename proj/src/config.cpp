#include "tissuesim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tissuesim {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kSumTol = 1e-9;

std::string fmt_pct(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

const ordered_json& require_field(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(std::string("missing required field \"") + key + "\"");
    return *it;
}

int require_positive_int(const ordered_json& j, const char* key) {
    const auto& v = require_field(j, key);
    if (!v.is_number_integer() || v.get<long long>() <= 0)
        throw ConfigError(std::string("field \"") + key + "\" must be a positive integer");
    return v.get<int>();
}

std::vector<double> require_vector(const ordered_json& j, const char* key, int n) {
    const auto& v = require_field(j, key);
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw ConfigError(std::string("field \"") + key + "\" must be an array of length " +
                          std::to_string(n));
    std::vector<double> out;
    out.reserve(n);
    for (const auto& e : v) {
        if (!e.is_number())
            throw ConfigError(std::string("field \"") + key + "\" must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

Matrix require_matrix(const ordered_json& j, const char* key, int rows, int cols) {
    const auto& v = require_field(j, key);
    if (!v.is_array() || static_cast<int>(v.size()) != rows)
        throw ConfigError(std::string("field \"") + key + "\" must be a " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto& row = v[r];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError(std::string("field \"") + key + "\" row " + std::to_string(r + 1) +
                              " must have " + std::to_string(cols) + " entries");
        for (int c = 0; c < cols; ++c) m.at(r, c) = row[c].get<double>();
    }
    return m;
}

Tensor3 require_tensor(const ordered_json& j, const char* key, int d0, int d1, int d2) {
    const auto& v = require_field(j, key);
    if (!v.is_array() || static_cast<int>(v.size()) != d0)
        throw ConfigError(std::string("field \"") + key + "\" must be a " +
                          std::to_string(d0) + "x" + std::to_string(d1) + "x" +
                          std::to_string(d2) + " tensor");
    Tensor3 t(d0, d1, d2);
    for (int i = 0; i < d0; ++i) {
        const auto& plane = v[i];
        if (!plane.is_array() || static_cast<int>(plane.size()) != d1)
            throw ConfigError(std::string("field \"") + key + "\" index " +
                              std::to_string(i + 1) + " must have " + std::to_string(d1) +
                              " rows");
        for (int jj = 0; jj < d1; ++jj) {
            const auto& row = plane[jj];
            if (!row.is_array() || static_cast<int>(row.size()) != d2)
                throw ConfigError(std::string("field \"") + key + "\" entry (" +
                                  std::to_string(i + 1) + "," + std::to_string(jj + 1) +
                                  ") must have " + std::to_string(d2) + " values");
            for (int n = 0; n < d2; ++n) t.at(i, jj, n) = row[n].get<double>();
        }
    }
    return t;
}

ordered_json matrix_to_json(const Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json tensor_to_json(const Tensor3& t) {
    ordered_json planes = ordered_json::array();
    for (int i = 0; i < t.dim0(); ++i) {
        ordered_json rows = ordered_json::array();
        for (int j = 0; j < t.dim1(); ++j) {
            ordered_json row = ordered_json::array();
            for (int n = 0; n < t.dim2(); ++n) row.push_back(t.at(i, j, n));
            rows.push_back(std::move(row));
        }
        planes.push_back(std::move(rows));
    }
    return planes;
}

} // namespace

SimulationConfig parse_config(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    SimulationConfig cfg;
    cfg.width = require_positive_int(j, "width");
    cfg.height = require_positive_int(j, "height");
    cfg.num_neighborhoods = require_positive_int(j, "num_neighborhoods");
    const int N = cfg.num_neighborhoods;
    cfg.neighborhood_abundance = require_vector(j, "neighborhood_abundance", N);
    cfg.neighborhood_interaction = require_matrix(j, "neighborhood_interaction", N, N);

    cfg.num_phenotypes = require_positive_int(j, "num_phenotypes");
    const int P = cfg.num_phenotypes;
    cfg.background_phenotype = require_positive_int(j, "background_phenotype");
    cfg.background_neighborhood = require_positive_int(j, "background_neighborhood");
    cfg.phenotype_abundance = require_matrix(j, "phenotype_abundance", P, N);
    cfg.phenotype_interaction = require_tensor(j, "phenotype_interaction", P, P, N);
    cfg.phenotype_eccentricity = require_vector(j, "phenotype_eccentricity", P);
    cfg.phenotype_size = require_vector(j, "phenotype_size", P);

    cfg.num_markers = require_positive_int(j, "num_markers");
    cfg.marker_expression = require_matrix(j, "marker_expression", P, cfg.num_markers);

    cfg.leakage_sigma = j.value("leakage_sigma", 0.5);
    cfg.psf_sigma = j.value("psf_sigma", 0.75);
    cfg.snr_db = j.value("snr_db", 20.0);
    cfg.seed = j.value("seed", std::uint64_t{0});

    auto violations = validate_config(cfg);
    if (!violations.empty()) {
        std::string msg = "invalid config:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ConfigError(msg);
    }
    return cfg;
}

SimulationConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const SimulationConfig& cfg) {
    ordered_json j;
    j["width"] = cfg.width;
    j["height"] = cfg.height;
    j["num_neighborhoods"] = cfg.num_neighborhoods;
    j["neighborhood_abundance"] = cfg.neighborhood_abundance;
    j["neighborhood_interaction"] = matrix_to_json(cfg.neighborhood_interaction);
    j["num_phenotypes"] = cfg.num_phenotypes;
    j["background_phenotype"] = cfg.background_phenotype;
    j["background_neighborhood"] = cfg.background_neighborhood;
    j["phenotype_abundance"] = matrix_to_json(cfg.phenotype_abundance);
    j["phenotype_interaction"] = tensor_to_json(cfg.phenotype_interaction);
    j["phenotype_eccentricity"] = cfg.phenotype_eccentricity;
    j["phenotype_size"] = cfg.phenotype_size;
    j["num_markers"] = cfg.num_markers;
    j["marker_expression"] = matrix_to_json(cfg.marker_expression);
    j["leakage_sigma"] = cfg.leakage_sigma;
    j["psf_sigma"] = cfg.psf_sigma;
    j["snr_db"] = cfg.snr_db;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

std::vector<std::string> validate_config(const SimulationConfig& cfg) {
    std::vector<std::string> v;
    const int N = cfg.num_neighborhoods;
    const int P = cfg.num_phenotypes;
    const int C = cfg.num_markers;

    if (cfg.width <= 0) v.push_back("width must be positive");
    if (cfg.height <= 0) v.push_back("height must be positive");
    if (N <= 0) v.push_back("num_neighborhoods must be positive");
    if (P <= 0) v.push_back("num_phenotypes must be positive");
    if (C <= 0) v.push_back("num_markers must be positive");
    if (N <= 0 || P <= 0 || C <= 0) return v;

    if (cfg.background_phenotype < 1 || cfg.background_phenotype > P)
        v.push_back("background_phenotype must be in 1.." + std::to_string(P));
    if (cfg.background_neighborhood < 1 || cfg.background_neighborhood > N)
        v.push_back("background_neighborhood must be in 1.." + std::to_string(N));

    if (static_cast<int>(cfg.neighborhood_abundance.size()) != N) {
        v.push_back("neighborhood_abundance must have " + std::to_string(N) + " entries");
    } else {
        double sum = 0.0;
        bool neg = false;
        for (double a : cfg.neighborhood_abundance) {
            sum += a;
            if (a < 0.0) neg = true;
        }
        if (neg) v.push_back("neighborhood_abundance entries must be non-negative");
        if (std::abs(sum - 100.0) > kSumTol)
            v.push_back("neighborhood_abundance sums to " + fmt_pct(sum) + ", expected 100");
    }

    if (cfg.neighborhood_interaction.rows() != N || cfg.neighborhood_interaction.cols() != N)
        v.push_back("neighborhood_interaction must be " + std::to_string(N) + "x" +
                    std::to_string(N));

    if (cfg.phenotype_abundance.rows() != P || cfg.phenotype_abundance.cols() != N) {
        v.push_back("phenotype_abundance must be " + std::to_string(P) + "x" +
                    std::to_string(N));
    } else {
        for (int n = 0; n < N; ++n) {
            double sum = 0.0;
            for (int p = 0; p < P; ++p) sum += cfg.phenotype_abundance.at(p, n);
            if (std::abs(sum - 100.0) > kSumTol)
                v.push_back("phenotype_abundance column " + std::to_string(n + 1) +
                            " sums to " + fmt_pct(sum) + ", expected 100");
        }
    }

    if (cfg.phenotype_interaction.dim0() != P || cfg.phenotype_interaction.dim1() != P ||
        cfg.phenotype_interaction.dim2() != N)
        v.push_back("phenotype_interaction must be " + std::to_string(P) + "x" +
                    std::to_string(P) + "x" + std::to_string(N));

    if (static_cast<int>(cfg.phenotype_eccentricity.size()) != P) {
        v.push_back("phenotype_eccentricity must have " + std::to_string(P) + " entries");
    } else {
        for (int p = 0; p < P; ++p) {
            const double e = cfg.phenotype_eccentricity[p];
            if (e < 0.0 || e >= 1.0)
                v.push_back("phenotype_eccentricity entry " + std::to_string(p + 1) +
                            " must be in [0,1)");
        }
    }

    if (static_cast<int>(cfg.phenotype_size.size()) != P) {
        v.push_back("phenotype_size must have " + std::to_string(P) + " entries");
    } else {
        for (int p = 0; p < P; ++p) {
            if (cfg.phenotype_size[p] < 1.0)
                v.push_back("phenotype_size entry " + std::to_string(p + 1) + " must be >= 1");
        }
    }

    if (cfg.marker_expression.rows() != P || cfg.marker_expression.cols() != C) {
        v.push_back("marker_expression must be " + std::to_string(P) + "x" + std::to_string(C));
    } else {
        for (int p = 0; p < P; ++p)
            for (int c = 0; c < C; ++c) {
                const double m = cfg.marker_expression.at(p, c);
                if (m < 0.0 || m > 1.0) {
                    v.push_back("marker_expression entries must be in [0,1]");
                    p = P;
                    break;
                }
            }
        if (cfg.background_phenotype >= 1 && cfg.background_phenotype <= P) {
            for (int c = 0; c < C; ++c) {
                if (cfg.marker_expression.at(cfg.background_phenotype - 1, c) != 0.0) {
                    v.push_back("marker_expression row " +
                                std::to_string(cfg.background_phenotype) +
                                " (background phenotype) must be all zeros");
                    break;
                }
            }
        }
    }

    if (cfg.leakage_sigma <= 0.0) v.push_back("leakage_sigma must be positive");
    if (cfg.psf_sigma <= 0.0) v.push_back("psf_sigma must be positive");

    return v;
}

SimulationConfig preset_fig4(PresetScale scale) {
    SimulationConfig cfg;
    cfg.width = scale == PresetScale::full ? 1000 : 256;
    cfg.height = scale == PresetScale::full ? 2000 : 512;

    const int N = 6;
    const int P = 9;
    const int C = 6;
    cfg.num_neighborhoods = N;
    cfg.num_phenotypes = P;
    cfg.num_markers = C;
    cfg.background_phenotype = 9;   // Ph9: no marker expression
    cfg.background_neighborhood = 1;  // Nb1: cell-free tissue

    // Nb1 (background) takes 30% of the tissue; the five cellular
    // neighborhoods share the rest evenly.
    cfg.neighborhood_abundance = {30, 14, 14, 14, 14, 14};

    // Baseline +1 everywhere: any neighborhood may replace any other when it
    // is underrepresented. A zero baseline freezes non-paired rows (their
    // argmax is always the diagonal) and the optimization cannot converge.
    // Nb2<->Nb3 attract (+2), Nb5<->Nb6 repel (-1).
    cfg.neighborhood_interaction = Matrix(N, N, 1.0);
    cfg.neighborhood_interaction.at(1, 2) = 2.0;
    cfg.neighborhood_interaction.at(2, 1) = 2.0;
    cfg.neighborhood_interaction.at(4, 5) = -1.0;
    cfg.neighborhood_interaction.at(5, 4) = -1.0;

    // Per-neighborhood phenotype mix (columns sum to 100, Ph9 fills the
    // cell-free remainder). Nb2: Ph3/Ph7 at 20%, Ph4/Ph5 at 10%.
    // Nb4: Ph2/Ph5/Ph6/Ph8. Nb5: Ph2/Ph4/Ph7. Nb6: Ph5/Ph7 plus Ph1/Ph3.
    cfg.phenotype_abundance = Matrix(P, N, 0.0);
    auto ab = [&cfg](int ph, int nb, double pct) {
        cfg.phenotype_abundance.at(ph - 1, nb - 1) = pct;
    };
    ab(9, 1, 100);
    ab(3, 2, 20); ab(7, 2, 20); ab(4, 2, 10); ab(5, 2, 10); ab(9, 2, 40);
    ab(1, 3, 25); ab(3, 3, 15); ab(9, 3, 60);
    ab(2, 4, 15); ab(5, 4, 10); ab(6, 4, 15); ab(8, 4, 10); ab(9, 4, 50);
    ab(2, 5, 15); ab(4, 5, 15); ab(7, 5, 10); ab(9, 5, 60);
    ab(5, 6, 15); ab(7, 6, 15); ab(1, 6, 10); ab(3, 6, 10); ab(9, 6, 50);

    // Self-affinity (+1) for every phenotype present in a neighborhood, plus
    // the configured pairs: Ph3<->Ph7 repel and Ph4<->Ph5 attract in Nb2,
    // Ph6<->Ph2 attract in Nb4, Ph5<->Ph7 repel in Nb6.
    cfg.phenotype_interaction = Tensor3(P, P, N, 0.0);
    for (int n = 0; n < N; ++n)
        for (int p = 0; p < P; ++p)
            if (cfg.phenotype_abundance.at(p, n) > 0.0)
                cfg.phenotype_interaction.at(p, p, n) = 1.0;
    auto pint = [&cfg](int a, int b, int nb, double w) {
        cfg.phenotype_interaction.at(a - 1, b - 1, nb - 1) = w;
        cfg.phenotype_interaction.at(b - 1, a - 1, nb - 1) = w;
    };
    pint(3, 7, 2, -1.0);
    pint(4, 5, 2, 1.0);
    pint(6, 2, 4, 1.0);
    pint(5, 7, 6, -1.0);

    // Morphology: sizes span the 2..6 px range (Ph4 smallest, Ph2/Ph6
    // largest); Ph5 is the elongated phenotype, Ph3 and Ph4 are round.
    cfg.phenotype_size = {4, 6, 3, 2, 5, 6, 4, 5, 6};
    cfg.phenotype_eccentricity = {0.3, 0.5, 0.0, 0.0, 0.9, 0.4, 0.6, 0.5, 0.0};

    // Ph1-Ph6 each express their own marker at a distinct level; Ph7
    // co-expresses Mk2+Mk5, Ph8 co-expresses Mk4+Mk6; Ph9 is unstained.
    cfg.marker_expression = Matrix(P, C, 0.0);
    const double own[6] = {1.0, 0.8, 0.9, 0.7, 0.85, 0.75};
    for (int p = 0; p < 6; ++p) cfg.marker_expression.at(p, p) = own[p];
    cfg.marker_expression.at(6, 1) = 0.8;
    cfg.marker_expression.at(6, 4) = 0.8;
    cfg.marker_expression.at(7, 3) = 0.8;
    cfg.marker_expression.at(7, 5) = 0.8;

    cfg.leakage_sigma = 0.5;
    cfg.psf_sigma = 0.75;
    cfg.snr_db = 20.0;
    cfg.seed = 0;
    return cfg;
}

} // namespace tissuesim
