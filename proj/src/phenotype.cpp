#include "tissuesim/phenotype.hpp"

#include <algorithm>
#include <cmath>

namespace tissuesim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

EllipseStamp generate_ellipse(int center_y, int center_x, int phenotype,
                              const SimulationConfig& cfg, RandomStream& rng,
                              int image_height, int image_width) {
    EllipseStamp stamp;
    stamp.center_y = center_y;
    stamp.center_x = center_x;
    stamp.semi_major = cfg.phenotype_size[phenotype - 1];
    stamp.eccentricity = cfg.phenotype_eccentricity[phenotype - 1];
    stamp.theta = rng.unit_double() * kPi;

    const double a = stamp.semi_major;
    const double b = a * std::sqrt(1.0 - stamp.eccentricity * stamp.eccentricity);
    const double ct = std::cos(stamp.theta);
    const double st = std::sin(stamp.theta);

    const int r = kWindowRadius - 1;  // stamps live inside the context window
    const int y0 = std::max(0, center_y - r);
    const int y1 = std::min(image_height - 1, center_y + r);
    const int x0 = std::max(0, center_x - r);
    const int x1 = std::min(image_width - 1, center_x + r);
    for (int y = y0; y <= y1; ++y) {
        const double dy = y - center_y;
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - center_x;
            const double u = dx * ct + dy * st;
            const double v = -dx * st + dy * ct;
            if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0)
                stamp.pixels.push_back(
                    static_cast<std::uint32_t>(static_cast<std::size_t>(y) * image_width + x));
        }
    }
    return stamp;
}

std::vector<std::int64_t> measure_phenotype_abundance(const Grid<std::uint16_t>& ph_labels,
                                                      const Grid<std::uint16_t>& nb_labels,
                                                      int num_phenotypes,
                                                      int num_neighborhoods) {
    std::vector<std::int64_t> counts(
        static_cast<std::size_t>(num_phenotypes) * num_neighborhoods, 0);
    for (std::size_t i = 0; i < ph_labels.size(); ++i) {
        const int p = ph_labels[i] - 1;
        const int n = nb_labels[i] - 1;
        ++counts[static_cast<std::size_t>(p) * num_neighborhoods + n];
    }
    return counts;
}

namespace {

// Deficit d(j,n) = (target/actual_pct)^2 per neighborhood plane. Zero
// percentages (including empty neighborhoods) clamp to the one-pixel share.
std::vector<double> plane_deficits(const Matrix& target_pct,
                                   const std::vector<std::int64_t>& counts,
                                   const std::vector<std::int64_t>& nb_area,
                                   std::int64_t total_pixels) {
    const int P = target_pct.rows();
    const int N = target_pct.cols();
    const double eps = 100.0 / static_cast<double>(total_pixels);
    std::vector<double> d(static_cast<std::size_t>(P) * N);
    for (int p = 0; p < P; ++p)
        for (int n = 0; n < N; ++n) {
            double pct = 0.0;
            if (nb_area[n] > 0)
                pct = 100.0 * static_cast<double>(counts[static_cast<std::size_t>(p) * N + n]) /
                      static_cast<double>(nb_area[n]);
            if (pct <= 0.0) pct = eps;
            const double r = target_pct.at(p, n) / pct;
            d[static_cast<std::size_t>(p) * N + n] = r * r;
        }
    return d;
}

} // namespace

Tensor3 phenotype_update_tensor(const Tensor3& interaction, const Matrix& target_pct,
                                const std::vector<std::int64_t>& counts,
                                const std::vector<std::int64_t>& nb_area,
                                std::int64_t total_pixels) {
    const int P = interaction.dim0();
    const int N = interaction.dim2();
    const auto d = plane_deficits(target_pct, counts, nb_area, total_pixels);
    Tensor3 u(P, P, N);
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j)
            for (int n = 0; n < N; ++n)
                u.at(i, j, n) =
                    interaction.at(i, j, n) * d[static_cast<std::size_t>(j) * N + n];
    return u;
}

double phenotype_loss(const Tensor3& interaction, const Matrix& target_pct,
                      const std::vector<std::int64_t>& counts,
                      const std::vector<std::int64_t>& nb_area, std::int64_t total_pixels) {
    const int P = interaction.dim0();
    const int N = interaction.dim2();
    const auto d = plane_deficits(target_pct, counts, nb_area, total_pixels);
    double loss = 0.0;
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j)
            for (int n = 0; n < N; ++n)
                loss += std::abs(interaction.at(i, j, n) *
                                 d[static_cast<std::size_t>(j) * N + n]);
    return loss;
}

PhenotypeModel::PhenotypeModel(const SimulationConfig& cfg, const NeighborhoodMask& nb,
                               RandomStream& rng)
    : cfg_(cfg), nb_(nb) {
    const int P = cfg_.num_phenotypes;
    const int N = cfg_.num_neighborhoods;
    state_.labels = Grid<std::uint16_t>(cfg_.height, cfg_.width);
    state_.unassigned = Grid<std::uint8_t>(cfg_.height, cfg_.width, 1);
    state_.instance_ids = Grid<std::uint32_t>(cfg_.height, cfg_.width, 0);
    for (std::size_t i = 0; i < state_.labels.size(); ++i)
        state_.labels[i] = static_cast<std::uint16_t>(1 + rng.below(P));

    counts_ = measure_phenotype_abundance(state_.labels, nb_.labels, P, N);
    nb_area_.assign(N, 0);
    for (std::uint16_t v : nb_.labels) ++nb_area_[v - 1];

    pool_.clear();
    pool_pos_.assign(state_.labels.size(), UINT32_MAX);
    for (std::size_t i = 0; i < state_.labels.size(); ++i) {
        pool_pos_[i] = static_cast<std::uint32_t>(pool_.size());
        pool_.push_back(static_cast<std::uint32_t>(i));
    }
}

void PhenotypeModel::set_pixel(int y, int x, std::uint16_t label, std::uint32_t id) {
    const int N = cfg_.num_neighborhoods;
    auto& cell = state_.labels.at(y, x);
    if (cell != label) {
        const int n = nb_.labels.at(y, x) - 1;
        --counts_[static_cast<std::size_t>(cell - 1) * N + n];
        ++counts_[static_cast<std::size_t>(label - 1) * N + n];
        cell = label;
    }
    state_.instance_ids.at(y, x) = id;
}

void PhenotypeModel::fix_pixel(int y, int x) {
    const auto idx = static_cast<std::uint32_t>(
        static_cast<std::size_t>(y) * state_.labels.width() + x);
    state_.unassigned.at(y, x) = 0;
    const std::uint32_t pos = pool_pos_[idx];
    const std::uint32_t last = pool_.back();
    pool_[pos] = last;
    pool_pos_[last] = pos;
    pool_.pop_back();
    pool_pos_[idx] = UINT32_MAX;
}

IterationTelemetry PhenotypeModel::step(RandomStream& rng) {
    if (pool_.empty()) throw std::logic_error("phenotype step with no unassigned pixels");

    const int P = cfg_.num_phenotypes;
    const int N = cfg_.num_neighborhoods;
    const int W = state_.labels.width();
    const std::int64_t total = static_cast<std::int64_t>(state_.labels.size());
    const double loss =
        phenotype_loss(cfg_.phenotype_interaction, cfg_.phenotype_abundance, counts_,
                       nb_area_, total);

    const std::uint32_t s = pool_[rng.below(pool_.size())];
    const int sy = static_cast<int>(s) / W;
    const int sx = static_cast<int>(s) % W;
    const int r = kWindowRadius - 1;
    const int y0 = std::max(0, sy - r);
    const int y1 = std::min(state_.labels.height() - 1, sy + r);
    const int x0 = std::max(0, sx - r);
    const int x1 = std::min(W - 1, sx + r);

    // Window census of phenotype labels and modal neighborhood.
    std::vector<std::int32_t> ph_counts(P, 0);
    std::vector<std::int32_t> nb_counts(N, 0);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            ++ph_counts[state_.labels.at(y, x) - 1];
            ++nb_counts[nb_.labels.at(y, x) - 1];
        }
    int ng = 0;
    for (int k = 1; k < N; ++k)
        if (nb_counts[k] > nb_counts[ng]) ng = k;

    // Score each candidate phenotype j by summing the U' rows of every
    // window pixel's current label: score(j) = sum_v count(v) U'(v,j) with
    // U'(v,j) = interaction(v,j,ng) * deficit(j,ng).
    const auto deficits =
        plane_deficits(cfg_.phenotype_abundance, counts_, nb_area_, total);
    int ph = 0;
    double best_score = 0.0;
    for (int j = 0; j < P; ++j) {
        double w = 0.0;
        for (int v = 0; v < P; ++v)
            if (ph_counts[v] != 0)
                w += static_cast<double>(ph_counts[v]) * cfg_.phenotype_interaction.at(v, j, ng);
        const double score = w * deficits[static_cast<std::size_t>(j) * N + ng];
        if (j == 0 || score > best_score) {
            best_score = score;
            ph = j;
        }
    }
    const auto label = static_cast<std::uint16_t>(ph + 1);
    const bool is_background = label == cfg_.background_phenotype;

    const EllipseStamp stamp = generate_ellipse(sy, sx, ph + 1, cfg_, rng,
                                                state_.labels.height(), W);

    std::int32_t free_pixels = 0;
    for (std::uint32_t q : stamp.pixels)
        if (state_.unassigned[q]) ++free_pixels;
    const double f =
        static_cast<double>(free_pixels) / static_cast<double>(stamp.pixels.size());

    if (f > 0.8) {
        if (is_background) {
            for (std::uint32_t q : stamp.pixels)
                if (state_.unassigned[q]) {
                    set_pixel(q / W, q % W, label, 0);
                    fix_pixel(q / W, q % W);
                }
        } else {
            // Fix only the 4-connected component of free stamp pixels that
            // contains the seed, so every final instance is one connected
            // cell. Free pixels cut off by fixed neighbors stay in the pool.
            std::vector<std::uint32_t> component;
            {
                std::vector<std::uint32_t> queue{s};
                // stamp.pixels is emitted row-major, so the free subset is
                // already sorted and binary-searchable.
                std::vector<std::uint32_t> free_sorted;
                free_sorted.reserve(free_pixels);
                for (std::uint32_t q : stamp.pixels)
                    if (state_.unassigned[q]) free_sorted.push_back(q);
                std::vector<std::uint8_t> visited(free_sorted.size(), 0);
                auto find_free = [&](std::uint32_t q) -> int {
                    auto it = std::lower_bound(free_sorted.begin(), free_sorted.end(), q);
                    if (it == free_sorted.end() || *it != q) return -1;
                    return static_cast<int>(it - free_sorted.begin());
                };
                const int seed_pos = find_free(s);
                visited[seed_pos] = 1;
                while (!queue.empty()) {
                    const std::uint32_t q = queue.back();
                    queue.pop_back();
                    component.push_back(q);
                    const int qy = static_cast<int>(q) / W;
                    const int qx = static_cast<int>(q) % W;
                    const int dy[4] = {-1, 1, 0, 0};
                    const int dx[4] = {0, 0, -1, 1};
                    for (int k = 0; k < 4; ++k) {
                        const int ny = qy + dy[k];
                        const int nx = qx + dx[k];
                        if (!state_.labels.in_bounds(ny, nx)) continue;
                        const auto nq = static_cast<std::uint32_t>(
                            static_cast<std::size_t>(ny) * W + nx);
                        const int pos = find_free(nq);
                        if (pos >= 0 && !visited[pos]) {
                            visited[pos] = 1;
                            queue.push_back(nq);
                        }
                    }
                }
            }
            const std::uint32_t id = next_instance_++;
            for (std::uint32_t q : component) {
                set_pixel(q / W, q % W, label, id);
                fix_pixel(q / W, q % W);
            }
            CellRecord rec;
            rec.id = id;
            rec.phenotype = ph + 1;
            rec.center_y = sy;
            rec.center_x = sx;
            rec.theta = stamp.theta;
            rec.stamp_pixels = static_cast<std::int32_t>(stamp.pixels.size());
            rec.written_pixels = static_cast<std::int32_t>(component.size());
            pending_cells_.push_back(rec);
        }
    } else if (f < 0.2) {
        // Sliver of leftover pixels: close it out as background.
        for (std::uint32_t q : stamp.pixels)
            if (state_.unassigned[q]) {
                set_pixel(q / W, q % W, cfg_.background_phenotype, 0);
                fix_pixel(q / W, q % W);
            }
    } else {
        // Provisional stamp; stays rewritable and only steers the census.
        const std::uint32_t id = is_background ? 0 : next_instance_++;
        for (std::uint32_t q : stamp.pixels)
            if (state_.unassigned[q]) set_pixel(q / W, q % W, label, id);
    }

    return IterationTelemetry{iteration_++, loss, unassigned_count()};
}

void PhenotypeModel::compact_instances() {
    // Provisional ids never survive (their pixels are always refixed), so
    // the surviving ids are exactly the pending cell records'. Remap to a
    // dense 1..K range in placement order.
    std::vector<std::uint32_t> remap(next_instance_, 0);
    std::uint32_t next = 1;
    std::vector<CellRecord> cells;
    cells.reserve(pending_cells_.size());
    for (const auto& rec : pending_cells_) {
        remap[rec.id] = next;
        CellRecord out = rec;
        out.id = next;
        cells.push_back(out);
        ++next;
    }
    for (auto& id : state_.instance_ids) id = remap[id];
    state_.cells = std::move(cells);
}

std::vector<IterationTelemetry> PhenotypeModel::run(RandomStream& rng) {
    const std::int64_t cap = 50 * static_cast<std::int64_t>(state_.labels.size());
    std::vector<IterationTelemetry> telemetry;
    while (!done()) {
        if (iteration_ >= cap)
            throw ConvergenceError("phenotype optimization did not converge within " +
                                   std::to_string(cap) + " steps (" +
                                   std::to_string(unassigned_count()) +
                                   " pixels still unassigned)");
        telemetry.push_back(step(rng));
    }
    compact_instances();
    return telemetry;
}

PhenotypeResult run_phenotype_model(const SimulationConfig& cfg, const NeighborhoodMask& nb,
                                    RandomStream& rng) {
    PhenotypeModel model(cfg, nb, rng);
    auto telemetry = model.run(rng);
    return PhenotypeResult{model.take_state(), std::move(telemetry)};
}

} // namespace tissuesim
