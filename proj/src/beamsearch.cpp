// SPDX-License-Identifier: Apache-2.0

#include "rismm/beamsearch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rismm {

namespace {

int floor_div(long long num, long long den) { return int(num / den); }

// Fine direction-cosine grid equivalent to a 0.1 degree angle sweep.
std::vector<double>& fine_u_grid() {
    static std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = -900; i <= 900; ++i) g.push_back(std::sin(double(i) * 0.1 * kPi / 180.0));
        return g;
    }();
    return grid;
}

std::vector<double> compute_beam_centers(const Codebook& book) {
    const auto& grid = fine_u_grid();
    const double k = 2.0 * kPi * book.spacing_over_lambda;
    std::vector<double> centers(book.n_beams, 0.0);
    for (int b = 0; b < book.n_beams; ++b) {
        double best = -1.0;
        double best_u = 0.0;
        for (double u : grid) {
            cxd acc(0.0, 0.0);
            for (int n = 0; n < book.n_elements; ++n)
                acc += std::polar(1.0, -k * double(n) * u) * book.entries(n, b);
            const double p = std::norm(acc);
            if (p > best + 1e-15) {
                best = p;
                best_u = u;
            }
        }
        centers[b] = best_u;
    }
    return centers;
}

} // namespace

Codebook primary_codebook(CodebookAxis axis, int n_elements, int n_phases, int n_beams,
                          double spacing_over_lambda) {
    if (n_phases < 2 || n_beams < 2 || n_elements < 1)
        throw std::invalid_argument("primary_codebook: need tau >= 2, K >= 2, N >= 1");
    Codebook book;
    book.axis = axis;
    book.n_elements = n_elements;
    book.n_phases = n_phases;
    book.n_beams = n_beams;
    book.total_states = n_beams;
    book.layers = int(std::ceil(std::log2(double(n_beams))));
    book.active_elements = n_elements;
    book.spacing_over_lambda = spacing_over_lambda;
    book.entries.resize(n_elements, n_beams);
    const long long denom =
        (axis == CodebookAxis::azimuth) ? (long long)(n_beams) : (long long)(2 * n_beams - 2);
    for (int n = 0; n < n_elements; ++n) {
        for (int k = 0; k < n_beams; ++k) {
            const int level = floor_div((long long)n * k * n_phases, denom);
            book.entries(n, k) = std::polar(1.0, -2.0 * kPi * double(level) / double(n_phases));
        }
    }
    return book;
}

namespace {

// tau-quantized steering codeword toward direction cosine u over a centered
// active block of the aperture.
CVec quantized_steering_codeword(int n_elements, int active, int n_phases, double u,
                                 double spacing_over_lambda) {
    const double k = 2.0 * kPi * spacing_over_lambda;
    const double step = 2.0 * kPi / double(n_phases);
    CVec w = CVec::Zero(n_elements);
    const int off = (n_elements - active) / 2;
    for (int n = 0; n < active; ++n) {
        const double phase = k * double(off + n) * u;
        w[off + n] = std::polar(1.0, step * std::round(phase / step));
    }
    return w;
}

} // namespace

std::vector<Codebook> layered_codebooks(CodebookAxis axis, int n_elements, int n_phases,
                                        int n_beams, double spacing_over_lambda) {
    const int v = std::max(1, int(std::ceil(std::log2(double(n_beams)))));
    Codebook primary =
        primary_codebook(axis, n_elements, n_phases, n_beams, spacing_over_lambda);

    // Primary beams sorted by center; layer-l sector g covers sorted
    // positions [g*K/2^l, (g+1)*K/2^l).
    const auto& centers = beam_center_table(primary);
    std::vector<int> order(std::size_t(n_beams));
    for (int i = 0; i < n_beams; ++i) order[std::size_t(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return centers[std::size_t(a)] < centers[std::size_t(b)]; });
    auto sector_range = [&](int g, int groups) {
        const int lo = g * n_beams / groups;
        const int hi = (g + 1) * n_beams / groups;
        return std::make_pair(lo, std::max(hi, lo + 1));
    };

    std::vector<Codebook> layers;
    layers.reserve(v);
    for (int l = 1; l < v; ++l) {
        const int beams = 1 << l;
        int active = int(std::lround(double(n_elements) * double(1 << l) / double(1 << v)));
        active = std::max(1, std::min(n_elements, active));

        Codebook layer;
        layer.axis = axis;
        layer.n_elements = n_elements;
        layer.n_phases = n_phases;
        layer.n_beams = beams;
        layer.total_states = n_beams;
        layer.layers = v;
        layer.active_elements = active;
        layer.spacing_over_lambda = spacing_over_lambda;
        layer.entries.resize(n_elements, beams);
        layer.child_map.resize(std::size_t(beams));
        for (int g = 0; g < beams; ++g) {
            const auto [lo, hi] = sector_range(g, beams);
            double u_c = 0.0;
            for (int i = lo; i < hi; ++i) u_c += centers[std::size_t(order[std::size_t(i)])];
            u_c /= double(hi - lo);
            layer.entries.col(g) = quantized_steering_codeword(n_elements, active, n_phases,
                                                               u_c, spacing_over_lambda);
            if (l + 1 < v) {
                layer.child_map[std::size_t(g)] = {2 * g, 2 * g + 1};
            } else {
                // Children are the primary beams whose sorted position falls
                // in this sector.
                for (int i = lo; i < hi; ++i)
                    layer.child_map[std::size_t(g)].push_back(order[std::size_t(i)]);
            }
        }
        layers.push_back(std::move(layer));
    }
    layers.push_back(std::move(primary));
    return layers;
}

const std::vector<double>& beam_center_table(const Codebook& book) {
    // Center tables are immutable per book; keyed by the entry matrix address
    // plus shape so repeated lookups on the same book are free.
    struct CacheEntry {
        const cxd* key;
        int beams;
        std::vector<double> centers;
    };
    static thread_local std::vector<CacheEntry> cache;
    for (auto& e : cache)
        if (e.key == book.entries.data() && e.beams == book.n_beams) return e.centers;
    cache.push_back(CacheEntry{book.entries.data(), book.n_beams, compute_beam_centers(book)});
    return cache.back().centers;
}

double beam_center_u(const Codebook& book, int k) {
    if (k < 0 || k >= book.n_beams)
        throw std::invalid_argument("beam_center_u: beam index out of range");
    return beam_center_table(book)[std::size_t(k)];
}

CVec compose_codeword(const CVec& w_el, const CVec& w_az) {
    CVec out(w_el.size() * w_az.size());
    for (int ix = 0; ix < w_el.size(); ++ix)
        for (int iy = 0; iy < w_az.size(); ++iy)
            out[ix * w_az.size() + iy] = w_el[ix] * w_az[iy];
    return out;
}

namespace {

// Children of beam k when descending from a parent layer: the parent's
// child_map when present, else the (at most two) next-layer beams at the
// proportional index position.
std::vector<int> child_beams(const Codebook& parent_book, int k, int beams_next) {
    if (!parent_book.child_map.empty()) return parent_book.child_map[std::size_t(k)];
    const int c = floor_div((long long)k * beams_next, parent_book.n_beams);
    std::vector<int> out{std::min(c, beams_next - 1)};
    if (c + 1 < beams_next) out.push_back(c + 1);
    return out;
}

CVec center_row_selector(int n) {
    CVec e = CVec::Zero(n);
    e[n / 2] = cxd(1.0, 0.0);
    return e;
}

double median_center_spacing(const Codebook& book) {
    auto centers = beam_center_table(book);
    std::sort(centers.begin(), centers.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < centers.size(); ++i) gaps.push_back(centers[i] - centers[i - 1]);
    if (gaps.empty()) return 2.0 / double(std::max(1, book.n_beams));
    std::sort(gaps.begin(), gaps.end());
    return gaps[gaps.size() / 2];
}

CVec rotate_codeword(const CVec& w, double u_offset, double spacing_over_lambda) {
    const double k = 2.0 * kPi * spacing_over_lambda;
    CVec out(w.size());
    for (int n = 0; n < w.size(); ++n)
        out[n] = w[n] * std::polar(1.0, k * double(n) * u_offset);
    return out;
}

struct AxisStageResult {
    int ris_winner = 0;
    int ue_winner = 0;
    double ris_offset_u = 0.0;
    CVec ris_weights; // refined axis codeword
    CVec ue_weights;
    int measurements = 0;
    int layers_run = 0;
    std::vector<double> power_trace;
};

// One-axis joint tree search plus RIS-side secondary refinement. `embed`
// lifts an axis codeword pair into full planar weights for the measurement.
AxisStageResult run_axis_stage(
    const MeasureFn& measure, const std::vector<Codebook>& ris_layers,
    const std::vector<Codebook>& ue_layers,
    const std::function<std::pair<CVec, CVec>(const CVec&, const CVec&)>& embed,
    int rotations) {
    AxisStageResult r;
    const int v_ris = int(ris_layers.size());
    const int v_ue = int(ue_layers.size());
    const int v = std::max(v_ris, v_ue);

    int ris_k = 0, ue_k = 0;
    for (int layer = 1; layer <= v; ++layer) {
        const int li_ris = std::min(layer, v_ris) - 1;
        const int li_ue = std::min(layer, v_ue) - 1;
        const Codebook& rb = ris_layers[li_ris];
        const Codebook& ub = ue_layers[li_ue];

        std::vector<int> ris_c, ue_c;
        if (layer == 1) {
            ris_c = {0};
            if (rb.n_beams > 1) ris_c.push_back(1);
            ue_c = {0};
            if (ub.n_beams > 1) ue_c.push_back(1);
        } else {
            ris_c = (layer <= v_ris)
                        ? child_beams(ris_layers[li_ris - 1], ris_k, rb.n_beams)
                        : std::vector<int>{ris_k};
            ue_c = (layer <= v_ue) ? child_beams(ue_layers[li_ue - 1], ue_k, ub.n_beams)
                                   : std::vector<int>{ue_k};
        }

        double best = -1.0;
        int best_r = ris_c.front(), best_u = ue_c.front();
        for (int rc : ris_c) {
            for (int uc : ue_c) {
                auto [rw, uw] = embed(rb.codeword(rc), ub.codeword(uc));
                const double p = measure(rw, uw);
                if (!std::isfinite(p))
                    throw std::runtime_error("hierarchical_search: non-finite measured power");
                ++r.measurements;
                if (p > best) { // ties keep the lowest (ris, ue) index pair
                    best = p;
                    best_r = rc;
                    best_u = uc;
                }
            }
        }
        ris_k = best_r;
        ue_k = best_u;
        r.power_trace.push_back(best);
        ++r.layers_run;
    }

    r.ris_winner = ris_k;
    r.ue_winner = ue_k;
    const Codebook& final_ris = ris_layers.back();
    const Codebook& final_ue = ue_layers.back();
    r.ue_weights = final_ue.codeword(ue_k);

    auto axis_measure = [&](const CVec& w_axis) {
        auto [rw, uw] = embed(w_axis, r.ue_weights);
        ++r.measurements;
        return measure(rw, uw);
    };
    auto refined = secondary_refine(axis_measure, final_ris, ris_k, rotations);
    r.ris_weights = refined.weights;
    r.ris_offset_u = refined.u_offset;
    r.power_trace.push_back(refined.power);
    return r;
}

} // namespace

RefinedCodeword secondary_refine(const std::function<double(const CVec&)>& measure_axis,
                                 const Codebook& book, int winner, int rotation_count) {
    if (rotation_count < 1)
        throw std::invalid_argument("secondary_refine: rotation count must be >= 1");
    const CVec base = book.codeword(winner);
    const double spacing = median_center_spacing(book);

    RefinedCodeword best;
    best.power = -1.0;
    for (int r = 0; r < rotation_count; ++r) {
        const double offset =
            spacing * double(r - rotation_count / 2) / double(rotation_count);
        CVec w = rotate_codeword(base, offset, book.spacing_over_lambda);
        const double p = measure_axis(w);
        if (!std::isfinite(p))
            throw std::runtime_error("secondary_refine: non-finite measured power");
        if (p > best.power) {
            best.power = p;
            best.weights = std::move(w);
            best.u_offset = offset;
        }
    }
    return best;
}

SearchResult hierarchical_search(const MeasureFn& measure, const AxisBooks& azimuth,
                                 const AxisBooks& elevation, const SearchConfig& cfg) {
    if (azimuth.ris_layers.empty() || azimuth.ue_layers.empty() ||
        elevation.ris_layers.empty() || elevation.ue_layers.empty())
        throw std::invalid_argument("hierarchical_search: missing codebook layers");

    const int ris_nx = elevation.ris_layers.back().n_elements;
    const int ue_nx = elevation.ue_layers.back().n_elements;

    SearchResult result;

    // Azimuth stage: one active elevation row per side keeps the elevation
    // response flat while the azimuth trees descend.
    const CVec ris_row = center_row_selector(ris_nx);
    const CVec ue_row = center_row_selector(ue_nx);
    auto embed_az = [&](const CVec& r_az, const CVec& u_az) {
        return std::make_pair(compose_codeword(ris_row, r_az), compose_codeword(ue_row, u_az));
    };
    auto az = run_axis_stage(measure, azimuth.ris_layers, azimuth.ue_layers, embed_az,
                             cfg.secondary_rotations);

    // Elevation stage with the azimuth winners applied.
    const CVec ue_az_final = az.ue_weights;
    auto embed_el = [&](const CVec& r_el, const CVec& u_el) {
        return std::make_pair(compose_codeword(r_el, az.ris_weights),
                              compose_codeword(u_el, ue_az_final));
    };
    auto el = run_axis_stage(measure, elevation.ris_layers, elevation.ue_layers, embed_el,
                             cfg.secondary_rotations);

    result.ris_az = az.ris_winner;
    result.ue_az = az.ue_winner;
    result.ris_el = el.ris_winner;
    result.ue_el = el.ue_winner;
    result.ris_az_offset_u = az.ris_offset_u;
    result.ris_el_offset_u = el.ris_offset_u;
    result.ris_weights = compose_codeword(el.ris_weights, az.ris_weights);
    result.ue_weights = compose_codeword(el.ue_weights, ue_az_final);
    result.measurements_az = az.measurements;
    result.measurements_el = el.measurements;
    result.stages_used = az.layers_run + el.layers_run + 2;
    result.measured_power_trace = az.power_trace;
    result.measured_power_trace.insert(result.measured_power_trace.end(),
                                       el.power_trace.begin(), el.power_trace.end());

    AxisBooks az_books = azimuth, el_books = elevation;
    auto [aoa, aod] = angles_from_codeword(result, az_books, el_books);
    result.estimated_aoa = aoa;
    result.estimated_aod = aod;
    return result;
}

std::pair<AnglePair, AnglePair> angles_from_codeword(const SearchResult& result,
                                                     const AxisBooks& azimuth,
                                                     const AxisBooks& elevation) {
    const Codebook& az_book = azimuth.ris_layers.back();
    const Codebook& el_book = elevation.ris_layers.back();
    const double u_y = beam_center_u(az_book, result.ris_az) + result.ris_az_offset_u;
    const double u_x = beam_center_u(el_book, result.ris_el) + result.ris_el_offset_u;
    const AnglePair dir = angles_from_cosines(u_x, u_y);
    // RIS-side pair equals the UE-side pair: the UE array is parallel to the
    // RIS surface.
    return {dir, dir};
}

AnglePair eq20_angles(int k_az, int k_el, int n_phases, int n_beams, double wavelength) {
    auto clamped_asin = [](double x) {
        return std::asin(std::max(-1.0, std::min(1.0, x)));
    };
    const double arg_az =
        -wavelength / double(n_phases) * std::floor(double(k_az) * n_phases / double(n_beams));
    const double arg_el = -wavelength / double(n_phases) *
                          std::floor(double(k_el) * n_phases / double(2 * n_beams - 2));
    return AnglePair{clamped_asin(arg_az), clamped_asin(arg_el)};
}

std::string codebook_to_text(const Codebook& book) {
    std::ostringstream os;
    os << "codebook v1 axis=" << (book.axis == CodebookAxis::azimuth ? "azimuth" : "elevation")
       << " elements=" << book.n_elements << " tau=" << book.n_phases
       << " beams=" << book.n_beams << '\n';
    os << "beam element level\n";
    for (int k = 0; k < book.n_beams; ++k) {
        for (int n = 0; n < book.n_elements; ++n) {
            const cxd w = book.entries(n, k);
            int level = 0;
            if (std::abs(w) > 1e-12) {
                double ph = -std::arg(w) / (2.0 * kPi / double(book.n_phases));
                level = int(std::lround(ph));
                level = ((level % book.n_phases) + book.n_phases) % book.n_phases;
            } else {
                level = -1; // inactive element
            }
            os << k << ' ' << n << ' ' << level << '\n';
        }
    }
    return os.str();
}

std::vector<double> refined_center_grid(const Codebook& book, int rotation_count) {
    const auto& centers = beam_center_table(book);
    const double spacing = median_center_spacing(book);
    std::vector<double> grid;
    for (double c : centers)
        for (int r = 0; r < rotation_count; ++r)
            grid.push_back(c + spacing * double(r - rotation_count / 2) / double(rotation_count));
    std::sort(grid.begin(), grid.end());
    return grid;
}

} // namespace rismm
