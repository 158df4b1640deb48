// SPDX-License-Identifier: Apache-2.0
//
// Two-stage hierarchical beam training: discrete-phase primary codebooks,
// tree search over codeword pairs, secondary (rotation) refinement, and
// AoA/AoD recovery from the winning codewords.

#pragma once

#include "rismm/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rismm {

enum class CodebookAxis { elevation, azimuth }; // elevation -> x axis, azimuth -> y axis

/// Discrete-phase beam codebook for one linear axis. Entry (n, k) is the
/// weight of element n in beam k; phases are integer multiples of
/// 2*pi/n_phases. Azimuth books quantize with floor(n*k*tau/K), elevation
/// with floor(n*k*tau/(2K-2)).
struct Codebook {
    CMat entries;      // n_elements x n_beams
    int n_elements = 0;
    int n_phases = 0;  // tau
    int n_beams = 0;   // K
    CodebookAxis axis = CodebookAxis::azimuth;
    int total_states = 0;              // aleph = K per axis
    int layers = 0;                    // V = ceil(log2 K)
    int active_elements = 0;           // contiguous centered block; == n_elements
                                       // for the full primary book
    double spacing_over_lambda = 0.5;
    // For layer books: child_map[k] lists the beams of the next layer that
    // cover beam k's sector (at most two). Empty for the final layer.
    std::vector<std::vector<int>> child_map;

    CVec codeword(int k) const { return entries.col(k); }
};

Codebook primary_codebook(CodebookAxis axis, int n_elements, int n_phases, int n_beams,
                          double spacing_over_lambda = 0.5);

/// Layer books for the tree search. The last layer is the full primary book;
/// layer l < V activates a centered block of ~n_elements * 2^l / 2^V elements
/// and carries 2^l tau-quantized wide beams aimed at the sector centers of
/// the sorted primary beams, so that every parent's two children tile its
/// sector. Inactive elements are zero.
std::vector<Codebook> layered_codebooks(CodebookAxis axis, int n_elements, int n_phases,
                                        int n_beams, double spacing_over_lambda = 0.5);

/// Beam center of codeword k in direction-cosine space, computed as the
/// argmax of |a(u)^H w| over a fine u grid (the "predefined table" a receiver
/// compares codewords against). Cached per book on first use.
double beam_center_u(const Codebook& book, int k);
const std::vector<double>& beam_center_table(const Codebook& book);

/// Composite planar codeword w_el (x) w_az, x-outer / y-inner ordering.
CVec compose_codeword(const CVec& w_el, const CVec& w_az);

/// Measured received power for a candidate (RIS codeword, UE codeword) pair.
/// Deterministic per call modulo configured noise.
using MeasureFn = std::function<double(const CVec& ris_weights, const CVec& ue_weights)>;

struct AxisBooks {
    std::vector<Codebook> ris_layers;
    std::vector<Codebook> ue_layers;
};

struct SearchResult {
    int ris_az = 0, ris_el = 0; // winning primary beam indices
    int ue_az = 0, ue_el = 0;
    double ris_az_offset_u = 0.0, ris_el_offset_u = 0.0; // secondary refinement offsets
    CVec ris_weights; // final composite codeword applied at the RIS
    CVec ue_weights;
    AnglePair estimated_aoa; // RIS->UE path, UE side
    AnglePair estimated_aod; // equal to the UE side under the parallel-array assumption
    std::vector<double> measured_power_trace;
    int measurements_az = 0;
    int measurements_el = 0;
    int stages_used = 0;
};

struct SearchConfig {
    int secondary_rotations = 1; // R >= 1; 1 keeps the primary winner
};

/// Two-axis hierarchical search: azimuth stage first (single active
/// elevation row on each side, flat elevation response), then elevation with
/// the azimuth winners applied. Each layer evaluates the <= 2x2 child pairs
/// of the current winners; after the trees, R rotated secondary variants
/// refine each RIS-side axis.
SearchResult hierarchical_search(const MeasureFn& measure, const AxisBooks& azimuth,
                                 const AxisBooks& elevation, const SearchConfig& cfg = {});

/// Secondary refinement of one axis codeword: evaluates R progressively
/// phase-rotated variants spanning one primary-beam spacing (the unrotated
/// variant included) and returns the best.
struct RefinedCodeword {
    CVec weights;
    double u_offset = 0.0;
    double power = 0.0;
};
RefinedCodeword secondary_refine(const std::function<double(const CVec&)>& measure_axis,
                                 const Codebook& book, int winner, int rotation_count);

/// Angles from the winning codewords: per-axis beam centers (plus secondary
/// offsets) give the direction cosines; the RIS-side pair equals the UE-side
/// pair (parallel arrays).
std::pair<AnglePair, AnglePair> angles_from_codeword(const SearchResult& result,
                                                     const AxisBooks& azimuth,
                                                     const AxisBooks& elevation);

/// The paper's closed-form index->angle map, kept verbatim for documentation
/// parity only; it is dimensionally inconsistent (wavelength inside an
/// arcsine) and is not used by the pipeline.
AnglePair eq20_angles(int k_az, int k_el, int n_phases, int n_beams, double wavelength);

/// Structured-text codebook table (beam index, element index, phase level).
std::string codebook_to_text(const Codebook& book);

/// All direction cosines reachable by the search at a given refinement R:
/// primary beam centers plus rotation offsets. Used by scenario generators
/// that place paths on the recoverable grid.
std::vector<double> refined_center_grid(const Codebook& book, int rotation_count);

} // namespace rismm
