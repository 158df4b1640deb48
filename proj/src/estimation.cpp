// SPDX-License-Identifier: Apache-2.0

#include "rismm/estimation.hpp"
#include "rismm/arrays.hpp"

#include <cmath>

namespace rismm {

PilotBlock build_pilots(const CMat& theta, const CMat& g_hat, const CVec& precoder,
                        const CVec& symbols, const CMat& combiner, int n_pilots,
                        int n_paths_expected) {
    if (theta.cols() != g_hat.rows() || g_hat.cols() != precoder.size())
        throw std::invalid_argument("build_pilots: dimension chain mismatch");
    if (symbols.size() < n_pilots)
        throw std::invalid_argument("build_pilots: need one symbol per pilot");

    PilotBlock block;
    block.U = int(combiner.cols());
    block.U_p = n_pilots;
    block.underdetermined = n_pilots < n_paths_expected;

    block.Q = combiner;
    for (int c = 0; c < block.Q.cols(); ++c) {
        const double n = block.Q.col(c).norm();
        if (n > 0.0) block.Q.col(c) /= n;
    }

    const CVec base = theta * (g_hat * precoder);
    block.X.resize(base.size(), n_pilots);
    for (int p = 0; p < n_pilots; ++p) block.X.col(p) = base * symbols[p];
    return block;
}

void simulate_reception(PilotBlock& block, const CMat& h_true, double beta, double sigma2,
                        Rng& rng) {
    if (h_true.cols() != block.X.rows())
        throw std::invalid_argument("simulate_reception: channel/pilot mismatch");
    block.Y.resize(block.U, block.U_p);
    for (int p = 0; p < block.U_p; ++p) {
        CVec rx = beta * (h_true * block.X.col(p));
        for (int a = 0; a < rx.size(); ++a) rx[a] += rng.gaussian_c(sigma2);
        block.Y.col(p) = block.Q.adjoint() * rx;
    }
}

double mean_received_power(const CMat& h, double beta, const CMat& X) {
    const CMat rx = beta * (h * X);
    return rx.squaredNorm() / double(rx.rows() * rx.cols());
}

std::vector<CMat> pilot_maps(const PilotBlock& block, const UpaGeometry& ue_geom,
                             const UpaGeometry& ris_geom,
                             const std::vector<AnglePair>& ue_angles,
                             const std::vector<AnglePair>& ris_angles, double beta) {
    if (ue_angles.size() != ris_angles.size() || ue_angles.empty())
        throw std::invalid_argument("pilot_maps: angle lists must be equal and non-empty");
    const int L = int(ue_angles.size());
    CMat a_ue(ue_geom.size(), L), a_ris(ris_geom.size(), L);
    for (int l = 0; l < L; ++l) {
        a_ue.col(l) = steering_vector(ue_geom, ue_angles[l]);
        a_ris.col(l) = steering_vector(ris_geom, ris_angles[l]);
    }
    const CMat qa = beta * (block.Q.adjoint() * a_ue); // U x L
    std::vector<CMat> maps;
    maps.reserve(block.U_p);
    for (int p = 0; p < block.U_p; ++p) {
        const CVec proj = a_ris.adjoint() * block.X.col(p); // L
        CMat t = qa;
        for (int l = 0; l < L; ++l) t.col(l) *= proj[l];
        maps.push_back(std::move(t));
    }
    return maps;
}

CVec reweight_step(const ReweightState& state, const std::vector<CMat>& t_list,
                   const std::vector<CVec>& y_list) {
    if (t_list.empty() || t_list.size() != y_list.size())
        throw std::invalid_argument("reweight_step: pilot list mismatch");
    const int L = int(t_list.front().cols());
    CMat normal = CMat::Zero(L, L);
    CVec rhs = CVec::Zero(L);
    for (std::size_t p = 0; p < t_list.size(); ++p) {
        if (!t_list[p].allFinite() || !y_list[p].allFinite())
            throw std::invalid_argument("reweight_step: non-finite inputs");
        normal.noalias() += t_list[p].adjoint() * t_list[p];
        rhs.noalias() += t_list[p].adjoint() * y_list[p];
    }
    for (int l = 0; l < L; ++l) normal(l, l) += state.d_diag[l] / state.zeta;
    if (rhs.norm() == 0.0) return CVec::Zero(L);
    return normal.ldlt().solve(rhs);
}

double surrogate_value(const ReweightState& state, const CVec& z,
                       const std::vector<CMat>& t_list, const std::vector<CVec>& y_list) {
    double val = 0.0;
    for (int l = 0; l < z.size(); ++l) val += std::norm(z[l]) * state.d_diag[l] / state.zeta;
    for (std::size_t p = 0; p < t_list.size(); ++p)
        val += (y_list[p] - t_list[p] * z).squaredNorm();
    return val;
}

namespace {

double residual_norm(const CVec& z, const std::vector<CMat>& t_list,
                     const std::vector<CVec>& y_list) {
    double acc = 0.0;
    for (std::size_t p = 0; p < t_list.size(); ++p)
        acc += (y_list[p] - t_list[p] * z).squaredNorm();
    return std::sqrt(acc);
}

} // namespace

HEstimate estimate_h(const PilotBlock& pilots, const UpaGeometry& ue_geom,
                     const UpaGeometry& ris_geom, const std::vector<AnglePair>& ue_angles,
                     const std::vector<AnglePair>& ris_angles, const ReweightConfig& cfg,
                     double beta) {
    const auto t_list = pilot_maps(pilots, ue_geom, ris_geom, ue_angles, ris_angles, beta);
    std::vector<CVec> y_list;
    y_list.reserve(pilots.U_p);
    for (int p = 0; p < pilots.U_p; ++p) y_list.push_back(pilots.Y.col(p));

    const int L = int(ue_angles.size());
    ReweightState state;
    state.delta = cfg.delta;
    // Iterate 0: unregularized least squares seeds the weights at the data
    // scale; starting from z = 0 would let the 1/delta weights pin the
    // estimate at the origin.
    state.d_diag = RVec::Ones(L);
    state.zeta = 1e30;
    state.z_hat = reweight_step(state, t_list, y_list);
    state.residual = residual_norm(state.z_hat, t_list, y_list);

    HEstimate est;
    est.ue_angles = ue_angles;
    est.ris_angles = ris_angles;
    est.trace.push_back(EstimationTraceRow{0, state.residual, state.zeta});
    est.iterations = 1;
    est.converged = state.residual <= cfg.epsilon;

    for (int it = 1; !est.converged && it < cfg.max_iter; ++it) {
        state.iteration = it;
        for (int l = 0; l < L; ++l)
            state.d_diag[l] = 1.0 / (std::norm(state.z_hat[l]) + cfg.delta);
        state.zeta = cfg.adaptive_zeta
                         ? cfg.zeta_c / std::min(state.residual * state.residual, cfg.zeta_floor)
                         : cfg.zeta_fixed;

        const CVec z_next = reweight_step(state, t_list, y_list);
        const double r_next = residual_norm(z_next, t_list, y_list);
        if (r_next > state.residual * (1.0 + 1e-12)) break; // reject and stop
        state.z_hat = z_next;
        state.residual = r_next;
        est.trace.push_back(EstimationTraceRow{it, state.residual, state.zeta});
        est.iterations = it + 1;
        if (state.residual <= cfg.epsilon) est.converged = true;
    }

    est.z_hat = state.z_hat;
    est.residual = state.residual;
    est.matrix = assemble_sparse_channel(ue_geom, ris_geom, ue_angles, ris_angles, est.z_hat);
    return est;
}

CMat assemble_sparse_channel(const UpaGeometry& ue_geom, const UpaGeometry& ris_geom,
                             const std::vector<AnglePair>& ue_angles,
                             const std::vector<AnglePair>& ris_angles, const CVec& z) {
    CMat h = CMat::Zero(ue_geom.size(), ris_geom.size());
    for (int l = 0; l < z.size(); ++l) {
        const CVec a_ue = steering_vector(ue_geom, ue_angles[std::size_t(l)]);
        const CVec a_ris = steering_vector(ris_geom, ris_angles[std::size_t(l)]);
        h.noalias() += z[l] * (a_ue * a_ris.adjoint());
    }
    return h;
}

double nmse(const CMat& h_est, const CMat& h_true) {
    if (h_est.rows() != h_true.rows() || h_est.cols() != h_true.cols())
        throw std::invalid_argument("nmse: dimension mismatch");
    const double denom = h_true.squaredNorm();
    if (denom <= 0.0) throw std::invalid_argument("nmse: zero-norm truth");
    return (h_est - h_true).squaredNorm() / denom;
}

} // namespace rismm
