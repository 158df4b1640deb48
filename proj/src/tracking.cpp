// SPDX-License-Identifier: Apache-2.0

#include "rismm/tracking.hpp"
#include "rismm/arrays.hpp"

#include <cmath>

namespace rismm {

namespace {

void wrap_angle_pair(double& elevation, double& azimuth) {
    // Elevation reflects at its chart boundaries; crossing broadside flips
    // the azimuth by pi, crossing grazing reflects in place.
    for (int guard = 0; guard < 8 && (elevation < 0.0 || elevation > kPi / 2.0); ++guard) {
        if (elevation < 0.0) {
            elevation = -elevation;
            azimuth += kPi;
        } else {
            elevation = kPi - elevation;
            if (elevation < 0.0) elevation = 0.0;
        }
    }
    azimuth = std::fmod(azimuth, 2.0 * kPi);
    if (azimuth < 0.0) azimuth += 2.0 * kPi;
}

void wrap_state(Eigen::Matrix<double, 6, 1>& x) {
    wrap_angle_pair(x[2], x[3]);
    wrap_angle_pair(x[4], x[5]);
}

// Chi-square 99th percentile via the Wilson-Hilferty approximation.
double chi2_99(int dof) {
    const double k = double(dof);
    const double z = 2.3263478740408408;
    const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * t * t * t;
}

} // namespace

CVec measurement_fn(const EkfState& state, const MeasurementContext& ctx) {
    const AnglePair ris = state.ris_angles();
    const AnglePair ue = state.ue_angles();
    if (!angle_valid(ris) || !angle_valid(ue))
        throw std::invalid_argument("measurement_fn: state angles outside their chart");

    const CVec w = ctx.Theta * (ctx.G_hat * ctx.f);
    const CVec a_ris = steering_vector(ctx.ris_geom, ris);
    const CVec a_ue = steering_vector(ctx.ue_geom, ue);
    const cxd s_r = a_ris.dot(w); // a_ris^H w
    const CVec q_u = ctx.Q.adjoint() * a_ue;
    return (ctx.beta * state.gain() * s_r) * q_u;
}

RVec stack_reim(const CVec& v) {
    RVec out(2 * v.size());
    out.head(v.size()) = v.real();
    out.tail(v.size()) = v.imag();
    return out;
}

RMat measurement_jacobian(const EkfState& state, const MeasurementContext& ctx) {
    const AnglePair ris = state.ris_angles();
    const AnglePair ue = state.ue_angles();
    const CVec w = ctx.Theta * (ctx.G_hat * ctx.f);

    const CVec a_ris = steering_vector(ctx.ris_geom, ris);
    const CVec a_ue = steering_vector(ctx.ue_geom, ue);
    const auto d_ris = steering_vector_derivs(ctx.ris_geom, ris);
    const auto d_ue = steering_vector_derivs(ctx.ue_geom, ue);

    const cxd z = state.gain();
    const cxd s_r = a_ris.dot(w);
    const cxd ds_del = d_ris.d_elevation.dot(w);
    const cxd ds_daz = d_ris.d_azimuth.dot(w);
    const CVec q_u = ctx.Q.adjoint() * a_ue;
    const CVec dq_del = ctx.Q.adjoint() * d_ue.d_elevation;
    const CVec dq_daz = ctx.Q.adjoint() * d_ue.d_azimuth;

    const int u = int(q_u.size());
    CMat dg(u, 6);
    dg.col(0) = ctx.beta * s_r * q_u;                  // d/d z_re
    dg.col(1) = cxd(0.0, 1.0) * ctx.beta * s_r * q_u;  // d/d z_im
    dg.col(2) = ctx.beta * z * ds_del * q_u;           // d/d theta_R
    dg.col(3) = ctx.beta * z * ds_daz * q_u;           // d/d phi_R
    dg.col(4) = ctx.beta * z * s_r * dq_del;           // d/d theta_U
    dg.col(5) = ctx.beta * z * s_r * dq_daz;           // d/d phi_U

    RMat j(2 * u, 6);
    j.topRows(u) = dg.real();
    j.bottomRows(u) = dg.imag();
    return j;
}

EkfState ekf_predict(const EkfState& state, const EvolutionModel& model) {
    if (!(model.rho > 0.0) || model.rho > 1.0)
        throw std::invalid_argument("ekf_predict: rho outside (0, 1]");
    EkfState next = state;
    next.x[0] *= model.rho;
    next.x[1] *= model.rho;
    Eigen::Matrix<double, 6, 1> a;
    a << model.rho, model.rho, 1.0, 1.0, 1.0, 1.0;
    next.P = a.asDiagonal() * state.P * a.asDiagonal();
    next.P(0, 0) += model.q_gain;
    next.P(1, 1) += model.q_gain;
    for (int i = 2; i < 6; ++i) next.P(i, i) += model.q_angle;
    next.P = 0.5 * (next.P + next.P.transpose()).eval();
    next.time_index = state.time_index + 1;
    return next;
}

UpdateInfo ekf_update(const EkfState& state, const CVec& observation,
                      const MeasurementContext& ctx, const EvolutionModel& model) {
    const CVec predicted = measurement_fn(state, ctx);
    if (observation.size() != predicted.size())
        throw std::invalid_argument("ekf_update: observation dimension mismatch");

    const RVec innovation = stack_reim(observation) - stack_reim(predicted);
    const RMat j = measurement_jacobian(state, ctx);
    const int m = int(innovation.size());

    RMat s = j * state.P * j.transpose();
    s.diagonal().array() += model.r_meas / 2.0; // per real component
    const Eigen::LDLT<RMat> ldlt(s);
    if (ldlt.info() != Eigen::Success || ldlt.isNegative())
        throw std::runtime_error("ekf_update: innovation covariance not positive definite");
    const double cond_proxy = s.diagonal().maxCoeff() / s.diagonal().minCoeff();
    if (!std::isfinite(cond_proxy) || cond_proxy > 1e15)
        throw std::runtime_error("ekf_update: innovation covariance numerically singular");

    const RMat k = state.P * j.transpose() * ldlt.solve(RMat::Identity(m, m));

    UpdateInfo info;
    info.state = state;
    info.state.x += k * innovation;
    wrap_state(info.state.x);
    // Joseph form keeps P symmetric PSD.
    const RMat ikj = RMat::Identity(6, 6) - k * j;
    info.state.P = ikj * state.P * ikj.transpose() +
                   k * (model.r_meas / 2.0) * k.transpose();
    info.state.P = 0.5 * (info.state.P + info.state.P.transpose()).eval();
    info.nis = innovation.dot(ldlt.solve(innovation));
    return info;
}

double half_power_beamwidth(const UpaGeometry& geom) {
    geom.validate();
    return 0.886 * geom.wavelength / (std::sqrt(double(geom.size())) * geom.spacing);
}

TrackTrace track_segment(const EkfState& initial,
                         const std::vector<Eigen::Matrix<double, 6, 1>>& trajectory,
                         const EvolutionModel& model, const MeasurementContext& ctx,
                         const std::function<CVec(int, const EkfState&)>& observe,
                         const std::function<EkfState(int, const EkfState&)>& reestimate,
                         const TrackOptions& opts) {
    if (trajectory.empty())
        throw std::invalid_argument("track_segment: empty trajectory");

    const double nis_limit = opts.nis_threshold > 0.0
                                 ? opts.nis_threshold
                                 : chi2_99(2 * int(ctx.Q.cols()));

    TrackTrace trace;
    EkfState state = initial;
    Eigen::Matrix<double, 6, 1> beam_ref = initial.x;
    int last_event = -opts.min_steps_between_events - 1;
    int nis_strikes = 0;

    for (int t = 0; t < int(trajectory.size()); ++t) {
        state = ekf_predict(state, model);
        const CVec obs = observe(t, state);
        auto info = ekf_update(state, obs, ctx, model);
        state = info.state;

        TrackStep step;
        step.t = t;
        step.nis = info.nis;

        double drift = 0.0;
        for (int i = 2; i < 6; ++i) {
            double d = state.x[i] - beam_ref[i];
            if (i == 3 || i == 5) d = std::remainder(d, 2.0 * kPi);
            drift = std::max(drift, std::abs(d));
        }
        nis_strikes = (info.nis > nis_limit) ? nis_strikes + 1 : 0;

        const bool want_event =
            (opts.angle_drift_limit > 0.0 && drift > opts.angle_drift_limit) ||
            nis_strikes >= 2;
        if (want_event && reestimate && t - last_event > opts.min_steps_between_events) {
            state = reestimate(t, state);
            beam_ref = state.x;
            last_event = t;
            nis_strikes = 0;
            step.reestimated = true;
            trace.reestimation_events.push_back(t);
        }

        step.estimate = state.x;
        step.truth = trajectory[std::size_t(t)];
        for (int i = 0; i < 6; ++i) {
            double d = state.x[i] - step.truth[i];
            if (i == 3 || i == 5) { // azimuth components wrap
                d = std::remainder(d, 2.0 * kPi);
            }
            step.sq_error[i] = d * d;
        }
        trace.steps.push_back(step);
    }
    return trace;
}

} // namespace rismm
