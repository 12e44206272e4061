#include "hpnet/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "hpnet/errors.hpp"

namespace hpnet {

double sequence_cost(const std::vector<StepCache>& caches,
                     const ObservationSequence& targets) {
    if (caches.size() != targets.size())
        throw DataError("sequence_cost: " + std::to_string(caches.size()) +
                        " caches vs " + std::to_string(targets.size()) + " target frames");
    double cost = 0.0;
    for (std::size_t t = 0; t + 1 < caches.size(); ++t) {
        const Vec residual = targets[t + 1].values - caches[t].output;
        cost += 0.5 * residual.squaredNorm();
    }
    return cost;
}

GradientSet bptt_window(const NetworkState& state, const ObservationSequence& seq,
                        int window_len) {
    const auto caches = run_sequence_open_loop(state, seq);
    const int T = static_cast<int>(caches.size());
    if (window_len < 1 || window_len > T)
        throw DataError("bptt window_len " + std::to_string(window_len) +
                        " outside [1, " + std::to_string(T) + "]");
    const int window_start = T - window_len;
    const NetworkConfig& cfg = state.config;
    const WeightSet& w = state.weights;

    GradientSet gs;
    gs.g = WeightSet::shaped(cfg);
    auto [pb_d, pb_v] = pb_activation(state);
    const Vec& into_dorsal = cfg.same_stream_pb ? pb_d : pb_v;
    const Vec& into_ventral = cfg.same_stream_pb ? pb_v : pb_d;

    Vec carry_d = Vec::Zero(cfg.n_d);  // v_d^T * E_y_d(t+1)
    Vec carry_v = Vec::Zero(cfg.n_v);
    Vec dC_dpb_into_dorsal = Vec::Zero(cfg.pb_into_dorsal());
    Vec dC_dpb_into_ventral = Vec::Zero(cfg.pb_into_ventral());

    for (int t = T - 1; t >= 0; --t) {
        const StepCache& c = caches[t];
        Vec dC_dout = Vec::Zero(cfg.n_output);
        if (t + 1 < T && t >= window_start)
            dC_dout = -(seq[t + 1].values - c.output);

        const Vec dC_dx_d = dC_dout.cwiseProduct(c.x_v);
        const Vec dC_dx_v = dC_dout.cwiseProduct(c.x_d);
        const Vec dC_ds_d = w.u_d.transpose() * dC_dx_d + carry_d;
        const Vec dC_ds_v = w.u_v.transpose() * dC_dx_v + carry_v;
        const Vec ey_d = dC_ds_d.cwiseProduct(
            c.pre_d.unaryExpr([](double y) { return transfer_prime(y); }));
        const Vec ey_v = dC_ds_v.cwiseProduct(
            c.pre_v.unaryExpr([](double y) { return transfer_prime(y); }));

        gs.g.u_d.noalias() += dC_dx_d * c.hidden.s_d.transpose();
        gs.g.u_v.noalias() += dC_dx_v * c.hidden.s_v.transpose();
        gs.g.w_d.noalias() += ey_d * c.input.values.transpose();
        gs.g.w_v.noalias() += ey_v * c.input.values.transpose();
        if (t > 0) {
            gs.g.v_d.noalias() += ey_d * caches[t - 1].hidden.s_d.transpose();
            gs.g.v_v.noalias() += ey_v * caches[t - 1].hidden.s_v.transpose();
        }
        gs.g.wbar_d.noalias() += ey_d * into_dorsal.transpose();
        gs.g.wbar_v.noalias() += ey_v * into_ventral.transpose();
        dC_dpb_into_dorsal.noalias() += w.wbar_d.transpose() * ey_d;
        dC_dpb_into_ventral.noalias() += w.wbar_v.transpose() * ey_v;

        carry_d.noalias() = w.v_d.transpose() * ey_d;
        carry_v.noalias() = w.v_v.transpose() * ey_v;
    }

    const Vec fp_rho_d = state.rho_d.unaryExpr([](double r) { return transfer_prime(r); });
    const Vec fp_rho_v = state.rho_v.unaryExpr([](double r) { return transfer_prime(r); });
    const Vec& dC_dpb_d = cfg.same_stream_pb ? dC_dpb_into_dorsal : dC_dpb_into_ventral;
    const Vec& dC_dpb_v = cfg.same_stream_pb ? dC_dpb_into_ventral : dC_dpb_into_dorsal;
    gs.delta_pb_d = -fp_rho_d.cwiseProduct(dC_dpb_d);
    gs.delta_pb_v = -fp_rho_v.cwiseProduct(dC_dpb_v);
    return gs;
}

GradientSet bptt(const NetworkState& state, const ObservationSequence& seq) {
    return bptt_window(state, seq, static_cast<int>(seq.size()));
}

GradientSet finite_diff_gradient(const NetworkState& state,
                                 const ObservationSequence& seq, double epsilon) {
    if (!(epsilon > 0.0)) throw DataError("finite_diff_gradient: epsilon must be > 0");

    NetworkState probe = state;
    const auto cost_of = [&probe, &seq]() {
        return sequence_cost(run_sequence_open_loop(probe, seq), seq);
    };

    GradientSet gs;
    gs.g = WeightSet::shaped(state.config);
    auto grads = gs.g.all();
    auto weights = probe.weights.all();
    for (std::size_t i = 0; i < WeightSet::kCount; ++i) {
        Mat& m = *weights[i];
        Mat& g = *grads[i];
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                const double saved = m(r, c);
                m(r, c) = saved + epsilon;
                const double up = cost_of();
                m(r, c) = saved - epsilon;
                const double down = cost_of();
                m(r, c) = saved;
                g(r, c) = (up - down) / (2.0 * epsilon);
            }
        }
    }

    const auto diff_rho = [&](Vec& rho) {
        Vec out(rho.size());
        for (Eigen::Index i = 0; i < rho.size(); ++i) {
            const double saved = rho(i);
            rho(i) = saved + epsilon;
            const double up = cost_of();
            rho(i) = saved - epsilon;
            const double down = cost_of();
            rho(i) = saved;
            out(i) = (up - down) / (2.0 * epsilon);
        }
        return out;
    };
    gs.delta_pb_d = diff_rho(probe.rho_d);
    gs.delta_pb_v = diff_rho(probe.rho_v);
    return gs;
}

double max_relative_gradient_error(const GradientSet& analytic, const GradientSet& fd) {
    constexpr double kFloor = 1e-8;
    double worst = 0.0;
    const auto entry = [&worst](double a, double b) {
        const double diff = std::abs(a - b);
        if (diff <= kFloor) return;
        worst = std::max(worst, diff / std::max(std::abs(a), std::abs(b)));
    };
    auto ga = analytic.g.all();
    auto gf = fd.g.all();
    for (std::size_t i = 0; i < WeightSet::kCount; ++i)
        for (Eigen::Index c = 0; c < ga[i]->cols(); ++c)
            for (Eigen::Index r = 0; r < ga[i]->rows(); ++r)
                entry((*ga[i])(r, c), (*gf[i])(r, c));
    // fd holds dC/drho; the analytic delta is the negated descent direction.
    for (Eigen::Index i = 0; i < analytic.delta_pb_d.size(); ++i)
        entry(-analytic.delta_pb_d(i), fd.delta_pb_d(i));
    for (Eigen::Index i = 0; i < analytic.delta_pb_v.size(); ++i)
        entry(-analytic.delta_pb_v(i), fd.delta_pb_v(i));
    return worst;
}

std::pair<NetworkState, ObservationSequence> gradcheck_case(std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.n_d = 5;
    cfg.n_v = 5;
    NetworkState state = init_network(cfg, seed);

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> rho_dist(-0.5, 0.5);
    std::uniform_real_distribution<double> in_dist(0.0, 1.0);
    for (Eigen::Index i = 0; i < state.rho_d.size(); ++i) state.rho_d(i) = rho_dist(rng);
    for (Eigen::Index i = 0; i < state.rho_v.size(); ++i) state.rho_v(i) = rho_dist(rng);

    ObservationSequence seq(6);
    for (InputFrame& f : seq) {
        f.values = Vec::Zero(cfg.n_input);
        for (Eigen::Index i = 0; i < cfg.n_input; ++i) f.values(i) = in_dist(rng);
    }
    return {std::move(state), std::move(seq)};
}

}  // namespace hpnet
