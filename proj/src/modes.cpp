#include "hpnet/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "hpnet/errors.hpp"

namespace hpnet {

void update_learning_rates(NetworkState& state, const GradientSet& grads) {
    const NetworkConfig& cfg = state.config;
    auto lrs = state.lr.all();
    auto prevs = state.prev_grad.all();
    auto gs = grads.g.all();
    for (std::size_t i = 0; i < WeightSet::kCount; ++i) {
        Mat& lr = *lrs[i];
        Mat& prev = *prevs[i];
        const Mat& g = *gs[i];
        for (Eigen::Index c = 0; c < lr.cols(); ++c) {
            for (Eigen::Index r = 0; r < lr.rows(); ++r) {
                const double sigma = prev(r, c) * g(r, c);
                if (sigma > 0.0)
                    lr(r, c) = std::min(lr(r, c) * cfg.xi_plus, cfg.eta_max);
                else if (sigma < 0.0)
                    lr(r, c) = std::max(lr(r, c) * cfg.xi_minus, cfg.eta_min);
            }
        }
        prev = g;
    }
}

void apply_weight_update(NetworkState& state, const GradientSet& grads) {
    auto ws = state.weights.all();
    auto lrs = state.lr.all();
    auto gs = grads.g.all();
    for (std::size_t i = 0; i < WeightSet::kCount; ++i)
        *ws[i] -= lrs[i]->cwiseProduct(*gs[i]);
}

void update_pb_learning(NetworkState& state, const GradientSet& grads, int seq_len) {
    if (seq_len <= 0) throw DataError("update_pb_learning: sequence length must be > 0");
    const double m = state.config.m_gamma;
    const auto step = [m, seq_len](Vec& rho, const Vec& delta) {
        for (Eigen::Index i = 0; i < rho.size(); ++i) {
            const double gamma = m * std::abs(delta(i)) / seq_len;
            rho(i) += gamma * delta(i);
        }
    };
    step(state.rho_d, grads.delta_pb_d);
    step(state.rho_v, grads.delta_pb_v);
}

TrainResult train(NetworkState state, const std::vector<LabeledSequence>& dataset,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw DataError("train: dataset is empty");

    // Each training sequence owns its PB pair; the weights are shared.
    std::vector<Vec> rho_d(dataset.size(), Vec::Zero(state.config.n_pb_d));
    std::vector<Vec> rho_v(dataset.size(), Vec::Zero(state.config.n_pb_v));

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);

    TrainResult result;
    result.cost_curve.reserve(cfg.max_epochs);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);

        GradientSet epoch_sum;
        epoch_sum.g = WeightSet::shaped(state.config);
        double epoch_cost = 0.0;

        for (std::size_t idx : order) {
            const LabeledSequence& seq = dataset[idx];
            state.rho_d = rho_d[idx];
            state.rho_v = rho_v[idx];

            const auto caches = run_sequence_open_loop(state, seq.frames);
            epoch_cost += sequence_cost(caches, seq.frames);
            const GradientSet grads = bptt(state, seq.frames);

            apply_weight_update(state, grads);
            update_pb_learning(state, grads, static_cast<int>(seq.frames.size()));
            rho_d[idx] = state.rho_d;
            rho_v[idx] = state.rho_v;

            auto sum = epoch_sum.g.all();
            auto g = grads.g.all();
            for (std::size_t i = 0; i < WeightSet::kCount; ++i) *sum[i] += *g[i];
        }

        if (!std::isfinite(epoch_cost))
            throw TrainingError("training diverged: non-finite cost at epoch " +
                                std::to_string(epoch + 1));
        result.cost_curve.push_back(epoch_cost);

        // Eq-per-epoch sign comparison of the accumulated gradients.
        update_learning_rates(state, epoch_sum);

        if (epoch_cost <= cfg.target_cost) break;
    }

    result.pb_table.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        result.pb_table.push_back(
            {dataset[i].shape, dataset[i].color, dataset[i].repeat, rho_d[i], rho_v[i]});
    result.state = std::move(state);
    return result;
}

RecognitionTrace recognize(const NetworkState& state, const ObservationSequence& seq,
                           int window_len, int epochs) {
    const int T = static_cast<int>(seq.size());
    if (window_len > T)
        throw DataError("recognize: window_len " + std::to_string(window_len) +
                        " exceeds sequence length " + std::to_string(T));
    if (epochs < 0) throw DataError("recognize: epochs must be >= 0");

    NetworkState work = state;  // weights are never written through this copy
    work.rho_d.setZero();
    work.rho_v.setZero();
    const double gamma = state.config.gamma_recognition;

    RecognitionTrace trace;
    trace.rho_d_history.reserve(epochs);
    trace.rho_v_history.reserve(epochs);
    for (int e = 0; e < epochs; ++e) {
        const GradientSet grads = bptt_window(work, seq, window_len);
        work.rho_d += gamma * grads.delta_pb_d;
        work.rho_v += gamma * grads.delta_pb_v;
        trace.rho_d_history.push_back(work.rho_d);
        trace.rho_v_history.push_back(work.rho_v);
    }
    trace.final_rho_d = work.rho_d;
    trace.final_rho_v = work.rho_v;
    return trace;
}

ObservationSequence predict(const NetworkState& state, const Vec& rho_d,
                            const Vec& rho_v, const InputFrame& first_frame, int steps) {
    NetworkState work = state;
    work.rho_d = rho_d;
    work.rho_v = rho_v;

    ObservationSequence out;
    out.reserve(steps + 1);
    out.push_back(first_frame);
    HiddenState h = zero_hidden(state.config);
    InputFrame frame = first_frame;
    for (int s = 0; s < steps; ++s) {
        StepCache c = forward_step(work, frame, h);
        h = c.hidden;
        frame.values = c.output;  // one-step prediction fed back as next input
        out.push_back(frame);
    }
    return out;
}

Vec class_centroid(const PBTable& table, const std::string& class_label) {
    Vec sum;
    int count = 0;
    for (const PBEntry& e : table) {
        if (e.class_label() != class_label) continue;
        Vec concat(e.rho_d.size() + e.rho_v.size());
        concat << e.rho_d.unaryExpr([](double r) { return transfer(r); }),
            e.rho_v.unaryExpr([](double r) { return transfer(r); });
        if (count == 0)
            sum = concat;
        else
            sum += concat;
        ++count;
    }
    if (count == 0) throw DataError("class_centroid: no entries for class " + class_label);
    return sum / count;
}

std::string classify_pb(const Vec& pb_d, const Vec& pb_v, const PBTable& table) {
    if (table.empty()) throw DataError("classify_pb: empty PB table");

    std::map<std::string, int> classes;  // ordered, so ties resolve deterministically
    for (const PBEntry& e : table) classes[e.class_label()] = 1;

    Vec query(pb_d.size() + pb_v.size());
    query << pb_d, pb_v;

    std::string best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [label, _] : classes) {
        const double d = (class_centroid(table, label) - query).norm();
        if (d < best_dist) {
            best_dist = d;
            best = label;
        }
    }
    return best;
}

}  // namespace hpnet
