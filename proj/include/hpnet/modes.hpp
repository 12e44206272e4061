#pragma once

#include <string>
#include <vector>

#include "hpnet/gradients.hpp"
#include "hpnet/network.hpp"

namespace hpnet {

// Final PB internal values of one training sequence.
struct PBEntry {
    std::string shape;
    std::string color;
    int repeat = 0;
    Vec rho_d;
    Vec rho_v;

    std::string label() const { return shape + "/" + color + "/" + std::to_string(repeat); }
    std::string class_label() const { return shape + "/" + color; }
};

using PBTable = std::vector<PBEntry>;

struct TrainResult {
    NetworkState state;
    PBTable pb_table;
    std::vector<double> cost_curve;  // one total cost per epoch
};

// Per-epoch PB evolution in recognition mode.
struct RecognitionTrace {
    std::vector<Vec> rho_d_history;
    std::vector<Vec> rho_v_history;
    Vec final_rho_d;
    Vec final_rho_v;
    std::string classified_as;  // filled by the caller via classify_pb
};

// Sign-product learning-rate adaptation, applied per weight entry and
// clamped to [eta_min, eta_max]. Replaces prev_grad with the given grads.
void update_learning_rates(NetworkState& state, const GradientSet& grads);

// w -= lr .* dC/dw. Leaves lr and rho untouched.
void apply_weight_update(NetworkState& state, const GradientSet& grads);

// rho_i += gamma_i * sum_t delta_pb_i with gamma_i = m_gamma * |sum| / T.
void update_pb_learning(NetworkState& state, const GradientSet& grads, int seq_len);

// Learning mode: per epoch and sequence, open-loop pass, BPTT, weight update
// and PB update of that sequence's own rho pair; learning rates adapt once
// per epoch from the summed gradients.
TrainResult train(NetworkState state, const std::vector<LabeledSequence>& dataset,
                  const TrainConfig& cfg);

// Recognition mode: weights frozen, rho from zero, fixed gamma_recognition,
// errors taken over the last window_len steps.
RecognitionTrace recognize(const NetworkState& state, const ObservationSequence& seq,
                           int window_len, int epochs);

// Prediction mode: closed loop from the given PB values and first frame.
// Returns steps+1 frames including the first.
ObservationSequence predict(const NetworkState& state, const Vec& rho_d,
                            const Vec& rho_v, const InputFrame& first_frame, int steps);

// Nearest class centroid in concatenated PB-activation space. Ties go to the
// lexicographically smallest class label.
std::string classify_pb(const Vec& pb_d, const Vec& pb_v, const PBTable& table);

// Class centroid of (pb_d, pb_v) activations over all table rows of a class.
Vec class_centroid(const PBTable& table, const std::string& class_label);

}  // namespace hpnet
