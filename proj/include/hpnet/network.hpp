#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hpnet/config.hpp"

namespace hpnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One observation frame. Layout for n_input = 4:
// (yellow_x, yellow_y, green_x, green_y), normalized image coordinates.
struct InputFrame {
    Vec values;
};

using ObservationSequence = std::vector<InputFrame>;

// A generated sequence tagged with its class identity.
struct LabeledSequence {
    std::string shape;
    std::string color;
    int repeat = 0;
    ObservationSequence frames;

    std::string label() const { return shape + "/" + color + "/" + std::to_string(repeat); }
    std::string class_label() const { return shape + "/" + color; }
};

// The eight weight matrices of the network, also reused for per-entry
// learning rates, previous-epoch gradients and gradient accumulators.
struct WeightSet {
    Mat w_d;     // input -> dorsal        (n_d x n_input)
    Mat w_v;     // input -> ventral       (n_v x n_input)
    Mat v_d;     // dorsal recurrent       (n_d x n_d)
    Mat v_v;     // ventral recurrent      (n_v x n_v)
    Mat wbar_d;  // PB -> dorsal hidden    (n_d x pb_into_dorsal)
    Mat wbar_v;  // PB -> ventral hidden   (n_v x pb_into_ventral)
    Mat u_d;     // dorsal -> output term  (n_output x n_d)
    Mat u_v;     // ventral -> output term (n_output x n_v)

    static constexpr std::size_t kCount = 8;
    static constexpr std::array<const char*, kCount> kNames = {
        "w_d", "w_v", "v_d", "v_v", "wbar_d", "wbar_v", "u_d", "u_v"};

    std::array<Mat*, kCount> all() {
        return {&w_d, &w_v, &v_d, &v_v, &wbar_d, &wbar_v, &u_d, &u_v};
    }
    std::array<const Mat*, kCount> all() const {
        return {&w_d, &w_v, &v_d, &v_v, &wbar_d, &wbar_v, &u_d, &u_v};
    }
    // w_d, v_d, wbar_d, u_d belong to the dorsal stream.
    static bool is_dorsal(std::size_t idx) { return idx % 2 == 0; }

    // Allocates every matrix with the shapes implied by the config.
    static WeightSet shaped(const NetworkConfig& cfg);
    void set_zero();
};

struct NetworkState {
    NetworkConfig config;
    WeightSet weights;
    Vec rho_d;            // PB internal values, dorsal-attached group
    Vec rho_v;            // ventral-attached group
    WeightSet lr;         // per-entry adaptive learning rates
    WeightSet prev_grad;  // previous-epoch gradients (sign product)
};

struct HiddenState {
    Vec s_d;
    Vec s_v;
};

// Everything one forward step produces, retained for BPTT.
struct StepCache {
    InputFrame input;
    Vec pre_d, pre_v;  // pre-activations y^d, y^v
    HiddenState hidden;
    Vec x_d, x_v;      // per-stream output terms
    Vec output;        // x_d elementwise* x_v, linear output units
};

// Scaled tanh used by hidden and PB units: 1.7159 * tanh(2x/3).
double transfer(double pre);
// d/dx of transfer, evaluated at the pre-activation.
double transfer_prime(double pre);

// Uniform weights in [-weight_init_range, +weight_init_range], PB values at
// zero, learning rates at the per-stream initial eta. Deterministic per seed.
NetworkState init_network(const NetworkConfig& cfg, std::uint64_t seed);

// PB activations (transfer applied to the internal values).
std::pair<Vec, Vec> pb_activation(const NetworkState& state);

HiddenState zero_hidden(const NetworkConfig& cfg);

// One time step. The dorsal pre-activation receives the ventral-attached PB
// group and vice versa (cross-wiring), unless same_stream_pb is set.
StepCache forward_step(const NetworkState& state, const InputFrame& input,
                       const HiddenState& prev);

// Open-loop pass over a whole sequence from a zero hidden state.
std::vector<StepCache> run_sequence_open_loop(const NetworkState& state,
                                              const ObservationSequence& seq);

}  // namespace hpnet
