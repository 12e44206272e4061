#pragma once

#include <cstdint>

namespace hpnet {

// Layer sizes and learning constants of the two-stream horizontal-product
// network. Defaults follow the published parameter table.
struct NetworkConfig {
    int n_input = 4;
    int n_output = 4;  // must equal n_input
    int n_d = 50;      // dorsal hidden units
    int n_v = 50;      // ventral hidden units
    int n_pb_d = 1;    // PB units attached to the dorsal stream (n1)
    int n_pb_v = 1;    // PB units attached to the ventral stream (n2)

    double eta_dorsal = 1.0e-3;
    double eta_ventral = 1.0e-5;
    double eta_min = 1.0e-7;
    double eta_max = 1.0e-1;
    double xi_plus = 1.000001;
    double xi_minus = 0.999999;
    double m_gamma = 1.0e-2;           // PB update-rate proportionality constant
    double gamma_recognition = 0.1;    // fixed PB rate in recognition mode
    double weight_init_range = 0.1;

    // Ablation switch: when true each PB group feeds its own stream instead
    // of the opposite one. Off by default (cross-wiring as published).
    bool same_stream_pb = false;

    // Number of PB units feeding the dorsal / ventral pre-activations,
    // resolved through the wiring switch.
    int pb_into_dorsal() const { return same_stream_pb ? n_pb_d : n_pb_v; }
    int pb_into_ventral() const { return same_stream_pb ? n_pb_v : n_pb_d; }

    // Throws ConfigError naming the violated constraint.
    void validate() const;
};

// Epoch budget and presentation order for the learning mode.
struct TrainConfig {
    int max_epochs = 20000;
    double target_cost = 0.0;  // early stop when epoch cost falls below
    bool shuffle = false;
    std::uint64_t seed = 0;

    void validate() const;
};

}  // namespace hpnet
