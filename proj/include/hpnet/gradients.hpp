#pragma once

#include "hpnet/network.hpp"

namespace hpnet {

// Gradients of the sequence cost. `g` holds dC/dw per weight entry.
// delta_pb_* hold the accumulated back-propagated PB error, summed over the
// sequence, with the transfer derivative at rho already applied; they equal
// -dC/drho, so adding gamma * delta descends the cost.
struct GradientSet {
    WeightSet g;
    Vec delta_pb_d;  // size n_pb_d (group feeding the ventral stream by default)
    Vec delta_pb_v;  // size n_pb_v (group feeding the dorsal stream by default)
};

// C = 1/2 sum_t sum_k (target_k(t+1) - output_k(t))^2. The caches must come
// from running `targets` open loop; the last frame serves only as a target.
double sequence_cost(const std::vector<StepCache>& caches,
                     const ObservationSequence& targets);

// Exact gradients, fully unrolled through the recurrence over the whole
// sequence. Output error reaches the dorsal stream scaled by x_v and the
// ventral stream scaled by x_d (product rule of the horizontal product).
GradientSet bptt(const NetworkState& state, const ObservationSequence& seq);

// Same, but only prediction errors of the last `window_len` steps contribute
// (recognition-mode sliding window). window_len == T reproduces bptt.
GradientSet bptt_window(const NetworkState& state, const ObservationSequence& seq,
                        int window_len);

// Central-difference oracle. Unlike bptt, delta_pb_* here hold the raw
// dC/drho entries; compare against the negated analytic delta_pb.
GradientSet finite_diff_gradient(const NetworkState& state,
                                 const ObservationSequence& seq, double epsilon);

// Worst relative disagreement between analytic and finite-difference
// gradients over all weight and rho entries. Differences below an absolute
// floor of 1e-8 count as exact.
double max_relative_gradient_error(const GradientSet& analytic, const GradientSet& fd);

// Small randomized network (5 hidden units per stream, nonzero PB values)
// plus a length-6 input sequence, for gradient checking.
std::pair<NetworkState, ObservationSequence> gradcheck_case(std::uint64_t seed);

}  // namespace hpnet
