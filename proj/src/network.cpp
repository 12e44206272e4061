#include "hpnet/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hpnet/errors.hpp"

namespace hpnet {

namespace {

constexpr double kAmp = 1.7159;
constexpr double kSlope = 2.0 / 3.0;

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
}

}  // namespace

void NetworkConfig::validate() const {
    require(n_input >= 1, "n_input must be >= 1");
    require(n_output == n_input, "n_output must equal n_input");
    require(n_d >= 1, "n_d must be >= 1");
    require(n_v >= 1, "n_v must be >= 1");
    require(n_pb_d >= 1, "n_pb_d must be >= 1");
    require(n_pb_v >= 1, "n_pb_v must be >= 1");
    require(eta_min > 0.0, "eta_min must be > 0");
    require(eta_min <= eta_max, "eta_min must be <= eta_max");
    require(eta_dorsal >= eta_min && eta_dorsal <= eta_max,
            "eta_dorsal must lie in [eta_min, eta_max]");
    require(eta_ventral >= eta_min && eta_ventral <= eta_max,
            "eta_ventral must lie in [eta_min, eta_max]");
    require(xi_plus > 1.0, "xi_plus must be > 1");
    require(xi_minus < 1.0 && xi_minus > 0.0, "xi_minus must be in (0, 1)");
    require(m_gamma > 0.0, "m_gamma must be > 0");
    require(gamma_recognition > 0.0, "gamma_recognition must be > 0");
    require(weight_init_range > 0.0, "weight_init_range must be > 0");
}

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ConfigError("invalid config: max_epochs must be >= 1");
    if (target_cost < 0.0) throw ConfigError("invalid config: target_cost must be >= 0");
}

WeightSet WeightSet::shaped(const NetworkConfig& cfg) {
    WeightSet s;
    s.w_d = Mat::Zero(cfg.n_d, cfg.n_input);
    s.w_v = Mat::Zero(cfg.n_v, cfg.n_input);
    s.v_d = Mat::Zero(cfg.n_d, cfg.n_d);
    s.v_v = Mat::Zero(cfg.n_v, cfg.n_v);
    s.wbar_d = Mat::Zero(cfg.n_d, cfg.pb_into_dorsal());
    s.wbar_v = Mat::Zero(cfg.n_v, cfg.pb_into_ventral());
    s.u_d = Mat::Zero(cfg.n_output, cfg.n_d);
    s.u_v = Mat::Zero(cfg.n_output, cfg.n_v);
    return s;
}

void WeightSet::set_zero() {
    for (Mat* m : all()) m->setZero();
}

double transfer(double pre) { return kAmp * std::tanh(kSlope * pre); }

double transfer_prime(double pre) {
    const double th = std::tanh(kSlope * pre);
    return kAmp * kSlope * (1.0 - th * th);
}

NetworkState init_network(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    NetworkState st;
    st.config = cfg;
    st.weights = WeightSet::shaped(cfg);
    st.lr = WeightSet::shaped(cfg);
    st.prev_grad = WeightSet::shaped(cfg);
    st.rho_d = Vec::Zero(cfg.n_pb_d);
    st.rho_v = Vec::Zero(cfg.n_pb_v);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-cfg.weight_init_range, cfg.weight_init_range);
    auto ws = st.weights.all();
    auto lrs = st.lr.all();
    for (std::size_t i = 0; i < WeightSet::kCount; ++i) {
        for (Eigen::Index c = 0; c < ws[i]->cols(); ++c)
            for (Eigen::Index r = 0; r < ws[i]->rows(); ++r)
                (*ws[i])(r, c) = uni(rng);
        lrs[i]->setConstant(WeightSet::is_dorsal(i) ? cfg.eta_dorsal : cfg.eta_ventral);
    }
    return st;
}

std::pair<Vec, Vec> pb_activation(const NetworkState& state) {
    return {state.rho_d.unaryExpr([](double r) { return transfer(r); }),
            state.rho_v.unaryExpr([](double r) { return transfer(r); })};
}

HiddenState zero_hidden(const NetworkConfig& cfg) {
    return {Vec::Zero(cfg.n_d), Vec::Zero(cfg.n_v)};
}

namespace {

void check_shape(bool ok, const char* what) {
    if (!ok) {
        std::ostringstream os;
        os << "shape mismatch in forward_step: " << what;
        throw DataError(os.str());
    }
}

}  // namespace

StepCache forward_step(const NetworkState& state, const InputFrame& input,
                       const HiddenState& prev) {
    const NetworkConfig& cfg = state.config;
    check_shape(input.values.size() == cfg.n_input, "input frame size");
    check_shape(prev.s_d.size() == cfg.n_d && prev.s_v.size() == cfg.n_v,
                "hidden state size");

    auto [pb_d, pb_v] = pb_activation(state);
    const Vec& into_dorsal = cfg.same_stream_pb ? pb_d : pb_v;
    const Vec& into_ventral = cfg.same_stream_pb ? pb_v : pb_d;

    StepCache c;
    c.input = input;
    c.pre_d = state.weights.w_d * input.values + state.weights.v_d * prev.s_d +
              state.weights.wbar_d * into_dorsal;
    c.pre_v = state.weights.w_v * input.values + state.weights.v_v * prev.s_v +
              state.weights.wbar_v * into_ventral;
    c.hidden.s_d = c.pre_d.unaryExpr([](double y) { return transfer(y); });
    c.hidden.s_v = c.pre_v.unaryExpr([](double y) { return transfer(y); });
    c.x_d = state.weights.u_d * c.hidden.s_d;
    c.x_v = state.weights.u_v * c.hidden.s_v;
    c.output = c.x_d.cwiseProduct(c.x_v);
    return c;
}

std::vector<StepCache> run_sequence_open_loop(const NetworkState& state,
                                              const ObservationSequence& seq) {
    if (seq.size() < 2)
        throw DataError("sequence too short: need at least 2 frames, got " +
                        std::to_string(seq.size()));
    std::vector<StepCache> caches;
    caches.reserve(seq.size());
    HiddenState h = zero_hidden(state.config);
    for (const InputFrame& frame : seq) {
        caches.push_back(forward_step(state, frame, h));
        h = caches.back().hidden;
    }
    return caches;
}

}  // namespace hpnet
