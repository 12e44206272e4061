#include <doctest.h>

#include <cmath>
#include <random>

#include "hpnet/errors.hpp"
#include "hpnet/network.hpp"

using namespace hpnet;

TEST_CASE("init_network starts PB at the origin and is deterministic") {
    NetworkConfig cfg;
    const NetworkState a = init_network(cfg, 42);
    CHECK(a.rho_d.isZero(0.0));
    CHECK(a.rho_v.isZero(0.0));

    const NetworkState b = init_network(cfg, 42);
    auto wa = a.weights.all();
    auto wb = b.weights.all();
    for (std::size_t i = 0; i < WeightSet::kCount; ++i) CHECK(*wa[i] == *wb[i]);

    const NetworkState c = init_network(cfg, 43);
    CHECK(a.weights.w_d != c.weights.w_d);
}

TEST_CASE("init_network seeds stream learning rates and bounds the weights") {
    NetworkConfig cfg;
    const NetworkState st = init_network(cfg, 7);
    CHECK(st.lr.w_d.isConstant(cfg.eta_dorsal));
    CHECK(st.lr.v_d.isConstant(cfg.eta_dorsal));
    CHECK(st.lr.wbar_d.isConstant(cfg.eta_dorsal));
    CHECK(st.lr.u_d.isConstant(cfg.eta_dorsal));
    CHECK(st.lr.w_v.isConstant(cfg.eta_ventral));
    CHECK(st.lr.u_v.isConstant(cfg.eta_ventral));
    for (const Mat* m : st.weights.all()) {
        CHECK(m->maxCoeff() <= cfg.weight_init_range);
        CHECK(m->minCoeff() >= -cfg.weight_init_range);
    }
    for (const Mat* m : st.prev_grad.all()) CHECK(m->isZero(0.0));
}

TEST_CASE("init_network rejects invalid configs") {
    NetworkConfig cfg;
    cfg.eta_min = 1.0;
    cfg.eta_max = 1e-3;
    CHECK_THROWS_AS(init_network(cfg, 1), ConfigError);

    NetworkConfig bad_counts;
    bad_counts.n_d = 0;
    CHECK_THROWS_AS(init_network(bad_counts, 1), ConfigError);

    NetworkConfig bad_xi;
    bad_xi.xi_plus = 0.9;
    CHECK_THROWS_AS(init_network(bad_xi, 1), ConfigError);
}

TEST_CASE("transfer is the scaled tanh") {
    CHECK(transfer(0.0) == 0.0);
    // direct evaluation of the formula with long-double tanh as oracle
    const double expected = static_cast<double>(1.7159L * std::tanh(2.0L / 3.0L));
    CHECK(transfer(1.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(transfer(1.0) == doctest::Approx(0.99999725592247898).epsilon(1e-12));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    double prev_x = -1e9, prev_y = -1e9;
    for (int i = 0; i < 1000; ++i) {
        const double x = dist(rng);
        CHECK(transfer(-x) == -transfer(x));  // odd
        CHECK(std::abs(transfer(x)) < 1.7159);
    }
    for (double x = -20.0; x <= 20.0; x += 0.25) {  // strictly monotone
        const double y = transfer(x);
        if (prev_x > -1e9) CHECK(y > prev_y);
        prev_x = x;
        prev_y = y;
    }
}

TEST_CASE("transfer_prime matches a central difference") {
    for (double x : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
        const double h = 1e-6;
        const double numeric = (transfer(x + h) - transfer(x - h)) / (2 * h);
        CHECK(transfer_prime(x) == doctest::Approx(numeric).epsilon(1e-8));
    }
}

TEST_CASE("pb_activation applies transfer to the internal values") {
    NetworkConfig cfg;
    NetworkState st = init_network(cfg, 3);
    auto [pd0, pv0] = pb_activation(st);
    CHECK(pd0.isZero(0.0));
    CHECK(pv0.isZero(0.0));

    st.rho_d(0) = 1.0;
    st.rho_v(0) = -0.4;
    auto [pd, pv] = pb_activation(st);
    CHECK(pd(0) == doctest::Approx(0.99999725592247898).epsilon(1e-12));
    CHECK(pv(0) == transfer(-0.4));

    st.rho_d = -st.rho_d;
    st.rho_v = -st.rho_v;
    auto [pdn, pvn] = pb_activation(st);
    CHECK(pdn(0) == -pd(0));
    CHECK(pvn(0) == -pv(0));
}

namespace {

InputFrame frame4(double a, double b, double c, double d) {
    InputFrame f;
    f.values = Vec(4);
    f.values << a, b, c, d;
    return f;
}

}  // namespace

TEST_CASE("forward_step: zero weights give zero output") {
    NetworkConfig cfg;
    NetworkState st = init_network(cfg, 5);
    st.weights.set_zero();
    const StepCache c = forward_step(st, frame4(0.3, 0.4, 0.0, 0.0), zero_hidden(cfg));
    CHECK(c.output.isZero(0.0));
    CHECK(c.hidden.s_d.isZero(0.0));
}

TEST_CASE("forward_step: x_v of all ones makes the product the identity") {
    NetworkConfig cfg;
    cfg.n_d = 3;
    cfg.n_v = 2;
    NetworkState st = init_network(cfg, 9);
    // force s_v to a known value, then pick u_v so x_v == 1
    st.weights.w_v.setZero();
    st.weights.v_v.setZero();
    st.weights.wbar_v.setZero();
    const StepCache probe = forward_step(st, frame4(0.1, 0.2, 0.3, 0.4), zero_hidden(cfg));
    CHECK(probe.hidden.s_v.isZero(0.0));
    // with s_v == 0 the x_v term is zero; instead drive s_v through the input
    st.weights.w_v.setConstant(1.0);
    const StepCache probe2 = forward_step(st, frame4(0.1, 0.2, 0.3, 0.4), zero_hidden(cfg));
    const double sv = probe2.hidden.s_v(0);
    REQUIRE(sv != 0.0);
    st.weights.u_v.setZero();
    st.weights.u_v.col(0).setConstant(1.0 / sv);
    const StepCache c = forward_step(st, frame4(0.1, 0.2, 0.3, 0.4), zero_hidden(cfg));
    for (int k = 0; k < cfg.n_output; ++k) {
        CHECK(c.x_v(k) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.output(k) == doctest::Approx(c.x_d(k)).epsilon(1e-12));
    }
}

TEST_CASE("forward_step: hand-computed single-unit network") {
    NetworkConfig cfg;
    cfg.n_input = 1;
    cfg.n_output = 1;
    cfg.n_d = 1;
    cfg.n_v = 1;
    NetworkState st = init_network(cfg, 0);
    for (Mat* m : st.weights.all()) m->setConstant(0.5);

    InputFrame in;
    in.values = Vec::Constant(1, 1.0);
    const StepCache c = forward_step(st, in, zero_hidden(cfg));
    CHECK(c.pre_d(0) == doctest::Approx(0.5).epsilon(1e-15));  // pb contributes 0
    CHECK(c.pre_v(0) == doctest::Approx(0.5).epsilon(1e-15));
    const double s = transfer(0.5);
    CHECK(c.hidden.s_d(0) == doctest::Approx(s).epsilon(1e-15));
    CHECK(c.x_d(0) == doctest::Approx(0.5 * s).epsilon(1e-15));
    CHECK(c.output(0) == doctest::Approx(0.5 * s * 0.5 * s).epsilon(1e-15));
}

TEST_CASE("forward_step output is exactly the elementwise product") {
    NetworkConfig cfg;
    NetworkState st = init_network(cfg, 11);
    st.rho_d(0) = 0.2;
    st.rho_v(0) = -0.3;
    const StepCache c = forward_step(st, frame4(0.5, 0.6, 0.0, 0.0), zero_hidden(cfg));
    for (int k = 0; k < cfg.n_output; ++k) {
        CHECK(c.output(k) == c.x_d(k) * c.x_v(k));          // same arithmetic path
        CHECK(c.output(k) == c.x_v(k) * c.x_d(k));          // commutes
        CHECK(std::abs(c.hidden.s_d(k % cfg.n_d)) < 1.7159);
    }
}

TEST_CASE("forward_step is pure") {
    NetworkConfig cfg;
    const NetworkState st = init_network(cfg, 13);
    const InputFrame in = frame4(0.2, 0.8, 0.0, 0.0);
    const StepCache a = forward_step(st, in, zero_hidden(cfg));
    const StepCache b = forward_step(st, in, zero_hidden(cfg));
    CHECK(a.output == b.output);
    CHECK(a.pre_d == b.pre_d);
}

TEST_CASE("forward_step rejects mismatched shapes") {
    NetworkConfig cfg;
    const NetworkState st = init_network(cfg, 1);
    InputFrame wrong;
    wrong.values = Vec::Zero(3);
    CHECK_THROWS_AS(forward_step(st, wrong, zero_hidden(cfg)), DataError);
}

TEST_CASE("run_sequence_open_loop unrolls forward_step from a zero hidden state") {
    NetworkConfig cfg;
    const NetworkState st = init_network(cfg, 17);
    ObservationSequence seq;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int t = 0; t < 5; ++t) seq.push_back(frame4(dist(rng), dist(rng), 0.0, 0.0));

    const auto caches = run_sequence_open_loop(st, seq);
    REQUIRE(caches.size() == seq.size());

    // reference loop
    HiddenState h = zero_hidden(cfg);
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const StepCache ref = forward_step(st, seq[t], h);
        CHECK(caches[t].output == ref.output);
        h = ref.hidden;
    }

    const auto again = run_sequence_open_loop(st, seq);
    for (std::size_t t = 0; t < seq.size(); ++t) CHECK(caches[t].output == again[t].output);
}

TEST_CASE("run_sequence_open_loop needs at least two frames") {
    NetworkConfig cfg;
    const NetworkState st = init_network(cfg, 1);
    ObservationSequence two = {frame4(0, 0, 0, 0), frame4(0, 0, 0, 0)};
    CHECK(run_sequence_open_loop(st, two).size() == 2);
    ObservationSequence one = {frame4(0, 0, 0, 0)};
    CHECK_THROWS_AS(run_sequence_open_loop(st, one), DataError);
}
