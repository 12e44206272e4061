#include "hpnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "hpnet/errors.hpp"
#include "hpnet/gradients.hpp"

namespace hpnet {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    if (!j.is_object()) throw ConfigError("config: " + ctx + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&key](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError("config: unknown key '" + key + "' in " + ctx);
    }
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
    check_keys(j,
               {"network", "train", "data", "recognition", "prediction", "output_dir", "seed"},
               "top level");
    ExperimentConfig cfg;
    if (auto it = j.find("network"); it != j.end()) {
        const json& n = *it;
        check_keys(n,
                   {"n_input", "n_d", "n_v", "n_pb_d", "n_pb_v", "eta_dorsal", "eta_ventral",
                    "eta_min", "eta_max", "xi_plus", "xi_minus", "m_gamma", "gamma_recognition",
                    "weight_init_range", "same_stream_pb"},
                   "network");
        read_key(n, "n_input", cfg.network.n_input);
        cfg.network.n_output = cfg.network.n_input;
        read_key(n, "n_d", cfg.network.n_d);
        read_key(n, "n_v", cfg.network.n_v);
        read_key(n, "n_pb_d", cfg.network.n_pb_d);
        read_key(n, "n_pb_v", cfg.network.n_pb_v);
        read_key(n, "eta_dorsal", cfg.network.eta_dorsal);
        read_key(n, "eta_ventral", cfg.network.eta_ventral);
        read_key(n, "eta_min", cfg.network.eta_min);
        read_key(n, "eta_max", cfg.network.eta_max);
        read_key(n, "xi_plus", cfg.network.xi_plus);
        read_key(n, "xi_minus", cfg.network.xi_minus);
        read_key(n, "m_gamma", cfg.network.m_gamma);
        read_key(n, "gamma_recognition", cfg.network.gamma_recognition);
        read_key(n, "weight_init_range", cfg.network.weight_init_range);
        read_key(n, "same_stream_pb", cfg.network.same_stream_pb);
    }
    if (auto it = j.find("train"); it != j.end()) {
        check_keys(*it, {"max_epochs", "target_cost", "shuffle", "seed"}, "train");
        read_key(*it, "max_epochs", cfg.train.max_epochs);
        read_key(*it, "target_cost", cfg.train.target_cost);
        read_key(*it, "shuffle", cfg.train.shuffle);
        read_key(*it, "seed", cfg.train.seed);
    }
    if (auto it = j.find("data"); it != j.end()) {
        check_keys(*it,
                   {"shapes", "colors", "repeats", "points_per_loop", "speed_factor",
                    "noise_sigma", "seed"},
                   "data");
        read_key(*it, "shapes", cfg.data.shapes);
        read_key(*it, "colors", cfg.data.colors);
        read_key(*it, "repeats", cfg.data.repeats);
        read_key(*it, "points_per_loop", cfg.data.points_per_loop);
        read_key(*it, "speed_factor", cfg.data.speed_factor);
        read_key(*it, "noise_sigma", cfg.data.noise_sigma);
        read_key(*it, "seed", cfg.data.seed);
    }
    if (auto it = j.find("recognition"); it != j.end()) {
        check_keys(*it, {"window_len", "epochs"}, "recognition");
        read_key(*it, "window_len", cfg.recognition.window_len);
        read_key(*it, "epochs", cfg.recognition.epochs);
    }
    if (auto it = j.find("prediction"); it != j.end()) {
        check_keys(*it, {"steps"}, "prediction");
        read_key(*it, "steps", cfg.prediction_steps);
    }
    read_key(j, "output_dir", cfg.output_dir);
    read_key(j, "seed", cfg.seed);
    cfg.network.validate();
    cfg.train.validate();
    cfg.data.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    return json{
        {"network",
         {{"n_input", cfg.network.n_input},
          {"n_d", cfg.network.n_d},
          {"n_v", cfg.network.n_v},
          {"n_pb_d", cfg.network.n_pb_d},
          {"n_pb_v", cfg.network.n_pb_v},
          {"eta_dorsal", cfg.network.eta_dorsal},
          {"eta_ventral", cfg.network.eta_ventral},
          {"eta_min", cfg.network.eta_min},
          {"eta_max", cfg.network.eta_max},
          {"xi_plus", cfg.network.xi_plus},
          {"xi_minus", cfg.network.xi_minus},
          {"m_gamma", cfg.network.m_gamma},
          {"gamma_recognition", cfg.network.gamma_recognition},
          {"weight_init_range", cfg.network.weight_init_range},
          {"same_stream_pb", cfg.network.same_stream_pb}}},
        {"train",
         {{"max_epochs", cfg.train.max_epochs},
          {"target_cost", cfg.train.target_cost},
          {"shuffle", cfg.train.shuffle},
          {"seed", cfg.train.seed}}},
        {"data",
         {{"shapes", cfg.data.shapes},
          {"colors", cfg.data.colors},
          {"repeats", cfg.data.repeats},
          {"points_per_loop", cfg.data.points_per_loop},
          {"speed_factor", cfg.data.speed_factor},
          {"noise_sigma", cfg.data.noise_sigma},
          {"seed", cfg.data.seed}}},
        {"recognition",
         {{"window_len", cfg.recognition.window_len}, {"epochs", cfg.recognition.epochs}}},
        {"prediction", {{"steps", cfg.prediction_steps}}},
        {"output_dir", cfg.output_dir},
        {"seed", cfg.seed}};
}

namespace {

// Can one threshold split the two value groups without error?
bool threshold_separates(const std::vector<double>& a, const std::vector<double>& b) {
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    return *amax < *bmin || *bmax < *amin;
}

std::vector<double> axis_values(const PBTable& table, bool dorsal_axis,
                                const std::string& factor, const std::string& value) {
    std::vector<double> out;
    for (const PBEntry& e : table) {
        const std::string& v = factor == "color" ? e.color : e.shape;
        if (v != value) continue;
        out.push_back(transfer(dorsal_axis ? e.rho_d(0) : e.rho_v(0)));
    }
    return out;
}

bool axis_splits_factor(const PBTable& table, bool dorsal_axis, const std::string& factor) {
    std::set<std::string> values;
    for (const PBEntry& e : table) values.insert(factor == "color" ? e.color : e.shape);
    if (values.size() != 2) return false;
    auto it = values.begin();
    const std::string first = *it++;
    const std::string second = *it;
    return threshold_separates(axis_values(table, dorsal_axis, factor, first),
                               axis_values(table, dorsal_axis, factor, second));
}

}  // namespace

SeparabilityResult pb_separability(const PBTable& table) {
    if (table.empty()) throw DataError("pb_separability: empty PB table");
    if (table.front().rho_d.size() != 1 || table.front().rho_v.size() != 1)
        throw DataError("pb_separability: needs one PB unit per group");

    SeparabilityResult res;
    if (axis_splits_factor(table, true, "color") && axis_splits_factor(table, false, "shape")) {
        res.separable = true;
        res.assignment = "pb_d->color, pb_v->shape";
    } else if (axis_splits_factor(table, true, "shape") &&
               axis_splits_factor(table, false, "color")) {
        res.separable = true;
        res.assignment = "pb_d->shape, pb_v->color";
    }
    return res;
}

bool trace_converged(const RecognitionTrace& trace, int tail_epochs) {
    const int len = static_cast<int>(trace.rho_d_history.size());
    if (len == 0) return false;
    const int tail = std::min(tail_epochs, len);

    const auto component_ok = [&](auto get, Eigen::Index i, double final_value) {
        double mean = 0.0;
        for (int e = len - tail; e < len; ++e) mean += get(e)(i);
        mean /= tail;
        double var = 0.0;
        for (int e = len - tail; e < len; ++e) {
            const double d = get(e)(i) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / tail);
        return sd < std::max(0.05 * std::abs(final_value), 0.01);
    };

    const auto rho_d_at = [&](int e) -> const Vec& { return trace.rho_d_history[e]; };
    const auto rho_v_at = [&](int e) -> const Vec& { return trace.rho_v_history[e]; };
    for (Eigen::Index i = 0; i < trace.final_rho_d.size(); ++i)
        if (!component_ok(rho_d_at, i, trace.final_rho_d(i))) return false;
    for (Eigen::Index i = 0; i < trace.final_rho_v.size(); ++i)
        if (!component_ok(rho_v_at, i, trace.final_rho_v(i))) return false;
    return true;
}

Vec per_unit_mse(const ObservationSequence& predicted, const ObservationSequence& truth) {
    const std::size_t len = std::min(predicted.size(), truth.size());
    if (len < 2) throw DataError("per_unit_mse: need at least 2 aligned frames");
    Vec acc = Vec::Zero(predicted.front().values.size());
    for (std::size_t t = 1; t < len; ++t) {
        const Vec diff = predicted[t].values - truth[t].values;
        acc += diff.cwiseProduct(diff);
    }
    return acc / static_cast<double>(len - 1);
}

double mean_abs_pb(const PBTable& table) {
    if (table.empty()) throw DataError("mean_abs_pb: empty PB table");
    double sum = 0.0;
    int count = 0;
    for (const PBEntry& e : table) {
        for (Eigen::Index i = 0; i < e.rho_d.size(); ++i, ++count)
            sum += std::abs(transfer(e.rho_d(i)));
        for (Eigen::Index i = 0; i < e.rho_v.size(); ++i, ++count)
            sum += std::abs(transfer(e.rho_v(i)));
    }
    return sum / count;
}

namespace {

Vec pb_point(const RecognitionTrace& tr) {
    Vec p(tr.final_rho_d.size() + tr.final_rho_v.size());
    p << tr.final_rho_d.unaryExpr([](double r) { return transfer(r); }),
        tr.final_rho_v.unaryExpr([](double r) { return transfer(r); });
    return p;
}

}  // namespace

ExperimentReport reproduce_experiment(const std::string& name, const ExperimentConfig& cfg_in) {
    static const std::set<std::string> kNames = {"fig4", "fig5", "fig6", "fig7", "fig8"};
    if (!kNames.count(name)) throw DataError("unknown experiment '" + name + "'");

    ExperimentConfig cfg = cfg_in;
    if (name == "fig8" && cfg.data.speed_factor <= 1.0) cfg.data.speed_factor = 2.0;

    const std::filesystem::path out(cfg.output_dir);
    std::filesystem::create_directories(out);

    const auto dataset = make_dataset(cfg.data);
    TrainResult trained =
        train(init_network(cfg.network, cfg.seed), dataset, cfg.train);

    ExperimentReport report;
    report.cost_curve = trained.cost_curve;
    report.pb_table = trained.pb_table;
    write_cost_curve_csv(report.cost_curve, out / "cost_curve.csv");
    write_pb_table_csv(report.pb_table, out / "pb_table.csv");
    save_state(trained.state, out / "weights.bin");

    const int T = cfg.data.points_per_loop;
    const int window = cfg.recognition.window_len > 0 ? cfg.recognition.window_len : T;

    json summary;
    summary["experiment"] = name;
    summary["epochs_run"] = report.cost_curve.size();
    summary["initial_cost"] = report.cost_curve.front();
    summary["final_cost"] = report.cost_curve.back();

    if (name == "fig4" || name == "fig8") {
        const SeparabilityResult sep = pb_separability(report.pb_table);
        summary["pb_separable"] = sep.separable;
        summary["pb_assignment"] = sep.assignment;
        summary["mean_abs_pb"] = mean_abs_pb(report.pb_table);
        summary["speed_factor"] = cfg.data.speed_factor;
    }

    if (name == "fig5" || name == "fig6") {
        DatasetSpec held = cfg.data;
        held.repeats = 1;
        held.seed = cfg.data.seed + 1000;  // fresh noise, same curves
        const auto held_out = make_dataset(held);

        json cls = json::array();
        int correct = 0;
        for (const LabeledSequence& seq : held_out) {
            RecognitionTrace tr =
                recognize(trained.state, seq.frames, window, cfg.recognition.epochs);
            const auto [pb_d, pb_v] = std::pair{
                tr.final_rho_d.unaryExpr([](double r) { return transfer(r); }),
                tr.final_rho_v.unaryExpr([](double r) { return transfer(r); })};
            tr.classified_as = classify_pb(pb_d, pb_v, report.pb_table);
            const bool ok = tr.classified_as == seq.class_label();
            correct += ok ? 1 : 0;
            cls.push_back({{"sequence", seq.label()},
                           {"classified_as", tr.classified_as},
                           {"correct", ok},
                           {"converged", trace_converged(tr)}});
            report.recognition.emplace_back(seq.label(), std::move(tr));
        }
        summary["classification"] = cls;
        summary["recognized_correct"] = correct;
        summary["recognized_total"] = held_out.size();
        write_recognition_trace_csv(report.recognition, out / "recognition_trace.csv");

        if (name == "fig6") {
            json mse_table = json::array();
            for (std::size_t i = 0; i < held_out.size(); ++i) {
                const auto& tr = report.recognition[i].second;
                const auto& truth = held_out[i].frames;
                const ObservationSequence gen =
                    predict(trained.state, tr.final_rho_d, tr.final_rho_v, truth.front(),
                            cfg.prediction_steps);
                const Vec mse = per_unit_mse(gen, truth);
                json row;
                row["sequence"] = held_out[i].label();
                row["per_unit_mse"] = std::vector<double>(mse.data(), mse.data() + mse.size());
                mse_table.push_back(row);
                report.predictions.push_back({held_out[i].label(), gen, truth});
            }
            summary["prediction_mse"] = mse_table;
            write_prediction_trace_csv(report.predictions, out / "prediction_trace.csv");
        }
    }

    if (name == "fig7") {
        DatasetSpec circle = cfg.data;
        circle.shapes = {"circle"};
        circle.repeats = 1;
        circle.seed = cfg.data.seed + 2000;
        const auto circles = make_dataset(circle);

        json rows = json::array();
        bool all_nearer_square = true;
        for (const LabeledSequence& seq : circles) {
            RecognitionTrace tr =
                recognize(trained.state, seq.frames, window, cfg.recognition.epochs);
            const Vec point = pb_point(tr);
            const double d_square =
                (class_centroid(report.pb_table, "square/" + seq.color) - point).norm();
            const double d_cosine =
                (class_centroid(report.pb_table, "cosine/" + seq.color) - point).norm();
            all_nearer_square = all_nearer_square && d_square < d_cosine;
            rows.push_back({{"sequence", seq.label()},
                            {"dist_to_square_centroid", d_square},
                            {"dist_to_cosine_centroid", d_cosine},
                            {"nearer_square", d_square < d_cosine}});
            report.recognition.emplace_back(seq.label(), std::move(tr));
        }
        summary["circle_recognition"] = rows;
        summary["all_circles_nearer_square"] = all_nearer_square;
        write_recognition_trace_csv(report.recognition, out / "recognition_trace.csv");
    }

    json manifest;
    manifest["experiment"] = name;
    manifest["seed"] = cfg.seed;
    manifest["config"] = experiment_config_to_json(cfg);
    manifest["thresholds"] = {{"prediction_mse_max", 5e-3},
                              {"cost_drop_orders", 3.0},
                              {"recognition_min_correct", 3},
                              {"gradcheck_max_rel_error", 1e-4}};
    atomic_write_text(out / "manifest.json", manifest.dump(2) + "\n");

    report.summary = std::move(summary);
    atomic_write_text(out / "summary.json", report.summary.dump(2) + "\n");
    return report;
}

}  // namespace hpnet
