// Command-line front end: data generation, the three run modes, gradient
// checking and scripted experiment reproduction.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hpnet/errors.hpp"
#include "hpnet/experiment.hpp"
#include "hpnet/gradients.hpp"
#include "hpnet/io.hpp"
#include "hpnet/modes.hpp"
#include "hpnet/trajectories.hpp"

namespace {

// Exit codes: 0 ok, 2 usage, 3 data, 4 training divergence, 5 persistence.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;
constexpr int kExitPersistence = 5;

namespace fs = std::filesystem;
using namespace hpnet;

std::vector<LabeledSequence> load_sequences(const std::vector<std::string>& paths) {
    std::vector<LabeledSequence> out;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(p))
                if (entry.path().extension() == ".csv") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) out.push_back(read_sequence_csv(f));
        } else {
            out.push_back(read_sequence_csv(p));
        }
    }
    if (out.empty()) throw DataError("no sequences found in the given paths");
    return out;
}

Vec parse_values(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

PBTable read_pb_table_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open PB table: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty PB table: " + path.string());
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string f;
        while (std::getline(hs, f, ',')) header.push_back(f);
    }
    int nd = 0, nv = 0;
    for (const auto& h : header) {
        if (h.rfind("rho_d_", 0) == 0) ++nd;
        if (h.rfind("rho_v_", 0) == 0) ++nv;
    }
    if (nd == 0 || nv == 0) throw DataError("bad PB table header: " + path.string());

    PBTable table;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != header.size())
            throw DataError("bad PB table row: " + line);
        PBEntry e;
        e.shape = fields[1];
        e.color = fields[2];
        e.repeat = std::stoi(fields[3]);
        e.rho_d = Vec::Zero(nd);
        e.rho_v = Vec::Zero(nv);
        for (int i = 0; i < nd; ++i) e.rho_d(i) = std::stod(fields[4 + i]);
        for (int i = 0; i < nv; ++i) e.rho_v(i) = std::stod(fields[4 + nd + i]);
        table.push_back(std::move(e));
    }
    if (table.empty()) throw DataError("PB table has no rows: " + path.string());
    return table;
}

int run(int argc, char** argv) {
    CLI::App app{"Two-stream horizontal-product RNN with parametric biases"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 42;
    std::string out_dir = "out";

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate trajectory dataset CSVs");
    DatasetSpec spec;
    gen->add_option("--shapes", spec.shapes, "Subset of cosine/square/circle");
    gen->add_option("--colors", spec.colors, "Subset of yellow/green");
    gen->add_option("--repeats", spec.repeats, "Sequences per shape/color");
    gen->add_option("--points", spec.points_per_loop, "Samples per loop");
    gen->add_option("--speed-factor", spec.speed_factor, "Temporal sampling multiplier");
    gen->add_option("--noise-sigma", spec.noise_sigma, "Image noise std dev");
    gen->add_option("--seed", spec.seed, "Noise seed");
    gen->add_option("--out", out_dir, "Output directory");

    // train
    auto* tr = app.add_subcommand("train", "Learning mode: weights plus per-sequence PB");
    std::vector<std::string> data_paths;
    std::optional<int> epochs_override;
    tr->add_option("--data", data_paths, "Sequence CSV files or directories")->required();
    tr->add_option("--config", config_path, "Experiment config JSON");
    tr->add_option("--seed", seed, "Weight initialization seed");
    tr->add_option("--epochs", epochs_override, "Epoch budget");
    tr->add_option("--out", out_dir, "Output directory");

    // recognize
    auto* rec = app.add_subcommand("recognize", "Recognition mode: PB only, frozen weights");
    std::string weights_path;
    int rec_epochs = 3000;
    int window_len = 0;
    std::string pb_table_path;
    rec->add_option("--weights", weights_path, "Trained weight file")->required();
    rec->add_option("--data", data_paths, "Sequence CSV files or directories")->required();
    rec->add_option("--epochs", rec_epochs, "Recognition epochs");
    rec->add_option("--window", window_len, "Sliding window length (0 = full)");
    rec->add_option("--pb-table", pb_table_path, "pb_table.csv for classification");
    rec->add_option("--out", out_dir, "Output directory");

    // predict
    auto* pred = app.add_subcommand("predict", "Prediction mode: closed-loop generation");
    std::vector<double> rho_d_vals{0.0};
    std::vector<double> rho_v_vals{0.0};
    int steps = 19;
    pred->add_option("--weights", weights_path, "Trained weight file")->required();
    pred->add_option("--data", data_paths, "Sequence CSV giving first frame and truth")
        ->required();
    pred->add_option("--rho-d", rho_d_vals, "PB internal values, dorsal group");
    pred->add_option("--rho-v", rho_v_vals, "PB internal values, ventral group");
    pred->add_option("--steps", steps, "Closed-loop steps");
    pred->add_option("--out", out_dir, "Output directory");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "Compare BPTT against finite differences");
    int gc_cases = 10;
    gc->add_option("--seed", seed, "Base seed");
    gc->add_option("--cases", gc_cases, "Number of random networks");

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "Run a scripted experiment end to end");
    std::string experiment;
    std::optional<double> speed_override;
    std::optional<double> noise_override;
    std::optional<std::uint64_t> seed_override;
    rep->add_option("--experiment", experiment, "One of fig4 fig5 fig6 fig7 fig8")->required();
    rep->add_option("--config", config_path, "Experiment config JSON");
    rep->add_option("--seed", seed_override, "Network seed override");
    rep->add_option("--epochs", epochs_override, "Training epoch override");
    rep->add_option("--speed-factor", speed_override, "Dataset speed factor override");
    rep->add_option("--noise-sigma", noise_override, "Dataset noise override");
    rep->add_option("--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (gen->parsed()) {
        const auto dataset = make_dataset(spec);
        fs::create_directories(out_dir);
        for (const auto& seq : dataset) {
            const std::string name =
                seq.shape + "_" + seq.color + "_" + std::to_string(seq.repeat) + ".csv";
            write_sequence_csv(seq, fs::path(out_dir) / name);
        }
        std::cout << "wrote " << dataset.size() << " sequences to " << out_dir << "\n";
        return 0;
    }

    if (tr->parsed()) {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_experiment_config(config_path);
        if (epochs_override) cfg.train.max_epochs = *epochs_override;
        const auto dataset = load_sequences(data_paths);
        TrainResult result = train(init_network(cfg.network, seed), dataset, cfg.train);
        fs::create_directories(out_dir);
        save_state(result.state, fs::path(out_dir) / "weights.bin");
        write_pb_table_csv(result.pb_table, fs::path(out_dir) / "pb_table.csv");
        write_cost_curve_csv(result.cost_curve, fs::path(out_dir) / "cost_curve.csv");
        std::cout << "epochs=" << result.cost_curve.size()
                  << " initial_cost=" << result.cost_curve.front()
                  << " final_cost=" << result.cost_curve.back() << "\n";
        return 0;
    }

    if (rec->parsed()) {
        const NetworkState state = load_state(weights_path);
        const auto sequences = load_sequences(data_paths);
        PBTable table;
        if (!pb_table_path.empty()) table = read_pb_table_csv(pb_table_path);

        std::vector<std::pair<std::string, RecognitionTrace>> traces;
        for (const auto& seq : sequences) {
            const int window =
                window_len > 0 ? window_len : static_cast<int>(seq.frames.size());
            RecognitionTrace t = recognize(state, seq.frames, window, rec_epochs);
            if (!table.empty()) {
                t.classified_as = classify_pb(
                    t.final_rho_d.unaryExpr([](double r) { return transfer(r); }),
                    t.final_rho_v.unaryExpr([](double r) { return transfer(r); }), table);
            }
            std::cout << seq.label() << ": rho_d=" << t.final_rho_d.transpose()
                      << " rho_v=" << t.final_rho_v.transpose();
            if (!t.classified_as.empty()) std::cout << " -> " << t.classified_as;
            std::cout << "\n";
            traces.emplace_back(seq.label(), std::move(t));
        }
        fs::create_directories(out_dir);
        write_recognition_trace_csv(traces, fs::path(out_dir) / "recognition_trace.csv");
        return 0;
    }

    if (pred->parsed()) {
        const NetworkState state = load_state(weights_path);
        const auto sequences = load_sequences(data_paths);
        std::vector<PredictionRecord> records;
        for (const auto& seq : sequences) {
            const ObservationSequence gen =
                predict(state, parse_values(rho_d_vals), parse_values(rho_v_vals),
                        seq.frames.front(), steps);
            records.push_back({seq.label(), gen, seq.frames});
            if (seq.frames.size() >= 2) {
                const Vec mse = per_unit_mse(gen, seq.frames);
                std::cout << seq.label() << ": per-unit MSE = " << mse.transpose() << "\n";
            }
        }
        fs::create_directories(out_dir);
        write_prediction_trace_csv(records, fs::path(out_dir) / "prediction_trace.csv");
        return 0;
    }

    if (gc->parsed()) {
        double worst = 0.0;
        for (int i = 0; i < gc_cases; ++i) {
            const auto [state, seq] = gradcheck_case(seed + static_cast<std::uint64_t>(i));
            const GradientSet analytic = bptt(state, seq);
            const GradientSet fd = finite_diff_gradient(state, seq, 1e-5);
            worst = std::max(worst, max_relative_gradient_error(analytic, fd));
        }
        std::cout << "max relative gradient error over " << gc_cases
                  << " cases: " << worst << "\n";
        return worst <= 1e-4 ? 0 : 1;
    }

    if (rep->parsed()) {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_experiment_config(config_path);
        cfg.output_dir = out_dir;
        if (seed_override) cfg.seed = *seed_override;
        if (epochs_override) cfg.train.max_epochs = *epochs_override;
        if (speed_override) cfg.data.speed_factor = *speed_override;
        if (noise_override) cfg.data.noise_sigma = *noise_override;
        const ExperimentReport report = reproduce_experiment(experiment, cfg);
        std::cout << report.summary.dump(2) << "\n";
        return 0;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const hpnet::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const hpnet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const hpnet::TrainingError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const hpnet::PersistenceError& e) {
        std::cerr << "persistence error: " << e.what() << "\n";
        return kExitPersistence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
