#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "hpnet/config.hpp"
#include "hpnet/io.hpp"
#include "hpnet/modes.hpp"
#include "hpnet/trajectories.hpp"

namespace hpnet {

struct RecognitionSettings {
    int window_len = 0;  // 0 means the full sequence length
    int epochs = 3000;
};

struct ExperimentConfig {
    NetworkConfig network;
    TrainConfig train;
    DatasetSpec data;
    RecognitionSettings recognition;
    int prediction_steps = 19;
    std::string output_dir = "out";
    std::uint64_t seed = 42;  // network initialization seed
};

// Strict parsing: unknown keys anywhere in the document are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

struct ExperimentReport {
    std::vector<double> cost_curve;
    PBTable pb_table;
    std::vector<std::pair<std::string, RecognitionTrace>> recognition;
    std::vector<PredictionRecord> predictions;
    nlohmann::json summary;
};

// name in {fig4, fig5, fig6, fig7, fig8}; runs the corresponding pipeline
// and writes CSV artifacts plus manifest.json and summary.json under
// cfg.output_dir.
ExperimentReport reproduce_experiment(const std::string& name, const ExperimentConfig& cfg);

// --- analysis helpers shared with the acceptance suite ---

struct SeparabilityResult {
    bool separable = false;
    // Which PB activation axis thresholds which factor, e.g.
    // "pb_d->color, pb_v->shape".
    std::string assignment;
};

// Looks for an assignment of the two PB activation axes to {color, shape}
// such that one threshold per axis splits the classes with zero errors.
// Requires one PB unit per group.
SeparabilityResult pb_separability(const PBTable& table);

// Standard deviation of the trailing rho samples stays below
// max(0.05 * |rho_final|, 0.01) on every component.
bool trace_converged(const RecognitionTrace& trace, int tail_epochs = 100);

// Mean squared error per output unit, over steps 1..end (step 0 is given).
Vec per_unit_mse(const ObservationSequence& predicted, const ObservationSequence& truth);

double mean_abs_pb(const PBTable& table);

}  // namespace hpnet
