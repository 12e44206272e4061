#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hpnet/modes.hpp"
#include "hpnet/network.hpp"

namespace hpnet {

// Versioned little-endian binary weight file: config, all matrices in
// row-major order, PB internal values, per-entry learning rates and
// previous-epoch gradients. save/load round-trips bitwise.
void save_state(const NetworkState& state, const std::filesystem::path& path);
NetworkState load_state(const std::filesystem::path& path);

// Canonical dataset CSV: one file per sequence, header
// t_index,in0,in1,in2,in3,shape,color,repeat.
void write_sequence_csv(const LabeledSequence& seq, const std::filesystem::path& path);
LabeledSequence read_sequence_csv(const std::filesystem::path& path);

// Report CSVs (documented headers, written atomically).
void write_pb_table_csv(const PBTable& table, const std::filesystem::path& path);
void write_cost_curve_csv(const std::vector<double>& curve, const std::filesystem::path& path);
void write_recognition_trace_csv(const std::vector<std::pair<std::string, RecognitionTrace>>& traces,
                                 const std::filesystem::path& path);

struct PredictionRecord {
    std::string label;
    ObservationSequence predicted;
    ObservationSequence truth;
};
void write_prediction_trace_csv(const std::vector<PredictionRecord>& records,
                                const std::filesystem::path& path);

// Write-temp-then-rename.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace hpnet
