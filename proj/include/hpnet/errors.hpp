#pragma once

#include <stdexcept>
#include <string>

namespace hpnet {

// Invalid NetworkConfig / ExperimentConfig values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (sequences, shapes, CSV files).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training diverged (non-finite cost) or was misconfigured at run time.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Weight-file serialization problems (version, corruption, I/O).
struct PersistenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hpnet
