#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daid/causal.hpp"
#include "daid/io.hpp"
#include "daid/metrics.hpp"
#include "daid/model.hpp"
#include "daid/synthgen.hpp"

namespace daid {

/// Every tunable of the pipeline, parsed from a flat `section.key = value`
/// file. Unknown keys are rejected; the top-level `seed` is mirrored into the
/// training and generator blocks so one value drives the whole run.
struct ExperimentConfig {
    TrainConfig train;
    ScmConfig scm;
    MetricConfig metric;
    double fairness_threshold = 0.5;
    std::int64_t bootstrap_b = 1000;
    double bootstrap_alpha = 0.05;
    std::vector<McPreset> mc_grid;  // defaults to default_mc_grid()
    std::size_t ablate_seeds = 1;
    std::uint64_t seed = 0;

    ExperimentConfig();

    static ExperimentConfig from_map(const ConfigMap& cfg);
    static ExperimentConfig from_file(const std::string& path);
    void set_seed(std::uint64_t s);  // mirrors into train.seed and scm.seed
    void validate() const;
    /// Full key set in fixed order, %.17g numbers: reparses to an equal config.
    std::string to_text() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Entry point behind main(): args are argv[1..]. Writes artifacts under
/// --out, prints a one-line summary, and maps failures to exit codes
/// (0 ok, 2 config, 3 data, 4 numeric divergence).
int run_command(const std::vector<std::string>& args);

}  // namespace daid
