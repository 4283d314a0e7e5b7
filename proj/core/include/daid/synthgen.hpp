#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daid/domain.hpp"

namespace daid {

/// Structural-model generator settings. The planted mechanism: one feature
/// axis carries the label signal in both domains; each attribute gets one
/// axis carrying a label-coupled shortcut whose direction rotates by
/// shift_angle in the shifted domain, so training-time shortcut weight turns
/// into pure variance out of domain.
struct ScmConfig {
    std::int64_t n_train = 4000;
    std::int64_t n_test = 2000;
    std::size_t d_in = 16;
    // Per-attribute category probabilities; index 0 = gender, 1 = race by
    // default. Controls subgroup imbalance and so the propensity weights.
    std::vector<std::vector<double>> group_marginals = {{0.69, 0.31}, {0.35, 0.33, 0.32}};
    double shortcut_strength = 1.0;
    double signal_strength = 1.0;
    double shift_angle = 1.5707963267948966;  // radians, [0, pi/2]
    double label_noise = 0.05;
    std::uint64_t seed = 0;

    void validate() const;

    bool operator==(const ScmConfig&) const = default;
};

struct ScmOutput {
    Dataset train;
    Dataset test_source;
    Dataset test_shifted;
};

/// Planted parameters plus the analytically known qualitative effect.
struct GroundTruth {
    ScmConfig config;
    std::string expected_sign;  // "positive" when shortcut and shift both > 0, else "zero"
    std::size_t signal_dim = 0;
    std::vector<std::size_t> shortcut_dims;  // source-domain shortcut axes
    std::vector<std::size_t> rotated_dims;   // their shifted-domain partners
    // Per attribute, per category: the label-coupling sign. Zero-sum with
    // equal category weights, so inverse-propensity reweighting makes the
    // shortcut exactly uninformative.
    std::vector<std::vector<double>> couplings;
};

ScmOutput generate(const ScmConfig& cfg);
GroundTruth describe(const ScmConfig& cfg);

/// The coupling signs used by generate: per attribute, +1 for the most
/// frequent category, -1 for the next, 0 for the rest.
std::vector<std::vector<double>> coupling_table(const ScmConfig& cfg);

}  // namespace daid
