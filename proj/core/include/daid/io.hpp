#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "daid/causal.hpp"
#include "daid/domain.hpp"
#include "daid/metrics.hpp"
#include "daid/model.hpp"
#include "daid/rebalance.hpp"
#include "daid/synthgen.hpp"

namespace daid {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Dataset CSV: header `id,label,domain,attr_<name>...,f_0..f_{d-1}`, with
/// attribute categories written as labels resolved through a sidecar
/// `<path>.schema.json`. Doubles use %.17g, so a save/load round trip is
/// value-exact.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Flat `section.key = value` config file. `#` comments and blank lines are
/// skipped; duplicate keys rejected. Readers mark keys consumed so callers
/// can reject unknown ones afterwards.
struct ConfigMap {
    std::map<std::string, std::string> values;
    mutable std::set<std::string> consumed;

    static ConfigMap parse(const std::string& text);
    static ConfigMap load(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::int64_t get_int(const std::string& key, std::int64_t def) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
    double get_double(const std::string& key, double def) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& def) const;
    std::vector<std::size_t> get_sizes(const std::string& key,
                                       const std::vector<std::size_t>& def) const;
    /// Throws ConfigError naming every key no getter consumed.
    void reject_unknown() const;
};

// --- JSON serialization (deterministic: sorted keys, round-trip doubles) ---

std::string moments_json(const SubgroupMoments& m);
SubgroupMoments moments_from_json(const std::string& text);
std::string propensity_json(const PropensityTable& t);
PropensityTable propensity_from_json(const std::string& text);

/// Checkpoint: parameter tensors (shapes + row-major arrays), the training
/// config, seed, and frozen evaluation statistics. History is not included;
/// it is saved separately as CSV.
void save_checkpoint(const TrainResult& model, const std::string& path);
TrainResult load_checkpoint(const std::string& path);

/// CSV: epoch,cls,attr,ortho,total,train_auc.
void save_history(const std::vector<EpochStats>& history, const std::string& path);
std::vector<EpochStats> load_history(const std::string& path);

std::string metric_report_json(const MetricReport& rep, const AttributeSchema& schema,
                               const MetricConfig& cfg);
/// Per-group rows (group key, label, auc, rate, n) for radar-style plots.
std::string radar_csv(const MetricReport& rep, const AttributeSchema& schema);

std::string ace_report_json(const AceReport& rep, const AttributeSchema& schema,
                            const std::vector<std::string>& dropped_dd = {});

std::string ground_truth_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const std::string& text);

}  // namespace daid
