#pragma once

#include <map>
#include <string>
#include <vector>

#include "daid/domain.hpp"

namespace daid {

/// Which per-group rate feeds the skew metric.
enum class RateKind {
    FprAtTau,       // fraction of real (label 0) samples scored above tau
    FnrAtTau,       // fraction of fake (label 1) samples scored at or below tau
    AucComplement,  // 1 - per-group AUC
};

RateKind rate_kind_from_string(const std::string& s);
std::string to_string(RateKind k);

struct MetricConfig {
    RateKind rate_kind = RateKind::FprAtTau;
    double tau = 0.5;
    double skew_eps = 1e-6;

    bool operator==(const MetricConfig&) const = default;
};

struct MetricReport {
    double auc_overall = 0.0;
    std::map<SubgroupKey, double> auc_by_group;
    std::map<SubgroupKey, double> rate_by_group;
    double skew = 0.0;
    std::map<SubgroupKey, std::int64_t> n_by_group;
};

/// Mann-Whitney AUC with ties counted 0.5, computed by sorting. Exactly
/// equal to brute-force pair counting. Throws DegenerateLabels when labels
/// are all-positive or all-negative.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Per-group rate of the requested kind. Groups for which the rate is
/// undefined because the relevant class is absent are omitted from the map;
/// AucComplement instead throws DegenerateLabels for single-class groups.
std::map<SubgroupKey, double> subgroup_rates(const std::vector<double>& scores,
                                             const std::vector<int>& labels,
                                             const std::vector<SubgroupKey>& groups,
                                             RateKind kind, double tau = 0.5);

/// log((max rate + eps) / (min rate + eps)); zero when all rates equal.
double skew(const std::map<SubgroupKey, double>& rates, double eps);

/// Full report over one dataset: overall AUC, per-group AUC, the configured
/// rate per group, skew over those rates, and group counts.
MetricReport evaluate(const Dataset& ds, const std::vector<double>& scores,
                      const MetricConfig& config = {});

}  // namespace daid
