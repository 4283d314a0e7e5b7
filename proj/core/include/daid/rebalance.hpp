#pragma once

#include <map>
#include <vector>

#include "daid/domain.hpp"

namespace daid {

/// Empirical propensities fitted on a training set, plus the derived
/// inverse-propensity weight per training sample.
struct PropensityTable {
    // marginals[k][c] = empirical frequency of category c for attribute k.
    std::vector<std::vector<double>> marginals;
    // Joint subgroup frequencies, used only when use_joint is set.
    std::map<SubgroupKey, double> joint;
    bool use_joint = false;
    // Per-sample weight over the fitting set, in dataset order.
    std::vector<double> weights;
    // Mean weight over the fitting set; divisor for normalized weights.
    double normalization = 1.0;
    // Zero-frequency category at weight time: substitute the smallest
    // observed frequency instead of throwing.
    bool allow_fallback = true;

    bool operator==(const PropensityTable&) const = default;
};

/// Per-subgroup feature moments with a pooled fallback for unseen groups.
struct SubgroupMoments {
    std::map<SubgroupKey, std::vector<double>> mu;
    std::map<SubgroupKey, std::vector<double>> var;  // population variance
    double eps = 1e-5;
    std::vector<double> fallback_mu;
    std::vector<double> fallback_var;

    bool operator==(const SubgroupMoments&) const = default;
};

/// Fits marginal (default) or joint subgroup frequencies and computes the
/// weight w_i = 1 / prod_k P(attr_k = s_i_k) for every sample.
PropensityTable fit_propensity(const Dataset& ds, bool joint_propensity = false);

/// Weight for one sample under a fitted table. With normalize the result is
/// divided by the mean fitting-set weight, so training weights average 1.
double weight_of(const PropensityTable& table, const Sample& sample, bool normalize);

/// Per-group population mean and variance, plus pooled fallback moments.
SubgroupMoments fit_moments(const std::vector<std::vector<double>>& features,
                            const std::vector<SubgroupKey>& groups, double eps = 1e-5);

/// (h - mu_g) / sqrt(var_g + eps) elementwise; pooled moments for unseen groups.
std::vector<double> normalize(const SubgroupMoments& moments, const std::vector<double>& h,
                              const SubgroupKey& group);

}  // namespace daid
