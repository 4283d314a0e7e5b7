#include "daid/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "daid/errors.hpp"

namespace daid {

PropensityTable fit_propensity(const Dataset& ds, bool joint_propensity) {
    if (ds.samples.empty()) throw EmptyDataset("fit_propensity: empty dataset");
    const std::size_t n = ds.samples.size();
    const std::size_t k_attrs = ds.schema.num_attributes();

    PropensityTable table;
    table.use_joint = joint_propensity;
    table.marginals.resize(k_attrs);
    for (std::size_t k = 0; k < k_attrs; ++k)
        table.marginals[k].assign(static_cast<std::size_t>(ds.schema.cardinalities[k]), 0.0);

    std::map<SubgroupKey, std::int64_t> joint_counts;
    for (const auto& s : ds.samples) {
        for (std::size_t k = 0; k < k_attrs; ++k)
            table.marginals[k][static_cast<std::size_t>(s.attrs[k])] += 1.0;
        ++joint_counts[subgroup_of(s)];
    }
    for (auto& m : table.marginals)
        for (auto& c : m) c /= static_cast<double>(n);
    for (const auto& [key, cnt] : joint_counts)
        table.joint[key] = static_cast<double>(cnt) / static_cast<double>(n);

    table.weights.reserve(n);
    for (const auto& s : ds.samples)
        table.weights.push_back(weight_of(table, s, /*normalize=*/false));

    // Mean weight accumulated per joint cell in key order: the weight is a
    // function of the attribute tuple alone, so the sum (and therefore every
    // normalized weight) is invariant to sample order.
    double sum = 0.0;
    for (const auto& [key, cnt] : joint_counts) {
        Sample probe;
        probe.attrs = key.values;
        sum += static_cast<double>(cnt) * weight_of(table, probe, /*normalize=*/false);
    }
    table.normalization = sum / static_cast<double>(n);
    return table;
}

namespace {

double smallest_positive(const std::vector<double>& v) {
    double best = std::numeric_limits<double>::infinity();
    for (double x : v)
        if (x > 0.0) best = std::min(best, x);
    return best;
}

}  // namespace

double weight_of(const PropensityTable& table, const Sample& sample, bool normalize) {
    double prob = 1.0;
    if (table.use_joint) {
        const auto key = subgroup_of(sample);
        auto it = table.joint.find(key);
        if (it != table.joint.end() && it->second > 0.0) {
            prob = it->second;
        } else {
            if (!table.allow_fallback)
                throw UnseenCategory("weight_of: subgroup " + key.to_string() +
                                     " absent from fitting data");
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [k, f] : table.joint)
                if (f > 0.0) best = std::min(best, f);
            prob = best;
        }
    } else {
        if (sample.attrs.size() != table.marginals.size())
            throw ShapeMismatch("weight_of: attribute count mismatch");
        for (std::size_t k = 0; k < table.marginals.size(); ++k) {
            const auto c = static_cast<std::size_t>(sample.attrs[k]);
            double p = c < table.marginals[k].size() ? table.marginals[k][c] : 0.0;
            if (p <= 0.0) {
                if (!table.allow_fallback)
                    throw UnseenCategory("weight_of: attribute " + std::to_string(k) +
                                         " category " + std::to_string(sample.attrs[k]) +
                                         " unseen at fit time");
                p = smallest_positive(table.marginals[k]);
            }
            prob *= p;
        }
    }
    const double w = 1.0 / prob;
    return normalize ? w / table.normalization : w;
}

SubgroupMoments fit_moments(const std::vector<std::vector<double>>& features,
                            const std::vector<SubgroupKey>& groups, double eps) {
    if (features.empty()) throw EmptyInput("fit_moments: no rows");
    if (features.size() != groups.size())
        throw ShapeMismatch("fit_moments: rows and groups differ in length");
    const std::size_t d = features[0].size();
    for (const auto& f : features)
        if (f.size() != d) throw ShapeMismatch("fit_moments: ragged feature rows");
    if (eps <= 0.0) throw ConfigError("fit_moments: eps must be positive");

    SubgroupMoments m;
    m.eps = eps;

    std::map<SubgroupKey, std::int64_t> counts;
    for (std::size_t i = 0; i < features.size(); ++i) {
        auto& mu = m.mu[groups[i]];
        if (mu.empty()) mu.assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) mu[j] += features[i][j];
        ++counts[groups[i]];
    }
    for (auto& [key, mu] : m.mu)
        for (auto& x : mu) x /= static_cast<double>(counts[key]);

    for (auto& [key, mu] : m.mu) m.var[key].assign(d, 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& mu = m.mu[groups[i]];
        auto& var = m.var[groups[i]];
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = features[i][j] - mu[j];
            var[j] += dlt * dlt;
        }
    }
    for (auto& [key, var] : m.var)
        for (auto& x : var) x /= static_cast<double>(counts[key]);

    m.fallback_mu.assign(d, 0.0);
    m.fallback_var.assign(d, 0.0);
    for (const auto& f : features)
        for (std::size_t j = 0; j < d; ++j) m.fallback_mu[j] += f[j];
    for (auto& x : m.fallback_mu) x /= static_cast<double>(features.size());
    for (const auto& f : features)
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = f[j] - m.fallback_mu[j];
            m.fallback_var[j] += dlt * dlt;
        }
    for (auto& x : m.fallback_var) x /= static_cast<double>(features.size());
    return m;
}

std::vector<double> normalize(const SubgroupMoments& moments, const std::vector<double>& h,
                              const SubgroupKey& group) {
    const auto it = moments.mu.find(group);
    const std::vector<double>& mu = it != moments.mu.end() ? it->second : moments.fallback_mu;
    const std::vector<double>& var =
        it != moments.mu.end() ? moments.var.at(group) : moments.fallback_var;
    if (h.size() != mu.size()) throw ShapeMismatch("normalize: vector length mismatch");

    std::vector<double> out(h.size());
    for (std::size_t j = 0; j < h.size(); ++j)
        out[j] = (h[j] - mu[j]) / std::sqrt(var[j] + moments.eps);
    return out;
}

}  // namespace daid
