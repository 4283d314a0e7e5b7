#include "daid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "daid/errors.hpp"

namespace daid {

RateKind rate_kind_from_string(const std::string& s) {
    if (s == "fpr@tau") return RateKind::FprAtTau;
    if (s == "fnr@tau") return RateKind::FnrAtTau;
    if (s == "auc-complement") return RateKind::AucComplement;
    throw ConfigError("unknown rate kind: " + s);
}

std::string to_string(RateKind k) {
    switch (k) {
        case RateKind::FprAtTau: return "fpr@tau";
        case RateKind::FnrAtTau: return "fnr@tau";
        case RateKind::AucComplement: return "auc-complement";
    }
    throw ConfigError("bad RateKind value");
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ShapeMismatch("auc: scores and labels differ in length");
    const std::size_t n = scores.size();
    std::int64_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw ConfigError("auc: label must be 0 or 1");
        if (!std::isfinite(scores[i]))
            throw ConfigError("auc: non-finite score");
        n_pos += labels[i];
    }
    const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateLabels("auc: needs both classes, got " +
                               std::to_string(n_pos) + " positive of " +
                               std::to_string(n) + " total");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    // Sum of positive-class ranks with ties sharing the average rank.
    // Average ranks over a tie block are half-integers, so the sum stays
    // exact in double and matches pair counting bit for bit.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::map<SubgroupKey, double> subgroup_rates(const std::vector<double>& scores,
                                             const std::vector<int>& labels,
                                             const std::vector<SubgroupKey>& groups,
                                             RateKind kind, double tau) {
    if (scores.size() != labels.size() || scores.size() != groups.size())
        throw ShapeMismatch("subgroup_rates: input lengths differ");

    struct Bucket {
        std::vector<double> scores;
        std::vector<int> labels;
    };
    std::map<SubgroupKey, Bucket> buckets;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto& b = buckets[groups[i]];
        b.scores.push_back(scores[i]);
        b.labels.push_back(labels[i]);
    }

    std::map<SubgroupKey, double> out;
    for (auto& [key, b] : buckets) {
        switch (kind) {
            case RateKind::FprAtTau: {
                std::int64_t n0 = 0, fp = 0;
                for (std::size_t i = 0; i < b.scores.size(); ++i) {
                    if (b.labels[i] != 0) continue;
                    ++n0;
                    if (b.scores[i] > tau) ++fp;
                }
                if (n0 > 0) out[key] = static_cast<double>(fp) / static_cast<double>(n0);
                break;
            }
            case RateKind::FnrAtTau: {
                std::int64_t n1 = 0, fn = 0;
                for (std::size_t i = 0; i < b.scores.size(); ++i) {
                    if (b.labels[i] != 1) continue;
                    ++n1;
                    if (b.scores[i] <= tau) ++fn;
                }
                if (n1 > 0) out[key] = static_cast<double>(fn) / static_cast<double>(n1);
                break;
            }
            case RateKind::AucComplement:
                out[key] = 1.0 - auc(b.scores, b.labels);
                break;
        }
    }
    return out;
}

double skew(const std::map<SubgroupKey, double>& rates, double eps) {
    if (rates.empty()) throw EmptyInput("skew: no rates");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [key, r] : rates) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return std::log((hi + eps) / (lo + eps));
}

MetricReport evaluate(const Dataset& ds, const std::vector<double>& scores,
                      const MetricConfig& config) {
    if (scores.size() != ds.samples.size())
        throw ShapeMismatch("evaluate: score count does not match dataset");
    if (ds.samples.empty()) throw EmptyDataset("evaluate: empty dataset");

    std::vector<int> labels(ds.samples.size());
    std::vector<SubgroupKey> groups(ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        labels[i] = ds.samples[i].label;
        groups[i] = subgroup_of(ds.samples[i]);
    }

    MetricReport rep;
    rep.auc_overall = auc(scores, labels);
    rep.rate_by_group = subgroup_rates(scores, labels, groups, config.rate_kind, config.tau);
    rep.skew = skew(rep.rate_by_group, config.skew_eps);

    const auto parts = partition_by_subgroup(ds);
    for (const auto& [key, idx] : parts) {
        rep.n_by_group[key] = static_cast<std::int64_t>(idx.size());
        std::vector<double> s;
        std::vector<int> l;
        s.reserve(idx.size());
        l.reserve(idx.size());
        bool has0 = false, has1 = false;
        for (auto i : idx) {
            s.push_back(scores[static_cast<std::size_t>(i)]);
            l.push_back(labels[static_cast<std::size_t>(i)]);
            (l.back() == 1 ? has1 : has0) = true;
        }
        if (has0 && has1) rep.auc_by_group[key] = auc(s, l);
    }
    return rep;
}

}  // namespace daid
