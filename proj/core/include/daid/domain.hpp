#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace daid {

/// Describes the sensitive-attribute layout of a dataset: K named categorical
/// attributes, each with an ordered list of category labels. Samples store
/// category *indices*; labels live only here.
struct AttributeSchema {
    std::vector<std::string> names;
    std::vector<int> cardinalities;
    std::vector<std::vector<std::string>> category_labels;

    std::size_t num_attributes() const { return names.size(); }

    /// Throws ConfigError unless K >= 1, every cardinality >= 1 and the label
    /// lists match the cardinalities.
    void validate() const;

    bool operator==(const AttributeSchema&) const = default;
};

/// One labeled feature vector with demographic attributes and a domain tag.
struct Sample {
    std::int64_t id = 0;
    std::vector<double> features;
    int label = 0;  // 1 = fake
    std::vector<int> attrs;
    std::string domain = "source";

    bool operator==(const Sample&) const = default;
};

/// K-tuple of attribute category indices identifying one demographic
/// intersection. Ordered lexicographically so iteration over subgroups is
/// deterministic.
struct SubgroupKey {
    std::vector<int> values;

    SubgroupKey() = default;
    explicit SubgroupKey(std::vector<int> v) : values(std::move(v)) {}
    SubgroupKey(std::initializer_list<int> v) : values(v) {}

    auto operator<=>(const SubgroupKey&) const = default;

    /// "1|2" style key for serialization.
    std::string to_string() const;

    /// Human-readable label, e.g. "female|asian".
    std::string label(const AttributeSchema& schema) const;
};

struct Dataset {
    AttributeSchema schema;
    std::vector<Sample> samples;
    std::size_t d_in = 0;

    std::size_t size() const { return samples.size(); }

    /// Checks every invariant: samples conform to schema and d_in, ids
    /// unique, labels binary, features finite. Throws on violation.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Projects a sample onto its demographic intersection.
SubgroupKey subgroup_of(const Sample& sample);

/// Buckets sample indices by subgroup. Exhaustive and disjoint; keys iterate
/// in lexicographic order.
std::map<SubgroupKey, std::vector<std::int32_t>> partition_by_subgroup(const Dataset& ds);

}  // namespace daid
