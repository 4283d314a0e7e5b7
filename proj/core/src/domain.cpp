#include "daid/domain.hpp"

#include <cmath>
#include <set>

#include "daid/errors.hpp"

namespace daid {

void AttributeSchema::validate() const {
    if (names.empty()) throw ConfigError("schema needs at least one attribute");
    if (cardinalities.size() != names.size() || category_labels.size() != names.size())
        throw ConfigError("schema field lengths disagree");
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (cardinalities[k] < 1)
            throw ConfigError("attribute '" + names[k] + "' has cardinality < 1");
        if (category_labels[k].size() != static_cast<std::size_t>(cardinalities[k]))
            throw ConfigError("attribute '" + names[k] + "' label count != cardinality");
    }
}

std::string SubgroupKey::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string SubgroupKey::label(const AttributeSchema& schema) const {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += '|';
        out += schema.category_labels[i][static_cast<std::size_t>(values[i])];
    }
    return out;
}

void Dataset::validate() const {
    schema.validate();
    std::set<std::int64_t> ids;
    for (const Sample& s : samples) {
        if (!ids.insert(s.id).second)
            throw SchemaError("duplicate sample id " + std::to_string(s.id));
        if (s.features.size() != d_in)
            throw ShapeMismatch("sample " + std::to_string(s.id) + " has " +
                                std::to_string(s.features.size()) + " features, expected " +
                                std::to_string(d_in));
        for (double v : s.features)
            if (!std::isfinite(v))
                throw SchemaError("non-finite feature in sample " + std::to_string(s.id));
        if (s.label != 0 && s.label != 1)
            throw SchemaError("label of sample " + std::to_string(s.id) + " not in {0,1}");
        if (s.attrs.size() != schema.num_attributes())
            throw SchemaError("sample " + std::to_string(s.id) + " has wrong attribute count");
        for (std::size_t k = 0; k < s.attrs.size(); ++k)
            if (s.attrs[k] < 0 || s.attrs[k] >= schema.cardinalities[k])
                throw SchemaError("sample " + std::to_string(s.id) + " attribute '" +
                                  schema.names[k] + "' index out of range");
    }
}

SubgroupKey subgroup_of(const Sample& sample) {
    return SubgroupKey(sample.attrs);
}

std::map<SubgroupKey, std::vector<std::int32_t>> partition_by_subgroup(const Dataset& ds) {
    std::map<SubgroupKey, std::vector<std::int32_t>> buckets;
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        buckets[subgroup_of(ds.samples[i])].push_back(static_cast<std::int32_t>(i));
    return buckets;
}

}  // namespace daid
