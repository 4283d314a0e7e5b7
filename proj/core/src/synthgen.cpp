#include "daid/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "daid/errors.hpp"
#include "daid/rng.hpp"

namespace daid {

void ScmConfig::validate() const {
    if (n_train < 1 || n_test < 1) throw ConfigError("scm: dataset sizes must be positive");
    if (group_marginals.empty()) throw ConfigError("scm: need at least one attribute");
    for (const auto& m : group_marginals) {
        if (m.size() < 2) throw ConfigError("scm: attributes need at least two categories");
        double sum = 0.0;
        for (double p : m) {
            if (p < 0.0) throw ConfigError("scm: negative category probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("scm: attribute marginals sum to " + std::to_string(sum));
    }
    if (d_in < 1 + 2 * group_marginals.size())
        throw ConfigError("scm: d_in too small; need 1 + 2 axes per attribute");
    if (shortcut_strength < 0.0) throw ConfigError("scm: shortcut_strength must be >= 0");
    if (!(signal_strength > 0.0)) throw ConfigError("scm: signal_strength must be > 0");
    if (shift_angle < 0.0 || shift_angle > 1.5707963267948967)
        throw ConfigError("scm: shift_angle must lie in [0, pi/2]");
    if (label_noise < 0.0 || label_noise >= 0.5)
        throw ConfigError("scm: label_noise must lie in [0, 0.5)");
}

std::vector<std::vector<double>> coupling_table(const ScmConfig& cfg) {
    std::vector<std::vector<double>> c;
    for (const auto& m : cfg.group_marginals) {
        std::vector<std::size_t> order(m.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
        std::vector<double> row(m.size(), 0.0);
        row[order[0]] = 1.0;
        row[order[1]] = -1.0;
        c.push_back(std::move(row));
    }
    return c;
}

namespace {

AttributeSchema default_schema(const ScmConfig& cfg) {
    AttributeSchema schema;
    const bool canonical = cfg.group_marginals.size() == 2 &&
                           cfg.group_marginals[0].size() == 2 &&
                           cfg.group_marginals[1].size() == 3;
    if (canonical) {
        schema.names = {"gender", "race"};
        schema.cardinalities = {2, 3};
        schema.category_labels = {{"female", "male"}, {"white", "black", "asian"}};
    } else {
        for (std::size_t k = 0; k < cfg.group_marginals.size(); ++k) {
            schema.names.push_back("attr" + std::to_string(k));
            schema.cardinalities.push_back(
                static_cast<std::int32_t>(cfg.group_marginals[k].size()));
            std::vector<std::string> cats;
            for (std::size_t c = 0; c < cfg.group_marginals[k].size(); ++c)
                cats.push_back("c" + std::to_string(c));
            schema.category_labels.push_back(std::move(cats));
        }
    }
    schema.validate();
    return schema;
}

int draw_category(std::mt19937_64& rng, const std::vector<double>& probs) {
    const double u = runif01(rng);
    double acc = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        acc += probs[c];
        if (u < acc) return static_cast<int>(c);
    }
    return static_cast<int>(probs.size()) - 1;
}

Dataset make_dataset(const ScmConfig& cfg, const AttributeSchema& schema,
                     const std::vector<std::vector<double>>& couplings, std::int64_t n,
                     double angle, const std::string& domain, std::uint64_t domain_tag,
                     std::int64_t id_base) {
    Dataset ds;
    ds.schema = schema;
    ds.d_in = cfg.d_in;
    ds.samples.reserve(static_cast<std::size_t>(n));

    auto rng = rng_stream(cfg.seed, stream::kScm, domain_tag);
    const double cos_a = std::cos(angle);
    const double sin_a = std::sin(angle);
    const std::size_t k_attrs = cfg.group_marginals.size();

    for (std::int64_t i = 0; i < n; ++i) {
        Sample s;
        s.id = id_base + i;
        s.domain = domain;
        s.attrs.resize(k_attrs);
        for (std::size_t k = 0; k < k_attrs; ++k)
            s.attrs[k] = draw_category(rng, cfg.group_marginals[k]);

        const int y_true = runif01(rng) < 0.5 ? 0 : 1;
        const int flip = runif01(rng) < cfg.label_noise ? 1 : 0;
        s.label = y_true ^ flip;

        s.features.resize(cfg.d_in);
        for (auto& f : s.features) f = rnorm(rng);

        // Signal is one-sided (class 1 only); the shortcut flips with the
        // label so that a +-coupled group is helped and a --coupled group is
        // hurt by any learner that picks the shortcut up.
        s.features[0] += cfg.signal_strength * static_cast<double>(y_true);
        const double sign = y_true == 1 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < k_attrs; ++k) {
            const double c = couplings[k][static_cast<std::size_t>(s.attrs[k])];
            const double amp = cfg.shortcut_strength * c * sign;
            s.features[1 + 2 * k] += amp * cos_a;
            s.features[2 + 2 * k] += amp * sin_a;
        }
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

}  // namespace

ScmOutput generate(const ScmConfig& cfg) {
    cfg.validate();
    const AttributeSchema schema = default_schema(cfg);
    const auto couplings = coupling_table(cfg);

    ScmOutput out;
    out.train = make_dataset(cfg, schema, couplings, cfg.n_train, 0.0, "source", 0, 0);
    out.test_source =
        make_dataset(cfg, schema, couplings, cfg.n_test, 0.0, "source", 1, 1000000);
    out.test_shifted = make_dataset(cfg, schema, couplings, cfg.n_test, cfg.shift_angle,
                                    "shifted", 2, 2000000);
    return out;
}

GroundTruth describe(const ScmConfig& cfg) {
    cfg.validate();
    GroundTruth gt;
    gt.config = cfg;
    gt.expected_sign =
        cfg.shortcut_strength > 0.0 && cfg.shift_angle > 0.0 ? "positive" : "zero";
    gt.signal_dim = 0;
    for (std::size_t k = 0; k < cfg.group_marginals.size(); ++k) {
        gt.shortcut_dims.push_back(1 + 2 * k);
        gt.rotated_dims.push_back(2 + 2 * k);
    }
    gt.couplings = coupling_table(cfg);
    return gt;
}

}  // namespace daid
