#pragma once

// Central finite-difference gradient check shared by the unit and acceptance
// suites. Covers a 6-sample batch with mixed labels and groups, generic head
// values, and optional attribute/ortho/normalize terms.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "daid/model.hpp"
#include "daid/rebalance.hpp"
#include "daid/rng.hpp"
#include "oracles.hpp"

namespace testutil {

inline std::vector<double*> param_ptrs(daid::ModelParams& p) {
    std::vector<double*> out;
    for (auto& l : p.encoder) {
        for (auto& v : l.w.data) out.push_back(&v);
        for (auto& v : l.b) out.push_back(&v);
    }
    for (auto& v : p.proj.data) out.push_back(&v);
    for (auto& v : p.head_w) out.push_back(&v);
    out.push_back(&p.head_b);
    return out;
}

inline std::vector<const double*> grad_ptrs(const daid::Gradients& g) {
    std::vector<const double*> out;
    for (auto& l : g.encoder) {
        for (auto& v : l.w.data) out.push_back(&v);
        for (auto& v : l.b) out.push_back(&v);
    }
    for (auto& v : g.proj.data) out.push_back(&v);
    for (auto& v : g.head_w) out.push_back(&v);
    out.push_back(&g.head_b);
    return out;
}

struct GradRegime {
    const char* name;
    bool attr;
    bool ortho;
    bool normalize;
};

inline const GradRegime kGradRegimes[] = {
    {"plain", false, false, false},
    {"attr", true, false, false},
    {"ortho", false, true, false},
    {"attr+ortho", true, true, false},
    {"attr+ortho+normalize", true, true, true},
};

// Worst relative finite-difference error across every parameter coordinate.
inline double gradcheck_max_rel_error(std::uint64_t seed, const GradRegime& regime) {
    using namespace daid;
    auto rng = rng_stream(seed, stream::kInit);
    const std::size_t d_in = 3;

    std::vector<Sample> samples;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> x(d_in);
        for (auto& v : x) v = rnorm(rng);
        samples.push_back(make_sample(i, x, i % 2, {i % 3 == 0 ? 0 : 1}));
    }
    std::vector<const Sample*> batch;
    for (const auto& s : samples) batch.push_back(&s);
    std::vector<double> weights;
    for (int i = 0; i < 6; ++i) weights.push_back(0.5 + runif01(rng));

    ModelParams params = init_params(d_in, {4}, 3, 2, rng);
    // The head starts at zero; give it generic values so its path is active.
    for (auto& v : params.head_w) v = rnorm(rng);
    params.head_b = rnorm(rng);

    SubgroupMoments moments;
    const SubgroupMoments* mom = nullptr;
    if (regime.normalize) {
        std::vector<std::vector<double>> latents;
        std::vector<SubgroupKey> groups;
        for (const auto& s : samples) {
            latents.push_back(encode(params, s.features));
            groups.push_back(subgroup_of(s));
        }
        moments = fit_moments(latents, groups);
        mom = &moments;
    }

    BatchOptions opts;
    opts.use_attr = regime.attr;
    opts.use_ortho = regime.ortho;
    opts.lambda_attr = 0.7;
    opts.lambda_ortho = 0.2;
    const std::uint64_t pair_seed = 1234;

    Gradients grads = Gradients::zeros_like(params);
    backward(params, batch, weights, mom, opts, grads, pair_seed);

    const auto ptrs = param_ptrs(params);
    const auto gptr = grad_ptrs(grads);
    if (ptrs.size() != gptr.size())
        throw std::logic_error("gradcheck: parameter/gradient count mismatch");

    const double step = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        const double saved = *ptrs[i];
        *ptrs[i] = saved + step;
        const double up = total_loss(params, batch, weights, mom, opts, pair_seed).total;
        *ptrs[i] = saved - step;
        const double dn = total_loss(params, batch, weights, mom, opts, pair_seed).total;
        *ptrs[i] = saved;
        const double fd = (up - dn) / (2.0 * step);
        const double ga = *gptr[i];
        const double rel = std::abs(ga - fd) / std::max(1e-8, std::abs(ga) + std::abs(fd));
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace testutil
