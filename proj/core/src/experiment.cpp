#include "daid/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <thread>

#include "daid/errors.hpp"
#include "daid/rng.hpp"

namespace daid {

RegimeFlags RegimeFlags::from_index(std::size_t i) {
    RegimeFlags f;
    f.reweight = (i & 1) != 0;
    f.normalize = (i & 2) != 0;
    f.attr = (i & 4) != 0;
    f.ortho = (i & 8) != 0;
    return f;
}

std::size_t RegimeFlags::index() const {
    return (reweight ? 1u : 0u) | (normalize ? 2u : 0u) | (attr ? 4u : 0u) | (ortho ? 8u : 0u);
}

std::string RegimeFlags::name() const {
    std::string out;
    const auto tag = [&out](bool on, const char* t) {
        if (!on) return;
        if (!out.empty()) out += '+';
        out += t;
    };
    tag(reweight, "rw");
    tag(normalize, "sn");
    tag(attr, "at");
    tag(ortho, "or");
    return out.empty() ? "base" : out;
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t n) {
    std::vector<std::uint64_t> out(n);
    for (std::size_t s = 0; s < n; ++s)
        out[s] = s == 0 ? seed : mix64(mix64(seed) ^ static_cast<std::uint64_t>(s));
    return out;
}

std::size_t threads_from_env() {
    if (const char* env = std::getenv("DAID_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError(std::string("DAID_THREADS must be a positive integer, got `") +
                              env + "`");
        return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

AblationGridResult run_ablation_grid(const Dataset& train_ds, const Dataset& test_source,
                                     const Dataset& test_shifted, const TrainConfig& base,
                                     const MetricConfig& metric, std::size_t n_seeds,
                                     std::uint64_t seed, std::size_t threads) {
    if (n_seeds == 0) throw ConfigError("ablation grid needs at least one seed");
    if (threads == 0) threads = threads_from_env();

    AblationGridResult grid;
    grid.seeds = replicate_seeds(seed, n_seeds);
    grid.regimes.resize(16);
    for (std::size_t i = 0; i < 16; ++i) {
        grid.regimes[i].flags = RegimeFlags::from_index(i);
        grid.regimes[i].name = grid.regimes[i].flags.name();
        grid.regimes[i].cells.resize(n_seeds);
    }

    const std::size_t n_jobs = 16 * n_seeds;
    std::vector<std::exception_ptr> errors(n_jobs);
    std::atomic<std::size_t> next{0};

    const auto worker = [&]() {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= n_jobs) return;
            const std::size_t regime = job / n_seeds;
            const std::size_t rep = job % n_seeds;
            try {
                TrainConfig cfg = base;
                const RegimeFlags f = grid.regimes[regime].flags;
                cfg.reweight = f.reweight;
                cfg.normalize = f.normalize;
                cfg.attr = f.attr;
                cfg.ortho = f.ortho;
                cfg.seed = grid.seeds[rep];
                const TrainResult model = train(train_ds, cfg);
                RegimeCell& cell = grid.regimes[regime].cells[rep];
                cell.source = evaluate(test_source, score_dataset(model, test_source), metric);
                cell.shifted = evaluate(test_shifted, score_dataset(model, test_shifted), metric);
            } catch (...) {
                errors[job] = std::current_exception();
            }
        }
    };

    if (threads <= 1 || n_jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const std::size_t n_threads = threads < n_jobs ? threads : n_jobs;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (auto& regime : grid.regimes) {
        double auc_s = 0.0, skew_s = 0.0, auc_d = 0.0, skew_d = 0.0;
        for (const auto& cell : regime.cells) {
            auc_s += cell.source.auc_overall;
            skew_s += cell.source.skew;
            auc_d += cell.shifted.auc_overall;
            skew_d += cell.shifted.skew;
        }
        const double n = static_cast<double>(regime.cells.size());
        regime.auc_source_mean = auc_s / n;
        regime.skew_source_mean = skew_s / n;
        regime.auc_shifted_mean = auc_d / n;
        regime.skew_shifted_mean = skew_d / n;
    }
    return grid;
}

std::string ablation_csv(const AblationGridResult& grid) {
    const auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string out =
        "regime,reweight,normalize,attr,ortho,n_seeds,auc_source,skew_source,auc_shifted,"
        "skew_shifted\n";
    for (const auto& r : grid.regimes) {
        out += r.name;
        out += r.flags.reweight ? ",1" : ",0";
        out += r.flags.normalize ? ",1" : ",0";
        out += r.flags.attr ? ",1" : ",0";
        out += r.flags.ortho ? ",1" : ",0";
        out += "," + std::to_string(r.cells.size());
        out += "," + fmt(r.auc_source_mean) + "," + fmt(r.skew_source_mean) + "," +
               fmt(r.auc_shifted_mean) + "," + fmt(r.skew_shifted_mean) + "\n";
    }
    return out;
}

}  // namespace daid
