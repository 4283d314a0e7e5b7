#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daid/domain.hpp"
#include "daid/metrics.hpp"
#include "daid/model.hpp"

namespace daid {

/// One cell of the 2^4 mechanism grid: which of the four training mechanisms
/// are enabled.
struct RegimeFlags {
    bool reweight = false;
    bool normalize = false;
    bool attr = false;
    bool ortho = false;

    /// Index encoding: bit 0 reweight, bit 1 normalize, bit 2 attr, bit 3 ortho.
    static RegimeFlags from_index(std::size_t i);
    std::size_t index() const;
    /// "base" when all off, else "+"-joined tags, e.g. "rw+sn+at+or".
    std::string name() const;

    bool operator==(const RegimeFlags&) const = default;
};

/// Evaluation of one trained cell on both test domains.
struct RegimeCell {
    MetricReport source;
    MetricReport shifted;
};

struct RegimeResult {
    RegimeFlags flags;
    std::string name;
    std::vector<RegimeCell> cells;  // one per replicate seed, in replicate_seeds order
    double auc_source_mean = 0.0;
    double skew_source_mean = 0.0;
    double auc_shifted_mean = 0.0;
    double skew_shifted_mean = 0.0;
};

struct AblationGridResult {
    std::vector<RegimeResult> regimes;  // all 16, in index order
    std::vector<std::uint64_t> seeds;
};

/// Replicate s trains with seeds[s]; seeds[0] == seed so a single-replicate
/// grid row is reproducible by one plain training run at the same seed.
/// Every regime uses the same seed list (paired comparisons).
std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t n);

/// DAID_THREADS when set (positive integer), else hardware concurrency, at least 1.
std::size_t threads_from_env();

/// Trains the 16 regimes x n_seeds replicates. Cells run concurrently up to
/// `threads` (0 means threads_from_env()); each cell is single-threaded and
/// results land by index, so the output is independent of scheduling.
AblationGridResult run_ablation_grid(const Dataset& train_ds, const Dataset& test_source,
                                     const Dataset& test_shifted, const TrainConfig& base,
                                     const MetricConfig& metric, std::size_t n_seeds,
                                     std::uint64_t seed, std::size_t threads = 0);

/// Summary CSV: one row per regime, seed-mean AUC and skew per domain.
std::string ablation_csv(const AblationGridResult& grid);

}  // namespace daid
