#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "daid/domain.hpp"
#include "daid/model.hpp"

namespace daid {

/// Directed acyclic graph over named nodes. Acyclicity, self-loops, and
/// duplicate edges are checked at construction.
struct Dag {
    std::vector<std::string> names;
    std::map<std::string, int> index;
    std::vector<std::vector<int>> children;
    std::vector<std::vector<int>> parents;
    std::vector<std::pair<int, int>> edges;

    static Dag from_edges(const std::vector<std::string>& nodes,
                          const std::vector<std::pair<std::string, std::string>>& edge_list);
    /// Text format: one `edge A -> B` per edge; optional `node X` lines;
    /// blank lines and `#` comments ignored.
    static Dag parse(const std::string& text);
    std::string to_text() const;

    int node_id(const std::string& name) const;  // throws UnknownNode
    std::size_t size() const { return names.size(); }
};

/// All nodes reachable from x along directed edges, excluding x itself.
std::set<int> descendants(const Dag& g, int x);

/// True iff z blocks every undirected path between x and y (standard
/// chain/fork/collider rules), via the ancestor-marking reachability
/// algorithm rather than path enumeration.
bool d_separated(const Dag& g, const std::string& x, const std::string& y,
                 const std::set<std::string>& z);
bool d_separated_ids(const Dag& g, int x, int y, const std::set<int>& z);

struct BackdoorResult {
    bool satisfied = false;
    int failed_condition = 0;  // 0 = none, 1 = descendant in z, 2 = unblocked path
    std::string witness;
};

/// Checks (1) no member of z descends from x and (2) z d-separates x and y
/// once every edge out of x is removed. On failure names the offending
/// descendant or one unblocked back-door path.
BackdoorResult backdoor_criterion(const Dag& g, const std::string& x, const std::string& y,
                                  const std::set<std::string>& z);

struct Stratum {
    SubgroupKey dd;
    std::string mc;
    double weight = 0.0;
};

struct StratumId {
    SubgroupKey dd;
    std::string mc;
    auto operator<=>(const StratumId&) const = default;
    bool operator==(const StratumId&) const = default;
};

/// outcome keyed by (treatment level f, stratum).
using OutcomeTable = std::map<std::pair<int, StratumId>, double>;

struct StratumOutcome {
    Stratum stratum;
    double f0 = 0.0;
    double f1 = 0.0;
    double diff = 0.0;
};

struct AceEstimate {
    double ace = 0.0;
    double mu0 = 0.0;
    std::vector<StratumOutcome> per_stratum;
};

struct AceReport {
    double ace = 0.0;
    double mu0 = 0.0;
    std::vector<StratumOutcome> per_stratum;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    std::int64_t B = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    // Replicates that needed a redraw because a resampled stratum lost a
    // class, and buckets that were finally carried from full data.
    std::int64_t n_redrawn = 0;
    std::int64_t n_forced_identity = 0;
};

/// Weighted stratum sum of outcomes at level f; the adjustment estimate of
/// the interventional outcome.
double backdoor_adjust(const OutcomeTable& outcomes, const std::vector<Stratum>& strata, int f);

/// adjust(1) - adjust(0), with mu0 and the per-stratum table.
AceEstimate ace(const OutcomeTable& outcomes, const std::vector<Stratum>& strata);

/// Encoder capacity preset standing in for model-capacity levels.
struct McPreset {
    std::string name;
    std::vector<std::size_t> hidden;

    bool operator==(const McPreset&) const = default;
};

std::vector<McPreset> default_mc_grid();

struct InterventionResult {
    std::vector<Stratum> strata;  // kept (dd, mc) cells; weights sum to 1
    OutcomeTable outcomes;
    AceEstimate estimate;
    std::vector<std::string> mc_names;
    // scores[m][f] = per-test-sample scores of the model trained at capacity
    // m and treatment f. Kept so bootstrap replicates never retrain.
    std::vector<std::array<std::vector<double>, 2>> scores;
    std::vector<int> test_labels;
    // Test indices per kept demographic bucket, and each bucket's empirical
    // frequency (renormalized if degenerate buckets were dropped).
    std::map<SubgroupKey, std::vector<std::int32_t>> dd_index;
    std::map<SubgroupKey, double> dd_weight;
    std::vector<std::string> dropped_dd;  // single-class buckets, logged
};

/// For each capacity preset and each f in {0,1}, trains one model (f=0 plain
/// cross-entropy, f=1 inverse-propensity reweighted) with paired seeds, then
/// fills the per-stratum test-AUC outcome table. base supplies epochs, lr,
/// and the other optimizer settings; its regime flags and seed are ignored.
InterventionResult run_intervention_experiment(const Dataset& train_ds, const Dataset& test_ds,
                                               const std::vector<McPreset>& mc_grid,
                                               std::uint64_t seed, const TrainConfig& base = {});

/// Percentile bootstrap over the test set: resamples within each demographic
/// bucket (sizes preserved), recomputes the adjusted effect per replicate
/// from the fixed score table, and returns the CI at level 1-alpha plus a
/// two-sided sign-fraction p-value floored at 1/B.
AceReport stratified_bootstrap(const InterventionResult& experiment, std::int64_t B, double alpha,
                               std::uint64_t seed);

/// 1 (high fairness) iff |skew| < threshold, strictly.
int binarize_fairness(double skew, double threshold);

/// The paper's fairness-generalization graph: F -> A with confounders
/// DD -> {F, A} and MC -> {F, A}.
Dag fairness_generalization_dag();

}  // namespace daid
