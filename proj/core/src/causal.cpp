#include "daid/causal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

#include "daid/errors.hpp"
#include "daid/metrics.hpp"
#include "daid/rng.hpp"

namespace daid {

namespace {

int add_or_get(Dag& g, const std::string& name) {
    auto it = g.index.find(name);
    if (it != g.index.end()) return it->second;
    const int id = static_cast<int>(g.names.size());
    g.names.push_back(name);
    g.index[name] = id;
    g.children.emplace_back();
    g.parents.emplace_back();
    return id;
}

void check_acyclic(const Dag& g) {
    std::vector<int> indegree(g.size(), 0);
    for (const auto& [a, b] : g.edges) indegree[static_cast<std::size_t>(b)]++;
    std::deque<int> ready;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
    std::size_t seen = 0;
    while (!ready.empty()) {
        const int v = ready.front();
        ready.pop_front();
        ++seen;
        for (int c : g.children[static_cast<std::size_t>(v)])
            if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
    }
    if (seen != g.size()) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (indegree[i] > 0)
                throw ConfigError("dag: cycle through node " + g.names[i]);
    }
}

}  // namespace

Dag Dag::from_edges(const std::vector<std::string>& nodes,
                    const std::vector<std::pair<std::string, std::string>>& edge_list) {
    Dag g;
    for (const auto& n : nodes) add_or_get(g, n);
    for (const auto& [a, b] : edge_list) {
        if (a == b) throw ConfigError("dag: self-loop on " + a);
        const int ia = add_or_get(g, a);
        const int ib = add_or_get(g, b);
        for (int c : g.children[static_cast<std::size_t>(ia)])
            if (c == ib) throw ConfigError("dag: duplicate edge " + a + " -> " + b);
        g.children[static_cast<std::size_t>(ia)].push_back(ib);
        g.parents[static_cast<std::size_t>(ib)].push_back(ia);
        g.edges.emplace_back(ia, ib);
    }
    check_acyclic(g);
    return g;
}

Dag Dag::parse(const std::string& text) {
    std::vector<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edge_list;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.empty() || line[0] == '#') continue;

        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "node") {
            std::string name, extra;
            if (!(ls >> name) || (ls >> extra))
                throw ParseError("dag: expected `node NAME`", lineno);
            nodes.push_back(name);
        } else if (kw == "edge") {
            std::string a, arrow, b, extra;
            if (!(ls >> a >> arrow >> b) || arrow != "->" || (ls >> extra))
                throw ParseError("dag: expected `edge A -> B`", lineno);
            edge_list.emplace_back(a, b);
        } else {
            throw ParseError("dag: unknown directive `" + kw + "`", lineno);
        }
    }
    return from_edges(nodes, edge_list);
}

std::string Dag::to_text() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < size(); ++i)
        if (children[i].empty() && parents[i].empty()) out << "node " << names[i] << "\n";
    for (const auto& [a, b] : edges)
        out << "edge " << names[static_cast<std::size_t>(a)] << " -> "
            << names[static_cast<std::size_t>(b)] << "\n";
    return out.str();
}

int Dag::node_id(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw UnknownNode("dag: unknown node " + name);
    return it->second;
}

std::set<int> descendants(const Dag& g, int x) {
    std::set<int> seen;
    std::deque<int> queue{x};
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int c : g.children[static_cast<std::size_t>(v)])
            if (seen.insert(c).second) queue.push_back(c);
    }
    return seen;
}

bool d_separated_ids(const Dag& g, int x, int y, const std::set<int>& z) {
    if (x == y) throw ConfigError("d_separated: x and y must differ");
    if (z.count(x) || z.count(y)) throw ConfigError("d_separated: x, y must not be in z");

    // Ancestors of z (z included): a collider is traversable exactly when it
    // lies in this set.
    std::vector<char> anc(g.size(), 0);
    std::deque<int> queue;
    for (int v : z) {
        anc[static_cast<std::size_t>(v)] = 1;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int p : g.parents[static_cast<std::size_t>(v)])
            if (!anc[static_cast<std::size_t>(p)]) {
                anc[static_cast<std::size_t>(p)] = 1;
                queue.push_back(p);
            }
    }

    // Reachability over (node, arrival direction) states. kUp = arrived via
    // an edge from a child, kDown = via an edge from a parent.
    constexpr int kUp = 0, kDown = 1;
    std::vector<std::array<char, 2>> visited(g.size(), {0, 0});
    std::deque<std::pair<int, int>> frontier{{x, kUp}};
    while (!frontier.empty()) {
        const auto [v, dir] = frontier.front();
        frontier.pop_front();
        auto& mark = visited[static_cast<std::size_t>(v)][static_cast<std::size_t>(dir)];
        if (mark) continue;
        mark = 1;
        const bool in_z = z.count(v) > 0;
        if (!in_z && v == y) return false;
        if (dir == kUp && !in_z) {
            for (int p : g.parents[static_cast<std::size_t>(v)]) frontier.push_back({p, kUp});
            for (int c : g.children[static_cast<std::size_t>(v)]) frontier.push_back({c, kDown});
        } else if (dir == kDown) {
            if (!in_z)
                for (int c : g.children[static_cast<std::size_t>(v)])
                    frontier.push_back({c, kDown});
            if (anc[static_cast<std::size_t>(v)])
                for (int p : g.parents[static_cast<std::size_t>(v)]) frontier.push_back({p, kUp});
        }
    }
    return true;
}

bool d_separated(const Dag& g, const std::string& x, const std::string& y,
                 const std::set<std::string>& z) {
    std::set<int> zi;
    for (const auto& n : z) zi.insert(g.node_id(n));
    return d_separated_ids(g, g.node_id(x), g.node_id(y), zi);
}

namespace {

/// First active (unblocked given z) simple undirected path from x to y, as
/// node ids, or empty when every path is blocked. Enumeration is only used
/// for witness reporting; d_separated_ids answers the yes/no question.
std::vector<int> find_active_path(const Dag& g, int x, int y, const std::set<int>& z) {
    std::vector<std::set<int>> desc(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) desc[v] = descendants(g, static_cast<int>(v));

    auto edge_dir = [&](int a, int b) {
        for (int c : g.children[static_cast<std::size_t>(a)])
            if (c == b) return +1;  // a -> b
        return -1;                  // b -> a
    };
    auto active_intermediate = [&](int prev, int v, int next) {
        const bool collider = edge_dir(prev, v) == +1 && edge_dir(next, v) == +1;
        if (collider) {
            if (z.count(v)) return true;
            for (int d : desc[static_cast<std::size_t>(v)])
                if (z.count(d)) return true;
            return false;
        }
        return z.count(v) == 0;
    };

    std::vector<int> path{x};
    std::vector<char> on_path(g.size(), 0);
    on_path[static_cast<std::size_t>(x)] = 1;
    std::vector<int> found;
    long steps = 0;

    auto neighbors = [&](int v) {
        std::vector<int> out = g.children[static_cast<std::size_t>(v)];
        out.insert(out.end(), g.parents[static_cast<std::size_t>(v)].begin(),
                   g.parents[static_cast<std::size_t>(v)].end());
        return out;
    };

    std::function<bool(int)> dfs = [&](int v) -> bool {
        if (++steps > 200000) return false;
        for (int nxt : neighbors(v)) {
            if (on_path[static_cast<std::size_t>(nxt)]) continue;
            if (path.size() >= 2 &&
                !active_intermediate(path[path.size() - 2], v, nxt))
                continue;
            if (nxt == y) {
                path.push_back(nxt);
                found = path;
                path.pop_back();
                return true;
            }
            path.push_back(nxt);
            on_path[static_cast<std::size_t>(nxt)] = 1;
            if (dfs(nxt)) return true;
            on_path[static_cast<std::size_t>(nxt)] = 0;
            path.pop_back();
        }
        return false;
    };
    dfs(x);
    return found;
}

std::string format_path(const Dag& g, const std::vector<int>& path) {
    std::ostringstream out;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (k > 0) {
            bool forward = false;
            for (int c : g.children[static_cast<std::size_t>(path[k - 1])])
                if (c == path[k]) forward = true;
            out << (forward ? " -> " : " <- ");
        }
        out << g.names[static_cast<std::size_t>(path[k])];
    }
    return out.str();
}

}  // namespace

BackdoorResult backdoor_criterion(const Dag& g, const std::string& x, const std::string& y,
                                  const std::set<std::string>& z) {
    const int xi = g.node_id(x);
    const int yi = g.node_id(y);
    std::set<int> zi;
    for (const auto& n : z) zi.insert(g.node_id(n));
    if (xi == yi) throw ConfigError("backdoor_criterion: x and y must differ");
    if (zi.count(xi) || zi.count(yi))
        throw ConfigError("backdoor_criterion: x, y must not be in z");

    const auto desc_x = descendants(g, xi);
    for (int v : zi)
        if (desc_x.count(v)) {
            BackdoorResult r;
            r.failed_condition = 1;
            r.witness = g.names[static_cast<std::size_t>(v)] + " is a descendant of " + x;
            return r;
        }

    // Cut every edge out of x; surviving x-y paths all point into x.
    Dag cut = g;
    cut.children[static_cast<std::size_t>(xi)].clear();
    std::vector<std::pair<int, int>> kept;
    for (const auto& e : cut.edges)
        if (e.first != xi) kept.push_back(e);
    cut.edges = kept;
    for (auto& plist : cut.parents)
        plist.erase(std::remove(plist.begin(), plist.end(), xi), plist.end());

    if (d_separated_ids(cut, xi, yi, zi)) {
        BackdoorResult r;
        r.satisfied = true;
        return r;
    }
    BackdoorResult r;
    r.failed_condition = 2;
    const auto path = find_active_path(cut, xi, yi, zi);
    r.witness = path.empty() ? "unblocked back-door path (not enumerated)"
                             : format_path(cut, path);
    return r;
}

double backdoor_adjust(const OutcomeTable& outcomes, const std::vector<Stratum>& strata, int f) {
    if (strata.empty()) throw EmptyInput("backdoor_adjust: no strata");
    double weight_sum = 0.0;
    for (const auto& s : strata) {
        if (s.weight < 0.0) throw WeightSumError("backdoor_adjust: negative stratum weight");
        weight_sum += s.weight;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw WeightSumError("backdoor_adjust: stratum weights sum to " +
                             std::to_string(weight_sum));
    double acc = 0.0;
    for (const auto& s : strata) {
        const auto it = outcomes.find({f, {s.dd, s.mc}});
        if (it == outcomes.end())
            throw MissingCell("backdoor_adjust: no outcome for f=" + std::to_string(f) +
                              " stratum " + s.dd.to_string() + "/" + s.mc);
        acc += it->second * s.weight;
    }
    return acc;
}

AceEstimate ace(const OutcomeTable& outcomes, const std::vector<Stratum>& strata) {
    AceEstimate est;
    est.mu0 = backdoor_adjust(outcomes, strata, 0);
    est.ace = backdoor_adjust(outcomes, strata, 1) - est.mu0;
    for (const auto& s : strata) {
        StratumOutcome row;
        row.stratum = s;
        row.f0 = outcomes.at({0, {s.dd, s.mc}});
        row.f1 = outcomes.at({1, {s.dd, s.mc}});
        row.diff = row.f1 - row.f0;
        est.per_stratum.push_back(row);
    }
    return est;
}

std::vector<McPreset> default_mc_grid() {
    return {{"small", {16, 16}}, {"large", {64, 64}}};
}

InterventionResult run_intervention_experiment(const Dataset& train_ds, const Dataset& test_ds,
                                               const std::vector<McPreset>& mc_grid,
                                               std::uint64_t seed, const TrainConfig& base) {
    if (mc_grid.empty()) throw ConfigError("intervention: empty capacity grid");
    if (!(train_ds.schema == test_ds.schema))
        throw ConfigError("intervention: train and test schemas differ");

    InterventionResult out;
    const auto parts = partition_by_subgroup(test_ds);
    double kept_mass = 0.0;
    for (const auto& [key, idx] : parts) {
        bool has0 = false, has1 = false;
        for (auto i : idx)
            (test_ds.samples[static_cast<std::size_t>(i)].label == 1 ? has1 : has0) = true;
        if (!has0 || !has1) {
            out.dropped_dd.push_back(key.to_string());
            continue;
        }
        out.dd_index[key] = idx;
        const double frac =
            static_cast<double>(idx.size()) / static_cast<double>(test_ds.samples.size());
        out.dd_weight[key] = frac;
        kept_mass += frac;
    }
    if (out.dd_index.empty())
        throw DegenerateStratum("intervention: every demographic bucket is single-class");
    for (auto& [key, w] : out.dd_weight) w /= kept_mass;

    out.test_labels.reserve(test_ds.samples.size());
    for (const auto& s : test_ds.samples) out.test_labels.push_back(s.label);

    const double mc_share = 1.0 / static_cast<double>(mc_grid.size());
    out.scores.resize(mc_grid.size());
    for (std::size_t m = 0; m < mc_grid.size(); ++m) {
        out.mc_names.push_back(mc_grid[m].name);
        // Paired seeds: f=0 and f=1 share init and shuffle so the treatment
        // contrast is not confounded by draw noise.
        const std::uint64_t cell_seed =
            mix64(mix64(seed ^ stream::kCell) ^ static_cast<std::uint64_t>(m));
        for (int f = 0; f <= 1; ++f) {
            TrainConfig tc = base;
            tc.hidden = mc_grid[m].hidden;
            tc.seed = cell_seed;
            tc.reweight = f == 1;
            tc.normalize = false;
            tc.attr = false;
            tc.ortho = false;
            const TrainResult model = train(train_ds, tc);
            auto scores = score_dataset(model, test_ds);

            for (const auto& [key, idx] : out.dd_index) {
                std::vector<double> s;
                std::vector<int> l;
                s.reserve(idx.size());
                l.reserve(idx.size());
                for (auto i : idx) {
                    s.push_back(scores[static_cast<std::size_t>(i)]);
                    l.push_back(out.test_labels[static_cast<std::size_t>(i)]);
                }
                out.outcomes[{f, {key, mc_grid[m].name}}] = auc(s, l);
            }
            out.scores[m][static_cast<std::size_t>(f)] = std::move(scores);
        }
        for (const auto& [key, w] : out.dd_weight)
            out.strata.push_back({key, mc_grid[m].name, w * mc_share});
    }
    out.estimate = ace(out.outcomes, out.strata);
    return out;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

AceReport stratified_bootstrap(const InterventionResult& experiment, std::int64_t B, double alpha,
                               std::uint64_t seed) {
    if (B < 1) throw ConfigError("bootstrap: B must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("bootstrap: alpha must be in (0,1)");

    AceReport report;
    report.ace = experiment.estimate.ace;
    report.mu0 = experiment.estimate.mu0;
    report.per_stratum = experiment.estimate.per_stratum;
    report.B = B;
    report.alpha = alpha;
    report.seed = seed;

    const std::size_t n_mc = experiment.scores.size();
    const double mc_share = 1.0 / static_cast<double>(n_mc);

    std::vector<double> replicates;
    replicates.reserve(static_cast<std::size_t>(B));

    for (std::int64_t b = 0; b < B; ++b) {
        auto rng = rng_stream(seed, stream::kBootstrap, static_cast<std::uint64_t>(b));

        // One resample = per-bucket index draws shared across every model.
        std::map<SubgroupKey, std::vector<std::int32_t>> draw;
        std::map<SubgroupKey, char> degenerate;
        auto redraw = [&]() {
            bool any_bad = false;
            draw.clear();
            degenerate.clear();
            for (const auto& [key, idx] : experiment.dd_index) {
                auto& d = draw[key];
                d.reserve(idx.size());
                bool has0 = false, has1 = false;
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    const auto i = idx[static_cast<std::size_t>(rint_below(rng, idx.size()))];
                    d.push_back(i);
                    (experiment.test_labels[static_cast<std::size_t>(i)] == 1 ? has1 : has0) =
                        true;
                }
                if (!has0 || !has1) {
                    degenerate[key] = 1;
                    any_bad = true;
                }
            }
            return !any_bad;
        };

        bool ok = redraw();
        int attempts = 1;
        while (!ok && attempts < 10) {
            ++attempts;
            ++report.n_redrawn;
            ok = redraw();
        }
        if (!ok) {
            // Give up on resampling the stubborn buckets; carry them whole.
            for (const auto& [key, flag] : degenerate) {
                draw[key] = experiment.dd_index.at(key);
                ++report.n_forced_identity;
            }
        }

        double ace_b = 0.0;
        for (const auto& [key, idx] : draw) {
            const double w_dd = experiment.dd_weight.at(key);
            std::vector<int> labels;
            labels.reserve(idx.size());
            for (auto i : idx) labels.push_back(experiment.test_labels[static_cast<std::size_t>(i)]);
            std::vector<double> s(idx.size());
            for (std::size_t m = 0; m < n_mc; ++m) {
                double diff = 0.0;
                for (int f = 0; f <= 1; ++f) {
                    const auto& all = experiment.scores[m][static_cast<std::size_t>(f)];
                    for (std::size_t k = 0; k < idx.size(); ++k)
                        s[k] = all[static_cast<std::size_t>(idx[k])];
                    const double a = auc(s, labels);
                    diff += f == 1 ? a : -a;
                }
                ace_b += w_dd * mc_share * diff;
            }
        }
        replicates.push_back(ace_b);
    }

    std::vector<double> sorted = replicates;
    std::sort(sorted.begin(), sorted.end());
    report.ci_low = quantile_sorted(sorted, alpha / 2.0);
    report.ci_high = quantile_sorted(sorted, 1.0 - alpha / 2.0);

    std::int64_t n_le = 0, n_ge = 0;
    for (double a : replicates) {
        if (a <= 0.0) ++n_le;
        if (a >= 0.0) ++n_ge;
    }
    const double frac_le = static_cast<double>(n_le) / static_cast<double>(B);
    const double frac_ge = static_cast<double>(n_ge) / static_cast<double>(B);
    report.p_value = std::clamp(2.0 * std::min(frac_le, frac_ge),
                                1.0 / static_cast<double>(B), 1.0);
    return report;
}

int binarize_fairness(double skew, double threshold) {
    if (!(threshold > 0.0)) throw ConfigError("binarize_fairness: threshold must be positive");
    return std::abs(skew) < threshold ? 1 : 0;
}

Dag fairness_generalization_dag() {
    return Dag::from_edges({"F", "A", "DD", "MC"},
                           {{"F", "A"}, {"DD", "F"}, {"DD", "A"}, {"MC", "F"}, {"MC", "A"}});
}

}  // namespace daid
