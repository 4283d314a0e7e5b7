#include "daid/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"

#include "daid/errors.hpp"
#include "daid/experiment.hpp"
#include "daid/version.hpp"

using nlohmann::json;

namespace daid {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_double(v[i]);
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::vector<McPreset> parse_mc_grid(const std::string& text) {
    std::vector<McPreset> grid;
    std::string entry;
    const auto flush = [&]() {
        if (entry.empty()) return;
        const auto colon = entry.find(':');
        if (colon == std::string::npos || colon == 0)
            throw ConfigError("experiment.mc_grid: expected name:h1,h2;..., got `" + entry + "`");
        McPreset p;
        p.name = entry.substr(0, colon);
        std::string num;
        for (char c : entry.substr(colon + 1) + ",") {
            if (c == ',') {
                if (num.empty()) throw ConfigError("experiment.mc_grid: empty layer size");
                char* end = nullptr;
                const long v = std::strtol(num.c_str(), &end, 10);
                if (*end != '\0' || v < 1)
                    throw ConfigError("experiment.mc_grid: bad layer size `" + num + "`");
                p.hidden.push_back(static_cast<std::size_t>(v));
                num.clear();
            } else {
                num.push_back(c);
            }
        }
        grid.push_back(std::move(p));
        entry.clear();
    };
    for (char c : text) {
        if (c == ';')
            flush();
        else if (!std::isspace(static_cast<unsigned char>(c)))
            entry.push_back(c);
    }
    flush();
    return grid;
}

std::string mc_grid_text(const std::vector<McPreset>& grid) {
    std::string out;
    for (std::size_t i = 0; i < grid.size(); ++i)
        out += (i ? ";" : "") + grid[i].name + ":" + join_sizes(grid[i].hidden);
    return out;
}

}  // namespace

ExperimentConfig::ExperimentConfig() : mc_grid(default_mc_grid()) {}

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& cfg) {
    ExperimentConfig c;

    c.train.hidden = cfg.get_sizes("train.hidden", c.train.hidden);
    c.train.d_h = cfg.get_sizes("train.d_h", {c.train.d_h}).at(0);
    c.train.r = cfg.get_sizes("train.r", {c.train.r}).at(0);
    c.train.epochs = cfg.get_int("train.epochs", c.train.epochs);
    c.train.batch_size = cfg.get_int("train.batch", c.train.batch_size);
    c.train.lr = cfg.get_double("train.lr", c.train.lr);
    c.train.weight_decay = cfg.get_double("train.weight_decay", c.train.weight_decay);
    c.train.lambda_attr = cfg.get_double("train.lambda_attr", c.train.lambda_attr);
    c.train.lambda_ortho = cfg.get_double("train.lambda_ortho", c.train.lambda_ortho);
    c.train.pair_cap = cfg.get_int("train.pair_cap", c.train.pair_cap);
    c.train.reweight = cfg.get_bool("train.reweight", c.train.reweight);
    c.train.normalize = cfg.get_bool("train.normalize", c.train.normalize);
    c.train.attr = cfg.get_bool("train.attr", c.train.attr);
    c.train.ortho = cfg.get_bool("train.ortho", c.train.ortho);
    c.train.align_space =
        align_space_from_string(cfg.get_string("train.align_space", to_string(c.train.align_space)));
    c.train.ortho_mode =
        ortho_mode_from_string(cfg.get_string("train.ortho_mode", to_string(c.train.ortho_mode)));
    c.train.weight_norm =
        weight_norm_from_string(cfg.get_string("train.weight_norm", to_string(c.train.weight_norm)));
    c.train.norm_stats =
        norm_stats_from_string(cfg.get_string("train.norm_stats", to_string(c.train.norm_stats)));
    c.train.joint_propensity = cfg.get_bool("train.joint_propensity", c.train.joint_propensity);

    c.scm.n_train = cfg.get_int("scm.n_train", c.scm.n_train);
    c.scm.n_test = cfg.get_int("scm.n_test", c.scm.n_test);
    c.scm.d_in = cfg.get_sizes("scm.d_in", {c.scm.d_in}).at(0);
    if (cfg.has("scm.marginals_0")) {
        c.scm.group_marginals.clear();
        for (std::size_t k = 0; cfg.has("scm.marginals_" + std::to_string(k)); ++k)
            c.scm.group_marginals.push_back(
                cfg.get_doubles("scm.marginals_" + std::to_string(k), {}));
    }
    c.scm.shortcut_strength = cfg.get_double("scm.shortcut_strength", c.scm.shortcut_strength);
    c.scm.signal_strength = cfg.get_double("scm.signal_strength", c.scm.signal_strength);
    c.scm.shift_angle = cfg.get_double("scm.shift_angle", c.scm.shift_angle);
    c.scm.label_noise = cfg.get_double("scm.label_noise", c.scm.label_noise);

    c.metric.rate_kind =
        rate_kind_from_string(cfg.get_string("metric.rate_kind", to_string(c.metric.rate_kind)));
    c.metric.tau = cfg.get_double("metric.tau", c.metric.tau);
    c.metric.skew_eps = cfg.get_double("metric.skew_eps", c.metric.skew_eps);

    c.fairness_threshold = cfg.get_double("fairness.threshold", c.fairness_threshold);
    c.bootstrap_b = cfg.get_int("bootstrap.b", c.bootstrap_b);
    c.bootstrap_alpha = cfg.get_double("bootstrap.alpha", c.bootstrap_alpha);

    c.mc_grid = parse_mc_grid(cfg.get_string("experiment.mc_grid", mc_grid_text(c.mc_grid)));
    const std::int64_t reps = cfg.get_int("experiment.ablate_seeds",
                                          static_cast<std::int64_t>(c.ablate_seeds));
    if (reps < 1) throw ConfigError("experiment.ablate_seeds must be >= 1");
    c.ablate_seeds = static_cast<std::size_t>(reps);

    c.set_seed(cfg.get_u64("seed", c.seed));

    cfg.reject_unknown();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_map(ConfigMap::load(path));
}

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    train.seed = s;
    scm.seed = s;
}

void ExperimentConfig::validate() const {
    train.validate();
    scm.validate();
    if (!(metric.tau > 0.0 && metric.tau < 1.0))
        throw ConfigError("metric.tau must lie in (0,1)");
    if (!(metric.skew_eps > 0.0)) throw ConfigError("metric.skew_eps must be positive");
    if (!(fairness_threshold > 0.0)) throw ConfigError("fairness.threshold must be positive");
    if (bootstrap_b < 1) throw ConfigError("bootstrap.b must be >= 1");
    if (!(bootstrap_alpha > 0.0 && bootstrap_alpha < 1.0))
        throw ConfigError("bootstrap.alpha must lie in (0,1)");
    if (mc_grid.empty()) throw ConfigError("experiment.mc_grid must not be empty");
    std::set<std::string> names;
    for (const auto& p : mc_grid) {
        if (p.name.empty() || p.name.find_first_of(",;:|") != std::string::npos)
            throw ConfigError("experiment.mc_grid: bad preset name `" + p.name + "`");
        if (!names.insert(p.name).second)
            throw ConfigError("experiment.mc_grid: duplicate preset `" + p.name + "`");
        if (p.hidden.empty())
            throw ConfigError("experiment.mc_grid: preset `" + p.name + "` has no layers");
    }
    if (ablate_seeds < 1) throw ConfigError("experiment.ablate_seeds must be >= 1");
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    const auto put = [&out](const std::string& key, const std::string& value) {
        out += key + " = " + value + "\n";
    };
    put("seed", std::to_string(seed));
    put("train.hidden", join_sizes(train.hidden));
    put("train.d_h", std::to_string(train.d_h));
    put("train.r", std::to_string(train.r));
    put("train.epochs", std::to_string(train.epochs));
    put("train.batch", std::to_string(train.batch_size));
    put("train.lr", fmt_double(train.lr));
    put("train.weight_decay", fmt_double(train.weight_decay));
    put("train.lambda_attr", fmt_double(train.lambda_attr));
    put("train.lambda_ortho", fmt_double(train.lambda_ortho));
    put("train.pair_cap", std::to_string(train.pair_cap));
    put("train.reweight", train.reweight ? "true" : "false");
    put("train.normalize", train.normalize ? "true" : "false");
    put("train.attr", train.attr ? "true" : "false");
    put("train.ortho", train.ortho ? "true" : "false");
    put("train.align_space", to_string(train.align_space));
    put("train.ortho_mode", to_string(train.ortho_mode));
    put("train.weight_norm", to_string(train.weight_norm));
    put("train.norm_stats", to_string(train.norm_stats));
    put("train.joint_propensity", train.joint_propensity ? "true" : "false");
    put("scm.n_train", std::to_string(scm.n_train));
    put("scm.n_test", std::to_string(scm.n_test));
    put("scm.d_in", std::to_string(scm.d_in));
    for (std::size_t k = 0; k < scm.group_marginals.size(); ++k)
        put("scm.marginals_" + std::to_string(k), join_doubles(scm.group_marginals[k]));
    put("scm.shortcut_strength", fmt_double(scm.shortcut_strength));
    put("scm.signal_strength", fmt_double(scm.signal_strength));
    put("scm.shift_angle", fmt_double(scm.shift_angle));
    put("scm.label_noise", fmt_double(scm.label_noise));
    put("metric.rate_kind", to_string(metric.rate_kind));
    put("metric.tau", fmt_double(metric.tau));
    put("metric.skew_eps", fmt_double(metric.skew_eps));
    put("fairness.threshold", fmt_double(fairness_threshold));
    put("bootstrap.b", std::to_string(bootstrap_b));
    put("bootstrap.alpha", fmt_double(bootstrap_alpha));
    put("experiment.mc_grid", mc_grid_text(mc_grid));
    put("experiment.ablate_seeds", std::to_string(ablate_seeds));
    return out;
}

namespace {

/// Deletes everything written so far unless disarmed; keeps failed commands
/// from leaving partial artifacts behind.
class ArtifactGuard {
  public:
    ~ArtifactGuard() {
        if (armed_)
            for (const auto& p : paths_) {
                std::error_code ec;
                std::filesystem::remove(p, ec);
            }
    }
    void write(const std::string& path, const std::string& content) {
        paths_.push_back(path);
        write_text_file(path, content);
    }
    void track(const std::string& path) { paths_.push_back(path); }
    void disarm() { armed_ = false; }

  private:
    std::vector<std::string> paths_;
    bool armed_ = true;
};

struct CommandContext {
    ExperimentConfig config;
    std::string out = ".";
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    std::string path(const std::string& name) const {
        return (std::filesystem::path(out) / name).string();
    }
    double wall_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         started)
            .count();
    }
};

void write_run_record(ArtifactGuard& guard, const CommandContext& ctx, const std::string& command,
                      const std::vector<std::pair<std::string, std::string>>& artifacts) {
    json arts = json::object();
    for (const auto& [name, file] : artifacts) arts[name] = file;
    const json j = {{"command", command},
                    {"version", kVersion},
                    {"spec_version", kSpecVersion},
                    {"seed", ctx.config.seed},
                    {"config", ctx.config.to_text()},
                    {"artifacts", arts},
                    {"wall_clock_ms", ctx.wall_ms()}};
    guard.write(ctx.path("run_record.json"), j.dump(2) + "\n");
}

void save_dataset_tracked(ArtifactGuard& guard, const Dataset& ds, const std::string& path) {
    guard.track(path);
    guard.track(path + ".schema.json");
    save_dataset(ds, path);
}

int cmd_generate(CommandContext& ctx) {
    ArtifactGuard guard;
    const ScmOutput data = generate(ctx.config.scm);
    save_dataset_tracked(guard, data.train, ctx.path("train.csv"));
    save_dataset_tracked(guard, data.test_source, ctx.path("test_source.csv"));
    save_dataset_tracked(guard, data.test_shifted, ctx.path("test_shifted.csv"));
    guard.write(ctx.path("ground_truth.json"), ground_truth_json(describe(ctx.config.scm)));
    write_run_record(guard, ctx, "generate",
                     {{"train", "train.csv"},
                      {"test_source", "test_source.csv"},
                      {"test_shifted", "test_shifted.csv"},
                      {"ground_truth", "ground_truth.json"}});
    guard.disarm();
    std::cout << "generate: " << data.train.size() << " train, " << data.test_source.size()
              << " source-test, " << data.test_shifted.size() << " shifted-test samples -> "
              << ctx.out << "\n";
    return 0;
}

int cmd_train(CommandContext& ctx, const std::string& data_path) {
    ArtifactGuard guard;
    const Dataset ds = load_dataset(data_path);
    const TrainResult model = train(ds, ctx.config.train);
    guard.track(ctx.path("model.json"));
    save_checkpoint(model, ctx.path("model.json"));
    guard.track(ctx.path("history.csv"));
    save_history(model.history, ctx.path("history.csv"));
    write_run_record(guard, ctx, "train", {{"model", "model.json"}, {"history", "history.csv"}});
    guard.disarm();
    const EpochStats& last = model.history.back();
    std::cout << "train: " << model.history.size() << " epochs, final total=" << last.total
              << " cls=" << last.cls << " train_auc=" << last.train_auc << " -> " << ctx.out
              << "\n";
    return 0;
}

int cmd_evaluate(CommandContext& ctx, const std::string& model_path,
                 const std::string& data_path) {
    ArtifactGuard guard;
    const TrainResult model = load_checkpoint(model_path);
    const Dataset ds = load_dataset(data_path);
    const MetricReport rep = evaluate(ds, score_dataset(model, ds), ctx.config.metric);
    json j = json::parse(metric_report_json(rep, ds.schema, ctx.config.metric));
    j["fair"] = binarize_fairness(rep.skew, ctx.config.fairness_threshold) == 1;
    j["fairness_threshold"] = ctx.config.fairness_threshold;
    guard.write(ctx.path("metrics.json"), j.dump(2) + "\n");
    guard.write(ctx.path("radar.csv"), radar_csv(rep, ds.schema));
    write_run_record(guard, ctx, "evaluate",
                     {{"metrics", "metrics.json"}, {"radar", "radar.csv"}});
    guard.disarm();
    std::cout << "evaluate: auc=" << rep.auc_overall << " skew=" << rep.skew
              << " fair=" << (binarize_fairness(rep.skew, ctx.config.fairness_threshold) ? "yes"
                                                                                         : "no")
              << " -> " << ctx.out << "\n";
    return 0;
}

int cmd_ace(CommandContext& ctx, const std::string& train_path, const std::string& test_path) {
    ArtifactGuard guard;
    const Dataset train_ds = load_dataset(train_path);
    const Dataset test_ds = load_dataset(test_path);
    const InterventionResult experiment = run_intervention_experiment(
        train_ds, test_ds, ctx.config.mc_grid, ctx.config.seed, ctx.config.train);
    const AceReport rep = stratified_bootstrap(experiment, ctx.config.bootstrap_b,
                                               ctx.config.bootstrap_alpha, ctx.config.seed);
    guard.write(ctx.path("ace.json"),
                ace_report_json(rep, train_ds.schema, experiment.dropped_dd));
    write_run_record(guard, ctx, "ace", {{"ace", "ace.json"}});
    guard.disarm();
    std::cout << "ace: ACE=" << rep.ace << " CI" << 100.0 * (1.0 - rep.alpha) << "=["
              << rep.ci_low << ", " << rep.ci_high << "] p=" << rep.p_value << " B=" << rep.B
              << " -> " << ctx.out << "\n";
    return 0;
}

int cmd_backdoor_check(CommandContext& ctx, const std::string& dag_path, const std::string& x,
                       const std::string& y, const std::string& z_csv) {
    ArtifactGuard guard;
    const Dag g = Dag::parse(read_text_file(dag_path));
    std::set<std::string> z;
    std::string cur;
    for (char c : z_csv + ",") {
        if (c == ',') {
            if (!cur.empty()) z.insert(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    const BackdoorResult res = backdoor_criterion(g, x, y, z);
    const json j = {{"spec_version", kSpecVersion},
                    {"x", x},
                    {"y", y},
                    {"z", std::vector<std::string>(z.begin(), z.end())},
                    {"satisfied", res.satisfied},
                    {"failed_condition", res.failed_condition},
                    {"witness", res.witness}};
    guard.write(ctx.path("backdoor.json"), j.dump(2) + "\n");
    guard.disarm();
    if (res.satisfied)
        std::cout << "backdoor-check: satisfied\n";
    else
        std::cout << "backdoor-check: violated (condition " << res.failed_condition
                  << "): " << res.witness << "\n";
    return 0;
}

int cmd_ablate(CommandContext& ctx, const std::string& train_path, const std::string& source_path,
               const std::string& shifted_path) {
    ArtifactGuard guard;
    const Dataset train_ds = load_dataset(train_path);
    const Dataset test_source = load_dataset(source_path);
    const Dataset test_shifted = load_dataset(shifted_path);
    const AblationGridResult grid =
        run_ablation_grid(train_ds, test_source, test_shifted, ctx.config.train,
                          ctx.config.metric, ctx.config.ablate_seeds, ctx.config.seed);
    guard.write(ctx.path("ablation.csv"), ablation_csv(grid));
    write_run_record(guard, ctx, "ablate", {{"ablation", "ablation.csv"}});
    guard.disarm();
    const RegimeResult& base = grid.regimes.front();
    const RegimeResult& full = grid.regimes.back();
    std::cout << "ablate: 16 regimes x " << grid.seeds.size()
              << " seeds; shifted AUC base=" << base.auc_shifted_mean
              << " full=" << full.auc_shifted_mean << "; skew base=" << base.skew_shifted_mean
              << " full=" << full.skew_shifted_mean << " -> " << ctx.out << "\n";
    return 0;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NonFiniteLoss*>(&e) || dynamic_cast<const NonFiniteGradient*>(&e))
        return 4;
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const Error*>(&e)) return 3;
    return 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"causal fairness-generalization analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value config file");
        sub->add_option("--out", out, "output directory (default .)");
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_given = true;
        });
    };

    CLI::App* c_generate = app.add_subcommand("generate", "write synthetic train/test datasets");
    add_common(c_generate);

    std::string train_data;
    CLI::App* c_train = app.add_subcommand("train", "train a classifier on a dataset CSV");
    add_common(c_train);
    c_train->add_option("data", train_data, "training CSV")->required();

    std::string eval_model, eval_data;
    CLI::App* c_evaluate = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
    add_common(c_evaluate);
    c_evaluate->add_option("model", eval_model, "checkpoint JSON")->required();
    c_evaluate->add_option("data", eval_data, "evaluation CSV")->required();

    std::string ace_train, ace_test;
    CLI::App* c_ace = app.add_subcommand("ace", "interventional effect of fairness on accuracy");
    add_common(c_ace);
    c_ace->add_option("train", ace_train, "training CSV")->required();
    c_ace->add_option("test", ace_test, "evaluation CSV")->required();

    std::string dag_path, bd_x = "F", bd_y = "A", bd_z;
    CLI::App* c_backdoor = app.add_subcommand("backdoor-check", "back-door criterion on a DAG");
    add_common(c_backdoor);
    c_backdoor->add_option("dag", dag_path, "DAG text file")->required();
    c_backdoor->add_option("--x", bd_x, "treatment node (default F)");
    c_backdoor->add_option("--y", bd_y, "outcome node (default A)");
    c_backdoor->add_option("--z", bd_z, "comma-separated adjustment set");

    std::string ab_train, ab_source, ab_shifted;
    CLI::App* c_ablate = app.add_subcommand("ablate", "16-regime mechanism grid");
    add_common(c_ablate);
    c_ablate->add_option("train", ab_train, "training CSV")->required();
    c_ablate->add_option("test_source", ab_source, "source-domain test CSV")->required();
    c_ablate->add_option("test_shifted", ab_shifted, "shifted-domain test CSV")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        CommandContext ctx;
        if (!config_path.empty()) ctx.config = ExperimentConfig::from_file(config_path);
        if (seed_given) ctx.config.set_seed(seed);
        ctx.out = out;
        std::filesystem::create_directories(ctx.out);

        if (c_generate->parsed()) return cmd_generate(ctx);
        if (c_train->parsed()) return cmd_train(ctx, train_data);
        if (c_evaluate->parsed()) return cmd_evaluate(ctx, eval_model, eval_data);
        if (c_ace->parsed()) return cmd_ace(ctx, ace_train, ace_test);
        if (c_backdoor->parsed()) return cmd_backdoor_check(ctx, dag_path, bd_x, bd_y, bd_z);
        if (c_ablate->parsed()) return cmd_ablate(ctx, ab_train, ab_source, ab_shifted);
        std::cerr << "error: no command\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace daid
