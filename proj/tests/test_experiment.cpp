#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "daid/errors.hpp"
#include "daid/experiment.hpp"
#include "daid/rng.hpp"
#include "daid/synthgen.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace daid;

namespace {

struct EnvGuard {
    std::string name;
    std::string saved;
    bool had = false;

    explicit EnvGuard(const std::string& n) : name(n) {
        if (const char* v = std::getenv(n.c_str())) {
            saved = v;
            had = true;
        }
    }
    ~EnvGuard() {
        if (had)
            ::setenv(name.c_str(), saved.c_str(), 1);
        else
            ::unsetenv(name.c_str());
    }
};

ScmOutput tiny_data() {
    ScmConfig cfg;
    cfg.n_train = 48;
    cfg.n_test = 32;
    cfg.d_in = 6;
    cfg.seed = 2;
    return generate(cfg);
}

TrainConfig tiny_base() {
    TrainConfig tc;
    tc.hidden = {4};
    tc.d_h = 4;
    tc.r = 2;
    tc.epochs = 1;
    tc.batch_size = 16;
    return tc;
}

}  // namespace

TEST_CASE("regime flags map to indices and names") {
    CHECK(RegimeFlags::from_index(0) == RegimeFlags{});
    CHECK(RegimeFlags::from_index(0).name() == "base");
    CHECK(RegimeFlags::from_index(1).name() == "rw");
    CHECK(RegimeFlags::from_index(2).name() == "sn");
    CHECK(RegimeFlags::from_index(4).name() == "at");
    CHECK(RegimeFlags::from_index(8).name() == "or");
    CHECK(RegimeFlags::from_index(5).name() == "rw+at");
    CHECK(RegimeFlags::from_index(15).name() == "rw+sn+at+or");

    const RegimeFlags one = RegimeFlags::from_index(1);
    CHECK(one.reweight);
    CHECK_FALSE(one.normalize);
    CHECK_FALSE(one.attr);
    CHECK_FALSE(one.ortho);

    for (std::size_t i = 0; i < 16; ++i) CHECK(RegimeFlags::from_index(i).index() == i);
}

TEST_CASE("replicate seeds start at the base seed and do not collide") {
    const auto seeds = replicate_seeds(123, 10);
    REQUIRE(seeds.size() == 10);
    CHECK(seeds[0] == 123);
    CHECK(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == 10);
    CHECK(seeds == replicate_seeds(123, 10));
    for (std::size_t s = 1; s < 10; ++s)
        CHECK(seeds[s] == mix64(mix64(123) ^ static_cast<std::uint64_t>(s)));
    CHECK(replicate_seeds(124, 10)[1] != seeds[1]);
}

TEST_CASE("thread count comes from the environment") {
    EnvGuard guard("DAID_THREADS");

    ::unsetenv("DAID_THREADS");
    CHECK(threads_from_env() >= 1);

    ::setenv("DAID_THREADS", "3", 1);
    CHECK(threads_from_env() == 3);

    for (const char* bad : {"0", "-2", "abc", "", "7x"}) {
        ::setenv("DAID_THREADS", bad, 1);
        CAPTURE(bad);
        CHECK_THROWS_AS(threads_from_env(), ConfigError);
    }
}

TEST_CASE("single-seed ablation grid matches standalone training") {
    const ScmOutput data = tiny_data();
    const TrainConfig base = tiny_base();
    const MetricConfig metric;

    const AblationGridResult grid = run_ablation_grid(
        data.train, data.test_source, data.test_shifted, base, metric, 1, 5, 1);

    REQUIRE(grid.regimes.size() == 16);
    CHECK(grid.seeds == std::vector<std::uint64_t>{5});
    for (std::size_t i = 0; i < 16; ++i) {
        const RegimeResult& r = grid.regimes[i];
        CHECK(r.flags == RegimeFlags::from_index(i));
        CHECK(r.name == r.flags.name());
        REQUIRE(r.cells.size() == 1);
        CHECK(r.auc_source_mean == r.cells[0].source.auc_overall);
        CHECK(r.skew_source_mean == r.cells[0].source.skew);
        CHECK(r.auc_shifted_mean == r.cells[0].shifted.auc_overall);
        CHECK(r.skew_shifted_mean == r.cells[0].shifted.skew);
    }

    for (const std::size_t idx : {std::size_t{0}, std::size_t{15}}) {
        TrainConfig cfg = base;
        const RegimeFlags f = RegimeFlags::from_index(idx);
        cfg.reweight = f.reweight;
        cfg.normalize = f.normalize;
        cfg.attr = f.attr;
        cfg.ortho = f.ortho;
        cfg.seed = 5;
        const TrainResult model = train(data.train, cfg);
        const MetricReport src =
            evaluate(data.test_source, score_dataset(model, data.test_source), metric);
        const MetricReport shf =
            evaluate(data.test_shifted, score_dataset(model, data.test_shifted), metric);
        CAPTURE(idx);
        CHECK(grid.regimes[idx].cells[0].source.auc_overall == src.auc_overall);
        CHECK(grid.regimes[idx].cells[0].source.skew == src.skew);
        CHECK(grid.regimes[idx].cells[0].shifted.auc_overall == shf.auc_overall);
        CHECK(grid.regimes[idx].cells[0].shifted.skew == shf.skew);
    }

    CHECK_THROWS_AS(run_ablation_grid(data.train, data.test_source, data.test_shifted,
                                      base, metric, 0, 5, 1),
                    ConfigError);
}

TEST_CASE("grid output is independent of the thread count") {
    const ScmOutput data = tiny_data();
    const TrainConfig base = tiny_base();
    const MetricConfig metric;

    const AblationGridResult a = run_ablation_grid(
        data.train, data.test_source, data.test_shifted, base, metric, 2, 9, 1);
    const AblationGridResult b = run_ablation_grid(
        data.train, data.test_source, data.test_shifted, base, metric, 2, 9, 4);

    CHECK(a.seeds == b.seeds);
    CHECK(ablation_csv(a) == ablation_csv(b));
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(a.regimes[i].auc_source_mean == b.regimes[i].auc_source_mean);
        CHECK(a.regimes[i].skew_source_mean == b.regimes[i].skew_source_mean);
        CHECK(a.regimes[i].auc_shifted_mean == b.regimes[i].auc_shifted_mean);
        CHECK(a.regimes[i].skew_shifted_mean == b.regimes[i].skew_shifted_mean);
    }
}

TEST_CASE("ablation CSV has one row per regime in index order") {
    const ScmOutput data = tiny_data();
    const AblationGridResult grid = run_ablation_grid(
        data.train, data.test_source, data.test_shifted, tiny_base(), MetricConfig{}, 2, 7, 2);

    const std::string csv = ablation_csv(grid);
    std::istringstream in(csv);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);

    REQUIRE(lines.size() == 17);
    CHECK(lines[0] ==
          "regime,reweight,normalize,attr,ortho,n_seeds,auc_source,skew_source,"
          "auc_shifted,skew_shifted");

    const std::vector<std::string> expect_names = {
        "base",  "rw",    "sn",    "rw+sn",    "at",    "rw+at",    "sn+at",    "rw+sn+at",
        "or",    "rw+or", "sn+or", "rw+sn+or", "at+or", "rw+at+or", "sn+at+or", "rw+sn+at+or"};
    for (std::size_t i = 0; i < 16; ++i) {
        CAPTURE(i);
        const std::string& row = lines[1 + i];
        CHECK(row.rfind(expect_names[i] + ",", 0) == 0);
        std::size_t cells = 1;
        for (char c : row) cells += c == ',' ? 1 : 0;
        CHECK(cells == 10);
        CHECK(row.find(",2,") != std::string::npos);
    }
    CHECK(lines[1].rfind("base,0,0,0,0,2,", 0) == 0);
    CHECK(lines[16].rfind("rw+sn+at+or,1,1,1,1,2,", 0) == 0);
}
