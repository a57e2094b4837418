#include <doctest.h>

#include <cmath>

#include "cdi/errors.hpp"
#include "cdi/experiment.hpp"
#include "cdi/measure.hpp"

using namespace cdi;

namespace {

ExperimentConfig small_speed_cfg() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::speed_ratio;
    cfg.measure = LambdaSpec::kingman(1.0);
    cfg.measure_label = "kingman";
    cfg.n_ladder = {100, 1000};
    cfg.s = 0.5;
    cfg.replicas = 16;
    cfg.epsilon = 10.0;  // structural smoke run, not a statistical assertion
    cfg.master_seed = 7;
    cfg.q_max = 1e8;
    return cfg;
}

}  // namespace

TEST_CASE("reports are byte-identical across runs and thread counts") {
    auto cfg = small_speed_cfg();
    cfg.threads = 1;
    auto a = run_experiment(cfg);
    cfg.threads = 2;
    auto b = run_experiment(cfg);
    cfg.threads = 3;
    auto c = run_experiment(cfg);
    CHECK(report_to_json(a) == report_to_json(b));
    CHECK(report_to_json(b) == report_to_json(c));
    CHECK(report_to_csv(a) == report_to_csv(b));

    // replica statistics depend only on (master_seed, rung, replica)
    CHECK(a.rungs.size() == 2);
    CHECK(a.rungs[0].per_replica.size() == 16);
    CHECK(a.rungs[0].seeds != a.rungs[1].seeds);
}

TEST_CASE("config json round trip") {
    auto cfg = small_speed_cfg();
    auto back = config_from_json(config_to_json(cfg));
    CHECK(back.kind == cfg.kind);
    CHECK(back.n_ladder == cfg.n_ladder);
    CHECK(back.replicas == cfg.replicas);
    CHECK(back.master_seed == cfg.master_seed);
    CHECK(report_to_json(run_experiment(back)) == report_to_json(run_experiment(cfg)));

    CHECK_THROWS_AS(config_from_json("{}"), DomainError);
    CHECK_THROWS_AS(config_from_json("{\"experiment\":\"nope\",\"measure\":{}}"), DomainError);
}

TEST_CASE("drift check: kingman correction settles at one quarter") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::drift_check;
    cfg.measure = LambdaSpec::kingman(1.0);
    cfg.n = 10000;
    cfg.epsilon = 0.3;
    auto rep = run_experiment(cfg);
    CHECK(rep.pass);
    CHECK(std::abs(rep.rungs.back().per_replica[0] - 0.25) < 0.01);

    // support restriction enforced
    cfg.measure = LambdaSpec::beta_family(1.5);
    CHECK_THROWS_AS(run_experiment(cfg), DomainError);
    cfg.measure = truncate(LambdaSpec::beta_family(1.5), 0.25);
    cfg.n = 2000;
    cfg.epsilon = 5.0;
    auto rep2 = run_experiment(cfg);
    CHECK(rep2.pass);
}

TEST_CASE("truncation ratio experiments") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::truncation_ratio;
    cfg.measure = LambdaSpec::kingman(1.0);
    cfg.eta = 0.25;
    cfg.s = 1e-4;
    cfg.epsilon = 0.05;
    auto rep = run_experiment(cfg);
    CHECK(rep.pass);
    CHECK(rep.rungs.back().mean == doctest::Approx(1.0).epsilon(1e-10));

    cfg.measure = LambdaSpec::beta_family(1.5);
    cfg.s = 1e-3;
    auto rep2 = run_experiment(cfg);
    CHECK(rep2.pass);
    CHECK(rep2.rungs.back().mean > 0.9);
    CHECK(rep2.rungs.back().mean <= 1.0 + 1e-9);

    cfg.eta = 1.5;
    CHECK_THROWS_AS(run_experiment(cfg), DomainError);
}

TEST_CASE("kingman extremal experiment at reduced scale") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::kingman_extremal;
    cfg.measure = LambdaSpec::kingman(1.0);
    cfg.n_ladder = {2000, 20000};
    cfg.s = 0.02;
    cfg.replicas = 40;
    cfg.epsilon = 0.25;
    cfg.master_seed = 11;
    auto rep = run_experiment(cfg);
    CHECK(rep.pass);
    CHECK(rep.detail.find("holds") != std::string::npos);

    auto bad = cfg;
    bad.measure = LambdaSpec::kingman(2.0);
    CHECK_THROWS_AS(run_experiment(bad), DomainError);
}

TEST_CASE("moment ratio decreases along the s-ladder (reduced scale)") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::moment_ratio;
    cfg.measure = LambdaSpec::kingman(1.0);
    cfg.n = 2000;
    cfg.s_ladder = {0.2, 0.1, 0.05};
    cfg.d_list = {1, 2};
    cfg.replicas = 40;
    cfg.master_seed = 5;
    auto rep = run_experiment(cfg);
    CHECK(rep.pass);
    CHECK(rep.rungs.size() == 6);
}

TEST_CASE("tree length ratio near one at reduced scale") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::tree_length_ratio;
    cfg.measure = LambdaSpec::kingman(1.0);
    cfg.n_ladder = {100, 1000};
    cfg.s = 0.5;
    cfg.replicas = 60;
    cfg.epsilon = 0.08;
    cfg.master_seed = 13;
    auto rep = run_experiment(cfg);
    CHECK(rep.pass);
    CHECK(std::abs(rep.rungs.back().mean - 1.0) < 0.08);
}

TEST_CASE("empty observation windows are rejected") {
    auto cfg = small_speed_cfg();
    cfg.s = 1e-4;  // below 10 u(100) = 0.2
    CHECK_THROWS_AS(run_experiment(cfg), DomainError);
}
