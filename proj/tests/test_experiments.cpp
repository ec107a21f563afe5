#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "reuse/error.hpp"
#include "reuse/experiments.hpp"

using namespace reuse;
using hermite::HermiteSeries;

namespace {

trainer::RunRecord synthetic_record(const std::vector<double>& top) {
    trainer::RunRecord rec;
    for (std::size_t i = 0; i < top.size(); ++i) {
        trainer::Checkpoint c;
        c.step = static_cast<std::int64_t>(2 * i);
        c.top_decile = top[i];
        c.kappa = Vector::Constant(3, top[i] / 2);
        c.kappa[1] = top[i];
        rec.checkpoints.push_back(c);
    }
    return rec;
}

experiments::RunConfig tiny_config() {
    experiments::RunConfig cfg;
    cfg.link = HermiteSeries::basis(2);
    cfg.d = 16;
    cfg.N = 8;
    cfg.activation.family = network::ActivationFamily::Fixed;
    cfg.activation.fixed = HermiteSeries::basis(2);
    cfg.schedule.T11 = 40;
    cfg.schedule.T12 = 10;
    cfg.schedule.T2 = 200;
    cfg.schedule.lambda = 1e-6;
    cfg.test_samples = 500;
    cfg.seed = 4;
    return cfg;
}

}  // namespace

TEST(Experiments, RecoveryTime) {
    const auto rec = synthetic_record({0.1, 0.3, 0.6, 0.4, 0.9});
    EXPECT_EQ(experiments::recovery_time(rec, 0.5, experiments::Statistic::TopDecile), 2u);
    EXPECT_EQ(experiments::recovery_time(rec, 0.8, experiments::Statistic::TopDecile), 4u);
    EXPECT_FALSE(experiments::recovery_time(rec, 0.95, experiments::Statistic::TopDecile));
    EXPECT_EQ(experiments::recovery_time(rec, 0.5, experiments::Statistic::PerNeuronFirst), 2u);
    EXPECT_EQ(experiments::parse_statistic("per_neuron_first"), experiments::Statistic::PerNeuronFirst);
}

TEST(Experiments, FitScalingExactPowerLaw) {
    std::map<int, double> taus;
    for (int d : {64, 128, 256, 512}) taus[d] = 3.0 * std::pow(d, 1.5);
    const auto f = experiments::fit_scaling(taus);
    EXPECT_NEAR(f.slope, 1.5, 1e-12);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    taus.erase(64);
    taus.erase(128);
    EXPECT_THROW(experiments::fit_scaling(taus), Error);
}

TEST(Experiments, TestErrorOfPerfectStudent) {
    // a single neuron with the link as activation, aligned with theta, reproduces f_* exactly
    const auto link = model::LinkSpec::make(HermiteSeries::basis(2));
    auto st = network::init_network(1, 6, 1.0, 1);
    const Vector theta = model::make_direction(6, model::DirectionMode::Random, 2);
    st.W.row(0) = theta.transpose();
    st.a[0] = 1.0;
    st.activations = {network::ActivationSpec(HermiteSeries::basis(2))};
    const auto e = experiments::test_error(st, link, theta, 1000, 3);
    EXPECT_LT(e.mean, 1e-25);
}

TEST(Experiments, RunSingleDeterministic) {
    const auto cfg = tiny_config();
    const auto a = experiments::run_single(cfg);
    const auto b = experiments::run_single(cfg);
    EXPECT_EQ(a.state.W, b.state.W);
    EXPECT_EQ(a.state.a, b.state.a);
    ASSERT_TRUE(a.record.test_error);
    EXPECT_EQ(*a.record.test_error, *b.record.test_error);
    EXPECT_EQ(a.samples_consumed, 50u);
}

TEST(Experiments, ResumeMatchesUninterrupted) {
    auto cfg = tiny_config();
    cfg.schedule.T2 = 0;
    cfg.schedule.T12 = 0;
    const auto full = experiments::run_single(cfg);
    auto half = cfg;
    half.schedule.T11 = 20;
    const auto first = experiments::run_single(half);
    experiments::Resume r{first.phase1_state, first.samples_consumed};
    const auto second = experiments::run_single(half, &r);
    EXPECT_EQ(second.samples_consumed, 40u);
    EXPECT_LT((second.phase1_state.W - full.phase1_state.W).norm(), 1e-12);
}

TEST(Experiments, SweepDeterministicAndOrdered) {
    experiments::SweepGrid g;
    g.base = tiny_config();
    g.base.schedule.T2 = 0;
    g.d_values = {8, 16};
    g.n_values = {32, 64};
    g.modes = {trainer::TrainMode::PairedReuse, trainer::TrainMode::Online};
    g.seeds = 2;
    const auto r1 = experiments::run_sweep(g, 1);
    const auto r4 = experiments::run_sweep(g, 4);
    ASSERT_EQ(r1.cells.size(), 16u);
    std::ostringstream c1, c4;
    experiments::write_heatmap_csv(c1, r1.heatmap);
    experiments::write_heatmap_csv(c4, r4.heatmap);
    EXPECT_EQ(c1.str(), c4.str());
    EXPECT_EQ(c1.str().substr(0, c1.str().find('\n')), "d,n,stat,mean,std,count");
    for (std::size_t i = 0; i < r1.cells.size(); ++i) {
        ASSERT_TRUE(r1.cells[i].record) << r1.cells[i].error;
        EXPECT_EQ(r1.cells[i].record->checkpoints.back().kappa, r4.cells[i].record->checkpoints.back().kappa);
    }
}

TEST(Experiments, CellConfigSeeds) {
    experiments::SweepGrid g;
    g.base = tiny_config();
    const auto c = experiments::cell_config(g, 32, 128, trainer::TrainMode::Online, 3);
    EXPECT_EQ(c.d, 32);
    EXPECT_EQ(c.seed, g.base.seed + 3);
}
