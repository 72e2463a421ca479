#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "cadre/data.hpp"
#include "cadre/training.hpp"

#include "oracles.hpp"

using cadre::Dataset;
using cadre::Network;
using cadre::NetworkConfig;
using cadre::TrainConfig;

namespace {

Dataset tiny_synth(int n, std::uint64_t seed) {
    cadre::SynthConfig sc;
    sc.height = 8;
    sc.width = 8;
    return cadre::synth_generate(n, seed, sc);
}

std::vector<const cadre::LabeledClip*> whole_batch(const Dataset& ds) {
    std::vector<const cadre::LabeledClip*> batch;
    for (const auto& c : ds.clips) batch.push_back(&c);
    return batch;
}

// Fresh networks keep dead ReLU paths exactly on the kink (zero biases, zero
// pre-activations), where central differences measure a half-slope. Tests
// that probe finite differences directly move to a generic point first, the
// same way grad_check does internally.
void nudge_biases(Network& net, std::uint64_t seed) {
    cadre::Rng rng(cadre::mix_seed(seed, cadre::seed_purpose::kParamInit, 1));
    for (auto& slot : cadre::param_registry(net))
        if (slot.tensor->shape().rank() == 1)
            for (std::size_t i = 0; i < slot.tensor->size(); ++i)
                (*slot.tensor)[i] += rng.uniform(0.05, 0.15);
}

bool tensor_is_plus_zero(const cadre::Tensor& t) {
    for (double v : t.values())
        if (std::bit_cast<std::uint64_t>(v) != 0) return false;
    return true;
}

bool grads_are_plus_zero(const cadre::Gradients& g, const std::string& prefix) {
    for (const auto& p : g.registry())
        if (p.name.rfind(prefix, 0) == 0 && !tensor_is_plus_zero(*p.tensor)) return false;
    return true;
}

}  // namespace

TEST_CASE("train config validation") {
    TrainConfig c;
    CHECK_NOTHROW(cadre::check_train_config(c));
    c.lambda = 1.2;
    CHECK_THROWS_AS(cadre::check_train_config(c), std::invalid_argument);
    c = TrainConfig();
    c.beta = 0.0;
    CHECK_THROWS_AS(cadre::check_train_config(c), std::invalid_argument);
    c = TrainConfig();
    c.batch_size = 0;
    CHECK_THROWS_AS(cadre::check_train_config(c), std::invalid_argument);
    c = TrainConfig();
    c.epochs = 0;
    CHECK_THROWS_AS(cadre::check_train_config(c), std::invalid_argument);
}

TEST_CASE("joint loss composes the per-clip cross entropies") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 31);
    const Dataset ds = tiny_synth(3, 31);
    const auto batch = whole_batch(ds);
    TrainConfig cfg;
    cfg.lambda = 0.3;
    cfg.beta = 0.25;

    // Recompute the expected losses clip by clip, straight from the forward
    // traces.
    double su = 0.0, det = 0.0;
    for (const auto* item : batch) {
        const auto t = cadre::forward_training(net, item->clip, item->labels);
        su += cadre::softmax_cross_entropy(t.glasses.logits, cadre::onehot(item->labels.glasses, 5)).loss;
        su += cadre::softmax_cross_entropy(t.head.logits, cadre::onehot(item->labels.head, 3)).loss;
        su += cadre::softmax_cross_entropy(t.mouth.logits, cadre::onehot(item->labels.mouth, 3)).loss;
        su += cadre::softmax_cross_entropy(t.eye.logits, cadre::onehot(item->labels.eye, 2)).loss;
        det += cadre::softmax_cross_entropy(t.detector.logits,
                                            cadre::onehot(item->labels.drowsy, 2)).loss;
    }
    const double e_su = cfg.beta * su / 3.0;
    const double e_det = det / 3.0;

    const auto joint = cadre::joint_loss(net, batch, cfg, false);
    CHECK(joint.e_su == Catch::Approx(e_su).margin(1e-12));
    CHECK(joint.e_det == Catch::Approx(e_det).margin(1e-12));
    CHECK(joint.joint ==
          Catch::Approx((1.0 - cfg.lambda) * e_su + cfg.lambda * e_det).margin(1e-12));

    const auto phase1 = cadre::joint_loss(net, batch, cfg, true);
    CHECK(phase1.joint == Catch::Approx(e_su).margin(1e-12));
    CHECK(phase1.e_det == Catch::Approx(e_det).margin(1e-12));  // still reported
}

TEST_CASE("lambda endpoints skip the unused backward paths bitwise") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 33);
    const Dataset ds = tiny_synth(4, 33);
    const auto batch = whole_batch(ds);

    TrainConfig cfg;
    cfg.lambda = 0.0;  // condition losses only: fusion and detector untouched
    auto at0 = cadre::joint_loss(net, batch, cfg, false);
    CHECK(grads_are_plus_zero(at0.grads, "fusion."));
    CHECK(grads_are_plus_zero(at0.grads, "det."));
    CHECK(!grads_are_plus_zero(at0.grads, "su."));
    CHECK(!grads_are_plus_zero(at0.grads, "rep."));

    cfg.lambda = 1.0;  // detection only: the condition heads are untouched
    auto at1 = cadre::joint_loss(net, batch, cfg, false);
    CHECK(grads_are_plus_zero(at1.grads, "su."));
    CHECK(!grads_are_plus_zero(at1.grads, "fusion."));
    CHECK(!grads_are_plus_zero(at1.grads, "det."));
    // The representation still learns through fusion's feature path.
    CHECK(!grads_are_plus_zero(at1.grads, "rep."));

    cfg.lambda = 0.5;  // phase 1 skips fusion/detector regardless of lambda
    auto p1 = cadre::joint_loss(net, batch, cfg, true);
    CHECK(grads_are_plus_zero(p1.grads, "fusion."));
    CHECK(grads_are_plus_zero(p1.grads, "det."));
    CHECK(!grads_are_plus_zero(p1.grads, "su."));
}

TEST_CASE("batch loss equals the mean of single-clip losses") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 35);
    const Dataset ds = tiny_synth(2, 35);
    TrainConfig cfg;

    const auto both = cadre::joint_loss(net, whole_batch(ds), cfg, false);
    const auto first = cadre::joint_loss(net, {&ds.clips[0]}, cfg, false);
    const auto second = cadre::joint_loss(net, {&ds.clips[1]}, cfg, false);
    CHECK(both.joint == Catch::Approx((first.joint + second.joint) / 2.0).margin(1e-12));

    // Gradients average the same way.
    const auto regs = both.grads.registry();
    const auto r1 = first.grads.registry();
    const auto r2 = second.grads.registry();
    for (std::size_t i = 0; i < regs.size(); ++i) {
        const auto& g = *regs[i].tensor;
        const auto& a = *r1[i].tensor;
        const auto& b = *r2[i].tensor;
        for (std::size_t k = 0; k < g.size(); ++k)
            CHECK(g[k] == Catch::Approx((a[k] + b[k]) / 2.0).margin(1e-10));
    }
}

TEST_CASE("sgd_step applies p -= eta * g, and only where picked") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 37);
    const Network before = net;
    cadre::Gradients grads(net);
    grads.by_name("det.out.bias").values() = {1.0, -2.0};
    grads.by_name("su.eye.out.bias").values() = {0.5, 0.5};

    cadre::sgd_step(net, grads, 0.1);
    {
        const auto regs = cadre::param_registry(net);
        const auto olds = cadre::param_registry(before);
        for (std::size_t i = 0; i < regs.size(); ++i) {
            if (regs[i].name == "det.out.bias") {
                CHECK((*regs[i].tensor)[0] == Catch::Approx(-0.1).margin(1e-15));
                CHECK((*regs[i].tensor)[1] == Catch::Approx(0.2).margin(1e-15));
            } else if (regs[i].name == "su.eye.out.bias") {
                CHECK((*regs[i].tensor)[0] == Catch::Approx(-0.05).margin(1e-15));
            } else {
                // zero gradient: p -= eta*0 must not change even the bits
                CHECK(cadre::bitwise_equal(*regs[i].tensor, *olds[i].tensor));
            }
        }
    }

    // With the phase-1 filter, detector parameters stay untouched.
    Network net2 = before;
    cadre::sgd_step(net2, grads, 0.1, cadre::phase1_param);
    const auto regs2 = cadre::param_registry(net2);
    const auto olds2 = cadre::param_registry(before);
    for (std::size_t i = 0; i < regs2.size(); ++i) {
        if (regs2[i].name == "su.eye.out.bias")
            CHECK((*regs2[i].tensor)[0] == Catch::Approx(-0.05).margin(1e-15));
        else
            CHECK(cadre::bitwise_equal(*regs2[i].tensor, *olds2[i].tensor));
    }
}

TEST_CASE("phase1_param splits the registry into the two training phases") {
    CHECK(cadre::phase1_param("rep.conv1.kernels"));
    CHECK(cadre::phase1_param("su.glasses.h1.weight"));
    CHECK(!cadre::phase1_param("fusion.combine"));
    CHECK(!cadre::phase1_param("det.out.weight"));
}

TEST_CASE("two-phase schedule: fusion and detector move only after phase 1") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 39);
    const Dataset ds = tiny_synth(8, 39);
    TrainConfig cfg;
    cfg.batch_size = 4;  // 2 steps per epoch
    cfg.epochs = 5;      // 10 steps total
    cfg.phase1_steps = 6;
    cfg.learning_rate = 0.05;

    auto frozen = [](const std::string& n) {
        return n.rfind("fusion.", 0) == 0 || n.rfind("det.", 0) == 0;
    };
    const std::uint64_t init_hash = cadre::param_checksum(net, frozen);
    std::vector<std::uint64_t> hashes;
    std::vector<int> phases;
    cadre::train(net, ds, cfg, nullptr,
                 [&](const Network& n, const cadre::StepRecord& rec) {
                     hashes.push_back(cadre::param_checksum(n, frozen));
                     phases.push_back(rec.phase);
                 });

    REQUIRE(hashes.size() == 10);
    for (int s = 0; s < 6; ++s) {
        CHECK(hashes[static_cast<std::size_t>(s)] == init_hash);
        CHECK(phases[static_cast<std::size_t>(s)] == 1);
    }
    CHECK(hashes[6] != init_hash);
    for (int s = 6; s < 10; ++s) CHECK(phases[static_cast<std::size_t>(s)] == 2);
}

TEST_CASE("training is reproducible and logs one tab-separated line per step") {
    const Dataset ds = tiny_synth(10, 41);
    TrainConfig cfg;
    cfg.batch_size = 4;  // 3 steps per epoch, last batch short
    cfg.epochs = 3;
    cfg.phase1_steps = 4;

    Network a = cadre::make_network(NetworkConfig::tiny(), 41);
    std::ostringstream log_a;
    const auto ra = cadre::train(a, ds, cfg, &log_a);
    Network b = cadre::make_network(NetworkConfig::tiny(), 41);
    const auto rb = cadre::train(b, ds, cfg);

    CHECK(ra.final_checksum == rb.final_checksum);
    REQUIRE(ra.steps.size() == 9);  // ceil(10/4)=3 batches x 3 epochs
    REQUIRE(rb.steps.size() == 9);
    for (std::size_t i = 0; i < ra.steps.size(); ++i) {
        CHECK(ra.steps[i].joint == rb.steps[i].joint);  // bitwise reproducible
        CHECK(ra.steps[i].step == static_cast<int>(i));
    }

    std::istringstream lines(log_a.str());
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        CHECK(std::count(line.begin(), line.end(), '\t') == 4);  // 5 columns
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("three consecutive non-finite losses abort with DivergenceError") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 43);
    // Poison a detector bias: every forward pass now hands the detector
    // softmax an infinite logit, the batch loss comes back NaN with zero
    // gradients, and parameters stop moving — the guard must fire on the
    // third strike rather than loop forever.
    net.detector.out.bias[0] = std::numeric_limits<double>::infinity();

    const Dataset ds = tiny_synth(6, 43);
    TrainConfig cfg;
    cfg.batch_size = 2;
    cfg.epochs = 4;
    CHECK_THROWS_AS(cadre::train(net, ds, cfg), cadre::DivergenceError);

    int steps_seen = 0;
    Network net2 = cadre::make_network(NetworkConfig::tiny(), 43);
    net2.detector.out.bias[0] = std::numeric_limits<double>::infinity();
    try {
        cadre::train(net2, ds, cfg, nullptr,
                     [&](const Network&, const cadre::StepRecord&) { ++steps_seen; });
    } catch (const cadre::DivergenceError&) {
    }
    CHECK(steps_seen == 3);  // strikes one, two, three — then the throw
}

TEST_CASE("a healthy run does not trip the divergence guard") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 45);
    const Dataset ds = tiny_synth(6, 45);
    TrainConfig cfg;
    cfg.batch_size = 3;
    cfg.epochs = 2;
    cfg.phase1_steps = 2;
    const auto report = cadre::train(net, ds, cfg);
    for (const auto& s : report.steps) CHECK(std::isfinite(s.joint));
}

TEST_CASE("fd_compare flags deliberately corrupted gradients") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 47);
    nudge_biases(net, 47);
    const Dataset ds = tiny_synth(2, 47);
    const auto batch = whole_batch(ds);
    TrainConfig cfg;

    auto loss = cadre::joint_loss(net, batch, cfg, false);
    const auto honest = cadre::fd_compare(net, batch, cfg, false, loss.grads, 1e-4);
    CHECK(honest.pass);
    CHECK(honest.max_rel_err < 1e-4);

    // A 25% error in one fusion-bias component must be caught.
    cadre::Tensor& fb = loss.grads.by_name("fusion.bias");
    fb[0] = fb[0] * 1.25 + 1e-3;
    const auto caught = cadre::fd_compare(net, batch, cfg, false, loss.grads, 1e-4);
    CHECK(!caught.pass);
    bool flagged = false;
    for (const auto& g : caught.groups)
        if (g.name == "fusion.bias") flagged = g.max_rel_err > 1e-4;
    CHECK(flagged);
}

TEST_CASE("gradient check verdict is stable across 10 seeds") {
    // Across many inits the worst coordinate-wise deviation is governed by
    // finite-difference roundoff on small-magnitude gradients (a few 1e-4),
    // while an actual defect registers orders of magnitude above that — the
    // corrupted-gradient case above lands near 1e-1. 1e-3 separates the two.
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto report = cadre::grad_check(1e-3, seeds);
    CHECK(report.pass);
    CHECK(report.max_rel_err < 1e-3);
    CHECK(!report.groups.empty());
}

TEST_CASE("joint loss descends step over step under full-batch training") {
    Network net = cadre::make_network(NetworkConfig::tiny(), 49);
    const Dataset ds = tiny_synth(16, 49);
    TrainConfig cfg;
    cfg.batch_size = 16;  // full batch: every step is a true gradient step,
                          // so descent is not obscured by shuffle noise
    cfg.epochs = 60;
    cfg.phase1_steps = 10;
    cfg.learning_rate = 0.1;
    const auto report = cadre::train(net, ds, cfg);
    REQUIRE(report.steps.size() == 60);

    std::vector<double> joint;
    for (const auto& s : report.steps) joint.push_back(s.joint);
    // The objective is reweighted at the phase boundary, so compare steps
    // only within each phase.
    int fell = 0, total = 0;
    for (int t = 1; t < static_cast<int>(joint.size()); ++t) {
        if (t == cfg.phase1_steps) continue;
        ++total;
        if (joint[static_cast<std::size_t>(t)] < joint[static_cast<std::size_t>(t - 1)]) ++fell;
    }
    CHECK(static_cast<double>(fell) >= 0.9 * static_cast<double>(total));
    CHECK(joint[9] < joint[0]);      // net fall across phase 1
    CHECK(joint.back() < joint[10]); // net fall across phase 2
}
