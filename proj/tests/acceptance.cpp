// Release gate: every acceptance criterion in one binary, one verdict line
// per criterion, exit 0 only when all hold. The heavyweight training runs
// live here rather than in the unit suite so routine test cycles stay quick.

#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cadre/cadre.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

using cadre::Dataset;
using cadre::Shape;
using cadre::Tensor;

namespace {

using Verdict = std::optional<std::string>;  // failure detail; empty means pass

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("cadre_accept_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

Tensor random_tensor(const Shape& s, cadre::Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(s);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

bool all_plus_zero(const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::bit_cast<std::uint64_t>(t[i]) != 0) return false;
    return true;
}

bool any_nonzero(const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] != 0.0) return true;
    return false;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// Same reduced-geometry network section the CLI tests use: 8x8 synthetic
// clips do not leave room for the stock conv plan.
const char* kTinyNetworkJson = R"({
  "network": {
    "conv_channels": [2, 2, 4, 4, 4, 4],
    "conv_kernels": [[3, 3, 3], [3, 3, 3], [1, 1, 1], [1, 1, 1], [1, 1, 1], [1, 1, 1]],
    "head_hidden1": 8,
    "head_hidden2": 8,
    "fusion_width": 8,
    "fused_units": 8,
    "detector_hidden": 8
  }
})";

// 1 -------------------------------------------------------------------------

Verdict criterion_gradcheck_cli() {
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = run_shell(std::string(CADRE_BIN) + " gradcheck --seed 1 >/dev/null 2>&1");
    const double secs = seconds_since(t0);
    if (rc != 0) return "gradcheck exited with code " + std::to_string(rc);
    if (secs >= 60.0) return "gradcheck needed " + fmt(secs) + "s against a 60s budget";
    return {};
}

// 2 -------------------------------------------------------------------------

Verdict criterion_conv_oracle() {
    cadre::Rng rng(9001);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        cadre::Conv3dParams p;
        const int ci = 1 + rng.uniform_int(3), co = 1 + rng.uniform_int(3);
        const int kd = 1 + rng.uniform_int(3), kh = 1 + rng.uniform_int(3),
                  kw = 1 + rng.uniform_int(3);
        p.stride = {1 + rng.uniform_int(2), 1 + rng.uniform_int(2), 1 + rng.uniform_int(2)};
        // Output extents of 1 or 2, so inputs tile exactly and stay <= 6.
        const int d = rng.uniform_int(2) * p.stride[0] + kd;
        const int h = rng.uniform_int(2) * p.stride[1] + kh;
        const int w = rng.uniform_int(2) * p.stride[2] + kw;
        p.kernels = random_tensor(Shape{co, ci, kd, kh, kw}, rng);
        p.bias = random_tensor(Shape{co}, rng);
        const Tensor in = random_tensor(Shape{ci, d, h, w}, rng);

        const Tensor lib = cadre::conv3d(in, p);
        const Tensor ref =
            oracle::conv3d(in, p.kernels, p.bias, p.stride[0], p.stride[1], p.stride[2]);
        if (lib.shape() != ref.shape())
            return "conv output " + lib.shape().str() + " vs oracle " + ref.shape().str();
        for (std::size_t i = 0; i < lib.size(); ++i)
            worst = std::max(worst, std::abs(lib[i] - ref[i]));
    }
    if (worst > 1e-12) return "conv worst abs diff " + fmt(worst) + " above 1e-12";

    // Depth-degenerate case against an oracle that has no depth axis at all.
    const int ci = 2, co = 3, h = 9, w = 8, kh = 3, kw = 2;
    cadre::Conv3dParams p;
    p.stride = {1, 2, 2};
    p.kernels = random_tensor(Shape{co, ci, 1, kh, kw}, rng);
    p.bias = random_tensor(Shape{co}, rng);
    const Tensor in = random_tensor(Shape{ci, 1, h, w}, rng);
    const Tensor lib = cadre::conv3d(in, p);
    const auto ref = oracle::conv2d(in.values(), ci, h, w, p.kernels.values(), co, kh, kw,
                                    p.bias.values(), 2, 2);
    if (lib.size() != ref.size()) return "2D degenerate output sizes differ";
    double worst2d = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
        worst2d = std::max(worst2d, std::abs(lib[i] - ref[i]));
    if (worst2d > 1e-12) return "2D degenerate worst abs diff " + fmt(worst2d) + " above 1e-12";
    return {};
}

// 3 -------------------------------------------------------------------------

Verdict criterion_fusion_oracle() {
    cadre::Rng rng(9002);
    double worst = 0.0, worst_sum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + rng.uniform_int(6), m = 1 + rng.uniform_int(6),
                  rep = 1 + rng.uniform_int(6);
        cadre::FusionParams p;
        p.feature_proj = random_tensor(Shape{d, rep}, rng);
        p.glasses_proj = random_tensor(Shape{d, 5}, rng);
        p.head_proj = random_tensor(Shape{d, 3}, rng);
        p.mouth_proj = random_tensor(Shape{d, 3}, rng);
        p.eye_proj = random_tensor(Shape{d, 2}, rng);
        p.combine = random_tensor(Shape{m, d}, rng);
        p.bias = random_tensor(Shape{m}, rng);
        const Tensor a = random_tensor(Shape{rep}, rng);
        const Tensor gl = cadre::onehot(rng.uniform_int(5), 5);
        const Tensor hd = cadre::onehot(rng.uniform_int(3), 3);
        const Tensor mo = cadre::onehot(rng.uniform_int(3), 3);
        const Tensor ey = cadre::onehot(rng.uniform_int(2), 2);

        const cadre::FusionTrace t = cadre::fusion_forward(p, a, gl, hd, mo, ey);
        const auto ref = oracle::fusion(a, gl, hd, mo, ey, p);
        double sum = 0.0;
        for (std::size_t i = 0; i < t.v.size(); ++i) {
            worst = std::max(worst, std::abs(t.v[i] - ref[i]));
            sum += t.v[i];
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

        // Zero one projection: the product annihilates and the
        // pre-activation collapses to the bias, bit for bit.
        cadre::FusionParams z = p;
        z.eye_proj = Tensor(Shape{d, 2});
        const cadre::FusionTrace tz = cadre::fusion_forward(z, a, gl, hd, mo, ey);
        if (!cadre::bitwise_equal(tz.beta, z.bias))
            return "zeroed projection did not collapse beta to the bias (trial " +
                   std::to_string(trial) + ")";
    }
    if (worst > 1e-12) return "fusion worst abs diff " + fmt(worst) + " above 1e-12";
    if (worst_sum > 1e-12) return "fused vector sum off by " + fmt(worst_sum);
    return {};
}

// 4 -------------------------------------------------------------------------

Verdict criterion_endpoint_gradients() {
    cadre::NetworkConfig nc = cadre::NetworkConfig::tiny();
    cadre::Network net = cadre::make_network(nc, 3);
    // Nudge the zero-initialized biases positive so no ReLU path is dead:
    // a dead path would make the "this endpoint leaves real gradients"
    // half of the check vacuously fail for upstream layers.
    cadre::Rng bias_rng(cadre::mix_seed(3, cadre::seed_purpose::kParamInit, 1));
    for (auto& slot : cadre::param_registry(net))
        if (slot.tensor->shape().rank() == 1)
            for (std::size_t i = 0; i < slot.tensor->size(); ++i)
                (*slot.tensor)[i] += bias_rng.uniform(0.05, 0.15);
    cadre::SynthConfig sc;
    sc.height = nc.height;
    sc.width = nc.width;
    const Dataset ds = cadre::synth_generate(6, 3, sc);
    std::vector<const cadre::LabeledClip*> batch;
    for (const auto& c : ds.clips) batch.push_back(&c);

    cadre::TrainConfig tc;
    tc.lambda = 1.0;  // pure detection: the condition heads must sit out
    const cadre::BatchLoss det_only = cadre::joint_loss(net, batch, tc, false);
    for (const auto& e : det_only.grads.registry()) {
        const bool is_head = e.name.rfind("su.", 0) == 0;
        if (is_head && !all_plus_zero(*e.tensor))
            return "lambda=1 left a nonzero gradient in " + e.name;
        if (!is_head && !any_nonzero(*e.tensor))
            return "lambda=1 unexpectedly zeroed " + e.name;
    }

    tc.lambda = 0.0;  // pure condition learning: fusion and detector sit out
    const cadre::BatchLoss su_only = cadre::joint_loss(net, batch, tc, false);
    for (const auto& e : su_only.grads.registry()) {
        const bool frozen = e.name.rfind("fusion.", 0) == 0 || e.name.rfind("det.", 0) == 0;
        if (frozen && !all_plus_zero(*e.tensor))
            return "lambda=0 left a nonzero gradient in " + e.name;
        if (!frozen && !any_nonzero(*e.tensor))
            return "lambda=0 unexpectedly zeroed " + e.name;
    }
    return {};
}

// 5 -------------------------------------------------------------------------

Verdict criterion_phase_freeze() {
    cadre::NetworkConfig nc = cadre::NetworkConfig::tiny();
    cadre::SynthConfig sc;
    sc.height = nc.height;
    sc.width = nc.width;
    const Dataset ds = cadre::synth_generate(40, 11, sc);

    cadre::TrainConfig tc;  // stock phase1_steps = 200
    tc.batch_size = 8;      // 5 steps per epoch
    tc.epochs = 43;         // 215 steps, comfortably past step 210
    tc.seed = 11;

    auto fusion_or_det = [](const std::string& n) {
        return n.rfind("fusion.", 0) == 0 || n.rfind("det.", 0) == 0;
    };
    cadre::Network net = cadre::make_network(nc, tc.seed);
    const std::uint64_t init_hash = cadre::param_checksum(net, fusion_or_det);
    std::vector<std::uint64_t> hashes;  // hashes[s] taken right after step s
    cadre::train(net, ds, tc, nullptr,
                 [&](const cadre::Network& stepped, const cadre::StepRecord&) {
                     hashes.push_back(cadre::param_checksum(stepped, fusion_or_det));
                 });
    if (hashes.size() != 215)
        return "expected 215 optimizer steps, saw " + std::to_string(hashes.size());
    for (int s = 0; s < 200; ++s)
        if (hashes[static_cast<std::size_t>(s)] != init_hash)
            return "fusion/detector parameters moved during phase 1, at step " +
                   std::to_string(s);
    if (hashes[210] == init_hash) return "fusion/detector parameters still frozen at step 210";
    return {};
}

// 6 -------------------------------------------------------------------------

Verdict criterion_overfit_stock_config() {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = cadre::synth_generate(40, 42, {});
    cadre::NetworkConfig nc;  // stock geometry for 32x32 clips
    cadre::TrainConfig tc;    // stock schedule: 200 epochs, phase 1 = 200 steps
    cadre::Network net = cadre::make_network(nc, tc.seed);
    cadre::train(net, ds, tc);
    const cadre::MetricsReport rep = cadre::evaluate(net, ds);
    const double secs = seconds_since(t0);

    if (secs > 600.0) return "needed " + fmt(secs) + "s against a 600s budget";
    if (rep.overall.accuracy < 0.95)
        return "train accuracy " + fmt(rep.overall.accuracy) + " below 0.95";
    for (const auto& s : rep.scenarios)
        if (s.detection.accuracy < 0.9)
            return "scenario " + std::to_string(s.scenario) + " accuracy " +
                   fmt(s.detection.accuracy) + " below 0.9";
    return {};
}

// 7 -------------------------------------------------------------------------

Verdict criterion_holdout_generalization() {
    const Dataset all = cadre::synth_generate(250, 42, {});
    Dataset train_ds, eval_ds;
    train_ds.clips.assign(all.clips.begin(), all.clips.begin() + 200);
    eval_ds.clips.assign(all.clips.begin() + 200, all.clips.end());

    cadre::NetworkConfig nc;
    cadre::TrainConfig tc;
    tc.batch_size = 8;  // 25 steps per epoch on 200 clips
    tc.epochs = 80;
    cadre::Network net = cadre::make_network(nc, tc.seed);
    cadre::train(net, train_ds, tc);
    const cadre::MetricsReport rep = cadre::evaluate(net, eval_ds);

    if (rep.total_clips != 50)
        return "expected 50 held-out clips, saw " + std::to_string(rep.total_clips);
    if (rep.overall.accuracy < 0.8)
        return "held-out accuracy " + fmt(rep.overall.accuracy) + " below 0.8";
    if (!rep.auc_defined) return "AUC undefined on the held-out split";
    if (rep.roc.auc < 0.85) return "held-out AUC " + fmt(rep.roc.auc) + " below 0.85";
    return {};
}

// 8 -------------------------------------------------------------------------

Verdict criterion_clip_label_exhaustive() {
    for (int k = 1; k <= 5; ++k) {
        std::vector<int> frames(5, 0);
        while (true) {
            const int lib = cadre::clip_label_from_frames(frames);
            const int ref = oracle::clip_label(frames);
            if (lib != ref) {
                std::string tuple;
                for (int f : frames) tuple += std::to_string(f) + " ";
                return "clip label " + std::to_string(lib) + " vs oracle " +
                       std::to_string(ref) + " on [ " + tuple + "]";
            }
            std::size_t i = 0;  // odometer over all k^5 tuples
            while (i < frames.size() && ++frames[i] == k) frames[i++] = 0;
            if (i == frames.size()) break;
        }
    }
    return {};
}

// 9 -------------------------------------------------------------------------

Verdict criterion_metrics() {
    cadre::Rng rng(9009);
    for (int trial = 0; trial < 1000; ++trial) {
        cadre::Confusion c;
        c.tp = rng.uniform_int(30);
        c.fp = rng.uniform_int(30);
        c.fn = rng.uniform_int(30);
        c.tn = rng.uniform_int(30);
        const cadre::BinaryMetrics m = cadre::metrics(c);
        const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp),
                     fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
        const double P = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double DR = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double F = P + DR > 0 ? 2 * P * DR / (P + DR) : 0.0;
        const double A = c.total() > 0 ? (tp + tn) / (tp + fp + fn + tn) : 0.0;
        if (std::abs(m.precision - P) > 1e-12 || std::abs(m.detection_rate - DR) > 1e-12 ||
            std::abs(m.f_measure - F) > 1e-12 || std::abs(m.accuracy - A) > 1e-12)
            return "metrics disagree with direct formulas on random table " +
                   std::to_string(trial);
    }

    // A perfect classifier scores 1.0 across the board. 32 clips per class
    // keeps every ROC coordinate dyadic, so the area is exactly 1.0.
    std::vector<int> preds, truths;
    std::vector<double> scores;
    for (int i = 0; i < 64; ++i) {
        const int label = i % 2;
        preds.push_back(label);
        truths.push_back(label);
        scores.push_back(label ? 0.6 + i * 0.005 : i * 0.005);
    }
    const cadre::BinaryMetrics perfect = cadre::metrics(cadre::confusion(preds, truths));
    if (perfect.precision != 1.0 || perfect.detection_rate != 1.0 ||
        perfect.f_measure != 1.0 || perfect.accuracy != 1.0)
        return "perfect classifier did not score 1.0 on every metric";
    if (cadre::roc_auc(scores, truths).auc != 1.0)
        return "perfect separation gave AUC " + fmt(cadre::roc_auc(scores, truths).auc);

    // Shuffled labels carry no signal, so the AUC sits at chance level.
    const int n = 10000;
    std::vector<double> s2(static_cast<std::size_t>(n));
    std::vector<int> t2(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        s2[static_cast<std::size_t>(i)] = (i + 0.5) / n;
        t2[static_cast<std::size_t>(i)] = i % 2;
    }
    rng.shuffle(t2);
    const double auc = cadre::roc_auc(s2, t2).auc;
    if (std::abs(auc - 0.5) > 0.02)
        return "shuffled-label AUC " + fmt(auc) + " outside 0.5 +/- 0.02";
    return {};
}

// 10 ------------------------------------------------------------------------

Verdict criterion_augmentation() {
    const Dataset ds = cadre::synth_generate(3, 77, {});
    for (const auto& item : ds.clips) {
        const auto outs = cadre::augment(item);
        if (outs.size() != 8)
            return "augment produced " + std::to_string(outs.size()) + " variants, not 8";
        for (const auto& v : outs) {
            if (v.labels.glasses != item.labels.glasses || v.labels.head != item.labels.head ||
                v.labels.mouth != item.labels.mouth || v.labels.eye != item.labels.eye ||
                v.labels.drowsy != item.labels.drowsy ||
                v.labels.scenario != item.labels.scenario)
                return "augmentation changed a label";
            if (v.clip.shape() != item.clip.shape()) return "augmentation changed the extents";
        }
        if (!cadre::bitwise_equal(outs[0].clip, item.clip))
            return "variant 0 is not the original clip";
        const Tensor flipped = cadre::hflip_clip(item.clip);
        if (!cadre::bitwise_equal(outs[4].clip, flipped))
            return "variant 4 is not the plain horizontal flip";
        if (!cadre::bitwise_equal(cadre::hflip_clip(flipped), item.clip))
            return "horizontal flip is not a bitwise involution";
    }
    return {};
}

// 11 ------------------------------------------------------------------------

Verdict criterion_roundtrips() {
    TempDir tmp("roundtrip");
    cadre::SynthConfig sc;
    sc.height = 16;
    sc.width = 16;
    const Dataset ds = cadre::synth_generate(6, 5, sc);
    cadre::save_dataset(tmp.file("a.cadd"), ds);
    const Dataset back = cadre::load_dataset(tmp.file("a.cadd"));
    if (back.clips.size() != ds.clips.size()) return "dataset clip count changed in transit";
    for (std::size_t i = 0; i < ds.clips.size(); ++i) {
        if (!cadre::bitwise_equal(back.clips[i].clip, ds.clips[i].clip))
            return "dataset pixels not bitwise identical after reload";
        const auto& x = ds.clips[i].labels;
        const auto& y = back.clips[i].labels;
        if (x.glasses != y.glasses || x.head != y.head || x.mouth != y.mouth ||
            x.eye != y.eye || x.drowsy != y.drowsy || x.scenario != y.scenario)
            return "dataset labels changed in transit";
    }
    cadre::save_dataset(tmp.file("b.cadd"), back);
    if (slurp(tmp.file("a.cadd")) != slurp(tmp.file("b.cadd")))
        return "dataset re-save is not byte-identical";

    const cadre::Network net = cadre::make_network(cadre::NetworkConfig::tiny(), 9);
    cadre::save_checkpoint(tmp.file("a.cadn"), net);
    const cadre::Network back_net = cadre::load_checkpoint(tmp.file("a.cadn"));
    if (!(back_net.config == net.config)) return "checkpoint config changed in transit";
    const auto ps = cadre::param_registry(net);
    const auto qs = cadre::param_registry(back_net);
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (!cadre::bitwise_equal(*ps[i].tensor, *qs[i].tensor))
            return "checkpoint tensor " + ps[i].name + " not bitwise identical after reload";
    cadre::save_checkpoint(tmp.file("b.cadn"), back_net);
    if (slurp(tmp.file("a.cadn")) != slurp(tmp.file("b.cadn")))
        return "checkpoint re-save is not byte-identical";
    return {};
}

// 12 ------------------------------------------------------------------------

Verdict criterion_run_determinism() {
    const std::string bin(CADRE_BIN);
    const std::string quiet = " >/dev/null 2>&1";
    TempDir a("determinism_a"), b("determinism_b");
    for (const TempDir* dir : {&a, &b}) {
        std::ofstream(dir->file("tiny.json")) << kTinyNetworkJson;
        if (run_shell(bin + " synth --out " + dir->file("data.cadd") +
                      " --clips 12 --seed 7 --size 8x8" + quiet) != 0)
            return "synth run failed";
        if (run_shell(bin + " train --data " + dir->file("data.cadd") + " --out " +
                      dir->file("ck.cadn") + " --config " + dir->file("tiny.json") +
                      " --epochs 3 --phase1-steps 5 --batch 4 --seed 7" + quiet) != 0)
            return "train run failed";
        if (run_shell(bin + " eval --data " + dir->file("data.cadd") + " --checkpoint " +
                      dir->file("ck.cadn") + " --report " + dir->file("rep") + quiet) != 0)
            return "eval run failed";
    }
    if (slurp(a.file("ck.cadn")) != slurp(b.file("ck.cadn")))
        return "checkpoints differ between identically-seeded runs";
    if (slurp(a.file("rep.json")) != slurp(b.file("rep.json")))
        return "JSON reports differ between identically-seeded runs";
    if (slurp(a.file("rep.txt")) != slurp(b.file("rep.txt")))
        return "text reports differ between identically-seeded runs";
    return {};
}

}  // namespace

int main() {
    struct Criterion {
        const char* title;
        Verdict (*fn)();
    };
    const std::vector<Criterion> criteria = {
        {"joint-loss gradients match central finite differences (CLI gradcheck, 60s budget)",
         criterion_gradcheck_cli},
        {"conv3d matches a nested-loop oracle on 100 random cases plus a depth-degenerate 2D case",
         criterion_conv_oracle},
        {"fusion matches a loop oracle, sums to one, and a zeroed projection collapses to the bias",
         criterion_fusion_oracle},
        {"loss-balance endpoints keep the silenced gradient paths bitwise zero",
         criterion_endpoint_gradients},
        {"fusion/detector parameters hold still for 200 phase-1 steps, then move",
         criterion_phase_freeze},
        {"stock config overfits 40 clips: accuracy >= 0.95, every scenario >= 0.9, within 600s",
         criterion_overfit_stock_config},
        {"held-out 200/50 split reaches accuracy >= 0.8 and AUC >= 0.85",
         criterion_holdout_generalization},
        {"clip labeling matches a counting oracle on every 5-tuple over alphabets 1..5",
         criterion_clip_label_exhaustive},
        {"metrics match direct formulas; perfect classifier scores 1.0; shuffled labels at chance",
         criterion_metrics},
        {"augmentation yields exactly 8 label-preserving variants; the flip is an involution",
         criterion_augmentation},
        {"dataset and checkpoint round trips are bitwise exact",
         criterion_roundtrips},
        {"identically-seeded synth+train+eval runs produce byte-identical artifacts",
         criterion_run_determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict verdict;
        try {
            verdict = criteria[i].fn();
        } catch (const std::exception& e) {
            verdict = std::string("unhandled exception: ") + e.what();
        }
        const double secs = seconds_since(t0);
        std::ostringstream line;
        line << (verdict ? "[FAIL]" : "[PASS]") << ' ' << std::setw(2) << i + 1 << ". "
             << criteria[i].title << " (" << std::fixed << std::setprecision(1) << secs << "s)";
        if (verdict) line << ": " << *verdict;
        std::cout << line.str() << std::endl;
        if (verdict) ++failed;
    }
    if (failed == 0) {
        std::cout << "acceptance: all " << criteria.size() << " criteria hold" << std::endl;
        return 0;
    }
    std::cout << "acceptance: " << failed << " of " << criteria.size() << " criteria failed"
              << std::endl;
    return 1;
}
