#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cadre/labels.hpp"
#include "cadre/layers.hpp"
#include "cadre/rng.hpp"
#include "cadre/tensor.hpp"

// The condition-adaptive network: a shared 3D-conv representation over a
// short clip, four scene-condition heads (glasses/illumination, head, mouth,
// eye), a multiplicative fusion block that modulates the representation by
// the scene conditions, and a drowsiness detector on the fused vector.
//
//   clip --rep--> a --+--> condition heads --> logits per condition
//                     |
//                     +--> fuse(a, gl, head, mouth, eye) --> v --> detector
//
// Fusion projects the flattened representation and the four condition
// one-hots to a common width d, multiplies the five projections elementwise,
// and maps the product up to the fused vector:
//
//   beta = combine * (Pa ⊙ Pgl ⊙ Ph ⊙ Pm ⊙ Pe) + bias,   v = softmax(beta)
//
// The condition inputs are always strict one-hots: ground truth while
// training, argmax-hardened head predictions at inference. That hardening is
// what makes the fused representation condition-adaptive without ever
// changing the fusion interface between the two modes.

namespace cadre {

struct NetworkConfig {
    // Clip geometry fed to the representation learner.
    int in_channels = 1;
    int frames = 5;
    int height = 32;
    int width = 32;

    // Six valid (unpadded) conv layers; spatial pooling after the second and
    // fourth. The first two layers also contract the temporal axis 5->3->1.
    std::vector<int> conv_channels = {8, 8, 16, 16, 32, 32};
    std::vector<std::array<int, 3>> conv_kernels = {
        {3, 3, 3}, {3, 3, 3}, {1, 3, 3}, {1, 3, 3}, {1, 1, 1}, {1, 1, 1}};
    std::vector<int> pool_after = {1, 3};  // 0-based conv indices
    std::array<int, 3> pool_window = {1, 2, 2};

    int head_hidden1 = 128;   // first hidden width of each condition head
    int head_hidden2 = 64;    // second hidden width
    int fusion_width = 64;    // common width d the five fusion inputs project to
    int fused_units = 64;     // width M of the fused vector v
    int detector_hidden = 64;

    /// Reduced geometry for finite-difference verification: small enough
    /// that central differences over every single parameter stay fast.
    static NetworkConfig tiny() {
        NetworkConfig c;
        c.height = 8;
        c.width = 8;
        c.conv_channels = {2, 2, 4, 4, 4, 4};
        c.conv_kernels = {{3, 3, 3}, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
        c.head_hidden1 = 8;
        c.head_hidden2 = 8;
        c.fusion_width = 8;
        c.fused_units = 8;
        c.detector_hidden = 8;
        return c;
    }

    bool operator==(const NetworkConfig&) const = default;
};

/// Condition head: two ReLU hidden layers, then class logits (losses and
/// reports apply softmax themselves).
struct SceneHeadParams {
    DenseParams h1, h2, out;
};

struct FusionParams {
    Tensor feature_proj;  // [d, rep_dim]
    Tensor glasses_proj;  // [d, 5]
    Tensor head_proj;     // [d, 3]
    Tensor mouth_proj;    // [d, 3]
    Tensor eye_proj;      // [d, 2]
    Tensor combine;       // [M, d]
    Tensor bias;          // [M]
};

/// Detector: one ReLU hidden layer, then the two class logits
/// (non-drowsiness, drowsiness).
struct DetectorParams {
    DenseParams hidden, out;
};

struct Network {
    NetworkConfig config;
    std::vector<Conv3dParams> convs;
    SceneHeadParams glasses, head, mouth, eye;
    FusionParams fusion;
    DetectorParams detector;
};

inline Shape clip_shape(const NetworkConfig& c) {
    return Shape{c.in_channels, c.frames, c.height, c.width};
}

inline void check_config(const NetworkConfig& c) {
    if (c.conv_channels.empty() || c.conv_channels.size() != c.conv_kernels.size())
        throw ShapeError(
            "config: conv_channels and conv_kernels must be non-empty and equal length");
    for (int idx : c.pool_after)
        if (idx < 0 || idx >= static_cast<int>(c.conv_channels.size()))
            throw ShapeError("config: pool_after index " + std::to_string(idx) +
                             " outside conv layer range");
    if (c.head_hidden1 < 1 || c.head_hidden2 < 1 || c.fusion_width < 1 ||
        c.fused_units < 1 || c.detector_hidden < 1)
        throw ShapeError("config: widths must be positive");
}

inline bool pools_after(const NetworkConfig& c, int conv_index) {
    for (int idx : c.pool_after)
        if (idx == conv_index) return true;
    return false;
}

/// Shape of the representation (last conv layer's activations); throws if a
/// kernel or pool does not fit the shapes flowing through.
inline Shape rep_output_shape(const NetworkConfig& c) {
    check_config(c);
    Shape s = clip_shape(c);
    for (std::size_t i = 0; i < c.conv_channels.size(); ++i) {
        Conv3dParams probe;
        probe.kernels = Tensor(Shape{c.conv_channels[i], s[0], c.conv_kernels[i][0],
                                     c.conv_kernels[i][1], c.conv_kernels[i][2]});
        probe.bias = Tensor(Shape{c.conv_channels[i]});
        s = conv3d_output_shape(s, probe);
        if (pools_after(c, static_cast<int>(i))) {
            for (int ax = 0; ax < 3; ++ax) {
                const int w = c.pool_window[static_cast<std::size_t>(ax)];
                if (w < 1 || s[ax + 1] % w != 0)
                    throw ShapeError("config: pool window does not divide conv" +
                                     std::to_string(i + 1) + " output " + s.str());
                s.dims[static_cast<std::size_t>(ax + 1)] /= w;
            }
        }
    }
    return s;
}

inline int rep_dim(const NetworkConfig& c) {
    return static_cast<int>(rep_output_shape(c).numel());
}

/// Multiply-accumulates for one clip through the conv stack, from geometry
/// alone. conv3d() reports the same number when run with a counter.
inline std::uint64_t rep_mac_count(const NetworkConfig& c) {
    check_config(c);
    Shape s = clip_shape(c);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < c.conv_channels.size(); ++i) {
        Conv3dParams probe;
        probe.kernels = Tensor(Shape{c.conv_channels[i], s[0], c.conv_kernels[i][0],
                                     c.conv_kernels[i][1], c.conv_kernels[i][2]});
        probe.bias = Tensor(Shape{c.conv_channels[i]});
        total += conv3d_mac_count(s, probe);
        s = conv3d_output_shape(s, probe);
        if (pools_after(c, static_cast<int>(i)))
            for (int ax = 0; ax < 3; ++ax)
                s.dims[static_cast<std::size_t>(ax + 1)] /=
                    c.pool_window[static_cast<std::size_t>(ax)];
    }
    return total;
}

// ---------------------------------------------------------------------------
// Parameter registry

struct ParamRef {
    std::string name;
    Tensor* tensor;
};

/// Every learnable tensor in a fixed, documented order: conv stack (kernels
/// then bias per layer), the four condition heads (glasses, head, mouth,
/// eye; h1/h2/out, weight before bias), fusion (five projections in input
/// order, then combine, then bias), detector (hidden, out). Init, SGD,
/// checkpoints and checksums all walk this order; that shared order is what
/// makes runs reproducible and checkpoint layouts stable.
inline std::vector<ParamRef> param_registry(Network& net) {
    std::vector<ParamRef> r;
    auto add_dense = [&r](const std::string& base, DenseParams& d) {
        r.push_back({base + ".weight", &d.weight});
        r.push_back({base + ".bias", &d.bias});
    };
    for (std::size_t i = 0; i < net.convs.size(); ++i) {
        const std::string base = "rep.conv" + std::to_string(i + 1);
        r.push_back({base + ".kernels", &net.convs[i].kernels});
        r.push_back({base + ".bias", &net.convs[i].bias});
    }
    auto add_head = [&](const std::string& base, SceneHeadParams& h) {
        add_dense(base + ".h1", h.h1);
        add_dense(base + ".h2", h.h2);
        add_dense(base + ".out", h.out);
    };
    add_head("su.glasses", net.glasses);
    add_head("su.head", net.head);
    add_head("su.mouth", net.mouth);
    add_head("su.eye", net.eye);
    r.push_back({"fusion.feature_proj", &net.fusion.feature_proj});
    r.push_back({"fusion.glasses_proj", &net.fusion.glasses_proj});
    r.push_back({"fusion.head_proj", &net.fusion.head_proj});
    r.push_back({"fusion.mouth_proj", &net.fusion.mouth_proj});
    r.push_back({"fusion.eye_proj", &net.fusion.eye_proj});
    r.push_back({"fusion.combine", &net.fusion.combine});
    r.push_back({"fusion.bias", &net.fusion.bias});
    add_dense("det.hidden", net.detector.hidden);
    add_dense("det.out", net.detector.out);
    return r;
}

inline std::vector<ParamRef> param_registry(const Network& net) {
    return param_registry(const_cast<Network&>(net));  // refs used read-only
}

inline std::size_t param_count(const Network& net) {
    std::size_t n = 0;
    for (const auto& p : param_registry(net)) n += p.tensor->size();
    return n;
}

/// FNV-1a over raw parameter bytes in registry order, optionally restricted
/// to names accepted by `pick`.
inline std::uint64_t param_checksum(const Network& net,
                                    const std::function<bool(const std::string&)>& pick = {}) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& p : param_registry(net))
        if (!pick || pick(p.name)) h = fnv1a(*p.tensor, h);
    return h;
}

// ---------------------------------------------------------------------------
// Allocation and initialization

inline Tensor glorot_fill(Tensor t, int fan_in, int fan_out, Rng& rng) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-s, s);
    return t;
}

inline DenseParams alloc_dense(int out, int in) {
    return DenseParams{Tensor(Shape{out, in}), Tensor(Shape{out})};
}

/// Allocates every tensor of the architecture described by `c` (validating
/// the geometry first) and fills weights in registry order from the stream
/// mix_seed(seed, kParamInit): Glorot-uniform everywhere except the four
/// condition projections, which start as positive gates near 1. Rank-1
/// tensors are biases and start at zero.
inline Network make_network(const NetworkConfig& c, std::uint64_t seed) {
    Shape rep_shape = rep_output_shape(c);  // validates conv/pool geometry
    const int a_dim = static_cast<int>(rep_shape.numel());

    Network net;
    net.config = c;
    int ch = c.in_channels;
    for (std::size_t i = 0; i < c.conv_channels.size(); ++i) {
        Conv3dParams p;
        p.kernels = Tensor(Shape{c.conv_channels[i], ch, c.conv_kernels[i][0],
                                 c.conv_kernels[i][1], c.conv_kernels[i][2]});
        p.bias = Tensor(Shape{c.conv_channels[i]});
        net.convs.push_back(std::move(p));
        ch = c.conv_channels[i];
    }
    auto alloc_head = [&](int out_classes) {
        return SceneHeadParams{alloc_dense(c.head_hidden1, a_dim),
                               alloc_dense(c.head_hidden2, c.head_hidden1),
                               alloc_dense(out_classes, c.head_hidden2)};
    };
    net.glasses = alloc_head(kNumGlassesClasses);
    net.head = alloc_head(kNumHeadClasses);
    net.mouth = alloc_head(kNumMouthClasses);
    net.eye = alloc_head(kNumEyeClasses);
    const int d = c.fusion_width, m = c.fused_units;
    net.fusion.feature_proj = Tensor(Shape{d, a_dim});
    net.fusion.glasses_proj = Tensor(Shape{d, kNumGlassesClasses});
    net.fusion.head_proj = Tensor(Shape{d, kNumHeadClasses});
    net.fusion.mouth_proj = Tensor(Shape{d, kNumMouthClasses});
    net.fusion.eye_proj = Tensor(Shape{d, kNumEyeClasses});
    net.fusion.combine = Tensor(Shape{m, d});
    net.fusion.bias = Tensor(Shape{m});
    net.detector = DetectorParams{alloc_dense(c.detector_hidden, m),
                                  alloc_dense(kNumDetectorClasses, c.detector_hidden)};

    // The condition projections multiply the feature projection element-wise,
    // so a symmetric small-scale start would shrink the five-factor product
    // to roughly the scale raised to the fifth power — after the softmax the
    // fused vector is then uniform to within float noise and the detector
    // sees a constant input. Starting them as positive gates near 1 keeps the
    // product at the feature projection's own scale.
    const Tensor* gates[] = {&net.fusion.glasses_proj, &net.fusion.head_proj,
                             &net.fusion.mouth_proj, &net.fusion.eye_proj};
    Rng rng(mix_seed(seed, seed_purpose::kParamInit));
    for (auto& p : param_registry(net)) {
        Tensor& t = *p.tensor;
        if (t.shape().rank() == 1) continue;  // bias, stays zero
        if (std::find(std::begin(gates), std::end(gates), p.tensor) != std::end(gates)) {
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(0.5, 1.5);
            continue;
        }
        int fan_in = 0, fan_out = 0;
        if (t.shape().rank() == 5) {  // conv kernels [out,in,kd,kh,kw]
            const int field = t.shape()[2] * t.shape()[3] * t.shape()[4];
            fan_in = t.shape()[1] * field;
            fan_out = t.shape()[0] * field;
        } else {  // dense / projection [out,in]
            fan_in = t.shape()[1];
            fan_out = t.shape()[0];
        }
        t = glorot_fill(std::move(t), fan_in, fan_out, rng);
    }
    return net;
}

// ---------------------------------------------------------------------------
// Representation learner

struct RepTrace {
    std::vector<Tensor> input;          // what each conv layer consumed
    std::vector<Tensor> pre;            // conv output before relu
    std::vector<MaxPool3dResult> pool;  // per layer; argmax empty when no pool
};

/// Conv -> relu -> (pool) per layer; returns the last layer's activations
/// [C_a, D_a, H_a, W_a]. `macs`, when given, accumulates the multiply-adds
/// actually executed.
inline Tensor rep_forward(const Network& net, const Tensor& clip, RepTrace* trace = nullptr,
                          std::uint64_t* macs = nullptr) {
    if (clip.shape() != clip_shape(net.config))
        throw ShapeError("rep_forward: clip " + clip.shape().str() +
                         " does not match config " + clip_shape(net.config).str());
    const std::size_t n = net.convs.size();
    if (trace) {
        trace->input.clear();
        trace->pre.clear();
        trace->pool.assign(n, MaxPool3dResult{});
    }
    Tensor x = clip;
    for (std::size_t i = 0; i < n; ++i) {
        if (trace) trace->input.push_back(x);
        Tensor pre = conv3d(x, net.convs[i], macs);
        x = relu(pre);
        if (trace) trace->pre.push_back(std::move(pre));
        if (pools_after(net.config, static_cast<int>(i))) {
            MaxPool3dResult pr = maxpool3d(x, net.config.pool_window);
            x = pr.output;
            if (trace) trace->pool[i] = std::move(pr);
        }
    }
    return x;
}

inline Tensor flatten(const Tensor& t) {
    return reshape(t, Shape{static_cast<int>(t.size())});
}

struct RepGrad {
    std::vector<Conv3dGrad> convs;
    Tensor d_clip;
};

/// Backward through the conv stack from a cotangent on the flattened
/// representation.
inline RepGrad rep_backward(const Network& net, const RepTrace& trace, const Tensor& d_flat) {
    const std::size_t n = net.convs.size();
    if (trace.input.size() != n || trace.pre.size() != n || trace.pool.size() != n)
        throw ShapeError("rep_backward: trace does not cover every conv layer");
    RepGrad g;
    g.convs.resize(n);
    Tensor d = d_flat;
    for (std::size_t ri = 0; ri < n; ++ri) {
        const std::size_t i = n - 1 - ri;
        if (!trace.pool[i].argmax.empty()) {
            d = reshape(d, trace.pool[i].output.shape());
            d = maxpool3d_backward(trace.pre[i].shape(), trace.pool[i].argmax, d);
        } else {
            d = reshape(d, trace.pre[i].shape());
        }
        d = relu_backward(trace.pre[i], d);
        g.convs[i] = conv3d_backward(trace.input[i], net.convs[i], d);
        d = g.convs[i].d_input;
    }
    g.d_clip = d;
    return g;
}

// ---------------------------------------------------------------------------
// Condition heads and detector

struct SceneHeadTrace {
    Tensor in;
    Tensor h1_pre, h1_act;
    Tensor h2_pre, h2_act;
    Tensor logits;
};

inline SceneHeadTrace scene_head_forward(const SceneHeadParams& p, const Tensor& a) {
    SceneHeadTrace t;
    t.in = a;
    t.h1_pre = dense(a, p.h1);
    t.h1_act = relu(t.h1_pre);
    t.h2_pre = dense(t.h1_act, p.h2);
    t.h2_act = relu(t.h2_pre);
    t.logits = dense(t.h2_act, p.out);
    return t;
}

struct SceneHeadGrad {
    Tensor d_in;
    DenseGrad h1, h2, out;
};

inline SceneHeadGrad scene_head_backward(const SceneHeadParams& p, const SceneHeadTrace& t,
                                         const Tensor& d_logits) {
    SceneHeadGrad g;
    g.out = dense_backward(t.h2_act, p.out, d_logits);
    Tensor d_h2 = relu_backward(t.h2_pre, g.out.d_input);
    g.h2 = dense_backward(t.h1_act, p.h2, d_h2);
    Tensor d_h1 = relu_backward(t.h1_pre, g.h2.d_input);
    g.h1 = dense_backward(t.in, p.h1, d_h1);
    g.d_in = g.h1.d_input;
    return g;
}

struct DetectorTrace {
    Tensor in;
    Tensor hidden_pre, hidden_act;
    Tensor logits;
    Tensor probs;  // softmax over (non-drowsiness, drowsiness)
};

inline DetectorTrace detector_forward(const DetectorParams& p, const Tensor& v) {
    DetectorTrace t;
    t.in = v;
    t.hidden_pre = dense(v, p.hidden);
    t.hidden_act = relu(t.hidden_pre);
    t.logits = dense(t.hidden_act, p.out);
    t.probs = softmax(t.logits);
    return t;
}

struct DetectorGrad {
    Tensor d_in;
    DenseGrad hidden, out;
};

inline DetectorGrad detector_backward(const DetectorParams& p, const DetectorTrace& t,
                                      const Tensor& d_logits) {
    DetectorGrad g;
    g.out = dense_backward(t.hidden_act, p.out, d_logits);
    Tensor d_hidden = relu_backward(t.hidden_pre, g.out.d_input);
    g.hidden = dense_backward(t.in, p.hidden, d_hidden);
    g.d_in = g.hidden.d_input;
    return g;
}

// ---------------------------------------------------------------------------
// Fusion

struct FusionTrace {
    Tensor a, gl, hd, mo, ey;   // inputs (the last four are strict one-hots)
    Tensor pa, pg, ph, pm, pe;  // their projections to width d
    Tensor prod;                // elementwise product of the five
    Tensor beta;                // combine * prod + bias
    Tensor v;                   // softmax(beta), the fused vector
};

inline Tensor project(const Tensor& mat, const Tensor& vec, const char* what) {
    if (vec.shape().rank() != 1 || mat.shape().rank() != 2 || mat.shape()[1] != vec.shape()[0])
        throw ShapeError(std::string("fusion: ") + what + " projection " + mat.shape().str() +
                         " does not accept " + vec.shape().str());
    const int rows = mat.shape()[0], cols = mat.shape()[1];
    Tensor out(Shape{rows});
    for (int i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* w = mat.data() + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) acc += w[j] * vec[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

/// Multiplicative fusion of the representation with the four condition
/// one-hots. Rejects condition vectors that are not strict one-hots — both
/// callers (training with ground truth, inference with hardened predictions)
/// must honor that contract.
inline FusionTrace fusion_forward(const FusionParams& p, const Tensor& a, const Tensor& gl,
                                  const Tensor& hd, const Tensor& mo, const Tensor& ey) {
    onehot_index(gl, "fusion glasses input");
    onehot_index(hd, "fusion head input");
    onehot_index(mo, "fusion mouth input");
    onehot_index(ey, "fusion eye input");
    FusionTrace t;
    t.a = a;
    t.gl = gl;
    t.hd = hd;
    t.mo = mo;
    t.ey = ey;
    t.pa = project(p.feature_proj, a, "feature");
    t.pg = project(p.glasses_proj, gl, "glasses");
    t.ph = project(p.head_proj, hd, "head");
    t.pm = project(p.mouth_proj, mo, "mouth");
    t.pe = project(p.eye_proj, ey, "eye");
    t.prod = ewise_mul(ewise_mul(ewise_mul(t.pa, t.pg), ewise_mul(t.ph, t.pm)), t.pe);
    if (p.bias.shape().rank() != 1 || p.combine.shape().rank() != 2 ||
        p.combine.shape()[0] != p.bias.shape()[0] || p.combine.shape()[1] != t.prod.shape()[0])
        throw ShapeError("fusion: combine " + p.combine.shape().str() + " / bias " +
                         p.bias.shape().str() + " do not match product " + t.prod.shape().str());
    const int m = p.combine.shape()[0], d = p.combine.shape()[1];
    t.beta = Tensor(Shape{m});
    for (int i = 0; i < m; ++i) {
        double acc = p.bias[static_cast<std::size_t>(i)];
        const double* w = p.combine.data() + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) acc += w[j] * t.prod[static_cast<std::size_t>(j)];
        t.beta[static_cast<std::size_t>(i)] = acc;
    }
    t.v = softmax(t.beta);
    return t;
}

struct FusionGrad {
    Tensor d_a;  // cotangent on the flattened representation
    Tensor d_feature_proj, d_glasses_proj, d_head_proj, d_mouth_proj, d_eye_proj;
    Tensor d_combine, d_bias;
};

/// Backward from a cotangent on beta (the caller pushes through the final
/// softmax with softmax_backward first). The condition one-hots are
/// constants, so no cotangents flow to them.
inline FusionGrad fusion_backward(const FusionParams& p, const FusionTrace& t,
                                  const Tensor& d_beta) {
    require_same_shape(d_beta, t.beta, "fusion_backward");
    const int m = p.combine.shape()[0], d = p.combine.shape()[1];
    FusionGrad g;
    g.d_bias = d_beta;
    g.d_combine = Tensor(p.combine.shape());
    Tensor d_prod(Shape{d});
    for (int i = 0; i < m; ++i) {
        const double go = d_beta[static_cast<std::size_t>(i)];
        const double* w = p.combine.data() + static_cast<std::size_t>(i) * d;
        double* dw = g.d_combine.data() + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) {
            dw[j] = go * t.prod[static_cast<std::size_t>(j)];
            d_prod[static_cast<std::size_t>(j)] += go * w[j];
        }
    }

    // d/dp_k of (pa*pg*ph*pm*pe) is the product of the other four factors.
    auto factor_grad = [&](const Tensor& f1, const Tensor& f2, const Tensor& f3,
                           const Tensor& f4) {
        Tensor out(Shape{d});
        for (int j = 0; j < d; ++j) {
            const auto k = static_cast<std::size_t>(j);
            out[k] = d_prod[k] * f1[k] * f2[k] * f3[k] * f4[k];
        }
        return out;
    };
    Tensor d_pa = factor_grad(t.pg, t.ph, t.pm, t.pe);
    Tensor d_pg = factor_grad(t.pa, t.ph, t.pm, t.pe);
    Tensor d_ph = factor_grad(t.pa, t.pg, t.pm, t.pe);
    Tensor d_pm = factor_grad(t.pa, t.pg, t.ph, t.pe);
    Tensor d_pe = factor_grad(t.pa, t.pg, t.ph, t.pm);

    // d_mat = outer(d_out, in); optionally also the cotangent on `in`.
    auto through_proj = [](const Tensor& mat, const Tensor& in, const Tensor& d_out,
                           Tensor& d_mat, Tensor* d_in) {
        const int rows = mat.shape()[0], cols = mat.shape()[1];
        d_mat = Tensor(mat.shape());
        for (int i = 0; i < rows; ++i) {
            const double go = d_out[static_cast<std::size_t>(i)];
            const double* w = mat.data() + static_cast<std::size_t>(i) * cols;
            double* dw = d_mat.data() + static_cast<std::size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) {
                dw[j] = go * in[static_cast<std::size_t>(j)];
                if (d_in) (*d_in)[static_cast<std::size_t>(j)] += go * w[j];
            }
        }
    };
    g.d_a = Tensor(t.a.shape());
    through_proj(p.feature_proj, t.a, d_pa, g.d_feature_proj, &g.d_a);
    through_proj(p.glasses_proj, t.gl, d_pg, g.d_glasses_proj, nullptr);
    through_proj(p.head_proj, t.hd, d_ph, g.d_head_proj, nullptr);
    through_proj(p.mouth_proj, t.mo, d_pm, g.d_mouth_proj, nullptr);
    through_proj(p.eye_proj, t.ey, d_pe, g.d_eye_proj, nullptr);
    return g;
}

// ---------------------------------------------------------------------------
// Whole-network forward

struct ForwardTrace {
    RepTrace rep;
    Tensor a;  // flattened representation shared by heads and fusion
    SceneHeadTrace glasses, head, mouth, eye;
    FusionTrace fusion;
    DetectorTrace detector;
};

/// Training-mode pass: fusion consumes the ground-truth condition one-hots,
/// so the detector path and the condition heads touch only through the
/// shared representation.
inline ForwardTrace forward_training(const Network& net, const Tensor& clip,
                                     const ClipLabels& labels, std::uint64_t* macs = nullptr) {
    check_clip_labels(labels);
    ForwardTrace t;
    t.a = flatten(rep_forward(net, clip, &t.rep, macs));
    t.glasses = scene_head_forward(net.glasses, t.a);
    t.head = scene_head_forward(net.head, t.a);
    t.mouth = scene_head_forward(net.mouth, t.a);
    t.eye = scene_head_forward(net.eye, t.a);
    t.fusion = fusion_forward(net.fusion, t.a, onehot(labels.glasses, kNumGlassesClasses),
                              onehot(labels.head, kNumHeadClasses),
                              onehot(labels.mouth, kNumMouthClasses),
                              onehot(labels.eye, kNumEyeClasses));
    t.detector = detector_forward(net.detector, t.fusion.v);
    return t;
}

/// Inference pass: each head's logits are hardened to a one-hot via argmax
/// (ties to the lowest class index) before entering fusion, keeping the
/// fusion interface identical to training.
inline ForwardTrace forward_inference(const Network& net, const Tensor& clip,
                                      std::uint64_t* macs = nullptr) {
    ForwardTrace t;
    t.a = flatten(rep_forward(net, clip, &t.rep, macs));
    t.glasses = scene_head_forward(net.glasses, t.a);
    t.head = scene_head_forward(net.head, t.a);
    t.mouth = scene_head_forward(net.mouth, t.a);
    t.eye = scene_head_forward(net.eye, t.a);
    t.fusion = fusion_forward(
        net.fusion, t.a, onehot(static_cast<int>(argmax(t.glasses.logits)), kNumGlassesClasses),
        onehot(static_cast<int>(argmax(t.head.logits)), kNumHeadClasses),
        onehot(static_cast<int>(argmax(t.mouth.logits)), kNumMouthClasses),
        onehot(static_cast<int>(argmax(t.eye.logits)), kNumEyeClasses));
    t.detector = detector_forward(net.detector, t.fusion.v);
    return t;
}

struct Prediction {
    int glasses = 0, head = 0, mouth = 0, eye = 0;  // hardened condition classes
    int drowsy = 0;                                 // detector argmax
    double drowsy_prob = 0.0;                       // probability of the drowsiness unit
};

/// Deterministic end-to-end inference on one clip.
inline Prediction predict_clip(const Network& net, const Tensor& clip,
                               std::uint64_t* macs = nullptr) {
    ForwardTrace t = forward_inference(net, clip, macs);
    Prediction p;
    p.glasses = static_cast<int>(argmax(t.glasses.logits));
    p.head = static_cast<int>(argmax(t.head.logits));
    p.mouth = static_cast<int>(argmax(t.mouth.logits));
    p.eye = static_cast<int>(argmax(t.eye.logits));
    p.drowsy = static_cast<int>(argmax(t.detector.probs));
    p.drowsy_prob = t.detector.probs[1];
    return p;
}

}  // namespace cadre
