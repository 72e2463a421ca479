#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cadre/tensor.hpp"

// Layer primitives: 3D convolution, 3D max pooling, ReLU, dense, softmax and
// softmax cross-entropy. Each has a forward evaluation and an analytic
// backward pass returning exact adjoints of sum(cotangent * forward(...)).
//
// Convolutions are "valid": no padding, every kernel placement lies fully
// inside the input. Output extents are (in - kernel) / stride + 1 per axis
// and the division must be exact. A 2D convolution is the degenerate case
// kernel_depth == input_depth == 1.

namespace cadre {

struct Conv3dParams {
    Tensor kernels;                  // [out_ch, in_ch, kd, kh, kw]
    Tensor bias;                     // [out_ch]
    std::array<int, 3> stride{1, 1, 1};
};

struct DenseParams {
    Tensor weight;                   // [out, in]
    Tensor bias;                     // [out]
};

struct Conv3dGrad {
    Tensor d_input;
    Tensor d_kernels;
    Tensor d_bias;
};

struct DenseGrad {
    Tensor d_input;
    Tensor d_weight;
    Tensor d_bias;
};

struct MaxPool3dResult {
    Tensor output;                   // [C, D/wd, H/wh, W/ww]
    std::vector<std::size_t> argmax; // flat input index feeding each output element
};

struct XentResult {
    double loss = 0.0;
    Tensor d_logits;
};

inline void check_conv3d_params(const Conv3dParams& p) {
    if (p.kernels.shape().rank() != 5)
        throw ShapeError("conv3d: kernels must be rank-5 [out_ch,in_ch,kd,kh,kw], got " +
                         p.kernels.shape().str());
    if (p.bias.shape().rank() != 1 || p.bias.shape()[0] != p.kernels.shape()[0])
        throw ShapeError("conv3d: bias " + p.bias.shape().str() +
                         " does not match out_ch of kernels " + p.kernels.shape().str());
    for (int s : p.stride)
        if (s < 1) throw ShapeError("conv3d: non-positive stride");
}

inline Shape conv3d_output_shape(const Shape& input, const Conv3dParams& p) {
    check_conv3d_params(p);
    if (input.rank() != 4)
        throw ShapeError("conv3d: input must be rank-4 [in_ch,D,H,W], got " + input.str());
    if (input[0] != p.kernels.shape()[1])
        throw ShapeError("conv3d: input channels " + input.str() +
                         " mismatch kernels " + p.kernels.shape().str());
    std::array<int, 3> out{};
    for (int ax = 0; ax < 3; ++ax) {
        const int in = input[ax + 1];
        const int k = p.kernels.shape()[ax + 2];
        const int s = p.stride[static_cast<std::size_t>(ax)];
        if (k > in)
            throw ShapeError("conv3d: kernel " + p.kernels.shape().str() +
                             " larger than input " + input.str());
        if ((in - k) % s != 0)
            throw ShapeError("conv3d: stride does not tile input, " + input.str() +
                             " with kernel " + p.kernels.shape().str());
        out[static_cast<std::size_t>(ax)] = (in - k) / s + 1;
    }
    return Shape{p.kernels.shape()[0], out[0], out[1], out[2]};
}

/// Multiply-accumulate count of one conv3d application: every output unit
/// reduces over its full receptive field across all input channels.
inline std::uint64_t conv3d_mac_count(const Shape& input, const Conv3dParams& p) {
    Shape out = conv3d_output_shape(input, p);
    const auto& ks = p.kernels.shape();
    std::uint64_t per_unit = static_cast<std::uint64_t>(ks[1]) * ks[2] * ks[3] * ks[4];
    return per_unit * static_cast<std::uint64_t>(out.numel());
}

/// Valid 3D convolution. No activation here; compose with relu() as needed.
/// When `macs` is given it accumulates the multiply-adds actually executed.
inline Tensor conv3d(const Tensor& input, const Conv3dParams& p,
                     std::uint64_t* macs = nullptr) {
    Shape out_shape = conv3d_output_shape(input.shape(), p);
    const int in_ch = input.shape()[0], D = input.shape()[1], H = input.shape()[2],
              W = input.shape()[3];
    const int out_ch = out_shape[0], OD = out_shape[1], OH = out_shape[2],
              OW = out_shape[3];
    const int kd = p.kernels.shape()[2], kh = p.kernels.shape()[3],
              kw = p.kernels.shape()[4];
    const int sd = p.stride[0], sh = p.stride[1], sw = p.stride[2];

    Tensor out(out_shape);
    const double* in = input.data();
    const double* ker = p.kernels.data();
    double* o = out.data();
    const std::size_t in_hw = static_cast<std::size_t>(H) * W;
    const std::size_t ker_per_oc = static_cast<std::size_t>(in_ch) * kd * kh * kw;
    std::uint64_t mac = 0;

    for (int oc = 0; oc < out_ch; ++oc) {
        const double b = p.bias[static_cast<std::size_t>(oc)];
        for (int od = 0; od < OD; ++od)
            for (int oh = 0; oh < OH; ++oh)
                for (int ow = 0; ow < OW; ++ow) {
                    double acc = b;
                    const double* kc = ker + static_cast<std::size_t>(oc) * ker_per_oc;
                    for (int ic = 0; ic < in_ch; ++ic) {
                        const double* base =
                            in + (static_cast<std::size_t>(ic) * D +
                                  static_cast<std::size_t>(od) * sd) * in_hw;
                        for (int z = 0; z < kd; ++z) {
                            const double* plane = base + static_cast<std::size_t>(z) * in_hw +
                                                  static_cast<std::size_t>(oh) * sh * W +
                                                  static_cast<std::size_t>(ow) * sw;
                            for (int y = 0; y < kh; ++y) {
                                const double* row = plane + static_cast<std::size_t>(y) * W;
                                for (int x = 0; x < kw; ++x)
                                    acc += row[x] * kc[(static_cast<std::size_t>(z) * kh + y) * kw + x];
                            }
                        }
                        kc += static_cast<std::size_t>(kd) * kh * kw;
                    }
                    *o++ = acc;
                    mac += ker_per_oc;
                }
    }
    if (macs) *macs += mac;
    return out;
}

/// Exact gradients of sum(d_output * conv3d(input, p)) w.r.t. input, kernels
/// and bias.
inline Conv3dGrad conv3d_backward(const Tensor& input, const Conv3dParams& p,
                                  const Tensor& d_output) {
    Shape out_shape = conv3d_output_shape(input.shape(), p);
    if (d_output.shape() != out_shape)
        throw ShapeError("conv3d_backward: cotangent " + d_output.shape().str() +
                         " does not match output " + out_shape.str());
    const int in_ch = input.shape()[0], D = input.shape()[1], H = input.shape()[2],
              W = input.shape()[3];
    const int out_ch = out_shape[0], OD = out_shape[1], OH = out_shape[2],
              OW = out_shape[3];
    const int kd = p.kernels.shape()[2], kh = p.kernels.shape()[3],
              kw = p.kernels.shape()[4];
    const int sd = p.stride[0], sh = p.stride[1], sw = p.stride[2];

    Conv3dGrad g{Tensor(input.shape()), Tensor(p.kernels.shape()), Tensor(p.bias.shape())};
    const double* in = input.data();
    const double* ker = p.kernels.data();
    const double* dout = d_output.data();
    const std::size_t in_hw = static_cast<std::size_t>(H) * W;
    const std::size_t ker_per_ic = static_cast<std::size_t>(kd) * kh * kw;

    std::size_t oidx = 0;
    for (int oc = 0; oc < out_ch; ++oc)
        for (int od = 0; od < OD; ++od)
            for (int oh = 0; oh < OH; ++oh)
                for (int ow = 0; ow < OW; ++ow, ++oidx) {
                    const double go = dout[oidx];
                    if (go == 0.0) continue;  // zero cotangents contribute nothing
                    g.d_bias[static_cast<std::size_t>(oc)] += go;
                    for (int ic = 0; ic < in_ch; ++ic) {
                        const std::size_t kbase =
                            (static_cast<std::size_t>(oc) * in_ch + ic) * ker_per_ic;
                        const std::size_t ibase =
                            (static_cast<std::size_t>(ic) * D +
                             static_cast<std::size_t>(od) * sd) * in_hw;
                        for (int z = 0; z < kd; ++z)
                            for (int y = 0; y < kh; ++y)
                                for (int x = 0; x < kw; ++x) {
                                    const std::size_t ii =
                                        ibase + static_cast<std::size_t>(z) * in_hw +
                                        (static_cast<std::size_t>(oh) * sh + y) * W +
                                        static_cast<std::size_t>(ow) * sw + x;
                                    const std::size_t ki =
                                        kbase + (static_cast<std::size_t>(z) * kh + y) * kw + x;
                                    g.d_kernels[ki] += go * in[ii];
                                    g.d_input[ii] += go * ker[ki];
                                }
                    }
                }
    return g;
}

/// Max pooling over non-overlapping windows; the window must tile the input
/// exactly. Ties inside a window route to the lowest flat index.
inline MaxPool3dResult maxpool3d(const Tensor& input, std::array<int, 3> window) {
    if (input.shape().rank() != 4)
        throw ShapeError("maxpool3d: input must be rank-4 [C,D,H,W], got " +
                         input.shape().str());
    for (int ax = 0; ax < 3; ++ax) {
        const int w = window[static_cast<std::size_t>(ax)];
        if (w < 1 || input.shape()[ax + 1] % w != 0)
            throw ShapeError("maxpool3d: window (" + std::to_string(window[0]) + "," +
                             std::to_string(window[1]) + "," + std::to_string(window[2]) +
                             ") does not divide input " + input.shape().str());
    }
    const int C = input.shape()[0], D = input.shape()[1], H = input.shape()[2],
              W = input.shape()[3];
    const int wd = window[0], wh = window[1], ww = window[2];
    MaxPool3dResult r;
    r.output = Tensor(Shape{C, D / wd, H / wh, W / ww});
    r.argmax.resize(r.output.size());

    std::size_t oidx = 0;
    for (int c = 0; c < C; ++c)
        for (int od = 0; od < D / wd; ++od)
            for (int oh = 0; oh < H / wh; ++oh)
                for (int ow = 0; ow < W / ww; ++ow, ++oidx) {
                    double best = 0.0;
                    std::size_t best_i = 0;
                    bool first = true;
                    for (int z = 0; z < wd; ++z)
                        for (int y = 0; y < wh; ++y)
                            for (int x = 0; x < ww; ++x) {
                                const std::size_t ii =
                                    ((static_cast<std::size_t>(c) * D + od * wd + z) * H +
                                     oh * wh + y) * W + ow * ww + x;
                                const double v = input[ii];
                                if (first || v > best) {
                                    best = v;
                                    best_i = ii;
                                    first = false;
                                }
                            }
                    r.output[oidx] = best;
                    r.argmax[oidx] = best_i;
                }
    return r;
}

/// Routes each output cotangent back to the input element that won its
/// window, so sum(d_input) == sum(d_output).
inline Tensor maxpool3d_backward(const Shape& input_shape,
                                 const std::vector<std::size_t>& argmax,
                                 const Tensor& d_output) {
    if (argmax.size() != d_output.size())
        throw ShapeError("maxpool3d_backward: index map size mismatch");
    Tensor d_input(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i)
        d_input[argmax[i]] += d_output[i];
    return d_input;
}

inline Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        out[i] = input[i] > 0.0 ? input[i] : 0.0;
    return out;
}

/// Subgradient at exactly 0 is 0.
inline Tensor relu_backward(const Tensor& input, const Tensor& d_output) {
    require_same_shape(input, d_output, "relu_backward");
    Tensor d_input(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        d_input[i] = input[i] > 0.0 ? d_output[i] : 0.0;
    return d_input;
}

inline void check_dense_params(const DenseParams& p) {
    if (p.weight.shape().rank() != 2)
        throw ShapeError("dense: weight must be rank-2 [out,in], got " +
                         p.weight.shape().str());
    if (p.bias.shape().rank() != 1 || p.bias.shape()[0] != p.weight.shape()[0])
        throw ShapeError("dense: bias " + p.bias.shape().str() + " does not match weight " +
                         p.weight.shape().str());
}

/// weight * input + bias for a rank-1 input.
inline Tensor dense(const Tensor& input, const DenseParams& p) {
    check_dense_params(p);
    if (input.shape().rank() != 1 || input.shape()[0] != p.weight.shape()[1])
        throw ShapeError("dense: input " + input.shape().str() + " does not match weight " +
                         p.weight.shape().str());
    const int out = p.weight.shape()[0], in = p.weight.shape()[1];
    Tensor y(Shape{out});
    for (int i = 0; i < out; ++i) {
        double acc = p.bias[static_cast<std::size_t>(i)];
        const double* w = p.weight.data() + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) acc += w[j] * input[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = acc;
    }
    return y;
}

inline DenseGrad dense_backward(const Tensor& input, const DenseParams& p,
                                const Tensor& d_output) {
    check_dense_params(p);
    if (d_output.shape().rank() != 1 || d_output.shape()[0] != p.weight.shape()[0])
        throw ShapeError("dense_backward: cotangent " + d_output.shape().str() +
                         " does not match weight " + p.weight.shape().str());
    const int out = p.weight.shape()[0], in = p.weight.shape()[1];
    DenseGrad g{Tensor(input.shape()), Tensor(p.weight.shape()), Tensor(p.bias.shape())};
    for (int i = 0; i < out; ++i) {
        const double go = d_output[static_cast<std::size_t>(i)];
        g.d_bias[static_cast<std::size_t>(i)] = go;
        const double* w = p.weight.data() + static_cast<std::size_t>(i) * in;
        double* dw = g.d_weight.data() + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) {
            dw[j] = go * input[static_cast<std::size_t>(j)];
            g.d_input[static_cast<std::size_t>(j)] += go * w[j];
        }
    }
    return g;
}

/// Numerically stable softmax (max subtraction). Output sums to 1 and every
/// entry lies in (0,1).
inline Tensor softmax(const Tensor& input) {
    if (input.empty() || input.shape().rank() != 1)
        throw ShapeError("softmax: need non-empty rank-1 input, got " +
                         input.shape().str());
    if (!input.all_finite())
        throw NumericError("softmax: non-finite input");
    double mx = input[0];
    for (std::size_t i = 1; i < input.size(); ++i) mx = std::max(mx, input[i]);
    Tensor out(input.shape());
    double sum = 0.0;
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = std::exp(input[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < input.size(); ++i) out[i] /= sum;
    return out;
}

/// Jacobian-vector product through softmax: d_in_i = y_i*(d_out_i - sum_j y_j*d_out_j)
/// where y is the softmax output.
inline Tensor softmax_backward(const Tensor& softmax_out, const Tensor& d_output) {
    require_same_shape(softmax_out, d_output, "softmax_backward");
    double dot = 0.0;
    for (std::size_t i = 0; i < softmax_out.size(); ++i) dot += softmax_out[i] * d_output[i];
    Tensor d_input(softmax_out.shape());
    for (std::size_t i = 0; i < softmax_out.size(); ++i)
        d_input[i] = softmax_out[i] * (d_output[i] - dot);
    return d_input;
}

inline int onehot_index(const Tensor& onehot, const char* op) {
    int target = -1;
    for (std::size_t i = 0; i < onehot.size(); ++i) {
        if (onehot[i] == 1.0) {
            if (target >= 0)
                throw std::invalid_argument(std::string(op) + ": one-hot has multiple high bits");
            target = static_cast<int>(i);
        } else if (onehot[i] != 0.0) {
            throw std::invalid_argument(std::string(op) + ": one-hot entries must be 0 or 1");
        }
    }
    if (target < 0)
        throw std::invalid_argument(std::string(op) + ": one-hot has no high bit");
    return target;
}

/// loss = -log softmax(logits)[target]; d_logits = softmax(logits) - onehot.
inline XentResult softmax_cross_entropy(const Tensor& logits, const Tensor& onehot) {
    require_same_shape(logits, onehot, "softmax_cross_entropy");
    const int target = onehot_index(onehot, "softmax_cross_entropy");
    double mx = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
    XentResult r;
    r.loss = std::log(sum) - (logits[static_cast<std::size_t>(target)] - mx);
    r.d_logits = Tensor(logits.shape());
    for (std::size_t i = 0; i < logits.size(); ++i)
        r.d_logits[i] = std::exp(logits[i] - mx) / sum;
    r.d_logits[static_cast<std::size_t>(target)] -= 1.0;
    return r;
}

}  // namespace cadre
