// Independent reference implementations used to cross-check the library.
//
// Everything here is written the dumbest defensible way — straight loops,
// no shared helpers with the code under test — so an agreement between the
// two is evidence, not tautology.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "cadre/network.hpp"
#include "cadre/tensor.hpp"

namespace oracle {

// Plain triple-loop matrix product, [m,k] x [k,n] -> [m,n].
inline cadre::Tensor matmul(const cadre::Tensor& a, const cadre::Tensor& b) {
    const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    cadre::Tensor out(cadre::Shape{{m, n}});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int t = 0; t < k; ++t) s += a.at(i, t) * b.at(t, j);
            out.at(i, j) = s;
        }
    return out;
}

// Valid (no padding) strided 3D convolution via seven nested loops.
// input [c_in, d, h, w], kernels [c_out, c_in, kd, kh, kw].
inline cadre::Tensor conv3d(const cadre::Tensor& input, const cadre::Tensor& kernels,
                            const cadre::Tensor& bias, int sd, int sh, int sw) {
    const int ci = input.shape()[0], d = input.shape()[1], h = input.shape()[2],
              w = input.shape()[3];
    const int co = kernels.shape()[0], kd = kernels.shape()[2], kh = kernels.shape()[3],
              kw = kernels.shape()[4];
    const int od = (d - kd) / sd + 1, oh = (h - kh) / sh + 1, ow = (w - kw) / sw + 1;
    cadre::Tensor out(cadre::Shape{{co, od, oh, ow}});
    for (int oc = 0; oc < co; ++oc)
        for (int z = 0; z < od; ++z)
            for (int y = 0; y < oh; ++y)
                for (int x = 0; x < ow; ++x) {
                    double s = bias.values()[static_cast<std::size_t>(oc)];
                    for (int ic = 0; ic < ci; ++ic)
                        for (int a = 0; a < kd; ++a)
                            for (int b = 0; b < kh; ++b)
                                for (int c = 0; c < kw; ++c)
                                    s += input.at(ic, z * sd + a, y * sh + b, x * sw + c) *
                                         kernels.at(oc, ic, a, b, c);
                    out.at(oc, z, y, x) = s;
                }
    return out;
}

// Purely 2D convolution for the degenerate-depth comparison.
// input [c_in, h, w] (rank 3 packed as rank 4 with d=1 by the caller's
// convention is NOT used here — this oracle never sees a depth axis).
inline std::vector<double> conv2d(const std::vector<double>& input, int ci, int h, int w,
                                  const std::vector<double>& kernels, int co, int kh, int kw,
                                  const std::vector<double>& bias, int sh, int sw) {
    const int oh = (h - kh) / sh + 1, ow = (w - kw) / sw + 1;
    std::vector<double> out(static_cast<std::size_t>(co) * oh * ow);
    for (int oc = 0; oc < co; ++oc)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = bias[static_cast<std::size_t>(oc)];
                for (int ic = 0; ic < ci; ++ic)
                    for (int b = 0; b < kh; ++b)
                        for (int c = 0; c < kw; ++c) {
                            const std::size_t ii =
                                (static_cast<std::size_t>(ic) * h + (y * sh + b)) * w +
                                (x * sw + c);
                            const std::size_t ki =
                                ((static_cast<std::size_t>(oc) * ci + ic) * kh + b) * kw + c;
                            s += input[ii] * kernels[ki];
                        }
                out[(static_cast<std::size_t>(oc) * oh + y) * ow + x] = s;
            }
    return out;
}

// Softmax recomputed with long-double accumulation and explicit max search.
inline std::vector<double> softmax(const std::vector<double>& x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    long double z = 0.0L;
    for (double v : x) z += std::exp(static_cast<long double>(v - m));
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = static_cast<double>(std::exp(static_cast<long double>(x[i] - m)) / z);
    return out;
}

// Condition-adaptive fusion recomputed element by element: five projections,
// their elementwise product, the combining layer, and a softmax.
inline std::vector<double> fusion(const cadre::Tensor& a, const cadre::Tensor& gl,
                                  const cadre::Tensor& hd, const cadre::Tensor& mo,
                                  const cadre::Tensor& ey, const cadre::FusionParams& p) {
    const int d = p.feature_proj.shape()[0];
    const int m = p.combine.shape()[0];
    // The five projections are plain (bias-free) matrices; the single bias
    // enters after the combining layer.
    auto project = [d](const cadre::Tensor& w, const cadre::Tensor& in) {
        std::vector<double> out(static_cast<std::size_t>(d));
        const int n = w.shape()[1];
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j)
                s += w.at(i, j) * in.values()[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s;
        }
        return out;
    };
    const auto pa = project(p.feature_proj, a);
    const auto pg = project(p.glasses_proj, gl);
    const auto ph = project(p.head_proj, hd);
    const auto pm = project(p.mouth_proj, mo);
    const auto pe = project(p.eye_proj, ey);
    std::vector<double> beta(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double s = p.bias.values()[static_cast<std::size_t>(i)];
        for (int j = 0; j < d; ++j)
            s += p.combine.at(i, j) * (pa[static_cast<std::size_t>(j)] *
                                       pg[static_cast<std::size_t>(j)] *
                                       ph[static_cast<std::size_t>(j)] *
                                       pm[static_cast<std::size_t>(j)] *
                                       pe[static_cast<std::size_t>(j)]);
        beta[static_cast<std::size_t>(i)] = s;
    }
    return softmax(beta);
}

// Clip label by counting: the label present in a strict majority of frames,
// otherwise the middle frame's label.
inline int clip_label(const std::vector<int>& frames) {
    std::map<int, int> counts;
    for (int f : frames) ++counts[f];
    for (const auto& [label, n] : counts)
        if (2 * n > static_cast<int>(frames.size())) return label;
    return frames[frames.size() / 2];
}

// Central finite difference of a scalar function at x, one coordinate at a
// time. `eval` must not retain state between calls.
inline std::vector<double> fd_grad(const std::function<double(const std::vector<double>&)>& eval,
                                   std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = eval(x);
        x[i] = keep - h;
        const double down = eval(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace oracle
