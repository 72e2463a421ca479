#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

// Dense n-dimensional arrays, double precision, row-major.
//
// Everything downstream (layers, network, training) assumes this layout:
// the last extent varies fastest, and all reductions run in ascending flat
// order so results are reproducible bit for bit between runs.

namespace cadre {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computation meets non-finite values at runtime (as opposed
/// to a caller passing malformed arguments). The trainer's divergence guard
/// relies on this distinction.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ordered list of positive extents. An empty Shape is the "no value yet"
/// placeholder of a default-constructed Tensor and is rejected by all ops.
struct Shape {
    std::vector<int> dims;

    Shape() = default;
    Shape(std::initializer_list<int> d) : dims(d) { validate(); }
    explicit Shape(std::vector<int> d) : dims(std::move(d)) { validate(); }

    int rank() const { return static_cast<int>(dims.size()); }
    int operator[](int i) const { return dims[static_cast<std::size_t>(i)]; }

    std::size_t numel() const {
        if (dims.empty()) return 0;
        std::size_t n = 1;
        for (int d : dims) n *= static_cast<std::size_t>(d);
        return n;
    }

    bool operator==(const Shape& o) const { return dims == o.dims; }
    bool operator!=(const Shape& o) const { return dims != o.dims; }

    std::string str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(dims[i]);
        }
        return s + "]";
    }

private:
    void validate() const {
        if (dims.empty())
            throw ShapeError("Shape: no extents given");
        for (int d : dims)
            if (d < 1)
                throw ShapeError("Shape: non-positive extent in " + str());
    }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(shape_.numel(), fill) {}
    Tensor(Shape shape, std::vector<double> values)
        : shape_(std::move(shape)), data_(std::move(values)) {
        if (data_.size() != shape_.numel())
            throw ShapeError("Tensor: " + std::to_string(data_.size()) +
                             " values do not fill shape " + shape_.str());
    }

    static Tensor zeros(Shape s) { return Tensor(std::move(s), 0.0); }
    static Tensor ones(Shape s) { return Tensor(std::move(s), 1.0); }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    // Row-major multi-index accessors for the ranks the project uses.
    double& at(int i, int j) {
        return data_[static_cast<std::size_t>(i) * shape_[1] + j];
    }
    double at(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * shape_[1] + j];
    }
    double& at(int i, int j, int k) {
        return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
    }
    double at(int i, int j, int k) const {
        return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
    }
    double& at(int i, int j, int k, int l) {
        return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                         shape_[3] + l];
    }
    double at(int i, int j, int k, int l) const {
        return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                         shape_[3] + l];
    }
    double& at(int i, int j, int k, int l, int m) {
        return data_[(((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                          shape_[3] + l) * shape_[4] + m];
    }
    double at(int i, int j, int k, int l, int m) const {
        return data_[(((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                          shape_[3] + l) * shape_[4] + m];
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Tensor& o) const {
        return shape_ == o.shape_ && data_ == o.data_;
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

/// True when both tensors hold bit-identical values (distinguishes -0.0
/// from +0.0 and treats NaN payloads literally, unlike operator==).
inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() +
                         " vs " + b.shape().str());
}

/// Standard matrix product of rank-2 tensors. The accumulation order is the
/// plain i,j,k triple loop with k ascending; tests hold the implementation to
/// that order bit for bit, so do not "optimize" the summation.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().rank() != 2 || b.shape().rank() != 2)
        throw ShapeError("matmul: need rank-2 operands, got " + a.shape().str() +
                         " and " + b.shape().str());
    if (a.shape()[1] != b.shape()[0])
        throw ShapeError("matmul: inner extents differ, " + a.shape().str() +
                         " vs " + b.shape().str());
    const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    Tensor c(Shape{m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t)
                acc += pa[static_cast<std::size_t>(i) * k + t] *
                       pb[static_cast<std::size_t>(t) * n + j];
            pc[static_cast<std::size_t>(i) * n + j] = acc;
        }
    return c;
}

inline Tensor ewise_mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "ewise_mul");
    Tensor c(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
    return c;
}

/// Same flat data, new shape; element counts must agree.
inline Tensor reshape(const Tensor& t, Shape s) {
    if (s.numel() != t.size())
        throw ShapeError("reshape: element count mismatch, " + t.shape().str() +
                         " (" + std::to_string(t.size()) + ") vs " + s.str() +
                         " (" + std::to_string(s.numel()) + ")");
    return Tensor(std::move(s), t.values());
}

/// Sum of all elements, sequential in flat order.
inline double reduce_sum(const Tensor& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += t[i];
    return acc;
}

/// Index of the maximum of a rank-1 tensor; ties resolve to the lowest index
/// so hardened one-hot predictions are deterministic.
inline int argmax(const Tensor& t) {
    if (t.empty())
        throw ShapeError("argmax: empty tensor");
    if (t.shape().rank() != 1)
        throw ShapeError("argmax: need rank-1, got " + t.shape().str());
    int best = 0;
    for (int i = 1; i < t.shape()[0]; ++i)
        if (t[static_cast<std::size_t>(i)] > t[static_cast<std::size_t>(best)]) best = i;
    return best;
}

// FNV-1a, used for parameter checksums and change detection in tests.
inline std::uint64_t fnv1a(const void* bytes, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const Tensor& t, std::uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a(t.data(), t.size() * sizeof(double), h);
}

}  // namespace cadre
