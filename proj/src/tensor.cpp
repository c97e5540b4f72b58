#include "tesp/tensor.hpp"

#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

#include "tesp/errors.hpp"

namespace tesp {

Index product(const Dims& dims) {
    return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

static void check_dims(const Dims& dims) {
    if (dims.empty()) throw DimensionError("tensor needs at least one mode");
    for (Index d : dims)
        if (d < 1) throw DimensionError("tensor extents must be positive");
}

Tensor::Tensor(Dims dims) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_ = cvec::Zero(product(dims_));
}

Tensor::Tensor(Dims dims, cvec data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != product(dims_)) throw DimensionError("tensor data size does not match extents");
}

Index Tensor::dim(int mode) const {
    if (mode < 1 || mode > order()) throw DimensionError("mode out of range");
    return dims_[mode - 1];
}

Index Tensor::linear_index(const Dims& idx) const {
    if (idx.size() != dims_.size()) throw DimensionError("index arity mismatch");
    Index lin = 0;
    for (std::size_t k = dims_.size(); k-- > 0;) {
        if (idx[k] < 0 || idx[k] >= dims_[k]) throw DimensionError("index out of range");
        lin = lin * dims_[k] + idx[k];
    }
    return lin;
}

cplx& Tensor::at(const Dims& idx) { return data_[linear_index(idx)]; }
const cplx& Tensor::at(const Dims& idx) const { return data_[linear_index(idx)]; }

namespace {

// Column stride of every mode inside the mode-n unfolding (mode entry unused).
std::vector<Index> unfold_strides(const Dims& dims, int mode) {
    const int n = static_cast<int>(dims.size());
    const int k = mode - 1;
    std::vector<Index> stride(n, 0);
    Index s = 1;
    // fastest is k-1, then k-2, ..., 0, then N-1, ..., k+1 (slowest)
    for (int step = 1; step < n; ++step) {
        int m = ((k - step) % n + n) % n;
        stride[m] = s;
        s *= dims[m];
    }
    return stride;
}

template <class F>
void for_each_index(const Dims& dims, F&& f) {
    const std::size_t n = dims.size();
    Dims idx(n, 0);
    const Index total = product(dims);
    for (Index lin = 0; lin < total; ++lin) {
        f(lin, idx);
        for (std::size_t k = 0; k < n; ++k) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
}

}  // namespace

cmat unfold(const Tensor& t, int mode) {
    if (mode < 1 || mode > t.order()) throw DimensionError("unfold: mode out of range");
    const Dims& dims = t.dims();
    const Index rows = dims[mode - 1];
    cmat out(rows, t.size() / rows);
    auto stride = unfold_strides(dims, mode);
    for_each_index(dims, [&](Index lin, const Dims& idx) {
        Index col = 0;
        for (std::size_t m = 0; m < idx.size(); ++m) col += idx[m] * stride[m];
        out(idx[mode - 1], col) = t.data()[lin];
    });
    return out;
}

Tensor fold(const cmat& mat, int mode, const Dims& dims) {
    if (mode < 1 || mode > static_cast<int>(dims.size())) throw DimensionError("fold: mode out of range");
    if (mat.rows() != dims[mode - 1] || mat.size() != product(dims))
        throw DimensionError("fold: matrix shape does not match extents");
    cvec data(product(dims));
    auto stride = unfold_strides(dims, mode);
    for_each_index(dims, [&](Index lin, const Dims& idx) {
        Index col = 0;
        for (std::size_t m = 0; m < idx.size(); ++m) col += idx[m] * stride[m];
        data[lin] = mat(idx[mode - 1], col);
    });
    return Tensor(dims, std::move(data));
}

Tensor mode_product(const Tensor& t, const cmat& u, int mode) {
    if (mode < 1 || mode > t.order()) throw DimensionError("mode_product: mode out of range");
    if (u.cols() != t.dim(mode)) throw DimensionError("mode_product: matrix columns must equal mode extent");
    Dims dims = t.dims();
    dims[mode - 1] = u.rows();
    return fold(u * unfold(t, mode), mode, dims);
}

HosvdFactors hosvd_truncated(const Tensor& t, const std::vector<Index>& ranks) {
    if (static_cast<int>(ranks.size()) != t.order()) throw DimensionError("hosvd: one rank per mode required");
    HosvdFactors h;
    Tensor core = t;
    for (int n = 1; n <= t.order(); ++n) {
        const Index r = ranks[n - 1];
        if (r < 1 || r > t.dim(n)) throw DimensionError("hosvd: rank exceeds mode extent");
        cmat un = unfold(t, n);
        Eigen::JacobiSVD<cmat> svd(un, Eigen::ComputeThinU);
        h.factors.push_back(svd.matrixU().leftCols(r));
        h.mode_singular_values.push_back(svd.singularValues());
        core = mode_product(core, h.factors.back().adjoint(), n);
    }
    h.core = std::move(core);
    return h;
}

Tensor hosvd_reconstruct(const HosvdFactors& h) {
    Tensor t = h.core;
    for (int n = 1; n <= t.order(); ++n) t = mode_product(t, h.factors[n - 1], n);
    return t;
}

cmat commutation_matrix(Index m, Index n) {
    if (m < 1 || n < 1) throw DimensionError("commutation_matrix: sizes must be positive");
    cmat k = cmat::Zero(m * n, m * n);
    // vec(A)[i + m j] == vec(A^T)[j + n i]
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) k(i + m * j, j + n * i) = 1.0;
    return k;
}

cmat khatri_rao(const cmat& a, const cmat& b) {
    if (a.cols() != b.cols()) throw DimensionError("khatri_rao: column counts differ");
    cmat out(a.rows() * b.rows(), a.cols());
    for (Index j = 0; j < a.cols(); ++j) out.col(j) = kron(a.col(j), b.col(j));
    return out;
}

cmat kron(const cmat& a, const cmat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

cmat kron_all(const std::vector<cmat>& ms) {
    if (ms.empty()) return cmat::Identity(1, 1);
    cmat out = ms.front();
    for (std::size_t i = 1; i < ms.size(); ++i) out = kron(out, ms[i]);
    return out;
}

cmat exchange_matrix(Index n) { return cmat::Identity(n, n).rowwise().reverse(); }

cvec vec(const cmat& m) { return Eigen::Map<const cvec>(m.data(), m.size()); }

cmat unvec(const cvec& v, Index rows, Index cols) {
    if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
    return Eigen::Map<const cmat>(v.data(), rows, cols);
}

Tensor tensor_from_matrix(const cmat& m, const Dims& spatial) {
    if (product(spatial) != m.rows()) throw DimensionError("tensor_from_matrix: row count must equal sensor count");
    Dims dims = spatial;
    dims.push_back(m.cols());
    return fold(m.transpose(), static_cast<int>(dims.size()), dims);
}

cmat matrix_from_tensor(const Tensor& t) { return unfold(t, t.order()).transpose(); }

}  // namespace tesp
