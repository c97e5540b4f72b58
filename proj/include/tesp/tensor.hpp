#pragma once

#include "tesp/types.hpp"

namespace tesp {

// Dense complex tensor. Linear layout: first index varies fastest.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Dims dims);
    Tensor(Dims dims, cvec data);

    const Dims& dims() const { return dims_; }
    Index dim(int mode) const;  // 1-based
    int order() const { return static_cast<int>(dims_.size()); }
    Index size() const { return data_.size(); }
    const cvec& data() const { return data_; }

    cplx& at(const Dims& idx);
    const cplx& at(const Dims& idx) const;
    Index linear_index(const Dims& idx) const;

    double norm() const { return data_.norm(); }

  private:
    Dims dims_;
    cvec data_;
};

// Mode-n unfolding (n is 1-based). Rows run over i_n; columns are ordered
// cyclically with i_{n+1} slowest through i_N, i_1, ..., i_{n-1} fastest.
cmat unfold(const Tensor& t, int mode);
Tensor fold(const cmat& m, int mode, const Dims& dims);

Tensor mode_product(const Tensor& t, const cmat& u, int mode);

struct HosvdFactors {
    Tensor core;
    std::vector<cmat> factors;
    std::vector<rvec> mode_singular_values;
};

HosvdFactors hosvd_truncated(const Tensor& t, const std::vector<Index>& ranks);
Tensor hosvd_reconstruct(const HosvdFactors& h);

// K with K * vec(A^T) == vec(A) for every m x n matrix A.
cmat commutation_matrix(Index m, Index n);
cmat khatri_rao(const cmat& a, const cmat& b);
cmat kron(const cmat& a, const cmat& b);
cmat kron_all(const std::vector<cmat>& ms);
cmat exchange_matrix(Index n);

cvec vec(const cmat& m);
cmat unvec(const cvec& v, Index rows, Index cols);

// Tensor of extents (dims..., cols) whose last-mode unfolding transposed is m.
Tensor tensor_from_matrix(const cmat& m, const Dims& spatial);
cmat matrix_from_tensor(const Tensor& t);

Index product(const Dims& dims);

}  // namespace tesp
