#pragma once

#include <cstddef>

#include "farfield/core.hpp"

namespace farfield {

enum class KernelKind { Auto, Scalar, Avx2 };

// One row of cells, structure-of-arrays. For each cell k the summand is
//   F_k * det(I + i M_k) * exp(x1*eta1_k + x2*eta2_k) * phase_k
// where M_k = [[m11, m12], [m21, m22]] is the cell Jacobian of eta.
struct CellRow {
    const double* f_re;
    const double* f_im;
    const double* eta1;
    const double* eta2;
    const double* m11;
    const double* m12;
    const double* m21;
    const double* m22;
    const double* ph_re;
    const double* ph_im;
    size_t n;
};

cplx row_sum_scalar(const CellRow& row, double x1, double x2);
cplx row_sum_avx2(const CellRow& row, double x1, double x2);
cplx row_sum(const CellRow& row, double x1, double x2, KernelKind k = KernelKind::Auto);

bool avx2_available();
KernelKind resolve_kernel(KernelKind k);
const char* kernel_name(KernelKind k);

}  // namespace farfield
