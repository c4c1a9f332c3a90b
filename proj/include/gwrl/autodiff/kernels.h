#ifndef GWRL_AUTODIFF_KERNELS_H_
#define GWRL_AUTODIFF_KERNELS_H_

#include <cstddef>
#include <span>

#include "gwrl/autodiff/tensor.h"

// Forward loops shared by the tape ops and the tape-free inference paths, so
// both produce bit-identical values.
namespace gwrl::ad::kernels {

/// out[0..n) += x * W, with W row-major [x.size(), n].
void AccumulateVecMat(std::span<const double> x, const double* w, std::size_t n,
                      double* out);

/// LSTM step, gate order (input, forget, candidate, output). `saved`, when
/// not null, receives the four activated gates followed by tanh(c') (5H).
void LstmForward(std::span<const double> x, std::span<const double> h,
                 std::span<const double> c, const Tensor& w_x, const Tensor& w_h,
                 const Tensor& b, double* h_out, double* c_out, double* saved);

}  // namespace gwrl::ad::kernels

#endif  // GWRL_AUTODIFF_KERNELS_H_
