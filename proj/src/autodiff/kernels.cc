#include "gwrl/autodiff/kernels.h"

#include <cmath>
#include <vector>

namespace gwrl::ad::kernels {

void AccumulateVecMat(std::span<const double> x, const double* w, std::size_t n,
                      double* out) {
  for (std::size_t p = 0; p < x.size(); ++p) {
    const double xp = x[p];
    if (xp == 0.0) continue;
    const double* row = w + p * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += xp * row[j];
  }
}

void LstmForward(std::span<const double> x, std::span<const double> h,
                 std::span<const double> c, const Tensor& w_x, const Tensor& w_h,
                 const Tensor& b, double* h_out, double* c_out, double* saved) {
  const std::size_t hid = h.size();
  const std::size_t four = 4 * hid;
  thread_local std::vector<double> z;
  z.assign(b.values().begin(), b.values().end());
  AccumulateVecMat(x, w_x.data(), four, z.data());
  AccumulateVecMat(h, w_h.data(), four, z.data());
  for (std::size_t k = 0; k < hid; ++k) {
    const double gi = 1.0 / (1.0 + std::exp(-z[k]));
    const double gf = 1.0 / (1.0 + std::exp(-z[hid + k]));
    const double gg = std::tanh(z[2 * hid + k]);
    const double go = 1.0 / (1.0 + std::exp(-z[3 * hid + k]));
    const double c_new = gf * c[k] + gi * gg;
    const double tc = std::tanh(c_new);
    if (saved) {
      saved[k] = gi;
      saved[hid + k] = gf;
      saved[2 * hid + k] = gg;
      saved[3 * hid + k] = go;
      saved[4 * hid + k] = tc;
    }
    h_out[k] = go * tc;
    c_out[k] = c_new;
  }
}

}  // namespace gwrl::ad::kernels
