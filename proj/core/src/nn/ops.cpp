#include "nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "chromex/error.hpp"

namespace chromex::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_pointwise(const ConvGeometry& g) {
  return g.kernel == 1 && g.stride == 1 && g.padding == 0;
}

template <typename T>
void im2col(const Tensor<T>& in, const ConvGeometry& g, int hout, int wout, T* cols) {
  const int k = g.kernel;
  const std::size_t plane = static_cast<std::size_t>(hout) * wout;
  for (int ci = 0; ci < in.c; ++ci) {
    const T* src = in.channel(ci);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols + (static_cast<std::size_t>(ci) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < hout; ++oy) {
          const int iy = oy * g.stride - g.padding + ky * g.dilation;
          T* dst = row + static_cast<std::size_t>(oy) * wout;
          if (iy < 0 || iy >= in.h) {
            std::fill(dst, dst + wout, T(0));
            continue;
          }
          const T* line = src + static_cast<std::size_t>(iy) * in.w;
          for (int ox = 0; ox < wout; ++ox) {
            const int ix = ox * g.stride - g.padding + kx * g.dilation;
            dst[ox] = ix >= 0 && ix < in.w ? line[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* cols, const ConvGeometry& g, int hout, int wout, Tensor<T>& din) {
  const int k = g.kernel;
  const std::size_t plane = static_cast<std::size_t>(hout) * wout;
  for (int ci = 0; ci < din.c; ++ci) {
    T* dst = din.channel(ci);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols + (static_cast<std::size_t>(ci) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < hout; ++oy) {
          const int iy = oy * g.stride - g.padding + ky * g.dilation;
          if (iy < 0 || iy >= din.h) continue;
          const T* src = row + static_cast<std::size_t>(oy) * wout;
          T* line = dst + static_cast<std::size_t>(iy) * din.w;
          for (int ox = 0; ox < wout; ++ox) {
            const int ix = ox * g.stride - g.padding + kx * g.dilation;
            if (ix >= 0 && ix < din.w) line[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
AlignedVector<T>& scratch() {
  thread_local AlignedVector<T> buffer;
  return buffer;
}

}  // namespace

int conv_out_size(int n, const ConvGeometry& g) {
  const int span = g.dilation * (g.kernel - 1) + 1;
  const int padded = n + 2 * g.padding;
  if (padded < span) return 0;
  return (padded - span) / g.stride + 1;
}

template <typename T>
void conv_forward(const Tensor<T>& in, const T* weight, const T* bias, int cout,
                  const ConvGeometry& g, T* out) {
  const int hout = conv_out_size(in.h, g);
  const int wout = conv_out_size(in.w, g);
  const Eigen::Index kdim = static_cast<Eigen::Index>(in.c) * g.kernel * g.kernel;
  const Eigen::Index p = static_cast<Eigen::Index>(hout) * wout;
  const T* cols = in.data.data();
  if (!is_pointwise(g)) {
    auto& buf = scratch<T>();
    buf.resize(static_cast<std::size_t>(kdim * p));
    im2col(in, g, hout, wout, buf.data());
    cols = buf.data();
  }
  Eigen::Map<const RowMat<T>> w(weight, cout, kdim);
  Eigen::Map<const RowMat<T>> c(cols, kdim, p);
  Eigen::Map<RowMat<T>> o(out, cout, p);
  o.noalias() = w * c;
  if (bias) {
    for (int co = 0; co < cout; ++co) o.row(co).array() += bias[co];
  }
}

template <typename T>
void conv_backward(const Tensor<T>& in, const T* weight, int cout, const ConvGeometry& g,
                   const T* dout, T* dweight, T* dbias, Tensor<T>* din) {
  const int hout = conv_out_size(in.h, g);
  const int wout = conv_out_size(in.w, g);
  const Eigen::Index kdim = static_cast<Eigen::Index>(in.c) * g.kernel * g.kernel;
  const Eigen::Index p = static_cast<Eigen::Index>(hout) * wout;
  const bool pointwise = is_pointwise(g);
  const T* cols = in.data.data();
  auto& buf = scratch<T>();
  if (!pointwise) {
    buf.resize(static_cast<std::size_t>(kdim * p));
    im2col(in, g, hout, wout, buf.data());
    cols = buf.data();
  }
  Eigen::Map<const RowMat<T>> d(dout, cout, p);
  Eigen::Map<const RowMat<T>> c(cols, kdim, p);
  Eigen::Map<RowMat<T>> dw(dweight, cout, kdim);
  dw.noalias() += d * c.transpose();
  if (dbias) {
    for (int co = 0; co < cout; ++co) dbias[co] += d.row(co).sum();
  }
  if (!din) return;
  Eigen::Map<const RowMat<T>> w(weight, cout, kdim);
  if (pointwise) {
    Eigen::Map<RowMat<T>> di(din->data.data(), kdim, p);
    di.noalias() += w.transpose() * d;
    return;
  }
  // The im2col buffer is no longer needed, so the column gradient reuses it.
  Eigen::Map<RowMat<T>> dc(buf.data(), kdim, p);
  dc.noalias() = w.transpose() * d;
  col2im(buf.data(), g, hout, wout, *din);
}

template <typename T>
void relu_inplace(T* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) data[i] = data[i] > T(0) ? data[i] : T(0);
}

template <typename T>
void relu_backward(const T* activation, T* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(activation[i] > T(0))) grad[i] = T(0);
  }
}

namespace {

struct RowTap {
  int y0, y1;
  double f;  // weight of y1
};

RowTap row_tap(int dst, int out_rows, int in_rows) {
  const double src = (dst + 0.5) * static_cast<double>(in_rows) / out_rows - 0.5;
  const double clamped = std::clamp(src, 0.0, static_cast<double>(in_rows - 1));
  const int y0 = static_cast<int>(std::floor(clamped));
  const int y1 = std::min(y0 + 1, in_rows - 1);
  return {y0, y1, clamped - y0};
}

}  // namespace

template <typename T>
Tensor<T> resize_rows(const Tensor<T>& in, int rows) {
  Tensor<T> out(in.c, rows, in.w);
  for (int y = 0; y < rows; ++y) {
    const RowTap tap = row_tap(y, rows, in.h);
    const T f1 = static_cast<T>(tap.f);
    const T f0 = T(1) - f1;
    for (int ch = 0; ch < in.c; ++ch) {
      for (int x = 0; x < in.w; ++x) {
        out.at(ch, y, x) = f0 * in.at(ch, tap.y0, x) + f1 * in.at(ch, tap.y1, x);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> resize_rows_backward(const Tensor<T>& dout, int in_rows) {
  Tensor<T> din(dout.c, in_rows, dout.w);
  for (int y = 0; y < dout.h; ++y) {
    const RowTap tap = row_tap(y, dout.h, in_rows);
    const T f1 = static_cast<T>(tap.f);
    const T f0 = T(1) - f1;
    for (int ch = 0; ch < dout.c; ++ch) {
      for (int x = 0; x < dout.w; ++x) {
        din.at(ch, tap.y0, x) += f0 * dout.at(ch, y, x);
        din.at(ch, tap.y1, x) += f1 * dout.at(ch, y, x);
      }
    }
  }
  return din;
}

#define CHROMEX_INSTANTIATE(T)                                                               \
  template void conv_forward<T>(const Tensor<T>&, const T*, const T*, int, const ConvGeometry&, \
                                T*);                                                         \
  template void conv_backward<T>(const Tensor<T>&, const T*, int, const ConvGeometry&,       \
                                 const T*, T*, T*, Tensor<T>*);                              \
  template void relu_inplace<T>(T*, std::size_t);                                            \
  template void relu_backward<T>(const T*, T*, std::size_t);                                 \
  template Tensor<T> resize_rows<T>(const Tensor<T>&, int);                                  \
  template Tensor<T> resize_rows_backward<T>(const Tensor<T>&, int);

CHROMEX_INSTANTIATE(float)
CHROMEX_INSTANTIATE(double)

#undef CHROMEX_INSTANTIATE

}  // namespace chromex::nn
