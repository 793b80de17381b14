#pragma once

#include <vector>

#include "chromex/tensornet.hpp"

namespace chromex::nn {

int conv_out_size(int n, const ConvGeometry& g);

/// out = W * im2col(in) + b. Writes into out, which must already be shaped.
template <typename T>
void conv_forward(const Tensor<T>& in, const T* weight, const T* bias, int cout,
                  const ConvGeometry& g, T* out);

/// Accumulates dW, db and (when din is non-null) the input gradient, given the gradient
/// of the pre-activation output.
template <typename T>
void conv_backward(const Tensor<T>& in, const T* weight, int cout, const ConvGeometry& g,
                   const T* dout, T* dweight, T* dbias, Tensor<T>* din);

template <typename T>
void relu_inplace(T* data, std::size_t n);

/// grad *= (activation > 0)
template <typename T>
void relu_backward(const T* activation, T* grad, std::size_t n);

/// Half-pixel bilinear resize along rows only (columns unchanged).
template <typename T>
Tensor<T> resize_rows(const Tensor<T>& in, int rows);

template <typename T>
Tensor<T> resize_rows_backward(const Tensor<T>& dout, int in_rows);

}  // namespace chromex::nn
