#pragma once

#include <span>
#include <vector>

#include "dropnet/tensor.hpp"

namespace dropnet {

// Matrix product. Accepts [m,k]x[k,n] -> [m,n], [m,k]x[k] -> [m] (column
// vector) and [k]x[k,n] -> [n] (row vector).
Tensor matmul(Tensor a, Tensor b);

// Elementwise ops. b may broadcast against a by repeating any axis of
// extent 1; broadcast gradients sum over the replicated axes.
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);

Tensor scale(Tensor a, double factor);
Tensor tanh(Tensor a);
Tensor sigmoid(Tensor a);

// Masked softmax along `axis`. Masked-out positions are excluded from the
// normalisation and come out exactly zero. The mask length must equal the
// extent along `axis` and every normalised slice needs >= 1 valid position.
Tensor softmax(Tensor a, int axis, const Mask* mask = nullptr);

// Masked reductions along `axis`. Max routes its gradient to the first
// maximal valid position of each slice.
Tensor reduce_mean(Tensor a, int axis, const Mask* mask = nullptr);
Tensor reduce_max(Tensor a, int axis, const Mask* mask = nullptr);

Tensor concat(std::vector<Tensor> parts, int axis);
Tensor transpose(Tensor a);
Tensor reshape(Tensor a, std::vector<int> shape);

// Column j of a rank-2 tensor as a vector.
Tensor column(Tensor a, int j);

// Embedding-style gather: table is [V,d], the result is [d,L] with column t
// holding row indices[t]. The gradient scatter-adds into the table rows, so
// repeated indices accumulate.
Tensor lookup(Tensor table, std::span<const int> indices);

// Sum of all elements, as a scalar.
Tensor sum(Tensor a);

// -log(probs[label]) with probs floored at 1e-12 before the log.
Tensor cross_entropy(Tensor probs, int label);

}  // namespace dropnet
