// include/simuls2s/numerics/ops.h

// Copyright 2026  The simuls2s Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIMULS2S_NUMERICS_OPS_H_
#define SIMULS2S_NUMERICS_OPS_H_

#include <span>
#include <vector>

#include "simuls2s/numerics/autograd.h"
#include "simuls2s/numerics/tensor.h"

// Differentiable rank-2 ops. Each takes and returns Vars; when any input is
// tracked the result is recorded on the same tape.
namespace simuls2s {

double SigmoidScalar(double x);
double LogSumExp(std::span<const double> xs);
double LogAdd(double a, double b);

Var MatMul(const Var& a, const Var& b);
// a * b^T for a [m x k], b [n x k].
Var MatMulBT(const Var& a, const Var& b);

Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
// x [m x n] + bias [1 x n] broadcast over rows.
Var AddBias(const Var& x, const Var& bias);
Var Scale(const Var& x, double c);
// x * s for a 1 x 1 var s.
Var ScaleBy(const Var& x, const Var& s);

Var Relu(const Var& x);
Var Sigmoid(const Var& x);
Var Abs(const Var& x);
Var Sum(const Var& x);
Var Mean(const Var& x);

Var Softmax(const Var& x);
Var LogSoftmax(const Var& x);
Var LayerNorm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

// Rows of `table` gathered by id.
Var Embed(const Var& table, std::span<const int> ids);

// Single-head scaled dot-product attention; mask(i, j) == false removes key j
// from query i. A query row with no allowed key is an error.
Var MaskedAttention(const Var& q, const Var& k, const Var& v, const Mask& mask);

Var SliceRows(const Var& x, int begin, int end);
Var SliceCols(const Var& x, int begin, int end);
Var ConcatRows(std::span<const Var> parts);
Var ConcatCols(std::span<const Var> parts);
Var Reshape(const Var& x, int rows, int cols);
// Each row repeated `times` times consecutively.
Var RepeatRows(const Var& x, int times);
Var Element(const Var& x, int r, int c);

// Mean negative log-likelihood of target ids under row-wise softmax(logits).
Var CrossEntropy(const Var& logits, std::span<const int> targets);

}  // namespace simuls2s

#endif  // SIMULS2S_NUMERICS_OPS_H_
