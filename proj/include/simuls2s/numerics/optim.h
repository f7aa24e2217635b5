// include/simuls2s/numerics/optim.h

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

#ifndef SIMULS2S_NUMERICS_OPTIM_H_
#define SIMULS2S_NUMERICS_OPTIM_H_

#include <vector>

#include "simuls2s/numerics/autograd.h"

namespace simuls2s {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip; <= 0 disables
};

// Adam with bias correction. Step() consumes the gradients accumulated in
// each Parameter::grad and zeroes them.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamOptions options);

  void Step();
  void set_lr(double lr) { options_.lr = lr; }
  const AdamOptions& options() const { return options_; }
  long steps() const { return step_; }

 private:
  std::vector<Parameter*> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_, v_;
  long step_ = 0;
};

double GlobalGradNorm(const std::vector<Parameter*>& params);

}  // namespace simuls2s

#endif  // SIMULS2S_NUMERICS_OPTIM_H_
