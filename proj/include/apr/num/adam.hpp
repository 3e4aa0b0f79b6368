#pragma once

#include <cstdint>
#include <vector>

#include "apr/num/param_store.hpp"

namespace apr::num {

struct AdamConfig {
  Scalar lr = 1e-3;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;
};

AdamState make_adam_state(const ParamStore& store, AdamConfig config = {});

/// One bias-corrected Adam step over every parameter, then zeroes the gradients.
void adam_update(ParamStore& store, AdamState& state);

}  // namespace apr::num
