#pragma once

#include "ssvm/trainer.hpp"

namespace ssvm {

/// Synthetic 4-connected grid instances. Ground-truth labelings are contiguous
/// random blocks (nearest-seed regions under Manhattan distance); unary
/// features are one-hot(truth) plus Gaussian noise of scale sigma; edge
/// features are [1, |mean unary contrast|]. Deterministic per seed.
Dataset generate_synthetic(int grid_w, int grid_h, int num_labels, double noise_sigma,
                           int n_instances, std::uint64_t seed);

}  // namespace ssvm
