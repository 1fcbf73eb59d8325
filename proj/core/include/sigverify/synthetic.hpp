#pragma once

#include <cstdint>
#include <filesystem>

#include "sigverify/dataset.hpp"
#include "sigverify/types.hpp"

namespace sigverify {

/// Desk-scale synthetic signature for tests and demos.
///
/// The base curve depends only on `user_template` (a parametric family of
/// multi-stroke sinusoid compositions); `seed` drives only the jitter noise,
/// so jitter == 0 yields the identical signature for every seed. Jitter in
/// [0,1] perturbs coordinates, timing and pressure and applies a small
/// rotation/scale wobble.
RawSignature generate_synthetic_signature(std::uint64_t seed, int user_template, double jitter);

/// Materialize a synthetic dataset tree in the svc2004 layout:
/// U<u>S<s>.TXT with samples 1..n_genuine genuine (template u) and the next
/// n_forgery skilled forgeries (template 1000+u, a distinct curve family).
/// Returns the layout describing the tree.
DatasetLayout write_testkit(const std::filesystem::path& root, int n_users, int n_genuine,
                            int n_forgery, double jitter, std::uint64_t seed);

}  // namespace sigverify
