#pragma once

#include "rds/tensor.hpp"

#include <string>

namespace rds {

// Binary tensor container: magic "RTN1", rank (u64 LE), dims (u64 LE each),
// then the values as raw 64-bit little-endian floats. save_tensor also
// writes a JSON sidecar (<path>.json) with the shape, the value-range
// convention, and a provenance note.

void save_tensor(const std::string& path, const Tensor& t,
                 const std::string& provenance = "rds");

Tensor load_tensor(const std::string& path);

/// 8-bit binary PGM preview; values are clamped from [-1, 1] to [0, 255].
void save_pgm(const std::string& path, const Tensor& image);

}  // namespace rds
