#pragma once

#include <memory>

#include "vmb/collision.hpp"

namespace vmbtest {

// Assemblies are expensive; shared lazily across test cases.
std::shared_ptr<const vmb::VelocityGrid> grid(int n);
std::shared_ptr<const vmb::CollisionMatrices> cm8();
std::shared_ptr<const vmb::CollisionMatrices> cm12();
std::shared_ptr<const vmb::CollisionMatrices> cm16();  // keep_K = false

}  // namespace vmbtest
