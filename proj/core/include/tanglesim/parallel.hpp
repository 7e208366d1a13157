#pragma once

#include <cstddef>
#include <functional>

namespace tanglesim {

/// Runs fn(i) for i in [0, count), spreading work over the hardware threads.
/// Results must go into index-addressed slots so scheduling cannot reorder
/// anything observable. The first exception thrown is rethrown after join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace tanglesim
