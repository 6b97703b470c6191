#pragma once

#include <cstddef>
#include <functional>

namespace utm {

// Worker cap: UTM_WORKERS if set and positive, else hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n). Each index must write only its own output slots,
// so results do not depend on the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace utm
