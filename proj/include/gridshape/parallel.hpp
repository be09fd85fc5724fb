#pragma once

namespace gridshape {

// Kernels take an execution policy so the serial loop stays available as the
// reference the OpenMP path is checked against.
enum class Exec { serial, parallel };

// Thread cap for parallel kernels: GRIDSHAPE_THREADS if set and positive,
// otherwise the OpenMP default.
int thread_limit();

}  // namespace gridshape
