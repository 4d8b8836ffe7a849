#pragma once

namespace stratkit {

/// Execution policy for the data-parallel kernels. Parallel runs the OpenMP
/// loop when the library was built with OpenMP; Serial runs the reference
/// loop. Both paths produce bit-identical results (no shared floating-point
/// reductions), which the test suite asserts.
enum class Exec { Serial, Parallel };

}  // namespace stratkit
