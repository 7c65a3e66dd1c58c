#include <benchmark/benchmark.h>

// The packaged benchmark_main archive ships LTO-only objects, so main lives here.
BENCHMARK_MAIN();
