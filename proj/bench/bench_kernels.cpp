// Serial vs OpenMP throughput for the hot kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "noisyfpr/kernels.hpp"
#include "noisyfpr/rng.hpp"
#include "noisyfpr/theory.hpp"

namespace {

using namespace noisyfpr;
using namespace noisyfpr::kernels;
using namespace noisyfpr::theory;

constexpr std::size_t kFeatures = 24;
constexpr std::uint16_t kBins = 64;

struct HistogramInput {
  BinnedColumns x;
  std::vector<double> grad, hess;
  std::vector<std::uint32_t> rows;
};

HistogramInput make_histogram_input(std::size_t n) {
  Rng rng(42);
  HistogramInput in;
  in.x.rows = n;
  in.x.bin_count.assign(kFeatures, kBins);
  in.x.columns.assign(kFeatures, std::vector<std::uint16_t>(n));
  for (auto& col : in.x.columns)
    for (auto& b : col)
      b = rng.uniform() < 0.02 ? kMissingBin : static_cast<std::uint16_t>(rng.below(kBins));
  in.grad.resize(n);
  in.hess.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = rng.uniform();
    in.grad[i] = p - (rng.uniform() < 0.1 ? 1.0 : 0.0);
    in.hess[i] = p * (1.0 - p);
  }
  in.rows.resize(n);
  std::iota(in.rows.begin(), in.rows.end(), 0u);
  return in;
}

template <auto Kernel>
void BM_histograms(benchmark::State& state) {
  const auto in = make_histogram_input(static_cast<std::size_t>(state.range(0)));
  const HistogramLayout layout(in.x);
  std::vector<GradStat> out(layout.total);
  for (auto _ : state) {
    Kernel(in.x, in.grad, in.hess, in.rows, layout, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(kFeatures));
}
BENCHMARK(BM_histograms<build_histograms_serial>)->Name("histograms/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_histograms<build_histograms_parallel>)->Name("histograms/parallel")->Arg(10000)->Arg(100000);

// Complete trees of the given depth with random splits.
std::vector<RegressionTree> make_forest(std::size_t count, int depth, std::size_t cols, Rng& rng) {
  std::vector<RegressionTree> forest(count);
  for (auto& tree : forest) {
    const std::size_t internal = (std::size_t{1} << depth) - 1;
    tree.nodes.resize(2 * internal + 1);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      TreeNode& node = tree.nodes[i];
      if (i < internal) {
        node.feature = static_cast<std::int32_t>(rng.below(cols));
        node.threshold = rng.uniform();
        node.missing_left = rng.uniform() < 0.5;
        node.left = static_cast<std::int32_t>(2 * i + 1);
        node.right = static_cast<std::int32_t>(2 * i + 2);
      } else {
        node.value = rng.uniform() - 0.5;
      }
    }
  }
  return forest;
}

template <auto Kernel>
void BM_predict(benchmark::State& state) {
  Rng rng(7);
  DenseMatrix x;
  x.rows = static_cast<std::size_t>(state.range(0));
  x.cols = kFeatures;
  x.values.resize(x.rows * x.cols);
  for (auto& v : x.values) v = rng.uniform() < 0.02 ? std::nan("") : rng.uniform();
  const auto forest = make_forest(200, 6, x.cols, rng);
  std::vector<double> out(x.rows);
  for (auto _ : state) {
    Kernel(forest, 0.0, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_predict<predict_raw_serial>)->Name("predict_raw/serial")->Arg(20000);
BENCHMARK(BM_predict<predict_raw_parallel>)->Name("predict_raw/parallel")->Arg(20000);

template <auto Kernel>
void BM_extremality(benchmark::State& state) {
  Rng rng(11);
  const auto world = random_calibrated_world(rng, static_cast<std::size_t>(state.range(0)));
  const auto& points = world.points();
  const std::size_t e = EmpiricalWorld(points, calibrated_direct_cleaning(points)).count_e1();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(points, e, 0.5));
}
BENCHMARK(BM_extremality<brute_force_extremality_serial>)->Name("extremality/serial")->Arg(12)->Arg(16);
BENCHMARK(BM_extremality<brute_force_extremality>)->Name("extremality/parallel")->Arg(12)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
