#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a serial twin with the
// same floating-point summation order; tests assert bit-identical results and
// bench/ compares their throughput.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "noisyfpr/tree.hpp"

namespace noisyfpr::kernels {

inline constexpr std::uint16_t kMissingBin = std::numeric_limits<std::uint16_t>::max();

/// Column-major quantized feature matrix.
struct BinnedColumns {
  std::size_t rows = 0;
  std::vector<std::uint16_t> bin_count;              // bins per feature (excluding missing)
  std::vector<std::vector<std::uint16_t>> columns;   // columns[f][row]

  std::size_t features() const noexcept { return columns.size(); }
};

struct GradStat {
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;

  GradStat& operator+=(const GradStat& o) {
    grad += o.grad;
    hess += o.hess;
    count += o.count;
    return *this;
  }
  bool operator==(const GradStat&) const = default;
};

/// Slot offsets: feature f owns bin_count[f] + 1 slots, the last one for missing values.
struct HistogramLayout {
  std::vector<std::size_t> offset;
  std::size_t total = 0;

  explicit HistogramLayout(const BinnedColumns& x);
  std::size_t missing_slot(std::size_t f, const BinnedColumns& x) const {
    return offset[f] + x.bin_count[f];
  }
};

/// Accumulates gradient statistics of `rows` into `out` (size layout.total, zeroed here).
void build_histograms_serial(const BinnedColumns& x, std::span<const double> grad,
                             std::span<const double> hess, std::span<const std::uint32_t> rows,
                             const HistogramLayout& layout, std::span<GradStat> out);

/// Same result as the serial kernel; features are distributed across threads.
void build_histograms_parallel(const BinnedColumns& x, std::span<const double> grad,
                               std::span<const double> hess, std::span<const std::uint32_t> rows,
                               const HistogramLayout& layout, std::span<GradStat> out);

/// Row-major encoded matrix; NaN marks a missing value.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  const double* row(std::size_t i) const { return values.data() + i * cols; }
};

/// out[i] = base + sum over trees of tree(row i).
void predict_raw_serial(std::span<const RegressionTree> trees, double base, const DenseMatrix& x,
                        std::span<double> out);
void predict_raw_parallel(std::span<const RegressionTree> trees, double base, const DenseMatrix& x,
                          std::span<double> out);

}  // namespace noisyfpr::kernels
