#include "noisyfpr/kernels.hpp"

#include <algorithm>
#include <cassert>

namespace noisyfpr::kernels {

HistogramLayout::HistogramLayout(const BinnedColumns& x) {
  offset.resize(x.features());
  for (std::size_t f = 0; f < x.features(); ++f) {
    offset[f] = total;
    total += static_cast<std::size_t>(x.bin_count[f]) + 1;
  }
}

namespace {

inline void accumulate_feature(const BinnedColumns& x, std::size_t f, std::span<const double> grad,
                               std::span<const double> hess, std::span<const std::uint32_t> rows,
                               const HistogramLayout& layout, std::span<GradStat> out) {
  GradStat* hist = out.data() + layout.offset[f];
  const std::uint16_t missing = x.bin_count[f];
  const std::uint16_t* col = x.columns[f].data();
  for (std::uint32_t r : rows) {
    const std::uint16_t b = col[r];
    GradStat& s = hist[b == kMissingBin ? missing : b];
    s.grad += grad[r];
    s.hess += hess[r];
    ++s.count;
  }
}

}  // namespace

void build_histograms_serial(const BinnedColumns& x, std::span<const double> grad,
                             std::span<const double> hess, std::span<const std::uint32_t> rows,
                             const HistogramLayout& layout, std::span<GradStat> out) {
  assert(out.size() == layout.total);
  std::fill(out.begin(), out.end(), GradStat{});
  for (std::size_t f = 0; f < x.features(); ++f) accumulate_feature(x, f, grad, hess, rows, layout, out);
}

void build_histograms_parallel(const BinnedColumns& x, std::span<const double> grad,
                               std::span<const double> hess, std::span<const std::uint32_t> rows,
                               const HistogramLayout& layout, std::span<GradStat> out) {
  assert(out.size() == layout.total);
  std::fill(out.begin(), out.end(), GradStat{});
  const auto nf = static_cast<std::int64_t>(x.features());
  // Small nodes are not worth a fork.
  const bool big = rows.size() * x.features() >= 16384;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t f = 0; f < nf; ++f) {
    accumulate_feature(x, static_cast<std::size_t>(f), grad, hess, rows, layout, out);
  }
}

void predict_raw_serial(std::span<const RegressionTree> trees, double base, const DenseMatrix& x,
                        std::span<double> out) {
  assert(out.size() == x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double s = base;
    for (const auto& t : trees) s += t.evaluate(x.row(i));
    out[i] = s;
  }
}

void predict_raw_parallel(std::span<const RegressionTree> trees, double base, const DenseMatrix& x,
                          std::span<double> out) {
  assert(out.size() == x.rows);
  const auto n = static_cast<std::int64_t>(x.rows);
#pragma omp parallel for schedule(static) if (n >= 1024)
  for (std::int64_t i = 0; i < n; ++i) {
    double s = base;
    for (const auto& t : trees) s += t.evaluate(x.row(static_cast<std::size_t>(i)));
    out[static_cast<std::size_t>(i)] = s;
  }
}

}  // namespace noisyfpr::kernels
