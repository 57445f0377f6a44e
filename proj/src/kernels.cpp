#include "nmfsel/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace nmfsel::kernels {

namespace {

// Running sum with a Neumaier compensation term.
struct Compensated {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  void add(const Compensated& o) noexcept {
    add(o.sum);
    add(o.comp);
  }
  double value() const noexcept { return sum + comp; }
};

// Partial sums for one block, upper triangles packed row by row.
struct BlockSums {
  std::vector<Compensated> weighted;
  std::vector<Compensated> gram;
  std::vector<Compensated> pv;
  Compensated q_total;

  explicit BlockSums(std::size_t F)
      : weighted(F * (F + 1) / 2), gram(F * (F + 1) / 2), pv(F) {}

  void merge(const BlockSums& o) {
    for (std::size_t k = 0; k < weighted.size(); ++k) weighted[k].add(o.weighted[k]);
    for (std::size_t k = 0; k < gram.size(); ++k) gram[k].add(o.gram[k]);
    for (std::size_t k = 0; k < pv.size(); ++k) pv[k].add(o.pv[k]);
    q_total.add(o.q_total);
  }
};

void accumulate_block(const Matrix& V, std::size_t begin, std::size_t end, BlockSums& out) {
  const std::size_t F = V.rows();
  std::vector<double> col(F);
  for (std::size_t n = begin; n < end; ++n) {
    Compensated p;
    for (std::size_t f = 0; f < F; ++f) {
      col[f] = V(f, n);
      p.add(col[f]);
    }
    const double pn = p.value();
    const double qn = pn * pn;
    out.q_total.add(qn);
    std::size_t k = 0;
    for (std::size_t i = 0; i < F; ++i) {
      out.pv[i].add(pn * col[i]);
      const double vi = col[i];
      for (std::size_t j = i; j < F; ++j, ++k) {
        const double x = vi * col[j];
        out.gram[k].add(x);
        out.weighted[k].add(qn * x);
      }
    }
  }
}

MomentSums unpack(const BlockSums& b, std::size_t F) {
  MomentSums s{Matrix(F, F), Matrix(F, F), Vector(F), b.q_total.value()};
  std::size_t k = 0;
  for (std::size_t i = 0; i < F; ++i) {
    s.pv[i] = b.pv[i].value();
    for (std::size_t j = i; j < F; ++j, ++k) {
      s.weighted(i, j) = s.weighted(j, i) = b.weighted[k].value();
      s.gram(i, j) = s.gram(j, i) = b.gram[k].value();
    }
  }
  return s;
}

}  // namespace

std::size_t moment_block_size(std::size_t n) {
  constexpr std::size_t min_block = 1024;
  constexpr std::size_t max_blocks = 64;
  return std::max(min_block, (n + max_blocks - 1) / max_blocks);
}

MomentSums moment_sums(const Matrix& V) {
  const std::size_t F = V.rows(), N = V.cols();
  const std::size_t bs = moment_block_size(N);
  const std::size_t nblocks = std::max<std::size_t>(1, (N + bs - 1) / bs);
  std::vector<BlockSums> parts(nblocks, BlockSums(F));

  const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(dynamic, 1) if (nblocks > 1)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * bs;
    accumulate_block(V, begin, std::min(N, begin + bs), parts[b]);
  }

  // Pairwise tree: level by level, block b absorbs block b + stride.
  for (std::size_t stride = 1; stride < nblocks; stride *= 2) {
    const auto pairs = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static) if (nblocks > 2)
    for (std::ptrdiff_t b = 0; b < pairs; b += static_cast<std::ptrdiff_t>(2 * stride)) {
      if (static_cast<std::size_t>(b) + stride < nblocks) parts[b].merge(parts[b + stride]);
    }
  }
  return unpack(parts.front(), F);
}

MomentSums moment_sums_serial(const Matrix& V) {
  const std::size_t F = V.rows(), N = V.cols();
  MomentSums s{Matrix(F, F), Matrix(F, F), Vector(F, 0.0), 0.0};
  for (std::size_t n = 0; n < N; ++n) {
    double p = 0.0;
    for (std::size_t f = 0; f < F; ++f) p += V(f, n);
    const double q = p * p;
    s.q_total += q;
    for (std::size_t i = 0; i < F; ++i) {
      s.pv[i] += p * V(i, n);
      for (std::size_t j = 0; j < F; ++j) {
        s.gram(i, j) += V(i, n) * V(j, n);
        s.weighted(i, j) += q * V(i, n) * V(j, n);
      }
    }
  }
  return s;
}

Matrix rowsparse_product(const Matrix& G, const Matrix& B, std::span<const std::size_t> rows) {
  if (G.cols() != B.rows()) throw Error(Errc::DimensionMismatch, "row-sparse product");
  Matrix out(G.rows(), B.cols());
  const std::size_t n = B.cols();
  const auto m = static_cast<std::ptrdiff_t>(G.rows());
#pragma omp parallel for schedule(static) if (G.rows() * rows.size() * n > 32768)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* o = out.row(i).data();
    const double* g = G.row(i).data();
    for (std::size_t k : rows) {
      const double gik = g[k];
      const double* b = B.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += gik * b[j];
    }
  }
  return out;
}

Matrix rowsparse_product_serial(const Matrix& G, const Matrix& B,
                                std::span<const std::size_t> rows) {
  if (G.cols() != B.rows()) throw Error(Errc::DimensionMismatch, "row-sparse product");
  Matrix out(G.rows(), B.cols());
  for (std::size_t i = 0; i < G.rows(); ++i)
    for (std::size_t k : rows)
      for (std::size_t j = 0; j < B.cols(); ++j) out(i, j) += G(i, k) * B(k, j);
  return out;
}

}  // namespace nmfsel::kernels
