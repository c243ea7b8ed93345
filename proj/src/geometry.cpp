#include "sparsedoa/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace sparsedoa {

namespace {

std::vector<int> merge_subarrays(int count1, int stride1, int count2, int stride2) {
  std::set<int> pos;
  for (int m = 0; m < count1; ++m) pos.insert(m * stride1);
  for (int n = 0; n < count2; ++n) pos.insert(n * stride2);
  return {pos.begin(), pos.end()};
}

}  // namespace

int Coarray::weight_of(int lag) const {
  auto it = std::lower_bound(lags.begin(), lags.end(), lag);
  if (it == lags.end() || *it != lag) return 0;
  return weights[it - lags.begin()];
}

LinearArrayGeometry build_coprime_linear(int subarray1_count, int subarray1_stride,
                                         int subarray2_count, int subarray2_stride,
                                         std::string* warning) {
  if (subarray1_count < 2 || subarray2_count < 2)
    throw std::invalid_argument("coprime array needs at least 2 sensors per subarray");
  if (subarray1_stride < 1 || subarray2_stride < 1)
    throw std::invalid_argument("coprime subarray strides must be positive");
  if (std::gcd(subarray1_stride, subarray2_stride) != 1)
    throw std::invalid_argument("subarray strides " + std::to_string(subarray1_stride) +
                                " and " + std::to_string(subarray2_stride) +
                                " share a factor; undersampling factors must be coprime");
  if (warning && subarray1_stride != subarray2_stride + 1)
    *warning = "stride pair (" + std::to_string(subarray1_stride) + ", " +
               std::to_string(subarray2_stride) +
               ") is not the sensor-minimizing choice N = M + 1";
  LinearArrayGeometry geom;
  geom.kind = LinearKind::kCoprime;
  geom.subarray1_count = subarray1_count;
  geom.subarray1_stride = subarray1_stride;
  geom.subarray2_count = subarray2_count;
  geom.subarray2_stride = subarray2_stride;
  geom.positions =
      merge_subarrays(subarray1_count, subarray1_stride, subarray2_count, subarray2_stride);
  return geom;
}

LinearArrayGeometry build_nested_linear(int dense_count, int sparse_count) {
  if (dense_count < 2 || sparse_count < 2)
    throw std::invalid_argument("nested array needs at least 2 sensors per subarray");
  LinearArrayGeometry geom;
  geom.kind = LinearKind::kNested;
  geom.subarray1_count = dense_count;
  geom.subarray1_stride = 1;
  geom.subarray2_count = sparse_count;
  geom.subarray2_stride = dense_count;
  geom.positions = merge_subarrays(dense_count, 1, sparse_count, dense_count);
  return geom;
}

LinearArrayGeometry build_full_ula(int size) {
  if (size < 2) throw std::invalid_argument("full ULA needs at least 2 sensors");
  LinearArrayGeometry geom;
  geom.kind = LinearKind::kFullUla;
  geom.subarray1_count = size;
  geom.subarray1_stride = 1;
  geom.subarray2_count = size;
  geom.subarray2_stride = 1;
  geom.positions.resize(size);
  std::iota(geom.positions.begin(), geom.positions.end(), 0);
  return geom;
}

std::vector<std::uint8_t> sensor_indicator(const LinearArrayGeometry& geometry) {
  std::vector<std::uint8_t> indicator(geometry.equivalent_ula_size(), 0);
  for (int k : geometry.positions) indicator[k] = 1;
  return indicator;
}

Coarray difference_coarray(std::span<const int> positions) {
  if (positions.empty()) throw std::invalid_argument("coarray of an empty array");
  int max_pos = *std::max_element(positions.begin(), positions.end());
  int min_pos = *std::min_element(positions.begin(), positions.end());
  std::vector<int> counts(max_pos - min_pos + 1, 0);
  for (int p : positions)
    for (int q : positions)
      if (p >= q) counts[p - q]++;
  Coarray co;
  for (int lag = 0; lag < static_cast<int>(counts.size()); ++lag) {
    if (counts[lag] == 0) continue;
    co.lags.push_back(lag);
    co.weights.push_back(counts[lag]);
  }
  while (co.contiguous_len < static_cast<int>(counts.size()) && counts[co.contiguous_len] > 0)
    co.contiguous_len++;
  return co;
}

namespace {

PlanarArrayGeometry cross_product_planar(PlanarKind kind, int m_param, int n_param,
                                         std::vector<int> beta) {
  PlanarArrayGeometry geom;
  geom.kind = kind;
  geom.m_param = m_param;
  geom.n_param = n_param;
  geom.beta = std::move(beta);
  int side = geom.beta.back() + 1;
  geom.indicator.assign(side, std::vector<std::uint8_t>(side, 0));
  // f_R[i][j] = sum_k f_L[i][j-k] over k in beta, with f_L supported on column 0:
  // occupied points are exactly beta x beta.
  for (int i : geom.beta)
    for (int j : geom.beta) geom.indicator[i][j] = 1;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      if (geom.indicator[i][j]) geom.positions.push_back({i, j});
  return geom;
}

}  // namespace

int PlanarArrayGeometry::contiguous_halfwidth() const {
  return difference_coarray(beta).contiguous_len - 1;
}

LinearArrayGeometry PlanarArrayGeometry::underlying_linear() const {
  if (kind == PlanarKind::kSirna) return build_nested_linear(m_param, n_param);
  return build_coprime_linear(2 * m_param, m_param + 1, m_param + 1, m_param);
}

PlanarArrayGeometry build_sirna(int dense_count, int sparse_count) {
  if (dense_count < 2 || sparse_count < 2)
    throw std::invalid_argument("SIRNA parameters must be at least 2");
  auto row = build_nested_linear(dense_count, sparse_count);
  return cross_product_planar(PlanarKind::kSirna, dense_count, sparse_count,
                              std::move(row.positions));
}

PlanarArrayGeometry build_sirca(int half_count) {
  if (half_count < 2) throw std::invalid_argument("SIRCA parameter must be at least 2");
  auto row = build_coprime_linear(2 * half_count, half_count + 1, half_count + 1, half_count);
  return cross_product_planar(PlanarKind::kSirca, half_count, half_count + 1,
                              std::move(row.positions));
}

}  // namespace sparsedoa
