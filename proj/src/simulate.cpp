#include "sparsedoa/simulate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sparsedoa {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Per-sensor steering phases in pi units: linear -> u*k, planar -> ux*i + uy*j.
std::vector<double> source_phase_units(const Scenario& scenario, const SourceSpec& src) {
  std::vector<double> units;
  if (auto* linear = std::get_if<LinearArrayGeometry>(&scenario.geometry)) {
    units.reserve(linear->positions.size());
    for (int k : linear->positions) units.push_back(src.ux * k);
  } else {
    const auto& planar = std::get<PlanarArrayGeometry>(scenario.geometry);
    units.reserve(planar.positions.size());
    for (auto [i, j] : planar.positions) units.push_back(src.ux * i + src.uy * j);
  }
  return units;
}

}  // namespace

int Scenario::sensor_count() const {
  if (auto* linear = std::get_if<LinearArrayGeometry>(&geometry))
    return static_cast<int>(linear->positions.size());
  return std::get<PlanarArrayGeometry>(geometry).sensor_count();
}

void Scenario::validate(bool for_generation) const {
  std::string errors;
  auto add = [&errors](const std::string& e) {
    if (!errors.empty()) errors += "; ";
    errors += e;
  };
  if (for_generation && sources.empty()) add("at least one source is required");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& s = sources[i];
    const std::string tag = "source " + std::to_string(i);
    if (planar()) {
      if (std::abs(s.ux) > 1.0 || std::abs(s.uy) > 1.0 || s.ux * s.ux + s.uy * s.uy > 1.0)
        add(tag + ": direction cosines (" + std::to_string(s.ux) + ", " +
            std::to_string(s.uy) + ") outside the unit disk");
    } else if (std::abs(s.ux) > 1.0) {
      add(tag + ": direction cosine " + std::to_string(s.ux) + " outside [-1, 1]");
    }
    if (!(s.power > 0.0)) add(tag + ": power must be positive");
  }
  if (!(noise_power > 0.0)) add("noise power must be positive");
  if (snapshots < 1) add("snapshot count must be at least 1");
  if (!errors.empty()) throw std::invalid_argument(errors);
}

std::vector<std::complex<double>> steering_vector_linear(double u,
                                                         std::span<const int> positions) {
  if (std::abs(u) > 1.0)
    throw std::invalid_argument("direction cosine " + std::to_string(u) + " outside [-1, 1]");
  std::vector<std::complex<double>> v;
  v.reserve(positions.size());
  for (int k : positions) v.push_back(std::polar(1.0, kPi * u * k));
  return v;
}

std::vector<std::complex<double>> steering_vector_planar(double ux, double uy, int size_x,
                                                         int size_y) {
  if (std::abs(ux) > 1.0 || std::abs(uy) > 1.0)
    throw std::invalid_argument("direction cosines (" + std::to_string(ux) + ", " +
                                std::to_string(uy) + ") outside [-1, 1]");
  if (size_x < 1 || size_y < 1) throw std::invalid_argument("steering sizes must be positive");
  std::vector<std::complex<double>> v(static_cast<std::size_t>(size_x) * size_y);
  for (int i = 0; i < size_x; ++i)
    for (int j = 0; j < size_y; ++j)
      v[static_cast<std::size_t>(i) * size_y + j] = std::polar(1.0, kPi * (ux * i + uy * j));
  return v;
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::complex<double> draw_complex_gaussian(std::mt19937_64& rng, double variance) {
  const double u1 = 1.0 - uniform_unit(rng);  // (0, 1], keeps the log finite
  const double u2 = uniform_unit(rng);
  const double radius = std::sqrt(-variance * std::log(u1));
  return std::polar(radius, 2.0 * kPi * u2);
}

SnapshotSet generate_snapshots(const Scenario& scenario) {
  scenario.validate(true);
  const int sensors = scenario.sensor_count();
  const int q_count = scenario.snapshots;

  std::vector<std::vector<std::complex<double>>> manifold;
  manifold.reserve(scenario.sources.size());
  for (const auto& src : scenario.sources) {
    auto units = source_phase_units(scenario, src);
    std::vector<std::complex<double>> v(units.size());
    for (std::size_t s = 0; s < units.size(); ++s) v[s] = std::polar(1.0, kPi * units[s]);
    manifold.push_back(std::move(v));
  }

  SnapshotSet out;
  out.sensor_count = sensors;
  out.snapshots = q_count;
  out.data.assign(static_cast<std::size_t>(sensors) * q_count, {0.0, 0.0});

  std::mt19937_64 rng(derive_stream_seed(scenario.seed, 0));
  for (int q = 0; q < q_count; ++q) {
    for (std::size_t i = 0; i < scenario.sources.size(); ++i) {
      const auto amp = draw_complex_gaussian(rng, scenario.sources[i].power);
      const auto& v = manifold[i];
      for (int s = 0; s < sensors; ++s) out.at(s, q) += amp * v[s];
    }
    for (int s = 0; s < sensors; ++s)
      out.at(s, q) += draw_complex_gaussian(rng, scenario.noise_power);
  }
  return out;
}

std::vector<std::complex<double>> ensemble_correlation(const Scenario& scenario,
                                                       int dimension) {
  if (dimension < 1) throw std::invalid_argument("correlation dimension must be positive");
  scenario.validate(false);
  const std::size_t dim = dimension;
  std::vector<std::complex<double>> r(dim * dim, {0.0, 0.0});
  for (int a = 0; a < dimension; ++a) {
    double diag = scenario.noise_power;
    for (const auto& src : scenario.sources) diag += src.power;
    r[a * dim + a] = diag;
    for (int b = 0; b < a; ++b) {
      std::complex<double> sum = 0.0;
      for (const auto& src : scenario.sources)
        sum += src.power * std::polar(1.0, kPi * src.ux * (a - b));
      r[a * dim + b] = sum;
      r[b * dim + a] = std::conj(sum);
    }
  }
  return r;
}

std::vector<std::complex<double>> ensemble_correlation_planar(const Scenario& scenario,
                                                              int halfwidth) {
  if (halfwidth < 0) throw std::invalid_argument("halfwidth must be non-negative");
  scenario.validate(false);
  const int side = halfwidth + 1;
  const std::size_t dim = static_cast<std::size_t>(side) * side;
  std::vector<std::complex<double>> r(dim * dim, {0.0, 0.0});
  for (std::size_t n1 = 0; n1 < dim; ++n1) {
    const int i1 = static_cast<int>(n1) / side, j1 = static_cast<int>(n1) % side;
    for (std::size_t n2 = 0; n2 <= n1; ++n2) {
      const int i2 = static_cast<int>(n2) / side, j2 = static_cast<int>(n2) % side;
      std::complex<double> sum = n1 == n2 ? scenario.noise_power : 0.0;
      for (const auto& src : scenario.sources)
        sum += src.power * std::polar(1.0, kPi * (src.ux * (i1 - i2) + src.uy * (j1 - j2)));
      r[n1 * dim + n2] = sum;
      r[n2 * dim + n1] = std::conj(sum);
    }
  }
  return r;
}

}  // namespace sparsedoa
