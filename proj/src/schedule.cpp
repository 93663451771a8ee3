#include "modev/schedule.hpp"

#include <cstring>

#include "modev/rng.hpp"

namespace modev {

std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t seed) {
  // FNV-1a, finalized with mix64.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

std::uint64_t hash_matrix(const Mat& m, std::uint64_t seed) {
  const std::int64_t shape[2] = {m.rows(), m.cols()};
  const std::uint64_t h = hash_bytes(shape, sizeof(shape), seed);
  return hash_bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

ControlSchedule ControlSchedule::zero(int dim, int n) {
  return from_tilts(Mat::Zero(dim, n));
}

ControlSchedule ControlSchedule::constant(const ConstVecRef& alpha, int n) {
  return from_tilts(alpha.replicate(1, n));
}

ControlSchedule ControlSchedule::from_tilts(Mat tilts) {
  ControlSchedule s;
  s.n = static_cast<int>(tilts.cols());
  s.tilts = std::move(tilts);
  s.fingerprint = hash_matrix(s.tilts);
  return s;
}

}  // namespace modev
