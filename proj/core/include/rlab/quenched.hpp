#pragma once

#include <cstdint>
#include <vector>

#include "rlab/model.hpp"
#include "rlab/prior.hpp"

namespace rlab {

/// Flat index of the (i, j) entry, i <= j, of a symmetric n x n array stored
/// as its upper triangle in row-major order.
inline std::size_t pair_index(int n, int i, int j) {
  return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i - 1) / 2 +
         static_cast<std::size_t>(j - i);
}

/// All nondecreasing index tuples 1 <= i1 <= ... <= ip <= n (0-based), in
/// lexicographic order; the storage layout of a symmetric order-p tensor.
std::vector<std::vector<int>> sorted_tuples(int n, int p);

/// Number of measurement rows for an RLE instance of size n.
int rle_rows(const RleModel& model, int n);

/// One realization of every quenched variable of a model instance: the signal
/// and `steps` independent blocks of coupling and mean-field noise, plus the
/// perturbation side-channel noise. The single-model oracle uses steps = 1;
/// the interpolating path uses steps = K.
///
/// Regenerating with the same (seed, sample index) reproduces the sample
/// bit-exactly; the draw order over fields is fixed.
struct QuenchedSample {
  int n = 0;
  int steps = 1;
  std::vector<double> signal;                    // n
  std::vector<std::vector<double>> pair_noise;   // steps x n(n+1)/2   (matrix)
  std::vector<std::vector<double>> tuple_noise;  // steps x |tuples|   (tensor)
  std::vector<std::vector<double>> meas_noise;   // steps x rows       (rle)
  std::vector<double> sensing;                   // rows x n, row-major (rle)
  int rows = 0;
  std::vector<std::vector<double>> mf_noise;     // steps x n
  std::vector<double> side_noise;                // n (perturbation channel)
  std::uint64_t seed = 0;
};

QuenchedSample draw_quenched(const ModelSpec& model, const Prior& prior, int n, int steps,
                             std::uint64_t seed, std::uint64_t sample_index);

}  // namespace rlab
