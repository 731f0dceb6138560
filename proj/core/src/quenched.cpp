#include "rlab/quenched.hpp"

#include <cmath>
#include <stdexcept>

#include "rlab/rng.hpp"

namespace rlab {

std::vector<std::vector<int>> sorted_tuples(int n, int p) {
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur(p, 0);
  while (true) {
    tuples.push_back(cur);
    int pos = p - 1;
    while (pos >= 0 && cur[pos] == n - 1) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int q = pos + 1; q < p; ++q) cur[q] = cur[pos];
  }
  return tuples;
}

int rle_rows(const RleModel& model, int n) {
  const int rows = static_cast<int>(std::llround(model.alpha * n));
  if (rows < 1) throw std::invalid_argument("rle: alpha * n must round to >= 1 measurement");
  return rows;
}

QuenchedSample draw_quenched(const ModelSpec& model, const Prior& prior, int n, int steps,
                             std::uint64_t seed, std::uint64_t sample_index) {
  if (n < 1) throw std::invalid_argument("quenched sample: n must be >= 1");
  if (steps < 1) throw std::invalid_argument("quenched sample: steps must be >= 1");
  validate(model);

  Rng rng = Rng::stream(seed, sample_index);
  QuenchedSample s;
  s.n = n;
  s.steps = steps;
  s.seed = seed;

  s.signal.resize(n);
  for (int i = 0; i < n; ++i) s.signal[i] = prior.sample(rng);

  if (std::holds_alternative<MatrixModel>(model)) {
    const std::size_t pairs = static_cast<std::size_t>(n) * (n + 1) / 2;
    s.pair_noise.assign(steps, std::vector<double>(pairs));
    for (auto& block : s.pair_noise)
      for (auto& z : block) z = rng.gaussian();
  } else if (const auto* ten = std::get_if<TensorModel>(&model)) {
    const std::size_t count = sorted_tuples(n, ten->p).size();
    s.tuple_noise.assign(steps, std::vector<double>(count));
    for (auto& block : s.tuple_noise)
      for (auto& z : block) z = rng.gaussian();
  } else {
    const auto& rle = std::get<RleModel>(model);
    s.rows = rle_rows(rle, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    s.sensing.resize(static_cast<std::size_t>(s.rows) * n);
    for (auto& phi : s.sensing) phi = scale * rng.gaussian();
    s.meas_noise.assign(steps, std::vector<double>(s.rows));
    for (auto& block : s.meas_noise)
      for (auto& z : block) z = rng.gaussian();
  }

  s.mf_noise.assign(steps, std::vector<double>(n));
  for (auto& block : s.mf_noise)
    for (auto& z : block) z = rng.gaussian();

  s.side_noise.resize(n);
  for (auto& z : s.side_noise) z = rng.gaussian();

  return s;
}

}  // namespace rlab
