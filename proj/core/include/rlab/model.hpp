#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace rlab {

/// Symmetric rank-one matrix estimation, w_ij = s_i s_j / sqrt(n) + z_ij sqrt(delta).
struct MatrixModel {
  double delta;
};

/// Symmetric rank-one order-p tensor estimation.
struct TensorModel {
  int p;
  double delta;
};

/// Gaussian random linear estimation, y = Phi s + z sqrt(delta), with
/// measurement rate alpha = rows / n and Phi entries of variance 1/n.
struct RleModel {
  double alpha;
  double delta;
};

using ModelSpec = std::variant<MatrixModel, TensorModel, RleModel>;

inline void validate(const ModelSpec& model) {
  std::visit(
      [](const auto& m) {
        if (!(m.delta > 0.0)) throw std::invalid_argument("model: delta must be > 0");
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, TensorModel>) {
          if (m.p < 2) throw std::invalid_argument("model: tensor order p must be >= 2");
        }
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, RleModel>) {
          if (!(m.alpha > 0.0)) throw std::invalid_argument("model: alpha must be > 0");
        }
      },
      model);
}

inline double model_delta(const ModelSpec& model) {
  return std::visit([](const auto& m) { return m.delta; }, model);
}

inline ModelSpec with_delta(ModelSpec model, double delta) {
  std::visit([delta](auto& m) { m.delta = delta; }, model);
  return model;
}

inline std::string model_name(const ModelSpec& model) {
  if (std::holds_alternative<MatrixModel>(model)) return "matrix";
  if (std::holds_alternative<TensorModel>(model)) return "tensor";
  return "rle";
}

}  // namespace rlab
