#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "grokdyn/types.hpp"

namespace grokdyn {

/// Pointwise activation. The derivative at 0 is 0 for relu and `slope` for
/// leaky_relu (the left-hand subgradient).
struct Activation {
  enum class Kind { kRelu, kLeakyRelu, kIdentity };

  Kind kind = Kind::kRelu;
  double slope = 0.1;  // only used by kLeakyRelu

  static Activation relu() { return {Kind::kRelu, 0.0}; }
  static Activation leaky_relu(double slope) { return {Kind::kLeakyRelu, slope}; }
  static Activation identity() { return {Kind::kIdentity, 0.0}; }
  /// Accepts "relu", "identity", "leaky_relu" and "leaky_relu:<slope>".
  static Activation parse(const std::string& text);

  std::string name() const;

  double value(double x) const {
    switch (kind) {
      case Kind::kRelu: return x > 0.0 ? x : 0.0;
      case Kind::kLeakyRelu: return x > 0.0 ? x : slope * x;
      case Kind::kIdentity: return x;
    }
    return x;
  }
  double derivative(double x) const {
    switch (kind) {
      case Kind::kRelu: return x > 0.0 ? 1.0 : 0.0;
      case Kind::kLeakyRelu: return x > 0.0 ? 1.0 : slope;
      case Kind::kIdentity: return 1.0;
    }
    return 1.0;
  }

  Matrix apply(const Matrix& z) const;
  Matrix derivative(const Matrix& z) const;
};

/// Two-layer bias-free network f(x) = sigma(x W1) W2.
struct NetParams {
  Matrix W1;  // d_in x d_h
  Matrix W2;  // d_h x d_out
  Activation activation;

  Index d_in() const { return W1.rows(); }
  Index d_h() const { return W1.cols(); }
  Index d_out() const { return W2.cols(); }
  Index size() const { return W1.size() + W2.size(); }
  double squared_norm() const { return W1.squaredNorm() + W2.squaredNorm(); }
};

struct LayoutEntry {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  Index offset = 0;

  bool operator==(const LayoutEntry&) const = default;
};

/// Flattened parameter vector theta. Blocks are stored column-major in the
/// order W1, W2.
struct FlatVector {
  Vector values;
  std::vector<LayoutEntry> layout;
};

std::vector<LayoutEntry> make_layout(Index d_in, Index d_h, Index d_out);
FlatVector flatten(const NetParams& params);
NetParams unflatten(const FlatVector& flat, Activation activation);
/// Rebuilds params with the shapes of `like` from a raw vector.
NetParams unflatten_like(const Vector& values, const NetParams& like);

struct ForwardPass {
  Matrix Z;     // X W1
  Matrix H;     // sigma(Z)
  Matrix Yhat;  // H W2
};

ForwardPass forward(const NetParams& params, const Matrix& X);

struct LossValue {
  double data = 0.0;         // sum of squared errors (no 1/k)
  double regularized = 0.0;  // data + lambda * ||theta||^2
};

LossValue loss(const NetParams& params, const Matrix& X, const Matrix& Y, double lambda);

/// Gradient of `data_scale * L + lambda * ||theta||^2` in FlatVector layout.
FlatVector grad_loss(const NetParams& params, const Matrix& X, const Matrix& Y,
                     double lambda, double data_scale = 1.0);

/// Jacobian of the concatenated outputs F(theta), shape (k * d_out) x d.
/// Row i * d_out + o is d f_o(theta, x_i) / d theta.
Matrix jacobian(const NetParams& params, const Matrix& X);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer, i.e. the default
/// initialisation of a bias-free torch.nn.Linear.
NetParams init_fan_in_uniform(Index d_in, Index d_h, Index d_out, Activation activation,
                              std::mt19937_64& rng);

/// Writes `<prefix>.bin` (little-endian float64 values) and `<prefix>.json`
/// (layout descriptor).
void save_flat(const FlatVector& flat, const std::filesystem::path& prefix);
FlatVector load_flat(const std::filesystem::path& prefix);

}  // namespace grokdyn
