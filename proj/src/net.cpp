#include "grokdyn/net.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "grokdyn/errors.hpp"

namespace grokdyn {

Activation Activation::parse(const std::string& text) {
  if (text == "relu") return relu();
  if (text == "identity" || text == "linear") return identity();
  if (text == "leaky_relu") return leaky_relu(0.1);
  const std::string prefix = "leaky_relu:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      return leaky_relu(std::stod(text.substr(prefix.size())));
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument("unknown activation '" + text + "'");
}

std::string Activation::name() const {
  switch (kind) {
    case Kind::kRelu: return "relu";
    case Kind::kIdentity: return "identity";
    case Kind::kLeakyRelu: {
      nlohmann::json j = slope;
      return "leaky_relu:" + j.dump();
    }
  }
  return "relu";
}

Matrix Activation::apply(const Matrix& z) const {
  return z.unaryExpr([this](double x) { return value(x); });
}

Matrix Activation::derivative(const Matrix& z) const {
  return z.unaryExpr([this](double x) { return derivative(x); });
}

std::vector<LayoutEntry> make_layout(Index d_in, Index d_h, Index d_out) {
  return {{"W1", d_in, d_h, 0}, {"W2", d_h, d_out, d_in * d_h}};
}

FlatVector flatten(const NetParams& params) {
  FlatVector flat;
  flat.layout = make_layout(params.d_in(), params.d_h(), params.d_out());
  flat.values.resize(params.size());
  flat.values.head(params.W1.size()) = params.W1.reshaped();
  flat.values.tail(params.W2.size()) = params.W2.reshaped();
  return flat;
}

NetParams unflatten(const FlatVector& flat, Activation activation) {
  if (flat.layout.size() != 2 || flat.layout[0].name != "W1" || flat.layout[1].name != "W2") {
    throw DimensionError("layout must list W1 then W2");
  }
  const auto& l1 = flat.layout[0];
  const auto& l2 = flat.layout[1];
  if (l1.cols != l2.rows || l2.offset != l1.rows * l1.cols ||
      flat.values.size() != l1.rows * l1.cols + l2.rows * l2.cols) {
    throw DimensionError("layout does not match value count");
  }
  NetParams p;
  p.activation = activation;
  p.W1 = flat.values.segment(l1.offset, l1.rows * l1.cols).reshaped(l1.rows, l1.cols);
  p.W2 = flat.values.segment(l2.offset, l2.rows * l2.cols).reshaped(l2.rows, l2.cols);
  return p;
}

NetParams unflatten_like(const Vector& values, const NetParams& like) {
  FlatVector flat{values, make_layout(like.d_in(), like.d_h(), like.d_out())};
  return unflatten(flat, like.activation);
}

namespace {

void check_shapes(const NetParams& params, const Matrix& X) {
  if (params.W1.cols() != params.W2.rows()) {
    throw DimensionError("W1 has " + std::to_string(params.W1.cols()) +
                         " hidden columns but W2 has " + std::to_string(params.W2.rows()) +
                         " rows");
  }
  if (X.cols() != params.W1.rows()) {
    throw DimensionError("input has " + std::to_string(X.cols()) + " columns, expected " +
                         std::to_string(params.W1.rows()));
  }
}

void check_targets(const NetParams& params, const Matrix& X, const Matrix& Y) {
  if (Y.rows() != X.rows() || Y.cols() != params.W2.cols()) {
    throw DimensionError("target shape does not match inputs/outputs");
  }
}

}  // namespace

ForwardPass forward(const NetParams& params, const Matrix& X) {
  check_shapes(params, X);
  ForwardPass out;
  out.Z.noalias() = X * params.W1;
  out.H = params.activation.apply(out.Z);
  out.Yhat.noalias() = out.H * params.W2;
  return out;
}

LossValue loss(const NetParams& params, const Matrix& X, const Matrix& Y, double lambda) {
  check_shapes(params, X);
  check_targets(params, X, Y);
  if (lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  const ForwardPass fw = forward(params, X);
  LossValue v;
  v.data = (fw.Yhat - Y).squaredNorm();
  v.regularized = v.data + lambda * params.squared_norm();
  return v;
}

FlatVector grad_loss(const NetParams& params, const Matrix& X, const Matrix& Y,
                     double lambda, double data_scale) {
  check_shapes(params, X);
  check_targets(params, X, Y);
  const ForwardPass fw = forward(params, X);
  const Matrix dYhat = 2.0 * data_scale * (fw.Yhat - Y);
  Matrix gW2 = fw.H.transpose() * dYhat;
  gW2 += 2.0 * lambda * params.W2;
  const Matrix dZ = (dYhat * params.W2.transpose())
                        .cwiseProduct(params.activation.derivative(fw.Z));
  Matrix gW1 = X.transpose() * dZ;
  gW1 += 2.0 * lambda * params.W1;

  FlatVector g;
  g.layout = make_layout(params.d_in(), params.d_h(), params.d_out());
  g.values.resize(params.size());
  g.values.head(gW1.size()) = gW1.reshaped();
  g.values.tail(gW2.size()) = gW2.reshaped();
  return g;
}

Matrix jacobian(const NetParams& params, const Matrix& X) {
  check_shapes(params, X);
  const Index k = X.rows();
  const Index d_in = params.d_in();
  const Index d_h = params.d_h();
  const Index m = params.d_out();
  const Index w2_offset = d_in * d_h;

  const ForwardPass fw = forward(params, X);
  const Matrix dsigma = params.activation.derivative(fw.Z);

  Matrix J = Matrix::Zero(k * m, params.size());
  for (Index i = 0; i < k; ++i) {
    for (Index o = 0; o < m; ++o) {
      const Index r = i * m + o;
      // W2 block: d yhat_{io} / d W2[h, o] = H[i, h].
      for (Index h = 0; h < d_h; ++h) J(r, w2_offset + o * d_h + h) = fw.H(i, h);
      // W1 block: X[i, j] * sigma'(Z[i, h]) * W2[h, o].
      for (Index j = 0; j < d_in; ++j) {
        const double xij = X(i, j);
        if (xij == 0.0) continue;
        for (Index h = 0; h < d_h; ++h) {
          J(r, h * d_in + j) = xij * dsigma(i, h) * params.W2(h, o);
        }
      }
    }
  }
  return J;
}

NetParams init_fan_in_uniform(Index d_in, Index d_h, Index d_out, Activation activation,
                              std::mt19937_64& rng) {
  if (d_in <= 0 || d_h <= 0 || d_out <= 0) throw InvalidArgument("layer sizes must be positive");
  NetParams p;
  p.activation = activation;
  const double b1 = 1.0 / std::sqrt(static_cast<double>(d_in));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(d_h));
  std::uniform_real_distribution<double> u1(-b1, b1);
  std::uniform_real_distribution<double> u2(-b2, b2);
  p.W1.resize(d_in, d_h);
  p.W2.resize(d_h, d_out);
  for (Index i = 0; i < p.W1.size(); ++i) p.W1.data()[i] = u1(rng);
  for (Index i = 0; i < p.W2.size(); ++i) p.W2.data()[i] = u2(rng);
  return p;
}

void save_flat(const FlatVector& flat, const std::filesystem::path& prefix) {
  std::filesystem::path bin = prefix;
  bin += ".bin";
  std::filesystem::path meta = prefix;
  meta += ".json";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw IoError("cannot write " + bin.string());
  out.write(reinterpret_cast<const char*>(flat.values.data()),
            static_cast<std::streamsize>(flat.values.size() * sizeof(double)));
  if (!out) throw IoError("short write to " + bin.string());

  nlohmann::ordered_json j;
  j["dtype"] = "float64";
  j["order"] = "column-major";
  j["size"] = flat.values.size();
  j["layout"] = nlohmann::ordered_json::array();
  for (const auto& e : flat.layout) {
    j["layout"].push_back({{"name", e.name}, {"shape", {e.rows, e.cols}}, {"offset", e.offset}});
  }
  std::ofstream mo(meta);
  if (!mo) throw IoError("cannot write " + meta.string());
  mo << j.dump(2) << '\n';
}

FlatVector load_flat(const std::filesystem::path& prefix) {
  std::filesystem::path bin = prefix;
  bin += ".bin";
  std::filesystem::path meta = prefix;
  meta += ".json";
  std::ifstream mi(meta);
  if (!mi) throw IoError("cannot read " + meta.string());
  nlohmann::json j;
  try {
    mi >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed layout descriptor " + meta.string() + ": " + e.what());
  }
  FlatVector flat;
  for (const auto& e : j.at("layout")) {
    flat.layout.push_back({e.at("name").get<std::string>(), e.at("shape").at(0).get<Index>(),
                           e.at("shape").at(1).get<Index>(), e.at("offset").get<Index>()});
  }
  const Index n = j.at("size").get<Index>();
  flat.values.resize(n);
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw IoError("cannot read " + bin.string());
  in.read(reinterpret_cast<char*>(flat.values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double))) {
    throw IoError("truncated parameter file " + bin.string());
  }
  return flat;
}

}  // namespace grokdyn
