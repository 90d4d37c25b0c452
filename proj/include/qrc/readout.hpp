#pragma once

// Trainable readouts: ridge-regularized linear map on standardized features
// (with an appended constant column), or one ReLU hidden layer trained by
// full-batch gradient descent on the mean squared error.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qrc/error.hpp"
#include "qrc/linalg.hpp"
#include "qrc/rng.hpp"
#include "qrc/tolerances.hpp"

namespace qrc {

enum class ReadoutKind { linear, mlp };

inline std::string to_string(ReadoutKind k) { return k == ReadoutKind::linear ? "linear" : "mlp"; }

struct ReadoutSpec {
  ReadoutKind kind = ReadoutKind::linear;
  double ridge = 1e-6;
  std::size_t hidden_width = 64;
  double learning_rate = 1e-3;
  std::size_t epochs = 2000;
  std::uint64_t init_seed = 0;
  bool standardize = true;
  bool bias = true;  // linear only: append the constant column
};

struct Standardizer {
  bool enabled = true;
  RealVector mean;
  RealVector scale;

  static Standardizer fit(const RealMatrix& x, bool enabled) {
    Standardizer s;
    s.enabled = enabled;
    const auto f = x.cols();
    s.mean = RealVector::Zero(f);
    s.scale = RealVector::Ones(f);
    if (!enabled) return s;
    const double t = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < f; ++j) {
      const double m = x.col(j).sum() / t;
      const double var = (x.col(j).array() - m).square().sum() / t;
      s.mean(j) = m;
      s.scale(j) = std::max(std::sqrt(var), tol::kStdFloor);
    }
    return s;
  }

  RealMatrix apply(const RealMatrix& x) const {
    if (!enabled) return x;
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  }
};

struct MlpParams {
  RealMatrix w1;  // F x H
  RealVector b1;  // H
  RealMatrix w2;  // H x O
  RealVector b2;  // O
};

struct ReadoutModel {
  ReadoutKind kind = ReadoutKind::linear;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  ReadoutSpec spec;
  Standardizer standardizer;
  RealMatrix weights;  // linear: (F [+ 1 bias row]) x O
  MlpParams mlp;
};

namespace detail {

inline void require_finite(const RealMatrix& m, const char* what) {
  require(m.allFinite(), ErrorCategory::data, std::string(what) + " contains NaN or Inf");
}

inline RealMatrix with_bias_column(const RealMatrix& z) {
  RealMatrix out(z.rows(), z.cols() + 1);
  out.leftCols(z.cols()) = z;
  out.col(z.cols()).setOnes();
  return out;
}

inline RealMatrix relu(const RealMatrix& a) { return a.cwiseMax(0.0); }

}  // namespace detail

/// Standardized (and bias-augmented, for the linear kind) design matrix.
inline RealMatrix design_matrix(const ReadoutModel& model, const RealMatrix& x) {
  RealMatrix z = model.standardizer.apply(x);
  if (model.kind == ReadoutKind::linear && model.spec.bias) return detail::with_bias_column(z);
  return z;
}

/// MSE = sum((P - Y)^2) / (T * O) and its gradient with respect to all parameters.
struct MlpLossGrad {
  double loss;
  MlpParams grad;
};

inline MlpLossGrad mlp_loss_and_gradient(const MlpParams& p, const RealMatrix& z, const RealMatrix& y) {
  const RealMatrix a = (z * p.w1).rowwise() + p.b1.transpose();
  const RealMatrix h = detail::relu(a);
  const RealMatrix pred = (h * p.w2).rowwise() + p.b2.transpose();
  const RealMatrix e = pred - y;
  const double norm = static_cast<double>(y.rows() * y.cols());
  MlpLossGrad out;
  out.loss = e.squaredNorm() / norm;
  const RealMatrix dpred = (2.0 / norm) * e;
  out.grad.w2 = h.transpose() * dpred;
  out.grad.b2 = dpred.colwise().sum().transpose();
  const RealMatrix dh = dpred * p.w2.transpose();
  const RealMatrix da = dh.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
  out.grad.w1 = z.transpose() * da;
  out.grad.b1 = da.colwise().sum().transpose();
  return out;
}

inline MlpParams mlp_init(std::size_t fan_in, std::size_t hidden, std::size_t fan_out, std::uint64_t seed) {
  Rng rng(seed);
  auto uniform_matrix = [&](std::size_t rows, std::size_t cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-limit, limit);
    return m;
  };
  MlpParams p;
  p.w1 = uniform_matrix(fan_in, hidden);
  p.b1 = RealVector::Zero(static_cast<Eigen::Index>(hidden));
  p.w2 = uniform_matrix(hidden, fan_out);
  p.b2 = RealVector::Zero(static_cast<Eigen::Index>(fan_out));
  return p;
}

/// Ridge normal equations (Z^T Z + lambda I) W = Z^T Y solved by Cholesky
/// with one step of iterative refinement.
inline RealMatrix solve_ridge(const RealMatrix& z, const RealMatrix& y, double lambda) {
  RealMatrix a = z.transpose() * z;
  a.diagonal().array() += lambda;
  const RealMatrix b = z.transpose() * y;
  Eigen::LLT<RealMatrix> llt(a);
  require(llt.info() == Eigen::Success, ErrorCategory::singular_system,
          "ridge: normal equations are singular; use ridge lambda > 0");
  RealMatrix w = llt.solve(b);
  w += llt.solve(b - a * w);
  require(w.allFinite(), ErrorCategory::singular_system,
          "ridge: solution is not finite; use ridge lambda > 0");
  return w;
}

inline ReadoutModel fit(const RealMatrix& x, const RealMatrix& y, const ReadoutSpec& spec) {
  require(x.rows() == y.rows(), ErrorCategory::shape, "fit: feature and target row counts differ");
  require(x.rows() >= 1 && x.cols() >= 1 && y.cols() >= 1, ErrorCategory::shape, "fit: empty input");
  detail::require_finite(x, "fit: features");
  detail::require_finite(y, "fit: targets");
  require(spec.ridge >= 0.0, ErrorCategory::argument, "fit: ridge lambda must be >= 0");

  ReadoutModel model;
  model.kind = spec.kind;
  model.spec = spec;
  model.input_dim = static_cast<std::size_t>(x.cols());
  model.output_dim = static_cast<std::size_t>(y.cols());
  model.standardizer = Standardizer::fit(x, spec.standardize);
  const RealMatrix z = model.standardizer.apply(x);

  if (spec.kind == ReadoutKind::linear) {
    if (spec.ridge == 0.0 && spec.standardize) {
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        require(model.standardizer.scale(j) > tol::kStdFloor, ErrorCategory::singular_system,
                "fit: feature " + std::to_string(j) + " is constant; use ridge lambda > 0");
    }
    model.weights = solve_ridge(spec.bias ? detail::with_bias_column(z) : z, y, spec.ridge);
    return model;
  }

  require(spec.hidden_width >= 1, ErrorCategory::argument, "fit: hidden_width must be >= 1");
  MlpParams p = mlp_init(model.input_dim, spec.hidden_width, model.output_dim, spec.init_seed);
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    const auto lg = mlp_loss_and_gradient(p, z, y);
    p.w1 -= spec.learning_rate * lg.grad.w1;
    p.b1 -= spec.learning_rate * lg.grad.b1;
    p.w2 -= spec.learning_rate * lg.grad.w2;
    p.b2 -= spec.learning_rate * lg.grad.b2;
  }
  require(p.w1.allFinite() && p.w2.allFinite(), ErrorCategory::numerical,
          "fit: gradient descent diverged; lower the learning rate");
  model.mlp = std::move(p);
  return model;
}

inline RealMatrix predict(const ReadoutModel& model, const RealMatrix& x) {
  require(static_cast<std::size_t>(x.cols()) == model.input_dim, ErrorCategory::shape,
          "predict: model expects " + std::to_string(model.input_dim) + " features, got " +
              std::to_string(x.cols()));
  if (model.kind == ReadoutKind::linear) return design_matrix(model, x) * model.weights;
  const RealMatrix z = model.standardizer.apply(x);
  const RealMatrix h = detail::relu((z * model.mlp.w1).rowwise() + model.mlp.b1.transpose());
  return (h * model.mlp.w2).rowwise() + model.mlp.b2.transpose();
}

/// Sample Pearson correlation, clamped to [-1, 1].
inline double pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCategory::shape, "pearson: series lengths differ");
  require(a.size() >= 2, ErrorCategory::argument, "pearson: need at least two points");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  require(saa > 0.0 && sbb > 0.0, ErrorCategory::undefined_correlation,
          "pearson: a series has zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json matrix_to_json(const RealMatrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json vector_to_json(const RealVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline RealMatrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    require(static_cast<Eigen::Index>(j.at(i).size()) == cols, ErrorCategory::data_format,
            "model json: ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

inline RealVector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ReadoutModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(m.kind);
  j["input_dim"] = m.input_dim;
  j["output_dim"] = m.output_dim;
  j["hyperparameters"] = {{"ridge", m.spec.ridge},
                          {"hidden_width", m.spec.hidden_width},
                          {"learning_rate", m.spec.learning_rate},
                          {"epochs", m.spec.epochs},
                          {"init_seed", m.spec.init_seed},
                          {"standardize", m.spec.standardize},
                          {"bias", m.spec.bias}};
  j["standardizer"] = {{"enabled", m.standardizer.enabled},
                       {"mean", detail::vector_to_json(m.standardizer.mean)},
                       {"scale", detail::vector_to_json(m.standardizer.scale)}};
  if (m.kind == ReadoutKind::linear) {
    j["weights"] = detail::matrix_to_json(m.weights);
  } else {
    j["w1"] = detail::matrix_to_json(m.mlp.w1);
    j["b1"] = detail::vector_to_json(m.mlp.b1);
    j["w2"] = detail::matrix_to_json(m.mlp.w2);
    j["b2"] = detail::vector_to_json(m.mlp.b2);
  }
  return j;
}

inline ReadoutModel model_from_json(const nlohmann::json& j) {
  try {
    ReadoutModel m;
    const auto kind = j.at("kind").get<std::string>();
    require(kind == "linear" || kind == "mlp", ErrorCategory::data_format, "model json: unknown kind " + kind);
    m.kind = kind == "linear" ? ReadoutKind::linear : ReadoutKind::mlp;
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.output_dim = j.at("output_dim").get<std::size_t>();
    const auto& hp = j.at("hyperparameters");
    m.spec.kind = m.kind;
    m.spec.ridge = hp.at("ridge").get<double>();
    m.spec.hidden_width = hp.at("hidden_width").get<std::size_t>();
    m.spec.learning_rate = hp.at("learning_rate").get<double>();
    m.spec.epochs = hp.at("epochs").get<std::size_t>();
    m.spec.init_seed = hp.at("init_seed").get<std::uint64_t>();
    m.spec.standardize = hp.at("standardize").get<bool>();
    m.spec.bias = hp.at("bias").get<bool>();
    const auto& st = j.at("standardizer");
    m.standardizer.enabled = st.at("enabled").get<bool>();
    m.standardizer.mean = detail::vector_from_json(st.at("mean"));
    m.standardizer.scale = detail::vector_from_json(st.at("scale"));
    if (m.kind == ReadoutKind::linear) {
      m.weights = detail::matrix_from_json(j.at("weights"));
    } else {
      m.mlp.w1 = detail::matrix_from_json(j.at("w1"));
      m.mlp.b1 = detail::vector_from_json(j.at("b1"));
      m.mlp.w2 = detail::matrix_from_json(j.at("w2"));
      m.mlp.b2 = detail::vector_from_json(j.at("b2"));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::data_format, std::string("model json: ") + e.what());
  }
}

}  // namespace qrc
