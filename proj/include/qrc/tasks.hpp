#pragma once

// Benchmark signals, price ingestion, train/test splits and 1-D spline
// baselines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qrc/csv.hpp"
#include "qrc/error.hpp"
#include "qrc/rng.hpp"

namespace qrc {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }

  void validate() const {
    require(times.size() == values.size(), ErrorCategory::shape, "time series: length mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
      require(std::isfinite(values[i]) && std::isfinite(times[i]), ErrorCategory::data,
              "time series: non-finite entry at index " + std::to_string(i));
      require(i == 0 || times[i] > times[i - 1], ErrorCategory::data,
              "time series: times must be strictly increasing");
    }
  }

  void write_csv(std::ostream& os) const {
    os << "t,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
      os << csv::format_double(times[i]) << ',' << csv::format_double(values[i]) << '\n';
  }
};

inline TimeSeries gen_cosine(double amplitude, double period, std::size_t n, double dt) {
  require(period > 0.0 && dt > 0.0 && n >= 1, ErrorCategory::argument,
          "gen_cosine: need period > 0, dt > 0, n >= 1");
  TimeSeries s;
  s.times.resize(n);
  s.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    s.times[k] = t;
    s.values[k] = amplitude * std::cos(2.0 * std::numbers::pi * t / period);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Mackey-Glass: dx/dt = beta x(t - tau) / (1 + x(t - tau)^n) - gamma x(t)

struct MackeyGlassParams {
  double beta = 0.2;
  double gamma = 0.1;
  double tau = 17.0;
  double n_exp = 10.0;
  double dt = 0.1;
  std::size_t n_steps = 22000;
  double history_value = 1.2;
  std::size_t discard = 2000;
};

/// Classical RK4 on the grid t_k = k dt, k = 0 .. n_steps - 1, with
/// x(t) = history_value for t <= 0. Delayed values come from linear
/// interpolation in the stored grid; when the delay is shorter than the
/// stage offset, between x_k and the current stage value.
inline TimeSeries gen_mackey_glass(const MackeyGlassParams& p) {
  require(p.dt > 0.0 && p.tau >= 0.0, ErrorCategory::argument, "mackey_glass: need dt > 0 and tau >= 0");
  require(p.n_steps > p.discard, ErrorCategory::argument, "mackey_glass: n_steps must exceed discard");

  double lag = p.tau / p.dt;  // delay in grid steps
  if (std::abs(lag - std::round(lag)) < 1e-9) lag = std::round(lag);

  std::vector<double> x;
  x.reserve(p.n_steps);
  x.push_back(p.history_value);

  auto rate = [&](double xt, double xd) {
    return p.beta * xd / (1.0 + std::pow(xd, p.n_exp)) - p.gamma * xt;
  };
  // Delayed value for a stage at grid position n + offset with state xs.
  auto delayed = [&](std::size_t n, double offset, double xs) {
    const double pos = static_cast<double>(n) + offset - lag;
    if (pos <= 0.0) return pos < 0.0 ? p.history_value : x[0];
    if (pos <= static_cast<double>(n)) {
      const auto i = static_cast<std::size_t>(std::floor(pos));
      const double f = pos - static_cast<double>(i);
      return f == 0.0 ? x[i] : (1.0 - f) * x[i] + f * x[i + 1];
    }
    return x[n] + (xs - x[n]) * (pos - static_cast<double>(n)) / offset;
  };

  for (std::size_t n = 0; n + 1 < p.n_steps; ++n) {
    const double xn = x[n];
    const double k1 = rate(xn, delayed(n, 0.0, xn));
    const double x2 = xn + 0.5 * p.dt * k1;
    const double k2 = rate(x2, delayed(n, 0.5, x2));
    const double x3 = xn + 0.5 * p.dt * k2;
    const double k3 = rate(x3, delayed(n, 0.5, x3));
    const double x4 = xn + p.dt * k3;
    const double k4 = rate(x4, delayed(n, 1.0, x4));
    const double next = xn + p.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    require(std::isfinite(next), ErrorCategory::numerical,
            "mackey_glass: non-finite state at step " + std::to_string(n + 1));
    x.push_back(next);
  }

  TimeSeries s;
  for (std::size_t k = p.discard; k < x.size(); ++k) {
    s.times.push_back(static_cast<double>(k) * p.dt);
    s.values.push_back(x[k]);
  }
  return s;
}

inline TimeSeries subsample(const TimeSeries& s, std::size_t stride) {
  require(stride >= 1, ErrorCategory::argument, "subsample: stride must be >= 1");
  TimeSeries out;
  for (std::size_t k = 0; k < s.size(); k += stride) {
    out.times.push_back(s.times[k]);
    out.values.push_back(s.values[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Affine rescaling to [-1, 1]

struct AffineScale {
  double lo = 0.0;
  double hi = 0.0;

  bool degenerate() const noexcept { return !(hi > lo); }
  double forward(double v) const noexcept { return degenerate() ? 0.0 : 2.0 * (v - lo) / (hi - lo) - 1.0; }
  double inverse(double y) const noexcept { return degenerate() ? lo : lo + 0.5 * (y + 1.0) * (hi - lo); }

  static AffineScale of(const std::vector<double>& v) {
    AffineScale s;
    if (v.empty()) return s;
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    s.lo = *mn;
    s.hi = *mx;
    return s;
  }
};

inline std::vector<double> rescale(const std::vector<double>& v, const AffineScale& s) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [&](double x) { return s.forward(x); });
  return out;
}

struct PriceData {
  TimeSeries series;  // trading-day index, rescaled closes
  AffineScale scale;
  std::vector<std::string> dates;
  std::vector<double> closes;
  std::optional<std::string> warning;
};

namespace detail {

inline bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = std::stoi(s.substr(5, 2));
  const int day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Reads a header-first CSV with (at least) `date` and `close` columns.
inline PriceData parse_price_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCategory::data_format, source + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = csv::split_line(line);
  int date_col = -1, close_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto name = csv::trim(header[i]);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == "date") date_col = static_cast<int>(i);
    if (name == "close") close_col = static_cast<int>(i);
  }
  require(date_col >= 0 && close_col >= 0, ErrorCategory::data_format,
          source + ": header must contain 'date' and 'close' columns");

  PriceData data;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_line(line);
    const auto need = static_cast<std::size_t>(std::max(date_col, close_col));
    require(fields.size() > need, ErrorCategory::data_format,
            source + ": row " + std::to_string(row) + " has too few columns");
    const auto date = csv::trim(fields[static_cast<std::size_t>(date_col)]);
    require(detail::is_iso_date(date), ErrorCategory::data_format,
            source + ": row " + std::to_string(row) + " has an invalid date '" + date + "'");
    const auto close = detail::parse_double(csv::trim(fields[static_cast<std::size_t>(close_col)]));
    require(close.has_value() && std::isfinite(*close), ErrorCategory::data_format,
            source + ": row " + std::to_string(row) + " has an unparseable close");
    require(*close > 0.0, ErrorCategory::data,
            source + ": row " + std::to_string(row) + " has a non-positive price");
    data.dates.push_back(date);
    data.closes.push_back(*close);
  }
  require(!data.closes.empty(), ErrorCategory::data_format, source + ": no data rows");

  data.scale = AffineScale::of(data.closes);
  if (data.scale.degenerate())
    data.warning = source + ": constant price series; rescaled values are all 0";
  data.series.values = rescale(data.closes, data.scale);
  for (std::size_t i = 0; i < data.closes.size(); ++i) data.series.times.push_back(static_cast<double>(i));
  return data;
}

inline PriceData load_price_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open price file " + path);
  return parse_price_csv(in, path);
}

/// Cumulative sum of seeded N(0, step_std^2) steps from 0, rescaled to [-1, 1].
inline TimeSeries gen_random_walk(std::size_t n, double step_std, std::uint64_t seed) {
  require(n >= 2, ErrorCategory::argument, "gen_random_walk: n must be >= 2");
  require(step_std >= 0.0 && std::isfinite(step_std), ErrorCategory::argument,
          "gen_random_walk: step_std must be >= 0");
  Rng rng(seed);
  std::vector<double> walk(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) walk[k] = walk[k - 1] + step_std * rng.normal();
  TimeSeries s;
  s.values = rescale(walk, AffineScale::of(walk));
  for (std::size_t k = 0; k < n; ++k) s.times.push_back(static_cast<double>(k));
  return s;
}

// ---------------------------------------------------------------------------
// Splits

enum class SplitKind { contiguous, shuffled };

struct SplitPlan {
  SplitKind kind = SplitKind::contiguous;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Train side gets floor(f * n) items: the first ones (contiguous) or the
/// first ones of a seeded permutation (shuffled). Both sides are returned
/// sorted.
inline SplitIndices split(std::size_t n_items, const SplitPlan& plan) {
  require(n_items >= 2, ErrorCategory::argument, "split: need at least two items");
  require(plan.train_fraction > 0.0 && plan.train_fraction < 1.0, ErrorCategory::argument,
          "split: train_fraction must lie in (0, 1)");
  const auto cut = static_cast<std::size_t>(std::floor(plan.train_fraction * static_cast<double>(n_items)));
  require(cut >= 1 && cut < n_items, ErrorCategory::argument,
          "split: train_fraction leaves one side empty for n = " + std::to_string(n_items));
  std::vector<std::size_t> order;
  if (plan.kind == SplitKind::shuffled) {
    Rng rng(plan.seed);
    order = permutation(n_items, rng);
  } else {
    order.resize(n_items);
    for (std::size_t i = 0; i < n_items; ++i) order[i] = i;
  }
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// ---------------------------------------------------------------------------
// Spline baselines

namespace detail {

inline void check_knots(const TimeSeries& train, const std::vector<double>& query) {
  require(train.size() >= 3, ErrorCategory::argument, "spline: need at least 3 knots");
  train.validate();
  for (double q : query)
    require(q >= train.times.front() && q <= train.times.back(), ErrorCategory::range,
            "spline: query time " + std::to_string(q) + " lies outside the knot range");
}

// Interval index i with t_i <= q <= t_{i+1}.
inline std::size_t interval_of(const std::vector<double>& t, double q) {
  auto it = std::upper_bound(t.begin(), t.end(), q);
  auto i = static_cast<std::size_t>(std::distance(t.begin(), it));
  return std::min(i == 0 ? 0 : i - 1, t.size() - 2);
}

inline std::optional<double> knot_value(const TimeSeries& s, double q) {
  auto it = std::lower_bound(s.times.begin(), s.times.end(), q);
  if (it != s.times.end() && *it == q) return s.values[static_cast<std::size_t>(it - s.times.begin())];
  return std::nullopt;
}

}  // namespace detail

/// Natural cubic spline (zero second derivative at both ends).
inline std::vector<double> cubic_spline_interpolate(const TimeSeries& train, const std::vector<double>& query) {
  detail::check_knots(train, query);
  const auto& t = train.times;
  const auto& y = train.values;
  const std::size_t n = t.size();
  // Second derivatives M_1..M_{n-2} from the tridiagonal system (Thomas).
  std::vector<double> m(n, 0.0), c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    const double diag = 2.0 * (h0 + h1);
    const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    const double denom = diag - h0 * c[i - 1];
    c[i] = h1 / denom;
    d[i] = (rhs - h0 * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];

  std::vector<double> out;
  out.reserve(query.size());
  for (double q : query) {
    if (auto k = detail::knot_value(train, q)) {
      out.push_back(*k);
      continue;
    }
    const auto i = detail::interval_of(t, q);
    const double h = t[i + 1] - t[i];
    const double a = t[i + 1] - q;
    const double b = q - t[i];
    out.push_back(m[i] * a * a * a / (6.0 * h) + m[i + 1] * b * b * b / (6.0 * h) +
                  (y[i] / h - m[i] * h / 6.0) * a + (y[i + 1] / h - m[i + 1] * h / 6.0) * b);
  }
  return out;
}

/// Monotone cubic Hermite spline with Fritsch-Carlson slopes.
inline std::vector<double> cubic_hermite_interpolate(const TimeSeries& train, const std::vector<double>& query) {
  detail::check_knots(train, query);
  const auto& t = train.times;
  const auto& y = train.values;
  const std::size_t n = t.size();
  std::vector<double> delta(n - 1), slope(n);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
  slope[0] = delta[0];
  slope[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    slope[i] = delta[i - 1] * delta[i] <= 0.0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      slope[i] = 0.0;
      slope[i + 1] = 0.0;
      continue;
    }
    const double a = slope[i] / delta[i];
    const double b = slope[i + 1] / delta[i];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double s = 3.0 / std::sqrt(r);
      slope[i] = s * a * delta[i];
      slope[i + 1] = s * b * delta[i];
    }
  }

  std::vector<double> out;
  out.reserve(query.size());
  for (double q : query) {
    if (auto k = detail::knot_value(train, q)) {
      out.push_back(*k);
      continue;
    }
    const auto i = detail::interval_of(t, q);
    const double h = t[i + 1] - t[i];
    const double s = (q - t[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    out.push_back((2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * slope[i] +
                  (-2 * s3 + 3 * s2) * y[i + 1] + (s3 - s2) * h * slope[i + 1]);
  }
  return out;
}

}  // namespace qrc
