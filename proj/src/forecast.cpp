#include "slicead/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "slicead/csv.hpp"
#include "slicead/error.hpp"

namespace slicead {

namespace {

constexpr std::string_view kForecastHeader = "origin_slot,h,mu_dbm,sigma2_db2";
constexpr std::string_view kCalibrationHeader = "h,sigma_db";

// Standard normal CDF; +-inf arguments map to 1 and 0.
double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void normalize_in_place(std::vector<double>& v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= sum;
}

}  // namespace

void GaussianForecast::validate() const {
  if (steps.empty()) throw Error(ErrorCode::kInvalidArgument, "forecast horizon must be >= 1");
  for (std::size_t h = 0; h < steps.size(); ++h) {
    if (!std::isfinite(steps[h].mu_dbm)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite mean at h=" + std::to_string(h + 1));
    }
    if (!(steps[h].sigma2_db2 > 0.0) || !std::isfinite(steps[h].sigma2_db2)) {
      throw Error(ErrorCode::kNonPositiveVariance,
                  "variance must be positive and finite at h=" + std::to_string(h + 1));
    }
  }
}

int CapacityPmf::argmax_level(int h) const {
  const auto& p = step(h);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

CapacityPmf CapacityPmf::point_mass(int level, int levels, int horizon) {
  CapacityPmf pmf;
  pmf.probs.assign(static_cast<std::size_t>(horizon), std::vector<double>(static_cast<std::size_t>(levels), 0.0));
  for (auto& row : pmf.probs) row.at(static_cast<std::size_t>(level)) = 1.0;
  return pmf;
}

VarianceCalibration VarianceCalibration::constant(double sigma_db, int horizon) {
  return VarianceCalibration{std::vector<double>(static_cast<std::size_t>(horizon), sigma_db)};
}

VarianceCalibration VarianceCalibration::parse(std::string_view csv_text) {
  const auto rows = csv::parse(csv_text, kCalibrationHeader);
  VarianceCalibration calib;
  for (const csv::Row& row : rows) {
    const std::int64_t h = csv::to_int(row.fields[0], row.line);
    if (h != static_cast<std::int64_t>(calib.sigma_db.size()) + 1) {
      throw Error(ErrorCode::kMissingHorizonStep, "calibration rows must list h = 1..H in order");
    }
    const double sigma = csv::to_double(row.fields[1], row.line);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::kNonPositiveVariance, "calibration sigma must be positive");
    }
    calib.sigma_db.push_back(sigma);
  }
  if (calib.sigma_db.empty()) throw Error(ErrorCode::kInvalidArgument, "empty calibration");
  return calib;
}

std::string VarianceCalibration::to_csv() const {
  std::string out(kCalibrationHeader);
  out += '\n';
  for (std::size_t h = 0; h < sigma_db.size(); ++h) {
    out += std::to_string(h + 1) + ',' + csv::format_double(sigma_db[h]) + '\n';
  }
  return out;
}

GaussianForecast naive_forecast(std::span<const double> history, int horizon,
                                const VarianceCalibration& calib, std::int64_t origin_slot) {
  if (history.empty()) throw Error(ErrorCode::kEmptyHistory, "naive forecast needs history");
  if (horizon < 1 || calib.horizon() < horizon) {
    throw Error(ErrorCode::kInvalidArgument, "calibration does not cover the horizon");
  }
  GaussianForecast f{origin_slot, {}};
  for (int h = 0; h < horizon; ++h) {
    const double s = calib.sigma_db[static_cast<std::size_t>(h)];
    f.steps.push_back({history.back(), s * s});
  }
  return f;
}

VarianceCalibration calibrate_variance(const std::vector<std::vector<ForecastPair>>& pairs_by_step) {
  if (pairs_by_step.empty()) throw Error(ErrorCode::kTooFewSamples, "no horizon steps given");
  VarianceCalibration calib;
  double running = 0.0;
  for (std::size_t h = 0; h < pairs_by_step.size(); ++h) {
    const auto& pairs = pairs_by_step[h];
    if (pairs.size() < static_cast<std::size_t>(kMinCalibrationPairs)) {
      throw Error(ErrorCode::kTooFewSamples, "h=" + std::to_string(h + 1) + " has " +
                                                 std::to_string(pairs.size()) + " pairs, need " +
                                                 std::to_string(kMinCalibrationPairs));
    }
    double mean = 0.0;
    for (const ForecastPair& p : pairs) mean += p.realized - p.forecast_mu;
    mean /= static_cast<double>(pairs.size());
    double ss = 0.0;
    for (const ForecastPair& p : pairs) {
      const double d = p.realized - p.forecast_mu - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(pairs.size() - 1));
    running = std::max({running, sd, kSigmaFloorDb});
    calib.sigma_db.push_back(running);
  }
  return calib;
}

std::vector<std::vector<ForecastPair>> naive_residual_pairs(const RslTrace& trace, int horizon) {
  std::vector<std::vector<ForecastPair>> pairs(static_cast<std::size_t>(horizon));
  const auto& s = trace.samples;
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (t + static_cast<std::size_t>(horizon) >= s.size()) break;
    for (int h = 1; h <= horizon; ++h) {
      pairs[static_cast<std::size_t>(h - 1)].push_back({s[t].rsl_dbm, s[t + static_cast<std::size_t>(h)].rsl_dbm});
    }
  }
  return pairs;
}

double transition_probability(int from, int to, double mu_dbm, double sigma_db,
                              const AcmTable& table) {
  const double upper = std::max(table.up(to), table.down(from));
  const double lower = std::min(table.down(to), table.up(from));
  const double p = phi((upper - mu_dbm) / sigma_db) - phi((lower - mu_dbm) / sigma_db);
  return std::max(p, 0.0);
}

std::vector<double> transition_row(int from, double mu_dbm, double sigma_db, const AcmTable& table) {
  std::vector<double> row(static_cast<std::size_t>(table.size()));
  for (int to = 0; to < table.size(); ++to) {
    row[static_cast<std::size_t>(to)] = transition_probability(from, to, mu_dbm, sigma_db, table);
  }
  if (std::accumulate(row.begin(), row.end(), 0.0) <= 0.0) {
    throw Error(ErrorCode::kDegenerateRow, "all transition probabilities are zero from level " +
                                               std::to_string(from) + " (mu=" +
                                               csv::format_double(mu_dbm) + ")");
  }
  normalize_in_place(row);
  return row;
}

CapacityPmf capacity_pmf_horizon(int current_level, const GaussianForecast& forecast,
                                 const AcmTable& table) {
  forecast.validate();
  if (current_level < 0 || current_level > table.top()) {
    throw Error(ErrorCode::kInvalidArgument, "current level out of range");
  }
  const std::size_t levels = static_cast<std::size_t>(table.size());
  CapacityPmf pmf;
  pmf.probs.reserve(static_cast<std::size_t>(forecast.horizon()));
  for (int h = 1; h <= forecast.horizon(); ++h) {
    const GaussianStep& step = forecast.steps[static_cast<std::size_t>(h - 1)];
    const double sigma = std::sqrt(step.sigma2_db2);
    if (h == 1) {
      pmf.probs.push_back(transition_row(current_level, step.mu_dbm, sigma, table));
      continue;
    }
    const std::vector<double>& prev = pmf.probs.back();
    std::vector<double> next(levels, 0.0);
    for (std::size_t j = 0; j < levels; ++j) {
      const std::vector<double> row = transition_row(static_cast<int>(j), step.mu_dbm, sigma, table);
      for (std::size_t l = 0; l < levels; ++l) next[l] += row[l] * prev[j];
    }
    normalize_in_place(next);
    pmf.probs.push_back(std::move(next));
  }
  return pmf;
}

ForecastProvider ForecastProvider::parse(std::string_view csv_text) {
  const auto rows = csv::parse(csv_text, kForecastHeader);
  std::map<std::int64_t, std::map<std::int64_t, GaussianStep>> raw;
  std::int64_t max_h = 0;
  for (const csv::Row& row : rows) {
    const std::int64_t origin = csv::to_int(row.fields[0], row.line);
    const std::int64_t h = csv::to_int(row.fields[1], row.line);
    const double mu = csv::to_double(row.fields[2], row.line);
    const double var = csv::to_double(row.fields[3], row.line);
    if (h < 1) throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(row.line) + ": h < 1");
    if (!std::isfinite(mu)) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(row.line) + ": non-finite mean");
    }
    if (!(var > 0.0) || !std::isfinite(var)) {
      throw Error(ErrorCode::kNonPositiveVariance,
                  "line " + std::to_string(row.line) + ": variance must be positive");
    }
    if (!raw[origin].emplace(h, GaussianStep{mu, var}).second) {
      throw Error(ErrorCode::kDuplicateRow, "line " + std::to_string(row.line) + ": origin " +
                                                std::to_string(origin) + " h " + std::to_string(h) +
                                                " repeated");
    }
    max_h = std::max(max_h, h);
  }
  ForecastProvider provider;
  for (auto& [origin, steps] : raw) {
    GaussianForecast f{origin, {}};
    for (std::int64_t h = 1; h <= max_h; ++h) {
      const auto it = steps.find(h);
      if (it == steps.end()) {
        throw Error(ErrorCode::kMissingHorizonStep,
                    "origin " + std::to_string(origin) + " lacks h=" + std::to_string(h));
      }
      f.steps.push_back(it->second);
    }
    provider.add(std::move(f));
  }
  return provider;
}

std::string ForecastProvider::to_csv() const {
  std::string out(kForecastHeader);
  out += '\n';
  for (const auto& [origin, f] : forecasts_) {
    for (int h = 1; h <= f.horizon(); ++h) {
      const GaussianStep& s = f.steps[static_cast<std::size_t>(h - 1)];
      out += std::to_string(origin) + ',' + std::to_string(h) + ',' + csv::format_double(s.mu_dbm) +
             ',' + csv::format_double(s.sigma2_db2) + '\n';
    }
  }
  return out;
}

void ForecastProvider::add(GaussianForecast forecast) {
  forecast.validate();
  if (horizon_ != 0 && forecast.horizon() != horizon_) {
    throw Error(ErrorCode::kMissingHorizonStep, "all forecasts must share one horizon");
  }
  horizon_ = forecast.horizon();
  const std::int64_t origin = forecast.origin_slot;
  if (!forecasts_.emplace(origin, std::move(forecast)).second) {
    throw Error(ErrorCode::kDuplicateRow, "origin " + std::to_string(origin) + " repeated");
  }
}

const GaussianForecast* ForecastProvider::find(std::int64_t origin_slot) const {
  const auto it = forecasts_.find(origin_slot);
  return it == forecasts_.end() ? nullptr : &it->second;
}

NaiveForecaster::NaiveForecaster(VarianceCalibration calib, int horizon)
    : calib_(std::move(calib)), horizon_(horizon) {
  if (horizon_ < 1 || calib_.horizon() < horizon_) {
    throw Error(ErrorCode::kInvalidArgument, "calibration does not cover the horizon");
  }
}

GaussianForecast NaiveForecaster::forecast(std::int64_t slot, std::span<const double> history) const {
  return naive_forecast(history, horizon_, calib_, slot);
}

ExternalForecaster::ExternalForecaster(ForecastProvider provider,
                                       std::shared_ptr<const Forecaster> fallback)
    : provider_(std::move(provider)), fallback_(std::move(fallback)) {}

GaussianForecast ExternalForecaster::forecast(std::int64_t slot,
                                              std::span<const double> history) const {
  if (const GaussianForecast* f = provider_.find(slot)) return *f;
  if (!fallback_) {
    throw Error(ErrorCode::kForecastMissing, "no forecast for slot " + std::to_string(slot));
  }
  return fallback_->forecast(slot, history);
}

int ExternalForecaster::horizon() const {
  return provider_.size() > 0 ? provider_.horizon() : (fallback_ ? fallback_->horizon() : 0);
}

}  // namespace slicead
