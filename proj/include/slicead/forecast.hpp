#pragma once

// Short-horizon Gaussian RSL forecasts and their conversion into per-step
// probability mass functions over ACM capacity levels.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicead/link_capacity.hpp"

namespace slicead {

inline constexpr int kDefaultHorizon = 5;
inline constexpr int kDefaultLookback = 15;
inline constexpr double kSigmaFloorDb = 0.1;
inline constexpr int kMinCalibrationPairs = 30;

struct GaussianStep {
  double mu_dbm = 0.0;
  double sigma2_db2 = 1.0;
};

struct GaussianForecast {
  std::int64_t origin_slot = 0;
  std::vector<GaussianStep> steps;  // steps[h-1] for h = 1..H

  int horizon() const { return static_cast<int>(steps.size()); }
  // Throws kInvalidArgument / kNonPositiveVariance.
  void validate() const;
};

// probs[h-1][l]: probability that the capacity level at t+h is l.
struct CapacityPmf {
  std::vector<std::vector<double>> probs;

  int horizon() const { return static_cast<int>(probs.size()); }
  int levels() const { return probs.empty() ? 0 : static_cast<int>(probs.front().size()); }
  const std::vector<double>& step(int h) const { return probs.at(static_cast<std::size_t>(h - 1)); }
  // Most probable level at step h; ties go to the lower level.
  int argmax_level(int h) const;

  static CapacityPmf point_mass(int level, int levels, int horizon);
};

// Residual spread of a point forecaster per horizon step.
struct VarianceCalibration {
  std::vector<double> sigma_db;  // sigma_db[h-1]

  int horizon() const { return static_cast<int>(sigma_db.size()); }
  static VarianceCalibration constant(double sigma_db, int horizon);
  // CSV `h,sigma_db`.
  static VarianceCalibration parse(std::string_view csv_text);
  std::string to_csv() const;
};

struct ForecastPair {
  double forecast_mu = 0.0;
  double realized = 0.0;
};

// mu_h = last observed value, sigma2_h = calib.sigma_db[h-1]^2.
GaussianForecast naive_forecast(std::span<const double> history, int horizon,
                                const VarianceCalibration& calib, std::int64_t origin_slot = 0);

// pairs_by_step[h-1] holds the (forecast, realized) pairs of step h.
// sigma_h = max(sample stddev of residuals, 0.1 dB), then a running max over h.
VarianceCalibration calibrate_variance(const std::vector<std::vector<ForecastPair>>& pairs_by_step);

// Persistence-forecast pairs for every origin in the trace with a full horizon.
std::vector<std::vector<ForecastPair>> naive_residual_pairs(const RslTrace& trace, int horizon);

// Interval probability of moving from `from` to `to` given N(mu, sigma^2),
// clamped below at zero. Rows are not normalized here.
double transition_probability(int from, int to, double mu_dbm, double sigma_db,
                              const AcmTable& table);

// Normalized transition row from `from`; throws kDegenerateRow if all zero.
std::vector<double> transition_row(int from, double mu_dbm, double sigma_db, const AcmTable& table);

// Step 1 starts from `current_level`; later steps chain the normalized rows
// of their own (mu, sigma) as a first-order Markov recursion.
CapacityPmf capacity_pmf_horizon(int current_level, const GaussianForecast& forecast,
                                 const AcmTable& table);

// Forecasts imported from an external predictor, keyed by origin slot.
class ForecastProvider {
 public:
  // CSV `origin_slot,h,mu_dbm,sigma2_db2`. Every origin must list h = 1..H
  // where H is the largest step in the file.
  static ForecastProvider parse(std::string_view csv_text);
  std::string to_csv() const;

  void add(GaussianForecast forecast);
  const GaussianForecast* find(std::int64_t origin_slot) const;
  std::size_t size() const { return forecasts_.size(); }
  int horizon() const { return horizon_; }

 private:
  std::map<std::int64_t, GaussianForecast> forecasts_;
  int horizon_ = 0;
};

// Source of forecasts for the simulation engine.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  // `history` ends with the RSL observed at `slot`.
  virtual GaussianForecast forecast(std::int64_t slot, std::span<const double> history) const = 0;
  virtual int horizon() const = 0;
};

class NaiveForecaster : public Forecaster {
 public:
  NaiveForecaster(VarianceCalibration calib, int horizon = kDefaultHorizon);
  GaussianForecast forecast(std::int64_t slot, std::span<const double> history) const override;
  int horizon() const override { return horizon_; }

 private:
  VarianceCalibration calib_;
  int horizon_;
};

// Serves imported forecasts; falls back to `fallback` for uncovered slots,
// or throws kForecastMissing when no fallback is configured.
class ExternalForecaster : public Forecaster {
 public:
  ExternalForecaster(ForecastProvider provider, std::shared_ptr<const Forecaster> fallback);
  GaussianForecast forecast(std::int64_t slot, std::span<const double> history) const override;
  int horizon() const override;

 private:
  ForecastProvider provider_;
  std::shared_ptr<const Forecaster> fallback_;
};

}  // namespace slicead
