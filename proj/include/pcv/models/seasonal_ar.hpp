#pragma once

// Seasonal autoregression of a monthly growth-rate series:
//   y_t = sum_i rho_i y_{t-i} + beta_0 + sum_j beta_j d_j(t) + sigma eps_t
// fit conditionally on the observed lags, which enter the design matrix as
// covariates. Priors: sigma ~ half-N(0,1), beta_j ~ N(0,1), and a Beta(5,5)
// prior on the AR coefficients through one of two transforms:
//   RhoTransform::HalfOpen  w = 2 rho - 1 ~ Beta(5,5), rho in (1/2, 1)
//   RhoTransform::Symmetric w = (rho+1)/2 ~ Beta(5,5), rho in (-1, 1)
//
// The dataset is the regression view: one row per scoreable time point with
// covariates [lag_1..lag_p, d_1..d_q]; CV folds are contiguous time blocks.

#include "pcv/dataset.hpp"
#include "pcv/folds.hpp"
#include "pcv/model.hpp"

namespace pcv {

enum class RhoTransform { HalfOpen, Symmetric };

class SeasonalARModel : public Model {
 public:
  SeasonalARModel(std::string name, Dataset data, FoldAssignment folds,
                  int ar_order, int seasonal_dummies,
                  RhoTransform transform = RhoTransform::HalfOpen);

  std::string name() const override { return name_; }
  int dim() const override { return p_ + q_ + 2; }
  int fold_count() const override { return folds_.K; }
  long test_size(int fold_id) const override;
  double log_joint(std::span<const double> theta, int fold_id) const override;
  void grad_log_joint(std::span<const double> theta, int fold_id,
                      std::span<double> grad) const override;
  double log_pred(std::span<const double> theta, int fold_id) const override;
  double log_lik_test(std::span<const double> theta,
                      int fold_id) const override;
  std::vector<double> initial_draw(CounterRng& rng) const override;
  bool supports_pred_derivs() const override { return true; }
  void pred_derivs(std::span<const double> theta, int fold_id,
                   std::span<double> d1, std::span<double> d2) const override;
  bool supports_pred_sample() const override { return true; }
  void pred_sample(std::span<const double> theta, int fold_id, CounterRng& rng,
                   std::span<double> out) const override;
  std::vector<double> test_values(int fold_id) const override;
  std::vector<std::string> param_names() const override;

  double rho_of(double u) const;       // unconstrained -> AR coefficient
  double drho_du(double u) const;

 private:
  // Layout: [u_1..u_p (rho), beta_0..beta_q, log sigma]
  int p_, q_;
  RhoTransform transform_;
  std::string name_;
  Dataset data_;
  FoldAssignment folds_;
  std::vector<std::vector<int>> test_obs_;

  double mean_at(std::span<const double> theta, long obs) const;
};

struct SeasonalSimOptions {
  long months = 432;   // series length T
  int ar_order = 1;    // p
  int dummies = 11;    // q
  double rho = 0.6;
  double seasonal_amp = 1.0;  // sd of the dummy coefficients
  double sigma = 1.0;
};

struct SeasonalSimResult {
  Dataset data;  // regression view with lag and dummy covariates
  std::vector<double> rho;
  std::vector<double> beta;  // intercept first
  double sigma = 0.0;
};

SeasonalSimResult simulate_seasonal_ar(const SeasonalSimOptions& opt,
                                       std::uint64_t seed);

}  // namespace pcv
