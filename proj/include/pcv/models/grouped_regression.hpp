#pragma once

// Hierarchical Gaussian regression of grouped data:
//   y_ij | alpha_j, beta, sigma_y ~ N(alpha_j + x_j' beta, sigma_y^2)
//   alpha_j ~ N(mu_alpha, sigma_alpha^2), mu_alpha ~ N(0,1)
//   sigma_alpha, sigma_y ~ half-N(0, 10), beta_p ~ N(0,1)
// Covariates are constant within a group. A binary covariate mask selects a
// nested sub-model: masked coefficients are zeroed in the linear predictor
// and keep only their prior, so candidate models share one parameter space.
//
// Under LOGO folds the test group never appears in training, and the
// predictive marginalizes its group effect in closed form: a joint Gaussian
// with mean mu_alpha + x' beta and covariance sigma_y^2 I + sigma_alpha^2 J.

#include <memory>

#include "pcv/dataset.hpp"
#include "pcv/folds.hpp"
#include "pcv/model.hpp"

namespace pcv {

class GroupedRegressionModel : public Model {
 public:
  GroupedRegressionModel(std::string name, Dataset data, FoldAssignment folds,
                         std::vector<int> covariate_mask = {});

  std::string name() const override { return name_; }
  int dim() const override;
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

  // Log predictive of one unseen group's observations, marginalizing the
  // group effect over N(mu_alpha, sigma_alpha^2) in closed form.
  static double logo_log_pred_unseen_group(std::span<const double> y,
                                           std::span<const double> mean_wo_alpha,
                                           double mu_alpha, double sigma_alpha2,
                                           double sigma_y2);

  const Dataset& data() const { return data_; }
  const FoldAssignment& folds() const { return folds_; }
  const std::vector<int>& covariate_mask() const { return mask_; }

 private:
  struct FoldMeta {  // per-fold test layout, precomputed
    int group = -1;
    bool unseen = true;  // no training observation from this group
    std::vector<int> obs;
  };

  // Parameter layout: [alpha_0..alpha_{J-1}, beta_0..beta_{P-1},
  //                    mu_alpha, log sigma_alpha, log sigma_y]
  int j_groups_;
  int p_cov_;
  std::string name_;
  Dataset data_;
  FoldAssignment folds_;
  std::vector<int> mask_;
  std::vector<std::vector<FoldMeta>> fold_meta_;  // per fold, per test group

  double linpred(std::span<const double> theta, long obs) const;
};

// Simulated data matching the model's priors. X entries are N(0, 10)
// variates shared within each group. When min_omitted_beta > 0, the last
// coefficient is redrawn until its magnitude reaches that floor.
struct GroupedSimOptions {
  int groups = 50;      // J
  int per_group = 5;    // N_j
  int covariates = 4;   // P
  double min_omitted_beta = 0.0;
};

struct GroupedSimResult {
  Dataset data;
  std::vector<double> alpha;
  std::vector<double> beta;
  double mu_alpha = 0.0;
  double sigma_alpha = 0.0;
  double sigma_y = 0.0;
};

GroupedSimResult simulate_grouped_regression(const GroupedSimOptions& opt,
                                             std::uint64_t seed);

}  // namespace pcv
