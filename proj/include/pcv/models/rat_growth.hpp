#pragma once

// Growth-curve model of repeated weight measurements:
//   M_A: y_jt ~ N(alpha_j + beta_j t, sigma_y^2)   (per-subject slopes)
//   M_B: y_jt ~ N(alpha_j + beta t, sigma_y^2)     (one shared slope)
// alpha_j ~ N(mu_alpha, sigma_alpha^2); for M_A also beta_j ~ N(mu_beta,
// sigma_beta^2). Hyper-priors: mu_alpha ~ N(250, 20), mu_beta ~ N(6, 2),
// sigma_alpha ~ Gamma(25, 2), sigma_beta ~ Gamma(5, 10), sigma_y ~
// Gamma(1, 2); M_B's shared slope has prior beta ~ N(6, 2).
//
// Folds leave one subject out. The unseen-subject predictive marginalizes
// (alpha_j, beta_j) into a dense joint Gaussian over that subject's times.

#include "pcv/dataset.hpp"
#include "pcv/folds.hpp"
#include "pcv/model.hpp"

namespace pcv {

class RatGrowthModel : public Model {
 public:
  // per_subject_slope selects M_A; otherwise the shared-slope M_B.
  RatGrowthModel(std::string name, Dataset data, FoldAssignment folds,
                 bool per_subject_slope);

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

 private:
  struct FoldMeta {
    int subject = -1;
    bool unseen = true;
    std::vector<int> obs;
  };

  bool per_subject_slope_;
  int j_subjects_;
  std::string name_;
  Dataset data_;
  FoldAssignment folds_;
  std::vector<std::vector<FoldMeta>> fold_meta_;

  // M_A layout: [alpha(J), beta(J), mu_a, mu_b, log s_a, log s_b, log s_y]
  // M_B layout: [alpha(J), beta,   mu_a,       log s_a,           log s_y]
  int idx_beta() const { return j_subjects_; }
  int idx_mu_a() const { return j_subjects_ + (per_subject_slope_ ? j_subjects_ : 1); }
  double mean_at(std::span<const double> theta, long obs) const;
};

struct RatSimResult {
  Dataset data;
  std::vector<double> alpha, beta;
  double mu_alpha = 0, mu_beta = 0, sigma_alpha = 0, sigma_beta = 0,
         sigma_y = 0;
};

// Synthetic growth data drawn from the M_A priors at times {8,15,22,29,36}.
RatSimResult simulate_rat_growth(int subjects, std::uint64_t seed);

}  // namespace pcv
