#pragma once

// Hierarchical intercept model of measurements nested in counties, with an
// optional fixed effect for the floor indicator:
//   M_A: y_i ~ N(alpha_{j[i]} + beta x_i, sigma_y^2)
//   M_B: y_i ~ N(alpha_{j[i]},            sigma_y^2)   (beta masked)
// County effects use a non-centered parameterization alpha_j = mu_alpha +
// sigma_alpha z_j with z_j ~ N(0,1). Priors: mu_alpha ~ N(0, 4),
// sigma_alpha^2 ~ Gamma(6, 9), beta ~ N(0, 1), sigma_y^2 ~ Gamma(10, 10).
// County-wise folds marginalize the unseen county's effect in closed form.

#include "pcv/dataset.hpp"
#include "pcv/folds.hpp"
#include "pcv/model.hpp"

namespace pcv {

class RadonStyleModel : public Model {
 public:
  // include_floor = false masks the fixed effect (nested-model masking over
  // a shared parameter space).
  RadonStyleModel(std::string name, Dataset data, FoldAssignment folds,
                  bool include_floor);

  std::string name() const override { return name_; }
  int dim() const override { return j_counties_ + 4; }
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
    int county = -1;
    bool unseen = true;
    std::vector<int> obs;
  };

  bool include_floor_;
  int j_counties_;
  std::string name_;
  Dataset data_;
  FoldAssignment folds_;
  std::vector<std::vector<FoldMeta>> fold_meta_;

  // Layout: [z_0..z_{J-1}, beta, mu_alpha, log sigma_alpha^2, log sigma_y^2]
  double alpha_of(std::span<const double> theta, int county) const {
    const double sa = std::exp(0.5 * theta[j_counties_ + 2]);
    return theta[j_counties_ + 1] + sa * theta[county];
  }
};

struct RadonSimResult {
  Dataset data;
  std::vector<double> alpha;
  double beta = 0, mu_alpha = 0, sigma_alpha2 = 0, sigma_y2 = 0;
};

// Synthetic county data from the priors; floors are Bernoulli(1/2).
RadonSimResult simulate_radon_style(int houses, int counties,
                                    std::uint64_t seed);

}  // namespace pcv
