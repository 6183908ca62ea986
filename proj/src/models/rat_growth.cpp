#include "pcv/models/rat_growth.hpp"

#include <algorithm>
#include <cmath>

#include "pcv/errors.hpp"
#include "pcv/math.hpp"
#include "pcv/models/priors.hpp"

namespace pcv {

RatGrowthModel::RatGrowthModel(std::string name, Dataset data,
                               FoldAssignment folds, bool per_subject_slope)
    : per_subject_slope_(per_subject_slope),
      name_(std::move(name)),
      data_(std::move(data)),
      folds_(std::move(folds)) {
  data_.validate();
  if (!data_.has_groups() || data_.n_cov < 1)
    throw invalid_input("growth model needs a group column and a time covariate");
  folds_.validate(data_.n_obs());
  j_subjects_ = data_.n_groups();

  fold_meta_.resize(folds_.K);
  std::vector<long> train_count(j_subjects_);
  for (int k = 0; k < folds_.K; ++k) {
    std::fill(train_count.begin(), train_count.end(), 0);
    std::vector<std::vector<int>> per_subject(j_subjects_);
    for (long i = 0; i < data_.n_obs(); ++i) {
      if (folds_.test_index[i] == k)
        per_subject[data_.group_id[i]].push_back(static_cast<int>(i));
      else
        ++train_count[data_.group_id[i]];
    }
    for (int g = 0; g < j_subjects_; ++g)
      if (!per_subject[g].empty()) {
        FoldMeta meta;
        meta.subject = g;
        meta.unseen = train_count[g] == 0;
        meta.obs = std::move(per_subject[g]);
        fold_meta_[k].push_back(std::move(meta));
      }
  }
}

int RatGrowthModel::dim() const {
  return per_subject_slope_ ? 2 * j_subjects_ + 5 : j_subjects_ + 4;
}

long RatGrowthModel::test_size(int fold_id) const {
  return folds_.test_size(fold_id);
}

double RatGrowthModel::mean_at(std::span<const double> theta, long obs) const {
  const int g = data_.group_id[obs];
  const double t = data_.xv(obs, 0);
  const double slope =
      per_subject_slope_ ? theta[idx_beta() + g] : theta[idx_beta()];
  return theta[g] + slope * t;
}

double RatGrowthModel::log_joint(std::span<const double> theta,
                                 int fold_id) const {
  const int base = idx_mu_a();
  const double mu_a = theta[base];
  double lp = 0.0;
  if (per_subject_slope_) {
    const double mu_b = theta[base + 1];
    const double s_a = std::exp(theta[base + 2]);
    const double s_b = std::exp(theta[base + 3]);
    const double s_y = std::exp(theta[base + 4]);
    const double vy = s_y * s_y;
    for (long i = 0; i < data_.n_obs(); ++i) {
      const double mask = folds_.test_index[i] == fold_id ? 0.0 : 1.0;
      lp += mask * normal_logpdf(data_.y[i], mean_at(theta, i), vy);
    }
    for (int g = 0; g < j_subjects_; ++g) {
      lp += normal_logpdf(theta[g], mu_a, s_a * s_a);
      lp += normal_logpdf(theta[idx_beta() + g], mu_b, s_b * s_b);
    }
    lp += normal_logpdf(mu_a, 250.0, 20.0) + normal_logpdf(mu_b, 6.0, 2.0);
    lp += log_gamma_pdf(s_a, 25.0, 2.0) + theta[base + 2];
    lp += log_gamma_pdf(s_b, 5.0, 10.0) + theta[base + 3];
    lp += log_gamma_pdf(s_y, 1.0, 2.0) + theta[base + 4];
  } else {
    const double s_a = std::exp(theta[base + 1]);
    const double s_y = std::exp(theta[base + 2]);
    const double vy = s_y * s_y;
    for (long i = 0; i < data_.n_obs(); ++i) {
      const double mask = folds_.test_index[i] == fold_id ? 0.0 : 1.0;
      lp += mask * normal_logpdf(data_.y[i], mean_at(theta, i), vy);
    }
    for (int g = 0; g < j_subjects_; ++g)
      lp += normal_logpdf(theta[g], mu_a, s_a * s_a);
    lp += normal_logpdf(theta[idx_beta()], 6.0, 2.0);
    lp += normal_logpdf(mu_a, 250.0, 20.0);
    lp += log_gamma_pdf(s_a, 25.0, 2.0) + theta[base + 1];
    lp += log_gamma_pdf(s_y, 1.0, 2.0) + theta[base + 2];
  }
  return lp;
}

void RatGrowthModel::grad_log_joint(std::span<const double> theta, int fold_id,
                                    std::span<double> grad) const {
  for (int i = 0; i < dim(); ++i) grad[i] = 0.0;
  const int base = idx_mu_a();
  const double mu_a = theta[base];

  if (per_subject_slope_) {
    const double mu_b = theta[base + 1];
    const double s_a = std::exp(theta[base + 2]);
    const double s_b = std::exp(theta[base + 3]);
    const double s_y = std::exp(theta[base + 4]);
    const double va = s_a * s_a, vb = s_b * s_b, vy = s_y * s_y;
    double sum_r2 = 0.0;
    long n_train = 0;
    for (long i = 0; i < data_.n_obs(); ++i) {
      if (folds_.test_index[i] == fold_id) continue;
      const int g = data_.group_id[i];
      const double t = data_.xv(i, 0);
      const double r = data_.y[i] - mean_at(theta, i);
      grad[g] += r / vy;
      grad[idx_beta() + g] += t * r / vy;
      sum_r2 += r * r;
      ++n_train;
    }
    double sum_a2 = 0.0, sum_b2 = 0.0;
    for (int g = 0; g < j_subjects_; ++g) {
      const double da = theta[g] - mu_a;
      const double db = theta[idx_beta() + g] - mu_b;
      grad[g] -= da / va;
      grad[idx_beta() + g] -= db / vb;
      grad[base] += da / va;
      grad[base + 1] += db / vb;
      sum_a2 += da * da;
      sum_b2 += db * db;
    }
    grad[base] -= (mu_a - 250.0) / 20.0;
    grad[base + 1] -= (mu_b - 6.0) / 2.0;
    grad[base + 2] = sum_a2 / va - j_subjects_ + 25.0 - 2.0 * s_a;
    grad[base + 3] = sum_b2 / vb - j_subjects_ + 5.0 - 10.0 * s_b;
    grad[base + 4] = sum_r2 / vy - n_train + 1.0 - 2.0 * s_y;
  } else {
    const double s_a = std::exp(theta[base + 1]);
    const double s_y = std::exp(theta[base + 2]);
    const double va = s_a * s_a, vy = s_y * s_y;
    double sum_r2 = 0.0;
    long n_train = 0;
    for (long i = 0; i < data_.n_obs(); ++i) {
      if (folds_.test_index[i] == fold_id) continue;
      const int g = data_.group_id[i];
      const double t = data_.xv(i, 0);
      const double r = data_.y[i] - mean_at(theta, i);
      grad[g] += r / vy;
      grad[idx_beta()] += t * r / vy;
      sum_r2 += r * r;
      ++n_train;
    }
    double sum_a2 = 0.0;
    for (int g = 0; g < j_subjects_; ++g) {
      const double da = theta[g] - mu_a;
      grad[g] -= da / va;
      grad[base] += da / va;
      sum_a2 += da * da;
    }
    grad[idx_beta()] -= (theta[idx_beta()] - 6.0) / 2.0;
    grad[base] -= (mu_a - 250.0) / 20.0;
    grad[base + 1] = sum_a2 / va - j_subjects_ + 25.0 - 2.0 * s_a;
    grad[base + 2] = sum_r2 / vy - n_train + 1.0 - 2.0 * s_y;
  }
}

double RatGrowthModel::log_pred(std::span<const double> theta,
                                int fold_id) const {
  if (fold_id >= folds_.K) return 0.0;
  const int base = idx_mu_a();
  const double mu_a = theta[base];
  double lp = 0.0;
  if (per_subject_slope_) {
    const double mu_b = theta[base + 1];
    const double va = std::exp(2.0 * theta[base + 2]);
    const double vb = std::exp(2.0 * theta[base + 3]);
    const double vy = std::exp(2.0 * theta[base + 4]);
    std::vector<double> yv, mv, cov;
    for (const auto& meta : fold_meta_[fold_id]) {
      if (meta.unseen) {
        const int n = static_cast<int>(meta.obs.size());
        yv.clear();
        mv.clear();
        cov.assign(static_cast<size_t>(n) * n, 0.0);
        for (int a = 0; a < n; ++a) {
          const double ta = data_.xv(meta.obs[a], 0);
          yv.push_back(data_.y[meta.obs[a]]);
          mv.push_back(mu_a + mu_b * ta);
          for (int bcol = 0; bcol < n; ++bcol) {
            const double tb = data_.xv(meta.obs[bcol], 0);
            cov[a * n + bcol] = va + vb * ta * tb + (a == bcol ? vy : 0.0);
          }
        }
        lp += mvn_logpdf_chol(yv, mv, cov, n);
      } else {
        for (int i : meta.obs)
          lp += normal_logpdf(data_.y[i], mean_at(theta, i), vy);
      }
    }
  } else {
    const double va = std::exp(2.0 * theta[base + 1]);
    const double vy = std::exp(2.0 * theta[base + 2]);
    const double beta = theta[idx_beta()];
    std::vector<double> yv, mv;
    for (const auto& meta : fold_meta_[fold_id]) {
      if (meta.unseen) {
        yv.clear();
        mv.clear();
        for (int i : meta.obs) {
          yv.push_back(data_.y[i]);
          mv.push_back(mu_a + beta * data_.xv(i, 0));
        }
        lp += mvn_logpdf_compound(yv, mv, vy, va);
      } else {
        for (int i : meta.obs)
          lp += normal_logpdf(data_.y[i], mean_at(theta, i), vy);
      }
    }
  }
  return lp;
}

double RatGrowthModel::log_lik_test(std::span<const double> theta,
                                    int fold_id) const {
  const double s_y = std::exp(theta[dim() - 1]);
  const double vy = s_y * s_y;
  double lp = 0.0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    const double mask = folds_.test_index[i] == fold_id ? 1.0 : 0.0;
    lp += mask * normal_logpdf(data_.y[i], mean_at(theta, i), vy);
  }
  return lp;
}

std::vector<double> RatGrowthModel::initial_draw(CounterRng& rng) const {
  std::vector<double> theta(dim());
  const double mu_a = 250.0 + std::sqrt(20.0) * rng.normal();
  const double mu_b = 6.0 + std::sqrt(2.0) * rng.normal();
  const double s_a = gamma_draw(rng, 25.0, 2.0);
  const double s_b = gamma_draw(rng, 5.0, 10.0);
  const double s_y = gamma_draw(rng, 1.0, 2.0);
  for (int g = 0; g < j_subjects_; ++g) theta[g] = mu_a + s_a * rng.normal();
  const int base = idx_mu_a();
  if (per_subject_slope_) {
    for (int g = 0; g < j_subjects_; ++g)
      theta[idx_beta() + g] = mu_b + s_b * rng.normal();
    theta[base] = mu_a;
    theta[base + 1] = mu_b;
    theta[base + 2] = std::log(s_a);
    theta[base + 3] = std::log(s_b);
    theta[base + 4] = std::log(s_y);
  } else {
    theta[idx_beta()] = 6.0 + std::sqrt(2.0) * rng.normal();
    theta[base] = mu_a;
    theta[base + 1] = std::log(s_a);
    theta[base + 2] = std::log(s_y);
  }
  return theta;
}

void RatGrowthModel::pred_derivs(std::span<const double> theta, int fold_id,
                                 std::span<double> d1,
                                 std::span<double> d2) const {
  const double s_y = std::exp(theta[dim() - 1]);
  const double vy = s_y * s_y;
  long t = 0;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) {
      d1[t] = -(data_.y[i] - mean_at(theta, i)) / vy;
      d2[t] = -1.0 / vy;
      ++t;
    }
}

void RatGrowthModel::pred_sample(std::span<const double> theta, int fold_id,
                                 CounterRng& rng, std::span<double> out) const {
  const double s_y = std::exp(theta[dim() - 1]);
  long t = 0;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) out[t++] = mean_at(theta, i) + s_y * rng.normal();
}

std::vector<double> RatGrowthModel::test_values(int fold_id) const {
  std::vector<double> y;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) y.push_back(data_.y[i]);
  return y;
}

std::vector<std::string> RatGrowthModel::param_names() const {
  std::vector<std::string> n;
  for (int g = 0; g < j_subjects_; ++g)
    n.push_back("alpha[" + std::to_string(g) + "]");
  if (per_subject_slope_) {
    for (int g = 0; g < j_subjects_; ++g)
      n.push_back("beta[" + std::to_string(g) + "]");
    n.insert(n.end(), {"mu_alpha", "mu_beta", "log_sigma_alpha",
                       "log_sigma_beta", "log_sigma_y"});
  } else {
    n.insert(n.end(), {"beta", "mu_alpha", "log_sigma_alpha", "log_sigma_y"});
  }
  return n;
}

RatSimResult simulate_rat_growth(int subjects, std::uint64_t seed) {
  if (subjects < 2) throw invalid_input("simulator needs at least 2 subjects");
  CounterRng rng(seed, stream_key(StreamKind::Simulate, 2));
  RatSimResult out;
  out.mu_alpha = 250.0 + std::sqrt(20.0) * rng.normal();
  out.mu_beta = 6.0 + std::sqrt(2.0) * rng.normal();
  out.sigma_alpha = gamma_draw(rng, 25.0, 2.0);
  out.sigma_beta = gamma_draw(rng, 5.0, 10.0);
  out.sigma_y = gamma_draw(rng, 1.0, 2.0);
  const double times[5] = {8, 15, 22, 29, 36};
  Dataset& d = out.data;
  d.n_cov = 1;
  for (int g = 0; g < subjects; ++g) {
    const double a = out.mu_alpha + out.sigma_alpha * rng.normal();
    const double b = out.mu_beta + out.sigma_beta * rng.normal();
    out.alpha.push_back(a);
    out.beta.push_back(b);
    for (double t : times) {
      d.y.push_back(a + b * t + out.sigma_y * rng.normal());
      d.x.push_back(t);
      d.group_id.push_back(g);
    }
  }
  d.validate();
  return out;
}

}  // namespace pcv
