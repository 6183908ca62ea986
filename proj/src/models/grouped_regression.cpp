#include "pcv/models/grouped_regression.hpp"

#include <algorithm>
#include <cmath>

#include "pcv/errors.hpp"
#include "pcv/math.hpp"
#include "pcv/models/priors.hpp"

namespace pcv {

GroupedRegressionModel::GroupedRegressionModel(std::string name, Dataset data,
                                               FoldAssignment folds,
                                               std::vector<int> covariate_mask)
    : name_(std::move(name)), data_(std::move(data)), folds_(std::move(folds)) {
  data_.validate();
  if (!data_.has_groups())
    throw invalid_input("grouped regression needs a group column");
  folds_.validate(data_.n_obs());
  j_groups_ = data_.n_groups();
  p_cov_ = data_.n_cov;
  mask_ = covariate_mask.empty() ? std::vector<int>(p_cov_, 1)
                                 : std::move(covariate_mask);
  if (static_cast<int>(mask_.size()) != p_cov_)
    throw invalid_input("covariate mask length must equal covariate count");

  // Per fold: test observations grouped by group id, with a seen/unseen flag.
  fold_meta_.resize(folds_.K);
  std::vector<long> train_count(j_groups_);
  for (int k = 0; k < folds_.K; ++k) {
    std::fill(train_count.begin(), train_count.end(), 0);
    std::vector<std::vector<int>> per_group(j_groups_);
    for (long i = 0; i < data_.n_obs(); ++i) {
      if (folds_.test_index[i] == k)
        per_group[data_.group_id[i]].push_back(static_cast<int>(i));
      else
        ++train_count[data_.group_id[i]];
    }
    for (int g = 0; g < j_groups_; ++g)
      if (!per_group[g].empty()) {
        FoldMeta meta;
        meta.group = g;
        meta.unseen = train_count[g] == 0;
        meta.obs = std::move(per_group[g]);
        fold_meta_[k].push_back(std::move(meta));
      }
  }
}

int GroupedRegressionModel::dim() const { return j_groups_ + p_cov_ + 3; }

long GroupedRegressionModel::test_size(int fold_id) const {
  return folds_.test_size(fold_id);
}

double GroupedRegressionModel::linpred(std::span<const double> theta,
                                       long obs) const {
  const double* beta = theta.data() + j_groups_;
  double m = theta[data_.group_id[obs]];
  for (int p = 0; p < p_cov_; ++p)
    if (mask_[p]) m += data_.xv(obs, p) * beta[p];
  return m;
}

double GroupedRegressionModel::log_joint(std::span<const double> theta,
                                         int fold_id) const {
  const double mu_a = theta[j_groups_ + p_cov_];
  const double sig_a = std::exp(theta[j_groups_ + p_cov_ + 1]);
  const double sig_y = std::exp(theta[j_groups_ + p_cov_ + 2]);
  const double va = sig_a * sig_a, vy = sig_y * sig_y;

  double lp = 0.0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    const double mask = folds_.test_index[i] == fold_id ? 0.0 : 1.0;
    lp += mask * normal_logpdf(data_.y[i], linpred(theta, i), vy);
  }
  for (int g = 0; g < j_groups_; ++g) lp += normal_logpdf(theta[g], mu_a, va);
  lp += normal_logpdf(mu_a, 0.0, 1.0);
  for (int p = 0; p < p_cov_; ++p)
    lp += normal_logpdf(theta[j_groups_ + p], 0.0, 1.0);
  // Half-normal scale priors plus the log-transform Jacobians.
  lp += log_half_normal(sig_a, 10.0) + theta[j_groups_ + p_cov_ + 1];
  lp += log_half_normal(sig_y, 10.0) + theta[j_groups_ + p_cov_ + 2];
  return lp;
}

void GroupedRegressionModel::grad_log_joint(std::span<const double> theta,
                                            int fold_id,
                                            std::span<double> grad) const {
  const int d = dim();
  for (int i = 0; i < d; ++i) grad[i] = 0.0;
  const double* beta = theta.data() + j_groups_;
  const double mu_a = theta[j_groups_ + p_cov_];
  const double sig_a = std::exp(theta[j_groups_ + p_cov_ + 1]);
  const double sig_y = std::exp(theta[j_groups_ + p_cov_ + 2]);
  const double va = sig_a * sig_a, vy = sig_y * sig_y;

  double sum_r2 = 0.0;
  long n_train = 0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    if (folds_.test_index[i] == fold_id) continue;
    const double r = data_.y[i] - linpred(theta, i);
    grad[data_.group_id[i]] += r / vy;
    for (int p = 0; p < p_cov_; ++p)
      if (mask_[p]) grad[j_groups_ + p] += data_.xv(i, p) * r / vy;
    sum_r2 += r * r;
    ++n_train;
  }
  double sum_a2 = 0.0;
  for (int g = 0; g < j_groups_; ++g) {
    const double dev = theta[g] - mu_a;
    grad[g] -= dev / va;
    grad[j_groups_ + p_cov_] += dev / va;
    sum_a2 += dev * dev;
  }
  grad[j_groups_ + p_cov_] -= mu_a;  // mu_alpha ~ N(0,1)
  for (int p = 0; p < p_cov_; ++p) grad[j_groups_ + p] -= beta[p];
  // d/d(log sigma_alpha): likelihood of alphas, prior, Jacobian.
  grad[j_groups_ + p_cov_ + 1] =
      sum_a2 / va - j_groups_ - va / 10.0 + 1.0;
  grad[j_groups_ + p_cov_ + 2] = sum_r2 / vy - n_train - vy / 10.0 + 1.0;
}

double GroupedRegressionModel::logo_log_pred_unseen_group(
    std::span<const double> y, std::span<const double> mean_wo_alpha,
    double mu_alpha, double sigma_alpha2, double sigma_y2) {
  if (!(sigma_y2 > 0.0) || sigma_alpha2 < 0.0)
    throw numeric_fault("non-positive predictive variance");
  std::vector<double> mean(y.size());
  for (size_t i = 0; i < y.size(); ++i) mean[i] = mu_alpha + mean_wo_alpha[i];
  return mvn_logpdf_compound(y, mean, sigma_y2, sigma_alpha2);
}

double GroupedRegressionModel::log_pred(std::span<const double> theta,
                                        int fold_id) const {
  if (fold_id >= folds_.K) return 0.0;  // sentinel: empty test set
  const double mu_a = theta[j_groups_ + p_cov_];
  const double sig_a = std::exp(theta[j_groups_ + p_cov_ + 1]);
  const double sig_y = std::exp(theta[j_groups_ + p_cov_ + 2]);
  const double va = sig_a * sig_a, vy = sig_y * sig_y;
  const double* beta = theta.data() + j_groups_;

  double lp = 0.0;
  std::vector<double> yv, mv;
  for (const auto& meta : fold_meta_[fold_id]) {
    if (meta.unseen) {
      yv.clear();
      mv.clear();
      for (int i : meta.obs) {
        yv.push_back(data_.y[i]);
        double m = 0.0;
        for (int p = 0; p < p_cov_; ++p)
          if (mask_[p]) m += data_.xv(i, p) * beta[p];
        mv.push_back(m);
      }
      lp += logo_log_pred_unseen_group(yv, mv, mu_a, va, vy);
    } else {
      for (int i : meta.obs)
        lp += normal_logpdf(data_.y[i], linpred(theta, i), vy);
    }
  }
  return lp;
}

double GroupedRegressionModel::log_lik_test(std::span<const double> theta,
                                            int fold_id) const {
  const double sig_y = std::exp(theta[j_groups_ + p_cov_ + 2]);
  const double vy = sig_y * sig_y;
  double lp = 0.0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    const double mask = folds_.test_index[i] == fold_id ? 1.0 : 0.0;
    lp += mask * normal_logpdf(data_.y[i], linpred(theta, i), vy);
  }
  return lp;
}

std::vector<double> GroupedRegressionModel::initial_draw(CounterRng& rng) const {
  std::vector<double> theta(dim());
  const double mu_a = rng.normal();
  const double sig_a = std::fabs(rng.normal()) * std::sqrt(10.0);
  const double sig_y = std::fabs(rng.normal()) * std::sqrt(10.0);
  for (int g = 0; g < j_groups_; ++g) theta[g] = mu_a + sig_a * rng.normal();
  for (int p = 0; p < p_cov_; ++p) theta[j_groups_ + p] = rng.normal();
  theta[j_groups_ + p_cov_] = mu_a;
  theta[j_groups_ + p_cov_ + 1] = std::log(sig_a);
  theta[j_groups_ + p_cov_ + 2] = std::log(sig_y);
  return theta;
}

void GroupedRegressionModel::pred_derivs(std::span<const double> theta,
                                         int fold_id, std::span<double> d1,
                                         std::span<double> d2) const {
  const double sig_y = std::exp(theta[j_groups_ + p_cov_ + 2]);
  const double vy = sig_y * sig_y;
  long t = 0;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) {
      // d/dy log N(y | m, vy) = -(y - m)/vy, second derivative -1/vy.
      d1[t] = -(data_.y[i] - linpred(theta, i)) / vy;
      d2[t] = -1.0 / vy;
      ++t;
    }
}

void GroupedRegressionModel::pred_sample(std::span<const double> theta,
                                         int fold_id, CounterRng& rng,
                                         std::span<double> out) const {
  const double sig_y = std::exp(theta[j_groups_ + p_cov_ + 2]);
  long t = 0;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs)
      out[t++] = linpred(theta, i) + sig_y * rng.normal();
}

std::vector<double> GroupedRegressionModel::test_values(int fold_id) const {
  std::vector<double> y;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) y.push_back(data_.y[i]);
  return y;
}

std::vector<std::string> GroupedRegressionModel::param_names() const {
  std::vector<std::string> n;
  for (int g = 0; g < j_groups_; ++g) n.push_back("alpha[" + std::to_string(g) + "]");
  for (int p = 0; p < p_cov_; ++p) n.push_back("beta[" + std::to_string(p) + "]");
  n.push_back("mu_alpha");
  n.push_back("log_sigma_alpha");
  n.push_back("log_sigma_y");
  return n;
}

GroupedSimResult simulate_grouped_regression(const GroupedSimOptions& opt,
                                             std::uint64_t seed) {
  if (opt.groups < 2) throw invalid_input("simulator needs at least 2 groups");
  if (opt.per_group < 1 || opt.covariates < 1)
    throw invalid_input("simulator needs per_group and covariates >= 1");
  CounterRng rng(seed, stream_key(StreamKind::Simulate, 1));

  GroupedSimResult out;
  out.mu_alpha = rng.normal();
  out.sigma_alpha = std::fabs(rng.normal()) * std::sqrt(10.0);
  out.sigma_y = std::fabs(rng.normal()) * std::sqrt(10.0);
  out.beta.resize(opt.covariates);
  for (double& b : out.beta) b = rng.normal();
  if (opt.min_omitted_beta > 0.0)
    while (std::fabs(out.beta.back()) < opt.min_omitted_beta)
      out.beta.back() = rng.normal();
  out.alpha.resize(opt.groups);
  for (double& a : out.alpha) a = out.mu_alpha + out.sigma_alpha * rng.normal();

  std::vector<double> xg(static_cast<size_t>(opt.groups) * opt.covariates);
  for (double& x : xg) x = rng.normal() * std::sqrt(10.0);

  Dataset& d = out.data;
  d.n_cov = opt.covariates;
  for (int g = 0; g < opt.groups; ++g)
    for (int i = 0; i < opt.per_group; ++i) {
      double mean = out.alpha[g];
      for (int p = 0; p < opt.covariates; ++p)
        mean += xg[g * opt.covariates + p] * out.beta[p];
      d.y.push_back(mean + out.sigma_y * rng.normal());
      for (int p = 0; p < opt.covariates; ++p)
        d.x.push_back(xg[g * opt.covariates + p]);
      d.group_id.push_back(g);
    }
  d.validate();
  return out;
}

}  // namespace pcv
