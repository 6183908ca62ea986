#include "pcv/models/seasonal_ar.hpp"

#include <cmath>

#include "pcv/errors.hpp"
#include "pcv/math.hpp"
#include "pcv/models/priors.hpp"

namespace pcv {

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

SeasonalARModel::SeasonalARModel(std::string name, Dataset data,
                                 FoldAssignment folds, int ar_order,
                                 int seasonal_dummies, RhoTransform transform)
    : p_(ar_order),
      q_(seasonal_dummies),
      transform_(transform),
      name_(std::move(name)),
      data_(std::move(data)),
      folds_(std::move(folds)) {
  data_.validate();
  folds_.validate(data_.n_obs());
  if (p_ < 1) throw invalid_input("AR order must be at least 1");
  if (q_ < 0) throw invalid_input("dummy count must be non-negative");
  if (data_.n_cov < p_ + q_)
    throw invalid_input("dataset must carry lag and dummy covariates");
  test_obs_.resize(folds_.K);
  for (long i = 0; i < data_.n_obs(); ++i)
    test_obs_[folds_.test_index[i]].push_back(static_cast<int>(i));
}

double SeasonalARModel::rho_of(double u) const {
  const double w = logistic(u);
  return transform_ == RhoTransform::HalfOpen ? 0.5 * (1.0 + w) : 2.0 * w - 1.0;
}

double SeasonalARModel::drho_du(double u) const {
  const double w = logistic(u);
  const double dw = w * (1.0 - w);
  return transform_ == RhoTransform::HalfOpen ? 0.5 * dw : 2.0 * dw;
}

long SeasonalARModel::test_size(int fold_id) const {
  return folds_.test_size(fold_id);
}

double SeasonalARModel::mean_at(std::span<const double> theta, long obs) const {
  double m = theta[p_];  // intercept beta_0
  for (int i = 0; i < p_; ++i) m += rho_of(theta[i]) * data_.xv(obs, i);
  for (int j = 0; j < q_; ++j) m += theta[p_ + 1 + j] * data_.xv(obs, p_ + j);
  return m;
}

double SeasonalARModel::log_joint(std::span<const double> theta,
                                  int fold_id) const {
  const double sigma = std::exp(theta[p_ + q_ + 1]);
  const double v = sigma * sigma;
  double lp = 0.0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    const double mask = folds_.test_index[i] == fold_id ? 0.0 : 1.0;
    lp += mask * normal_logpdf(data_.y[i], mean_at(theta, i), v);
  }
  // Beta(5,5) on the transformed AR coefficients: density of w plus the
  // logistic Jacobian dw/du = w(1-w).
  for (int i = 0; i < p_; ++i) {
    const double w = logistic(theta[i]);
    lp += log_beta_pdf(w, 5.0, 5.0) + std::log(w) + std::log1p(-w);
  }
  for (int j = 0; j <= q_; ++j) lp += normal_logpdf(theta[p_ + j], 0.0, 1.0);
  lp += log_half_normal(sigma, 1.0) + theta[p_ + q_ + 1];
  return lp;
}

void SeasonalARModel::grad_log_joint(std::span<const double> theta,
                                     int fold_id, std::span<double> grad) const {
  for (int i = 0; i < dim(); ++i) grad[i] = 0.0;
  const double sigma = std::exp(theta[p_ + q_ + 1]);
  const double v = sigma * sigma;
  double sum_r2 = 0.0;
  long n_train = 0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    if (folds_.test_index[i] == fold_id) continue;
    const double r = data_.y[i] - mean_at(theta, i);
    for (int a = 0; a < p_; ++a)
      grad[a] += r * data_.xv(i, a) * drho_du(theta[a]) / v;
    grad[p_] += r / v;
    for (int j = 0; j < q_; ++j)
      grad[p_ + 1 + j] += r * data_.xv(i, p_ + j) / v;
    sum_r2 += r * r;
    ++n_train;
  }
  for (int a = 0; a < p_; ++a) {
    const double w = logistic(theta[a]);
    // d/du of log Beta(w;5,5) + log w + log(1-w), with dw/du = w(1-w):
    // (a-1)(1-w) - (b-1)w + (1 - 2w) for a = b = 5.
    grad[a] += 4.0 * (1.0 - w) - 4.0 * w + 1.0 - 2.0 * w;
  }
  for (int j = 0; j <= q_; ++j) grad[p_ + j] -= theta[p_ + j];
  grad[p_ + q_ + 1] = sum_r2 / v - n_train - v + 1.0;
}

double SeasonalARModel::log_pred(std::span<const double> theta,
                                 int fold_id) const {
  if (fold_id >= folds_.K) return 0.0;
  const double v = std::exp(2.0 * theta[p_ + q_ + 1]);
  double lp = 0.0;
  for (int i : test_obs_[fold_id])
    lp += normal_logpdf(data_.y[i], mean_at(theta, i), v);
  return lp;
}

double SeasonalARModel::log_lik_test(std::span<const double> theta,
                                     int fold_id) const {
  return fold_id >= folds_.K ? 0.0 : log_pred(theta, fold_id);
}

std::vector<double> SeasonalARModel::initial_draw(CounterRng& rng) const {
  std::vector<double> theta(dim());
  for (int i = 0; i < p_; ++i) {
    const double w = beta_draw(rng, 5.0, 5.0);
    theta[i] = std::log(w) - std::log1p(-w);  // logit
  }
  for (int j = 0; j <= q_; ++j) theta[p_ + j] = rng.normal();
  theta[p_ + q_ + 1] = std::log(std::fabs(rng.normal()));
  return theta;
}

void SeasonalARModel::pred_derivs(std::span<const double> theta, int fold_id,
                                  std::span<double> d1,
                                  std::span<double> d2) const {
  const double v = std::exp(2.0 * theta[p_ + q_ + 1]);
  long t = 0;
  for (int i : test_obs_[fold_id]) {
    d1[t] = -(data_.y[i] - mean_at(theta, i)) / v;
    d2[t] = -1.0 / v;
    ++t;
  }
}

void SeasonalARModel::pred_sample(std::span<const double> theta, int fold_id,
                                  CounterRng& rng, std::span<double> out) const {
  const double sigma = std::exp(theta[p_ + q_ + 1]);
  long t = 0;
  for (int i : test_obs_[fold_id])
    out[t++] = mean_at(theta, i) + sigma * rng.normal();
}

std::vector<double> SeasonalARModel::test_values(int fold_id) const {
  std::vector<double> y;
  for (int i : test_obs_[fold_id]) y.push_back(data_.y[i]);
  return y;
}

std::vector<std::string> SeasonalARModel::param_names() const {
  std::vector<std::string> n;
  for (int i = 0; i < p_; ++i) n.push_back("u_rho[" + std::to_string(i) + "]");
  for (int j = 0; j <= q_; ++j) n.push_back("beta[" + std::to_string(j) + "]");
  n.push_back("log_sigma");
  return n;
}

SeasonalSimResult simulate_seasonal_ar(const SeasonalSimOptions& opt,
                                       std::uint64_t seed) {
  if (opt.months <= opt.ar_order + opt.dummies)
    throw invalid_input("series too short for the requested AR order and dummies");
  if (opt.ar_order < 1) throw invalid_input("AR order must be at least 1");
  CounterRng rng(seed, stream_key(StreamKind::Simulate, 4));

  SeasonalSimResult out;
  out.sigma = opt.sigma;
  out.rho.assign(opt.ar_order, 0.0);
  out.rho[0] = opt.rho;
  out.beta.assign(opt.dummies + 1, 0.0);
  for (int j = 1; j <= opt.dummies; ++j)
    out.beta[j] = opt.seasonal_amp * rng.normal();

  // Simulate the raw monthly series, then emit the regression view.
  std::vector<double> series(opt.months, 0.0);
  for (long t = 0; t < opt.months; ++t) {
    double m = out.beta[0];
    for (int i = 0; i < opt.ar_order; ++i)
      if (t - 1 - i >= 0) m += out.rho[i] * series[t - 1 - i];
    const int month = static_cast<int>(t % 12);
    if (month >= 1 && month <= opt.dummies) m += out.beta[month];
    series[t] = m + opt.sigma * rng.normal();
  }

  Dataset& d = out.data;
  d.n_cov = opt.ar_order + opt.dummies;
  for (long t = opt.ar_order; t < opt.months; ++t) {
    d.y.push_back(series[t]);
    for (int i = 0; i < opt.ar_order; ++i) d.x.push_back(series[t - 1 - i]);
    const int month = static_cast<int>(t % 12);
    for (int j = 1; j <= opt.dummies; ++j)
      d.x.push_back(month == j ? 1.0 : 0.0);
    d.time_index.push_back(t);
  }
  d.validate();
  return out;
}

}  // namespace pcv
