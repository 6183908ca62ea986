#include "pcv/models/radon.hpp"

#include <algorithm>
#include <cmath>

#include "pcv/errors.hpp"
#include "pcv/math.hpp"
#include "pcv/models/priors.hpp"

namespace pcv {

RadonStyleModel::RadonStyleModel(std::string name, Dataset data,
                                 FoldAssignment folds, bool include_floor)
    : include_floor_(include_floor),
      name_(std::move(name)),
      data_(std::move(data)),
      folds_(std::move(folds)) {
  data_.validate();
  if (!data_.has_groups() || data_.n_cov < 1)
    throw invalid_input("radon-style model needs a group column and a floor covariate");
  folds_.validate(data_.n_obs());
  j_counties_ = data_.n_groups();

  fold_meta_.resize(folds_.K);
  std::vector<long> train_count(j_counties_);
  for (int k = 0; k < folds_.K; ++k) {
    std::fill(train_count.begin(), train_count.end(), 0);
    std::vector<std::vector<int>> per_county(j_counties_);
    for (long i = 0; i < data_.n_obs(); ++i) {
      if (folds_.test_index[i] == k)
        per_county[data_.group_id[i]].push_back(static_cast<int>(i));
      else
        ++train_count[data_.group_id[i]];
    }
    for (int g = 0; g < j_counties_; ++g)
      if (!per_county[g].empty()) {
        FoldMeta meta;
        meta.county = g;
        meta.unseen = train_count[g] == 0;
        meta.obs = std::move(per_county[g]);
        fold_meta_[k].push_back(std::move(meta));
      }
  }
}

long RadonStyleModel::test_size(int fold_id) const {
  return folds_.test_size(fold_id);
}

double RadonStyleModel::log_joint(std::span<const double> theta,
                                  int fold_id) const {
  const double beta = theta[j_counties_];
  const double mu_a = theta[j_counties_ + 1];
  const double va = std::exp(theta[j_counties_ + 2]);
  const double vy = std::exp(theta[j_counties_ + 3]);
  const double sa = std::sqrt(va);
  const double bmask = include_floor_ ? 1.0 : 0.0;

  double lp = 0.0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    const double mask = folds_.test_index[i] == fold_id ? 0.0 : 1.0;
    const double mean =
        mu_a + sa * theta[data_.group_id[i]] + bmask * beta * data_.xv(i, 0);
    lp += mask * normal_logpdf(data_.y[i], mean, vy);
  }
  for (int g = 0; g < j_counties_; ++g)
    lp += normal_logpdf(theta[g], 0.0, 1.0);
  lp += normal_logpdf(beta, 0.0, 1.0);
  lp += normal_logpdf(mu_a, 0.0, 4.0);
  // Gamma priors on the variances, plus log-transform Jacobians.
  lp += log_gamma_pdf(va, 6.0, 9.0) + theta[j_counties_ + 2];
  lp += log_gamma_pdf(vy, 10.0, 10.0) + theta[j_counties_ + 3];
  return lp;
}

void RadonStyleModel::grad_log_joint(std::span<const double> theta,
                                     int fold_id, std::span<double> grad) const {
  for (int i = 0; i < dim(); ++i) grad[i] = 0.0;
  const double beta = theta[j_counties_];
  const double mu_a = theta[j_counties_ + 1];
  const double va = std::exp(theta[j_counties_ + 2]);
  const double vy = std::exp(theta[j_counties_ + 3]);
  const double sa = std::sqrt(va);
  const double bmask = include_floor_ ? 1.0 : 0.0;

  double sum_r2 = 0.0, sum_rz = 0.0;
  long n_train = 0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    if (folds_.test_index[i] == fold_id) continue;
    const int g = data_.group_id[i];
    const double mean = mu_a + sa * theta[g] + bmask * beta * data_.xv(i, 0);
    const double r = data_.y[i] - mean;
    grad[g] += sa * r / vy;
    if (include_floor_) grad[j_counties_] += data_.xv(i, 0) * r / vy;
    grad[j_counties_ + 1] += r / vy;
    sum_r2 += r * r;
    sum_rz += r * theta[g];
    ++n_train;
  }
  for (int g = 0; g < j_counties_; ++g) grad[g] -= theta[g];
  grad[j_counties_] -= beta;
  grad[j_counties_ + 1] -= mu_a / 4.0;
  // d mean / d(log va) = 0.5 * sa * z_g, so the likelihood term is
  // 0.5 * sa * sum(r z)/vy; Gamma(a, r) on va contributes a - r*va.
  grad[j_counties_ + 2] = 0.5 * sa * sum_rz / vy + 6.0 - 9.0 * va;
  grad[j_counties_ + 3] = 0.5 * (sum_r2 / vy - n_train) + 10.0 - 10.0 * vy;
}

double RadonStyleModel::log_pred(std::span<const double> theta,
                                 int fold_id) const {
  if (fold_id >= folds_.K) return 0.0;
  const double beta = theta[j_counties_];
  const double mu_a = theta[j_counties_ + 1];
  const double va = std::exp(theta[j_counties_ + 2]);
  const double vy = std::exp(theta[j_counties_ + 3]);
  const double bmask = include_floor_ ? 1.0 : 0.0;

  double lp = 0.0;
  std::vector<double> yv, mv;
  for (const auto& meta : fold_meta_[fold_id]) {
    if (meta.unseen) {
      yv.clear();
      mv.clear();
      for (int i : meta.obs) {
        yv.push_back(data_.y[i]);
        mv.push_back(mu_a + bmask * beta * data_.xv(i, 0));
      }
      lp += mvn_logpdf_compound(yv, mv, vy, va);
    } else {
      for (int i : meta.obs) {
        const double mean = mu_a + std::sqrt(va) * theta[meta.county] +
                            bmask * beta * data_.xv(i, 0);
        lp += normal_logpdf(data_.y[i], mean, vy);
      }
    }
  }
  return lp;
}

double RadonStyleModel::log_lik_test(std::span<const double> theta,
                                     int fold_id) const {
  const double beta = theta[j_counties_];
  const double mu_a = theta[j_counties_ + 1];
  const double sa = std::exp(0.5 * theta[j_counties_ + 2]);
  const double vy = std::exp(theta[j_counties_ + 3]);
  const double bmask = include_floor_ ? 1.0 : 0.0;
  double lp = 0.0;
  for (long i = 0; i < data_.n_obs(); ++i) {
    const double mask = folds_.test_index[i] == fold_id ? 1.0 : 0.0;
    const double mean =
        mu_a + sa * theta[data_.group_id[i]] + bmask * beta * data_.xv(i, 0);
    lp += mask * normal_logpdf(data_.y[i], mean, vy);
  }
  return lp;
}

std::vector<double> RadonStyleModel::initial_draw(CounterRng& rng) const {
  std::vector<double> theta(dim());
  for (int g = 0; g < j_counties_; ++g) theta[g] = rng.normal();
  theta[j_counties_] = rng.normal();
  theta[j_counties_ + 1] = 2.0 * rng.normal();
  theta[j_counties_ + 2] = std::log(gamma_draw(rng, 6.0, 9.0));
  theta[j_counties_ + 3] = std::log(gamma_draw(rng, 10.0, 10.0));
  return theta;
}

void RadonStyleModel::pred_derivs(std::span<const double> theta, int fold_id,
                                  std::span<double> d1,
                                  std::span<double> d2) const {
  const double beta = theta[j_counties_];
  const double mu_a = theta[j_counties_ + 1];
  const double sa = std::exp(0.5 * theta[j_counties_ + 2]);
  const double vy = std::exp(theta[j_counties_ + 3]);
  const double bmask = include_floor_ ? 1.0 : 0.0;
  long t = 0;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) {
      const double mean =
          mu_a + sa * theta[meta.county] + bmask * beta * data_.xv(i, 0);
      d1[t] = -(data_.y[i] - mean) / vy;
      d2[t] = -1.0 / vy;
      ++t;
    }
}

void RadonStyleModel::pred_sample(std::span<const double> theta, int fold_id,
                                  CounterRng& rng, std::span<double> out) const {
  const double beta = theta[j_counties_];
  const double mu_a = theta[j_counties_ + 1];
  const double sa = std::exp(0.5 * theta[j_counties_ + 2]);
  const double sy = std::exp(0.5 * theta[j_counties_ + 3]);
  const double bmask = include_floor_ ? 1.0 : 0.0;
  long t = 0;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) {
      const double mean =
          mu_a + sa * theta[meta.county] + bmask * beta * data_.xv(i, 0);
      out[t++] = mean + sy * rng.normal();
    }
}

std::vector<double> RadonStyleModel::test_values(int fold_id) const {
  std::vector<double> y;
  for (const auto& meta : fold_meta_[fold_id])
    for (int i : meta.obs) y.push_back(data_.y[i]);
  return y;
}

std::vector<std::string> RadonStyleModel::param_names() const {
  std::vector<std::string> n;
  for (int g = 0; g < j_counties_; ++g) n.push_back("z[" + std::to_string(g) + "]");
  n.insert(n.end(), {"beta", "mu_alpha", "log_sigma_alpha2", "log_sigma_y2"});
  return n;
}

RadonSimResult simulate_radon_style(int houses, int counties,
                                    std::uint64_t seed) {
  if (counties < 2 || houses < counties)
    throw invalid_input("simulator needs counties >= 2 and houses >= counties");
  CounterRng rng(seed, stream_key(StreamKind::Simulate, 3));
  RadonSimResult out;
  out.mu_alpha = 2.0 * rng.normal();
  out.sigma_alpha2 = gamma_draw(rng, 6.0, 9.0);
  out.sigma_y2 = gamma_draw(rng, 10.0, 10.0);
  out.beta = rng.normal();
  for (int g = 0; g < counties; ++g)
    out.alpha.push_back(out.mu_alpha + std::sqrt(out.sigma_alpha2) * rng.normal());
  Dataset& d = out.data;
  d.n_cov = 1;
  for (int i = 0; i < houses; ++i) {
    const int g = i % counties;  // near-equal county sizes
    const double floor = rng.uniform() < 0.5 ? 0.0 : 1.0;
    d.y.push_back(out.alpha[g] + out.beta * floor +
                  std::sqrt(out.sigma_y2) * rng.normal());
    d.x.push_back(floor);
    d.group_id.push_back(g);
  }
  d.validate();
  return out;
}

}  // namespace pcv
