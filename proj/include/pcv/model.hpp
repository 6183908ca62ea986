#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcv/errors.hpp"
#include "pcv/rng.hpp"

namespace pcv {

enum class ScoreKind { LogS, HS, DSS };

std::string score_name(ScoreKind s);
ScoreKind score_from_name(const std::string& name);

// A Bayesian model bound to a dataset and a fold assignment. Parameters live
// in unconstrained space; positive scales are log-transformed with the
// Jacobian folded into log_joint. fold_id runs over 0..K-1, and fold_id == K
// is the full-data sentinel: all observations train, none are scored.
//
// Evaluations are pure functions of (theta, fold_id) and must be callable
// from many threads at once.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int fold_count() const = 0;
  virtual long test_size(int fold_id) const = 0;

  // Log prior plus masked training log likelihood (test terms zeroed).
  virtual double log_joint(std::span<const double> theta, int fold_id) const = 0;
  virtual void grad_log_joint(std::span<const double> theta, int fold_id,
                              std::span<double> grad) const = 0;

  // Per-draw log predictive of the fold's test set, used for scoring.
  // Unseen-group folds may marginalize group effects in closed form.
  virtual double log_pred(std::span<const double> theta, int fold_id) const = 0;

  // Masked conditional test log likelihood: the same per-observation terms
  // as log_joint, summed over the test set. Together with log_joint this
  // partitions the full-data log likelihood.
  virtual double log_lik_test(std::span<const double> theta,
                              int fold_id) const = 0;

  // One draw from the prior, unconstrained space. Used to start full-data
  // adaptation chains.
  virtual std::vector<double> initial_draw(CounterRng& rng) const = 0;

  // Hooks for the Hyvarinen score: first and second derivatives of the
  // per-test-observation conditional log predictive with respect to y.
  virtual bool supports_pred_derivs() const { return false; }
  virtual void pred_derivs(std::span<const double> /*theta*/, int /*fold_id*/,
                           std::span<double> /*d1*/,
                           std::span<double> /*d2*/) const {
    throw unsupported_score(name() + " does not provide predictive derivatives");
  }

  // Hook for the Dawid-Sebastini score: one draw from p(y_test | theta).
  virtual bool supports_pred_sample() const { return false; }
  virtual void pred_sample(std::span<const double> /*theta*/, int /*fold_id*/,
                           CounterRng& /*rng*/, std::span<double> /*out*/) const {
    throw unsupported_score(name() + " does not provide a predictive sampler");
  }

  // Observed test values of a fold, in the same order pred_sample fills.
  virtual std::vector<double> test_values(int fold_id) const = 0;

  virtual std::vector<std::string> param_names() const {
    std::vector<std::string> n;
    for (int i = 0; i < dim(); ++i) n.push_back("p" + std::to_string(i));
    return n;
  }

  void check_score_support(ScoreKind kind) const;
};

}  // namespace pcv
