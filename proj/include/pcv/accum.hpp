#pragma once

// Constant-memory online accumulators. Each chain owns one accumulator set;
// nothing here grows with the chain length. Predictive-density statistics
// are held in log space; Rhat block sums are held centered by a per-fold
// constant C so that long chains do not overflow.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcv/math.hpp"

namespace pcv {

// Centered running sums: A_x accumulates x - C, A_xx the outer products of
// x - C. mean = A_x/n + C; cov = [A_xx - A_x A_x^T / n] / (n - 1).
class WelfordAccumulator {
 public:
  WelfordAccumulator() = default;
  explicit WelfordAccumulator(int dim, std::vector<double> center = {});

  void add(std::span<const double> x);
  void merge(const WelfordAccumulator& other);  // requires equal centers

  long count() const { return count_; }
  int dim() const { return dim_; }
  const std::vector<double>& center() const { return c_; }
  std::vector<double> mean() const;
  // Unbiased covariance, row-major dim x dim. Throws undefined_diagnostic
  // when count < 2.
  std::vector<double> covariance() const;

 private:
  int dim_ = 0;
  long count_ = 0;
  std::vector<double> c_;
  std::vector<double> a_x_;
  std::vector<double> a_xx_;
};

// Diagonal-only variant (per-coordinate sums of squares).
class WelfordDiag {
 public:
  WelfordDiag() = default;
  explicit WelfordDiag(int dim, std::vector<double> center = {});

  void add(std::span<const double> x);
  void merge(const WelfordDiag& other);

  long count() const { return count_; }
  int dim() const { return dim_; }
  std::vector<double> mean() const;
  std::vector<double> variance() const;
  // Sum of centered values per coordinate (for score formulas that need raw
  // sums rather than means).
  const std::vector<double>& centered_sum() const { return a_x_; }
  const std::vector<double>& center() const { return c_; }

 private:
  int dim_ = 0;
  long count_ = 0;
  std::vector<double> c_;
  std::vector<double> a_x_;
  std::vector<double> a_x2_;
};

// Log-space raw sums: u_x = log sum exp(s), u_x2 = log sum exp(2s).
struct LogSpaceAccumulator {
  double u_x = kNegInf;
  double u_x2 = kNegInf;
  long count = 0;

  // s may be -inf (zero density). +inf or NaN throws numeric_fault.
  void add(double s);
  void merge(const LogSpaceAccumulator& other);
};

// Batch means in log space. A batch of b draws contributes its log mean to
// v_x / v_x2 when complete; a trailing partial batch is dropped from the
// batch statistics (but not from the raw sums).
struct BatchState {
  int b = 1;
  double z_x = kNegInf;
  double v_x = kNegInf;
  double v_x2 = kNegInf;
  long committed = 0;  // completed batches (the a of N = a*b)
  int pending = 0;

  void add(double s);
  void commit();
  long dropped() const { return pending; }
};

// Centered per-block sums for Rhat and the shuffle benchmark. Block d covers
// iterations [d*N/D, (d+1)*N/D) of the planned chain length N.
struct ShuffleBlocks {
  int blocks = 1;     // D
  long planned_n = 0; // N used for block boundaries
  std::vector<double> y_x;
  std::vector<double> y_x2;

  ShuffleBlocks() = default;
  ShuffleBlocks(int d, long n);

  static int block_for(long iter, long planned_n, int d);
  void add(double centered, int block);
  double sum_x() const;
  double sum_x2() const;
};

// Everything one chain accumulates about its score draws.
struct ScoreAccum {
  LogSpaceAccumulator raw;
  BatchState batch;
  ShuffleBlocks shuffle;
  double c = 0.0;  // centering constant C_k, fixed after warmup
  long count = 0;
  long faults = 0;

  ScoreAccum() = default;
  ScoreAccum(int batch_size, int blocks, long planned_n, double center);

  // iter is the 0-based sampling iteration of this draw.
  void observe(double s, long iter);
};

// JSON text of one accumulator's state, for oracle comparison.
std::string debug_dump(const ScoreAccum& a);

}  // namespace pcv
