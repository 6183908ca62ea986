#include "pcv/accum.hpp"

#include <cmath>

#include "json.hpp"
#include "pcv/errors.hpp"

namespace pcv {

WelfordAccumulator::WelfordAccumulator(int dim, std::vector<double> center)
    : dim_(dim), c_(std::move(center)) {
  if (c_.empty()) c_.assign(dim_, 0.0);
  if (static_cast<int>(c_.size()) != dim_)
    throw invalid_input("centering vector has wrong dimension");
  a_x_.assign(dim_, 0.0);
  a_xx_.assign(static_cast<size_t>(dim_) * dim_, 0.0);
}

void WelfordAccumulator::add(std::span<const double> x) {
  for (int i = 0; i < dim_; ++i) {
    const double di = x[i] - c_[i];
    a_x_[i] += di;
    for (int j = 0; j <= i; ++j) a_xx_[i * dim_ + j] += di * (x[j] - c_[j]);
  }
  ++count_;
}

void WelfordAccumulator::merge(const WelfordAccumulator& other) {
  if (other.dim_ != dim_ || other.c_ != c_)
    throw invalid_input("cannot merge accumulators with different centers");
  for (int i = 0; i < dim_; ++i) a_x_[i] += other.a_x_[i];
  for (size_t i = 0; i < a_xx_.size(); ++i) a_xx_[i] += other.a_xx_[i];
  count_ += other.count_;
}

std::vector<double> WelfordAccumulator::mean() const {
  std::vector<double> m(dim_);
  for (int i = 0; i < dim_; ++i) m[i] = a_x_[i] / count_ + c_[i];
  return m;
}

std::vector<double> WelfordAccumulator::covariance() const {
  if (count_ < 2)
    throw undefined_diagnostic("covariance needs at least 2 observations");
  std::vector<double> cov(static_cast<size_t>(dim_) * dim_);
  const double inv_n = 1.0 / static_cast<double>(count_);
  const double inv_nm1 = 1.0 / static_cast<double>(count_ - 1);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v =
          (a_xx_[i * dim_ + j] - a_x_[i] * a_x_[j] * inv_n) * inv_nm1;
      cov[i * dim_ + j] = v;
      cov[j * dim_ + i] = v;
    }
  return cov;
}

WelfordDiag::WelfordDiag(int dim, std::vector<double> center)
    : dim_(dim), c_(std::move(center)) {
  if (c_.empty()) c_.assign(dim_, 0.0);
  if (static_cast<int>(c_.size()) != dim_)
    throw invalid_input("centering vector has wrong dimension");
  a_x_.assign(dim_, 0.0);
  a_x2_.assign(dim_, 0.0);
}

void WelfordDiag::add(std::span<const double> x) {
  for (int i = 0; i < dim_; ++i) {
    const double d = x[i] - c_[i];
    a_x_[i] += d;
    a_x2_[i] += d * d;
  }
  ++count_;
}

void WelfordDiag::merge(const WelfordDiag& other) {
  if (other.dim_ != dim_ || other.c_ != c_)
    throw invalid_input("cannot merge accumulators with different centers");
  for (int i = 0; i < dim_; ++i) {
    a_x_[i] += other.a_x_[i];
    a_x2_[i] += other.a_x2_[i];
  }
  count_ += other.count_;
}

std::vector<double> WelfordDiag::mean() const {
  std::vector<double> m(dim_);
  for (int i = 0; i < dim_; ++i) m[i] = a_x_[i] / count_ + c_[i];
  return m;
}

std::vector<double> WelfordDiag::variance() const {
  if (count_ < 2)
    throw undefined_diagnostic("variance needs at least 2 observations");
  std::vector<double> v(dim_);
  for (int i = 0; i < dim_; ++i)
    v[i] = (a_x2_[i] - a_x_[i] * a_x_[i] / count_) / (count_ - 1);
  return v;
}

void LogSpaceAccumulator::add(double s) {
  if (std::isnan(s) || (std::isinf(s) && s > 0.0))
    throw numeric_fault("log-space accumulator fed +inf or NaN");
  u_x = logaddexp(u_x, s);
  u_x2 = logaddexp(u_x2, 2.0 * s);
  ++count;
}

void LogSpaceAccumulator::merge(const LogSpaceAccumulator& other) {
  u_x = logaddexp(u_x, other.u_x);
  u_x2 = logaddexp(u_x2, other.u_x2);
  count += other.count;
}

void BatchState::add(double s) {
  z_x = logaddexp(z_x, s);
  if (++pending == b) commit();
}

void BatchState::commit() {
  const double log_mean = z_x - std::log(static_cast<double>(b));
  v_x = logaddexp(v_x, log_mean);
  v_x2 = logaddexp(v_x2, 2.0 * log_mean);
  z_x = kNegInf;
  pending = 0;
  ++committed;
}

ShuffleBlocks::ShuffleBlocks(int d, long n) : blocks(d), planned_n(n) {
  y_x.assign(d, 0.0);
  y_x2.assign(d, 0.0);
}

int ShuffleBlocks::block_for(long iter, long planned_n, int d) {
  if (planned_n <= 0) return 0;
  long blk = iter * d / planned_n;
  if (blk >= d) blk = d - 1;
  return static_cast<int>(blk);
}

void ShuffleBlocks::add(double centered, int block) {
  y_x[block] += centered;
  y_x2[block] += centered * centered;
}

double ShuffleBlocks::sum_x() const {
  double s = 0.0;
  for (double v : y_x) s += v;
  return s;
}

double ShuffleBlocks::sum_x2() const {
  double s = 0.0;
  for (double v : y_x2) s += v;
  return s;
}

ScoreAccum::ScoreAccum(int batch_size, int blocks, long planned_n,
                       double center)
    : shuffle(blocks, planned_n), c(center) {
  batch.b = batch_size;
}

void ScoreAccum::observe(double s, long iter) {
  if (std::isnan(s) || (std::isinf(s) && s > 0.0)) {
    // Numeric fault: record it, keep counts aligned by contributing a zero
    // density to the sums and a zero centered deviation to the blocks.
    ++faults;
    s = kNegInf;
    raw.add(s);
    batch.add(s);
    shuffle.add(0.0, ShuffleBlocks::block_for(iter, shuffle.planned_n,
                                              shuffle.blocks));
    ++count;
    return;
  }
  raw.add(s);
  batch.add(s);
  shuffle.add(s - c,
              ShuffleBlocks::block_for(iter, shuffle.planned_n, shuffle.blocks));
  ++count;
}

std::string debug_dump(const ScoreAccum& a) {
  nlohmann::json j;
  j["u_x"] = a.raw.u_x;
  j["u_x2"] = a.raw.u_x2;
  j["v_x"] = a.batch.v_x;
  j["v_x2"] = a.batch.v_x2;
  j["y_x"] = a.shuffle.y_x;
  j["y_x2"] = a.shuffle.y_x2;
  j["c"] = a.c;
  j["count"] = a.count;
  j["batches"] = a.batch.committed;
  return j.dump();
}

}  // namespace pcv
