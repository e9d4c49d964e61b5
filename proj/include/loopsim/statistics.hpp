// Copyright 2026 The loopsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once
#ifndef LOOPSIM_STATISTICS_HPP
#define LOOPSIM_STATISTICS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace loopsim {

/// Welford accumulator.
class RunningStats {
  public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Mean with its standard error and effective sample size.
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    double ess = 0.0;
    std::uint64_t samples = 0;
};

/// Streaming batch means for a correlated series. The batch length doubles
/// whenever the batch table fills up, so the number of batches stays
/// between max_batches/2 and max_batches once enough data has arrived.
class BatchMeans {
  public:
    explicit BatchMeans(std::size_t max_batches = 1024) : max_batches_(max_batches < 4 ? 4 : max_batches & ~std::size_t{1}) {}

    void add(double x) {
        raw_.add(x);
        partial_ += x;
        if (++partial_count_ == batch_len_) {
            batches_.push_back(partial_ / static_cast<double>(batch_len_));
            partial_ = 0.0;
            partial_count_ = 0;
            if (batches_.size() == max_batches_) {
                for (std::size_t i = 0; i < max_batches_ / 2; ++i) {
                    batches_[i] = 0.5 * (batches_[2 * i] + batches_[2 * i + 1]);
                }
                batches_.resize(max_batches_ / 2);
                batch_len_ *= 2;
            }
        }
    }

    std::uint64_t count() const { return raw_.count(); }
    double mean() const { return raw_.mean(); }
    double variance() const { return raw_.variance(); }
    std::size_t batches() const { return batches_.size(); }
    std::uint64_t batch_length() const { return batch_len_; }

    /// Batch-means standard error; with fewer than 16 full batches the
    /// i.i.d. formula is used.
    double se() const {
        const std::uint64_t n = raw_.count();
        if (n < 2) {
            return std::numeric_limits<double>::infinity();
        }
        const std::size_t b = batches_.size();
        double naive = std::sqrt(raw_.variance() / static_cast<double>(n));
        if (b < 16) {
            return naive;
        }
        RunningStats bs;
        for (double m : batches_) {
            bs.add(m);
        }
        double se = std::sqrt(bs.variance() / static_cast<double>(b));
        // Positive autocorrelation never lowers the error in expectation;
        // the naive value guards the estimator against underestimation.
        return std::max(se, naive);
    }

    double ess() const {
        double s = se();
        if (!(s > 0.0) || !std::isfinite(s)) {
            return static_cast<double>(raw_.count());
        }
        return raw_.variance() / (s * s);
    }

    Estimate estimate() const { return Estimate{mean(), se(), ess(), count()}; }

  private:
    std::size_t max_batches_;
    std::vector<double> batches_;
    std::uint64_t batch_len_ = 1;
    double partial_ = 0.0;
    std::uint64_t partial_count_ = 0;
    RunningStats raw_;
};

/// Pools independent estimates weighted by sample count.
inline Estimate combine(std::span<const Estimate> parts) {
    Estimate out;
    for (const auto& p : parts) {
        out.samples += p.samples;
    }
    if (out.samples == 0) {
        return out;
    }
    double var = 0.0;
    for (const auto& p : parts) {
        double w = static_cast<double>(p.samples) / static_cast<double>(out.samples);
        out.mean += w * p.mean;
        var += w * w * p.se * p.se;
        out.ess += p.ess;
    }
    out.se = std::sqrt(var);
    return out;
}

}  // namespace loopsim

#endif  // LOOPSIM_STATISTICS_HPP
