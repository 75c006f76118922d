#pragma once

#include <limits>
#include <span>
#include <vector>

#include "ragdec/rng.hpp"

namespace ragdec {

using TokenId = int;

/// Masked entries are IEEE -inf, a sentinel distinct from any large negative
/// float. It survives arithmetic (exp(-inf) == 0 exactly), which is what
/// forces masked tokens to probability zero after every combination step.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-vocabulary real scores. May contain -inf entries; at least one entry
/// must stay finite for any downstream softmax.
class LogitVector {
  public:
    LogitVector() = default;
    explicit LogitVector(std::vector<double> scores) : scores_(std::move(scores)) {}

    size_t size() const { return scores_.size(); }
    double operator[](size_t i) const { return scores_[i]; }
    double& operator[](size_t i) { return scores_[i]; }
    const std::vector<double>& scores() const { return scores_; }

    bool has_finite_entry() const;
    /// Largest finite entry; throws DegenerateInputError if none exists.
    double max_finite() const;

  private:
    std::vector<double> scores_;
};

/// Per-vocabulary probabilities: non-negative, summing to 1 (within 1e-9),
/// with exactly-zero entries where the source logits were -inf.
class ProbVector {
  public:
    ProbVector() = default;
    explicit ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {}

    size_t size() const { return probs_.size(); }
    double operator[](size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }

    /// Checks the type invariants; throws ContractViolation on failure.
    void validate() const;

  private:
    std::vector<double> probs_;
};

/// Temperature softmax with max-subtraction for stability. -inf entries map
/// to exactly 0. Throws DegenerateInputError when every entry is -inf.
ProbVector stable_softmax(const LogitVector& logits, double temperature = 1.0);

/// Entrywise sum of weights[j] * logits[j]. Masking rule: a -inf entry with
/// positive weight keeps the sum at -inf; a -inf entry with zero or negative
/// weight contributes 0, so deflection can never resurrect a masked token.
LogitVector weighted_logit_sum(std::span<const LogitVector> logits,
                               std::span<const double> weights);

/// Argmax; ties broken by lowest token id.
TokenId greedy_select(const ProbVector& probs);

/// Top-p sampling: draws from the smallest descending-probability prefix with
/// cumulative mass >= top_p, renormalized. Deterministic given the rng state.
TokenId nucleus_sample(const ProbVector& probs, double top_p, Rng& rng);

}  // namespace ragdec
