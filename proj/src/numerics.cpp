#include "ragdec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ragdec/errors.hpp"

namespace ragdec {

bool LogitVector::has_finite_entry() const {
    return std::any_of(scores_.begin(), scores_.end(),
                       [](double v) { return std::isfinite(v); });
}

double LogitVector::max_finite() const {
    double m = kNegInf;
    for (double v : scores_) {
        if (std::isfinite(v) && v > m) m = v;
    }
    if (!std::isfinite(m)) {
        throw DegenerateInputError("logit vector has no finite entry");
    }
    return m;
}

void ProbVector::validate() const {
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw ContractViolation("probability entry < 0 or NaN");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ContractViolation("probabilities sum to " + std::to_string(sum));
    }
}

ProbVector stable_softmax(const LogitVector& logits, double temperature) {
    if (temperature <= 0.0) {
        throw ContractViolation("softmax temperature must be positive");
    }
    const double shift = logits.max_finite();  // throws on all -inf
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        const double l = logits[i];
        if (l == kNegInf) {
            out[i] = 0.0;  // exact zero, not a denormal
        } else {
            out[i] = std::exp((l - shift) / temperature);
            sum += out[i];
        }
    }
    for (double& p : out) p /= sum;
    return ProbVector(std::move(out));
}

LogitVector weighted_logit_sum(std::span<const LogitVector> logits,
                               std::span<const double> weights) {
    if (logits.empty() || logits.size() != weights.size()) {
        throw ContractViolation("weighted_logit_sum: lists empty or length-mismatched");
    }
    const size_t dim = logits.front().size();
    for (const auto& l : logits) {
        if (l.size() != dim) {
            throw ContractViolation("weighted_logit_sum: dimension mismatch");
        }
    }
    std::vector<double> out(dim, 0.0);
    for (size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        bool masked = false;
        for (size_t j = 0; j < logits.size(); ++j) {
            const double l = logits[j][i];
            if (l == kNegInf) {
                if (weights[j] > 0.0) masked = true;
                // weight <= 0: masked entry contributes nothing
            } else {
                acc += weights[j] * l;
            }
        }
        out[i] = masked ? kNegInf : acc;
    }
    return LogitVector(std::move(out));
}

TokenId greedy_select(const ProbVector& probs) {
    TokenId best = 0;
    double best_p = probs.size() ? probs[0] : 0.0;
    for (size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > best_p) {  // strict: ties keep the lowest id
            best_p = probs[i];
            best = static_cast<TokenId>(i);
        }
    }
    return best;
}

TokenId nucleus_sample(const ProbVector& probs, double top_p, Rng& rng) {
    if (top_p <= 0.0 || top_p > 1.0) {
        throw ContractViolation("top_p must lie in (0, 1]");
    }
    std::vector<TokenId> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
        if (probs[a] != probs[b]) return probs[a] > probs[b];
        return a < b;
    });

    size_t nucleus = 0;
    double mass = 0.0;
    for (size_t i = 0; i < order.size(); ++i) {
        if (probs[order[i]] <= 0.0) break;  // zero tail never enters the nucleus
        mass += probs[order[i]];
        nucleus = i + 1;
        if (mass >= top_p) break;
    }
    if (nucleus == 0) nucleus = 1;  // degenerate inputs: fall back to the argmax

    const double u = rng.next_double() * mass;
    double cum = 0.0;
    for (size_t i = 0; i < nucleus; ++i) {
        cum += probs[order[i]];
        if (u < cum) return order[i];
    }
    return order[nucleus - 1];
}

}  // namespace ragdec
