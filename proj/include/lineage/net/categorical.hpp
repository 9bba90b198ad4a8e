#pragma once

// Categorical policy helpers over logits columns.

#include <Eigen/Dense>
#include <cmath>

#include "lineage/observation.hpp"
#include "lineage/rng.hpp"

namespace lineage {

// Stable log-softmax of one column.
inline Vec log_softmax_col(const Eigen::Ref<const Vec>& logits) {
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    return logits.array() - lse;
}

inline Vec softmax_col(const Eigen::Ref<const Vec>& logits) {
    Vec p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
}

inline double log_prob_of(const Eigen::Ref<const Vec>& logits, int action) {
    return log_softmax_col(logits)[action];
}

inline double entropy_col(const Eigen::Ref<const Vec>& logits) {
    const Vec logp = log_softmax_col(logits);
    return -(logp.array().exp() * logp.array()).sum();
}

// Inverse-CDF sampling; consumes exactly one uniform per call.
inline int sample_categorical(const Eigen::Ref<const Vec>& logits, RngStream& rng) {
    const Vec p = softmax_col(logits);
    const double u = rng.uniform();
    double acc = 0.0;
    for (Eigen::Index a = 0; a < p.size(); ++a) {
        acc += p[a];
        if (u < acc) return static_cast<int>(a);
    }
    return static_cast<int>(p.size()) - 1;
}

}  // namespace lineage
