#ifndef NETSIMP_MASK_HPP
#define NETSIMP_MASK_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace netsimp {

/// Binary observation mask over a V x T value matrix: 1 = observed,
/// 0 = missing. Columns split into a history segment followed by a
/// future segment.
class Mask {
public:
    Mask(Eigen::MatrixXd values, int t_history)
        : values_(std::move(values)), t_history_(t_history) {
        if (t_history_ < 1 || t_history_ >= values_.cols())
            throw std::invalid_argument("mask: need t_history >= 1 and t_future >= 1");
        for (Eigen::Index v = 0; v < values_.rows(); ++v)
            for (Eigen::Index t = 0; t < values_.cols(); ++t) {
                const double m = values_(v, t);
                if (m != 0.0 && m != 1.0)
                    throw std::invalid_argument("mask: entry (" + std::to_string(v) + "," +
                                                std::to_string(t) + ") is not 0 or 1");
            }
    }

    static Mask ones(int nodes, int t_history, int t_future) {
        return Mask(Eigen::MatrixXd::Ones(nodes, t_history + t_future), t_history);
    }

    const Eigen::MatrixXd& values() const { return values_; }
    int nodes() const { return static_cast<int>(values_.rows()); }
    int t_total() const { return static_cast<int>(values_.cols()); }
    int t_history() const { return t_history_; }
    int t_future() const { return t_total() - t_history_; }

    bool observed(int v, int t) const { return values_(v, t) == 1.0; }

    Eigen::MatrixXd complement() const {
        return Eigen::MatrixXd::Ones(values_.rows(), values_.cols()) - values_;
    }

    int missing_count() const {
        return static_cast<int>(values_.size()) - static_cast<int>(values_.sum());
    }

private:
    Eigen::MatrixXd values_;
    int t_history_;
};

/// M* = M^h || O^f: keeps the history mask and declares the whole future
/// missing, which reduces prediction to imputation.
inline Mask make_prediction_mask(const Mask& mask) {
    Eigen::MatrixXd m = mask.values();
    m.rightCols(mask.t_future()).setZero();
    return Mask(std::move(m), mask.t_history());
}

/// f_tau(X, M) = X (.) M + tau * (1 - M): observed entries pass through,
/// missing positions carry the constant tau.
inline Eigen::MatrixXd apply_masking_operator(const Eigen::MatrixXd& values, const Mask& mask,
                                              double tau = 0.0) {
    if (values.rows() != mask.values().rows() || values.cols() != mask.values().cols())
        throw std::invalid_argument("masking operator: value/mask shape mismatch");
    return values.cwiseProduct(mask.values()) + tau * mask.complement();
}

}  // namespace netsimp

#endif  // NETSIMP_MASK_HPP
