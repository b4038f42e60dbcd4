#pragma once

#include <Eigen/Core>

#include <limits>
#include <vector>

#include "fieldnet/model.hpp"

namespace fieldnet {

/// Eigenvalue cutoff for the pseudo-inverse, relative to the largest.
inline constexpr double kPinvRelTol = 1e-9;
/// Relative residual bound for the estimability test ||M M^- c - c|| <= tol ||c||.
inline constexpr double kEstimabilityRelTol = 1e-8;
/// Ordered sentinel for inestimable designs; any finite value beats it.
inline constexpr double kInestimable = std::numeric_limits<double>::infinity();

struct PseudoInverseResult {
    Eigen::MatrixXd inverse;
    int rank = 0;
};

/// Moore-Penrose inverse of a symmetric matrix via spectral decomposition.
/// Eigenvalues of magnitude <= rel_tol * max|eigenvalue| are treated as zero.
/// The input is symmetrized defensively; non-finite entries raise NumericError.
PseudoInverseResult pseudo_inverse(const Eigen::MatrixXd& M, double rel_tol = kPinvRelTol);

/// phi and the per-pair contrast variances, all in units of sigma^2.
struct CriterionResult {
    double phi = kInestimable;
    bool estimable = false;
    /// Variance of each treatment difference, pairs (1,2),(1,3),...,(m-1,m).
    std::vector<double> pair_variances;
};

/// Sum over all m(m-1)/2 treatment-pair contrasts of s^T M^- s, where each
/// contrast s carries +1/-1 at two of the m direct-effect coordinates
/// (columns treatment_offset .. treatment_offset+m-1 of the parameter vector)
/// and zeros elsewhere. A contrast failing the estimability test makes the
/// result inestimable with phi = +infinity; that is a value, not an error.
CriterionResult as_criterion(const Eigen::MatrixXd& M, int treatment_offset, int m);

/// Convenience: model matrix -> information matrix -> as_criterion.
CriterionResult evaluate_design(const ModelSpec& spec, const FieldLayout& layout,
                                const NetworkGraph* graph, const Design& design);

/// Eff(xi1, xi2) = phi(xi1) / phi(xi2); smaller phi is better, so the ratio
/// is <= 1 when xi1 is optimal. Throws std::domain_error unless both values
/// are finite and positive.
double relative_efficiency(double phi_1, double phi_2);

/// Recomputes phi from scratch for a candidate design through the reduced
/// normal equations for the treatment effects: with Q an orthonormal basis of
/// the nuisance columns [1 | blocking | A X_tau], the adjusted treatment
/// information is C = X_tau^T (I - Q Q^T) X_tau, all pairwise differences are
/// estimable exactly when rank(C) = m - 1 (C 1 = 0 always), and
/// phi = m * trace(C^+). Produces the as_criterion value for estimable
/// designs at a fraction of the cost; the equality is property-tested.
///
/// The orthonormal basis of the design-independent part (mean and blocking
/// columns) is precomputed once. Stateless per call and safe for concurrent
/// use from multiple threads.
class PhiEvaluator {
public:
    PhiEvaluator(const ModelSpec& spec, const FieldLayout& layout,
                 const NetworkGraph* graph, int m);

    double phi(const Design& design) const;
    /// Hot path for the optimizer: assignment vector only, no validation.
    double phi(const std::vector<int>& assignment) const;
    bool estimable(const Design& design) const;

    const ModelSpec& spec() const { return spec_; }
    int n() const { return n_; }
    int m() const { return m_; }

private:
    ModelSpec spec_;
    int n_;
    int m_;
    Eigen::MatrixXd adjacency_;    // empty when the model has no network term
    Eigen::MatrixXd fixed_basis_;  // orthonormal basis of [1 | blocking columns]
};

}  // namespace fieldnet
