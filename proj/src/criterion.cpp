#include "fieldnet/criterion.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "fieldnet/errors.hpp"

namespace fieldnet {

PseudoInverseResult pseudo_inverse(const Eigen::MatrixXd& M, double rel_tol) {
    if (M.rows() != M.cols()) throw NumericError("pseudo_inverse expects a square matrix");
    if (!M.allFinite()) throw NumericError("pseudo_inverse got non-finite entries");

    const Eigen::MatrixXd S = (M + M.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");

    const Eigen::VectorXd& lambda = es.eigenvalues();
    const double cutoff = rel_tol * lambda.cwiseAbs().maxCoeff();

    PseudoInverseResult result;
    Eigen::VectorXd inv_lambda = Eigen::VectorXd::Zero(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda[i]) > cutoff) {
            inv_lambda[i] = 1.0 / lambda[i];
            ++result.rank;
        }
    }
    result.inverse = es.eigenvectors() * inv_lambda.asDiagonal() * es.eigenvectors().transpose();
    return result;
}

CriterionResult as_criterion(const Eigen::MatrixXd& M, int treatment_offset, int m) {
    const int p = static_cast<int>(M.rows());
    if (treatment_offset < 0 || treatment_offset + m > p)
        throw ConfigError("treatment columns fall outside the information matrix");

    const PseudoInverseResult pinv = pseudo_inverse(M);
    const Eigen::MatrixXd projector = M * pinv.inverse;  // M M^-, identity on the row space

    CriterionResult result;
    result.pair_variances.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    result.estimable = true;
    double total = 0.0;
    const double contrast_norm = std::sqrt(2.0);
    for (int s = 0; s < m; ++s) {
        for (int t = s + 1; t < m; ++t) {
            const int a = treatment_offset + s;
            const int b = treatment_offset + t;
            // Residual of M M^- c - c for the two-entry contrast c.
            Eigen::VectorXd residual = projector.col(a) - projector.col(b);
            residual[a] -= 1.0;
            residual[b] += 1.0;
            if (residual.norm() > kEstimabilityRelTol * contrast_norm) {
                result.estimable = false;
                result.pair_variances.push_back(kInestimable);
                continue;
            }
            const double var = pinv.inverse(a, a) + pinv.inverse(b, b) - 2.0 * pinv.inverse(a, b);
            result.pair_variances.push_back(var);
            total += var;
        }
    }
    result.phi = result.estimable ? total : kInestimable;
    return result;
}

CriterionResult evaluate_design(const ModelSpec& spec, const FieldLayout& layout,
                                const NetworkGraph* graph, const Design& design) {
    const ModelMatrix mm = build_model_matrix(spec, layout, graph, design);
    return as_criterion(information_matrix(mm), mm.treatment_offset, mm.m);
}

double relative_efficiency(double phi_1, double phi_2) {
    if (!std::isfinite(phi_1) || phi_1 <= 0.0)
        throw std::domain_error("relative_efficiency: first value must be finite and positive");
    if (!std::isfinite(phi_2) || phi_2 <= 0.0)
        throw std::domain_error("relative_efficiency: second value must be finite and positive");
    return phi_1 / phi_2;
}

PhiEvaluator::PhiEvaluator(const ModelSpec& spec, const FieldLayout& layout,
                           const NetworkGraph* graph, int m)
    : spec_(spec), n_(layout.n()), m_(m) {
    if (m < 1) throw ConfigError("treatment count must be at least 1");
    if (spec.include_network) {
        if (graph == nullptr)
            throw ConfigError("model " + model_name(spec) + " needs a network graph");
        if (graph->n != n_)
            throw ConfigError("graph has " + std::to_string(graph->n) +
                              " vertices but the layout has " + std::to_string(n_) + " units");
        adjacency_ = graph->weights;
    }

    // Design-independent nuisance columns: the mean plus every blocking block.
    Design dummy;
    dummy.m = 1;
    dummy.assignment.assign(n_, 1);
    ModelSpec no_network = spec;
    no_network.include_network = false;
    const ModelMatrix mm = build_model_matrix(no_network, layout, nullptr, dummy);
    const int width = static_cast<int>(mm.X.cols()) - 1;  // drop the treatment column
    Eigen::MatrixXd fixed(n_, width);
    fixed.col(0) = Eigen::VectorXd::Ones(n_);
    int offset = 1;
    for (const auto& range : mm.column_blocks) {
        if (range.block == ColumnBlock::mean || range.block == ColumnBlock::treatment) continue;
        fixed.middleCols(offset, range.count) = mm.X.middleCols(range.offset, range.count);
        offset += range.count;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fixed);
    qr.setThreshold(kPinvRelTol);
    const int rank = static_cast<int>(qr.rank());
    fixed_basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(n_, rank);
}

double PhiEvaluator::phi(const Design& design) const {
    validate_design(design, n_);
    if (design.m != m_)
        throw ConfigError("design has " + std::to_string(design.m) +
                          " treatments but the evaluator expects " + std::to_string(m_));
    return phi(design.assignment);
}

double PhiEvaluator::phi(const std::vector<int>& assignment) const {
    Eigen::MatrixXd X_tau = Eigen::MatrixXd::Zero(n_, m_);
    for (int v = 0; v < n_; ++v) X_tau(v, assignment[v] - 1) = 1.0;

    // Sweep the fixed nuisance span out of the treatment indicators.
    Eigen::MatrixXd T = X_tau - fixed_basis_ * (fixed_basis_.transpose() * X_tau);

    if (spec_.include_network) {
        Eigen::MatrixXd G = adjacency_ * X_tau;
        G -= fixed_basis_ * (fixed_basis_.transpose() * G);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
        qr.setThreshold(kPinvRelTol);
        const int rank = static_cast<int>(qr.rank());
        if (rank > 0) {
            const Eigen::MatrixXd network_basis =
                qr.householderQ() * Eigen::MatrixXd::Identity(n_, rank);
            T -= network_basis * (network_basis.transpose() * T);
        }
    }

    Eigen::MatrixXd C = T.transpose() * T;
    C = ((C + C.transpose()) * 0.5).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return kInestimable;

    const Eigen::VectorXd& lambda = es.eigenvalues();
    const double cutoff = kPinvRelTol * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
    int rank = 0;
    double trace_inverse = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > cutoff) {
            trace_inverse += 1.0 / lambda[i];
            ++rank;
        }
    }
    // C 1 = 0 holds structurally, so every pairwise difference is estimable
    // exactly when the rank is m - 1; then phi = m * trace(C^+).
    if (rank != m_ - 1) return kInestimable;
    return m_ * trace_inverse;
}

bool PhiEvaluator::estimable(const Design& design) const {
    return std::isfinite(phi(design));
}

}  // namespace fieldnet
