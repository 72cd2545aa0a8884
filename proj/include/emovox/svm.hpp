#pragma once

#include "emovox/common.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace emovox {

enum class KernelKind { linear, rbf, poly };

std::string_view to_string(KernelKind kind);
KernelKind kernel_from_string(std::string_view s);

struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double gamma = 1.0;
    int degree = 3;
    double coef0 = 0.0;

    void validate() const;
    bool operator==(const KernelSpec&) const = default;
};

/// linear x.z; rbf exp(-gamma |x-z|^2); poly (gamma x.z + coef0)^degree.
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// Kernel values between every row of A and one vector z.
Vector kernel_column(const KernelSpec& spec, const Matrix& A, const Vector& a_sq_norms, const Eigen::Ref<const Vector>& z);

struct SvmOptions {
    double C = 1.0;
    KernelSpec kernel;
    double tol = 1e-3;
    long max_iterations = 0;  // 0: max(10^7, 100 n)
    std::uint64_t seed = 0;
    std::size_t cache_bytes = std::size_t{256} << 20;
    bool record_objective = false;
};

/// Binary soft-margin SVM: f(x) = sum_i dual_coefs_i K(sv_i, x) + bias,
/// dual_coefs_i = alpha_i * y_i.
struct SvmBinaryModel {
    Matrix support_vectors;
    std::vector<double> dual_coefs;
    double bias = 0.0;
    KernelSpec kernel;
    double C = 1.0;
    bool converged = true;
    long iterations = 0;

    double decision(std::span<const double> x) const;
    Vector decision(const Matrix& X) const;
};

struct SvmTrainTrace {
    SvmBinaryModel model;
    std::vector<double> alpha;            // one per training row
    std::vector<double> dual_objective;   // per iteration, when recorded
};

/// SMO on the dual with maximal-violating-pair selection; stops when the
/// violation gap is <= tol. Labels must be +1/-1 with both present.
SvmTrainTrace train_binary_traced(const Matrix& X, std::span<const int> y, const SvmOptions& options);
SvmBinaryModel train_binary(const Matrix& X, std::span<const int> y, const SvmOptions& options);

/// Largest KKT residual of a trained model on its training data.
double max_kkt_violation(const SvmTrainTrace& trace, const Matrix& X, std::span<const int> y);

struct SvmPair {
    int positive = 0;  // class voted for when decision > 0
    int negative = 1;
    SvmBinaryModel model;
};

/// One-vs-one: one binary model per unordered class pair (a < b, a is +1).
struct SvmMulticlassModel {
    int class_count = 0;
    std::vector<SvmPair> pairs;

    bool converged() const;
};

SvmMulticlassModel train_multiclass(const Matrix& X, std::span<const int> y, int n_classes, const SvmOptions& options,
                                    int jobs = 1);

struct SvmPrediction {
    std::vector<int> labels;
    Matrix scores;  // n x class_count, summed pairwise decisions oriented toward each class
    std::vector<std::vector<int>> votes;
};

/// Vote argmax; ties go to the larger summed decision, then the lower class.
SvmPrediction predict_with_scores(const SvmMulticlassModel& model, const Matrix& X);

/// Combines pairwise decision values (n x pairs) into votes, scores and labels.
SvmPrediction combine_pairwise(const Matrix& decisions, const std::vector<std::pair<int, int>>& pairs, int class_count);

}  // namespace emovox
