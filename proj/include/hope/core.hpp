#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hope {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ConstMatrixRef = Eigen::Ref<const Matrix>;
using ConstVectorRef = Eigen::Ref<const Vector>;

// Shape or index violations in caller-supplied data.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid user configuration (scenario parameters, policy settings, files).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws StructuralError unless the matrix is non-empty and all entries are finite.
void check_design(const ConstMatrixRef& X, std::string_view what = "design");

/// Exploration samples of one arm. The first `split_point` rows are the
/// preparation half, the remaining rows the estimation half.
class ArmDataset {
public:
    ArmDataset(int arm_id, Matrix contexts, Vector rewards, Eigen::Index split_point);

    int arm_id() const { return arm_id_; }
    const Matrix& contexts() const { return contexts_; }
    const Vector& rewards() const { return rewards_; }
    Eigen::Index split_point() const { return split_point_; }
    Eigen::Index dim() const { return contexts_.cols(); }

private:
    int arm_id_;
    Matrix contexts_;
    Vector rewards_;
    Eigen::Index split_point_;
};

/// Read-only window onto one half of an ArmDataset.
struct SampleView {
    Eigen::Block<const Matrix> X;
    Eigen::VectorBlock<const Vector> y;
};

struct Halves {
    SampleView prep;
    SampleView est;
};

Halves split_halves(const ArmDataset& ds);

// Injected marks a support supplied by the caller (e.g. the true support in tests).
enum class SupportSource { LassoSupport, Sis, Full, Injected };

std::string_view to_string(SupportSource s);

/// Strictly increasing subset of feature positions [0, p).
class SupportSet {
public:
    SupportSet(std::vector<Eigen::Index> indices, Eigen::Index dim, SupportSource source);

    static SupportSet full(Eigen::Index dim);

    const std::vector<Eigen::Index>& indices() const { return indices_; }
    Eigen::Index dim() const { return dim_; }
    SupportSource source() const { return source_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(indices_.size()); }
    bool empty() const { return indices_.empty(); }
    bool is_full() const { return size() == dim_; }

private:
    std::vector<Eigen::Index> indices_;
    Eigen::Index dim_;
    SupportSource source_;
};

Matrix truncate_columns(const ConstMatrixRef& M, const SupportSet& S);
Vector truncate_entries(const ConstVectorRef& v, const SupportSet& S);

// Identifies the purpose of a random stream so independent consumers never
// share draws.
enum class StreamRole : std::uint32_t {
    Model = 1,
    Contexts = 2,
    Noise = 3,
    Policy = 4,
    Test = 99,
};

struct StreamId {
    std::uint32_t scenario = 0;
    std::uint32_t repetition = 0;
    StreamRole role = StreamRole::Test;
};

std::uint64_t derive_seed(std::uint64_t master_seed, const StreamId& id);

/// Deterministic random stream keyed by (master seed, stream id).
class RngStream {
public:
    RngStream(std::uint64_t master_seed, StreamId id);
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    double normal();
    double uniform(double lo, double hi);
    Vector normal_vector(Eigen::Index n);
    // k distinct indices drawn uniformly from [0, n), ascending.
    std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k);

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hope
