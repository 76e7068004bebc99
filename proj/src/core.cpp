#include "hope/core.hpp"

#include <algorithm>
#include <numeric>

namespace hope {

void check_design(const ConstMatrixRef& X, std::string_view what) {
    if (X.rows() < 1 || X.cols() < 1) {
        throw StructuralError(std::string(what) + ": matrix must have at least one row and column");
    }
    if (!X.allFinite()) {
        throw StructuralError(std::string(what) + ": matrix contains non-finite entries");
    }
}

ArmDataset::ArmDataset(int arm_id, Matrix contexts, Vector rewards, Eigen::Index split_point)
    : arm_id_(arm_id),
      contexts_(std::move(contexts)),
      rewards_(std::move(rewards)),
      split_point_(split_point) {
    check_design(contexts_, "arm dataset contexts");
    if (contexts_.rows() != rewards_.size()) {
        throw StructuralError("arm dataset: context rows and reward length differ");
    }
    if (split_point_ < 1 || 2 * split_point_ != contexts_.rows()) {
        throw StructuralError("arm dataset: split point must be exactly half of the sample count");
    }
    if (!rewards_.allFinite()) {
        throw StructuralError("arm dataset: rewards contain non-finite entries");
    }
}

Halves split_halves(const ArmDataset& ds) {
    const Eigen::Index n = ds.split_point();
    if (2 * n != ds.contexts().rows()) {
        throw StructuralError("split_halves: malformed split point");
    }
    const Matrix& X = ds.contexts();
    const Vector& y = ds.rewards();
    return Halves{
        SampleView{X.topRows(n), y.head(n)},
        SampleView{X.bottomRows(n), y.tail(n)},
    };
}

std::string_view to_string(SupportSource s) {
    switch (s) {
        case SupportSource::LassoSupport: return "lasso-support";
        case SupportSource::Sis: return "sis";
        case SupportSource::Full: return "full";
        case SupportSource::Injected: return "injected";
    }
    return "unknown";
}

SupportSet::SupportSet(std::vector<Eigen::Index> indices, Eigen::Index dim, SupportSource source)
    : indices_(std::move(indices)), dim_(dim), source_(source) {
    if (dim_ < 1) {
        throw StructuralError("support set: dimension must be positive");
    }
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (indices_[k] < 0 || indices_[k] >= dim_) {
            throw StructuralError("support set: index out of range");
        }
        if (k > 0 && indices_[k] <= indices_[k - 1]) {
            throw StructuralError("support set: indices must be strictly increasing");
        }
    }
    if (source_ == SupportSource::Full && size() != dim_) {
        throw StructuralError("support set: full source requires every index");
    }
}

SupportSet SupportSet::full(Eigen::Index dim) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(std::max<Eigen::Index>(dim, 0)));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    return SupportSet(std::move(idx), dim, SupportSource::Full);
}

Matrix truncate_columns(const ConstMatrixRef& M, const SupportSet& S) {
    if (S.dim() != M.cols()) {
        throw StructuralError("truncate_columns: support dimension does not match matrix columns");
    }
    if (S.is_full()) {
        return M;
    }
    Matrix out(M.rows(), S.size());
    for (Eigen::Index j = 0; j < S.size(); ++j) {
        out.col(j) = M.col(S.indices()[static_cast<std::size_t>(j)]);
    }
    return out;
}

Vector truncate_entries(const ConstVectorRef& v, const SupportSet& S) {
    if (S.dim() != v.size()) {
        throw StructuralError("truncate_entries: support dimension does not match vector length");
    }
    Vector out(S.size());
    for (Eigen::Index j = 0; j < S.size(); ++j) {
        out(j) = v(S.indices()[static_cast<std::size_t>(j)]);
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, const StreamId& id) {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ (0x100000000ULL | id.scenario));
    h = splitmix64(h ^ (0x200000000ULL | id.repetition));
    h = splitmix64(h ^ (0x300000000ULL | static_cast<std::uint32_t>(id.role)));
    return h;
}

RngStream::RngStream(std::uint64_t master_seed, StreamId id)
    : RngStream(derive_seed(master_seed, id)) {}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
}

Vector RngStream::normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = normal();
    }
    return v;
}

std::vector<Eigen::Index> RngStream::sample_without_replacement(Eigen::Index n, Eigen::Index k) {
    if (k < 0 || k > n) {
        throw StructuralError("sample_without_replacement: k must lie in [0, n]");
    }
    // Partial Fisher-Yates.
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(engine_))]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace hope
