#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shiftadapt/matrix.hpp"
#include "shiftadapt/simplex.hpp"

namespace shiftadapt {

/// One Gaussian class conditional: x | y=i ~ N(mean_i, cov_i).
struct ClassConditional {
    DenseMatrix mean;  // 1 x d
    DenseMatrix cov;   // d x d, symmetric positive definite
};

/// Affine map applied to one target class conditional: x -> A x + b.
struct AffineTransform {
    DenseMatrix a;  // d x d
    DenseMatrix b;  // 1 x d

    static AffineTransform identity(std::size_t dim);
};

/// Full recipe for a source/target pair: class count, input dimension,
/// priors on both sides, shared Gaussian conditionals, and per-class affine
/// transforms that produce the target conditionals.
struct ShiftSpec {
    std::size_t classes = 2;
    std::size_t dim = 2;
    SimplexVector source_prior = SimplexVector::uniform(2);
    SimplexVector target_prior = SimplexVector::uniform(2);
    std::vector<ClassConditional> conditionals;       // per class, source side
    std::vector<AffineTransform> target_transforms;   // per class; empty = identity
    std::size_t n_source = 2000;
    std::size_t n_target = 2000;
    std::uint64_t seed = 0;

    /// Well-separated unit-covariance Gaussians on the class axes, scaled by
    /// `separation`. The stock geometry used by the bundled scenarios.
    static ShiftSpec basic(std::size_t classes, std::size_t dim, double separation,
                           SimplexVector source_prior, SimplexVector target_prior,
                           std::size_t n_source, std::size_t n_target, std::uint64_t seed);
};

/// Hidden ground truth, readable by evaluation code only. Training and
/// estimation paths receive the trainer-visible members of DomainPair and
/// never this struct.
struct SealedTruth {
    std::vector<int> target_labels;  // 0-based
    SimplexVector source_prior = SimplexVector::uniform(2);
    SimplexVector target_prior = SimplexVector::uniform(2);
};

class DomainPair {
  public:
    DomainPair(DenseMatrix source_x, std::vector<int> source_y, DenseMatrix target_x,
               SealedTruth truth);

    // Trainer-visible surface.
    const DenseMatrix& source_x() const { return source_x_; }
    const std::vector<int>& source_y() const { return source_y_; }
    const DenseMatrix& target_x() const { return target_x_; }
    std::size_t classes() const { return truth_.source_prior.size(); }
    std::size_t dim() const { return source_x_.cols; }

    /// Empirical source prior from label counts; this is what the trainer
    /// may use, not the sealed generating prior.
    SimplexVector empirical_source_prior() const;

    /// Evaluation-only channel. Nothing on the training or estimation path
    /// calls this; tests guard the file-level equivalent.
    const SealedTruth& eval_truth() const { return truth_; }

  private:
    DenseMatrix source_x_;
    std::vector<int> source_y_;
    DenseMatrix target_x_;
    SealedTruth truth_;
};

/// Draws the pair described by `spec`. Deterministic given spec.seed.
DomainPair generate(const ShiftSpec& spec);

/// One pair per target prior, identical conditionals, per-level seeds derived
/// from the base seed. Throws on an empty level list.
std::vector<DomainPair> shift_sweep(const ShiftSpec& base, const std::vector<SimplexVector>& levels);

// ---- dataset files ---------------------------------------------------------
//
// Trainer-visible file: header "c,d,n" then rows "label,x_1,...,x_d" with
// 1-based labels for source rows and -1 for target rows. The sidecar JSON
// ("<path>.truth.json") carries the generating priors and the hidden target
// labels; only evaluation code opens it.

void write_dataset(const DomainPair& pair, const std::string& path);
DomainPair read_dataset(const std::string& path);

}  // namespace shiftadapt
