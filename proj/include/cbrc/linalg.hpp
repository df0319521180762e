#pragma once
/*
Dense kernels for the per-arm Gaussian posterior N(mean, scale^2 * B^-1).

Each arm keeps B^-1 together with a lower Cholesky factor L of B^-1, so that
a posterior draw is mean + scale * L * z with z ~ N(0, I). Both are maintained
under B <- B + c c^T in O(dim^2):

  h     = B^-1 c
  B^-1 <- B^-1 - h h^T / (1 + c^T h)          (Sherman-Morrison)
  L    <- downdate(L, h / sqrt(1 + c^T h))     (L L^T - u u^T)

A failed downdate signals numerical breakdown; the caller refactorizes.
*/

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace cbrc {

using Rng = std::mt19937_64;

namespace linalg {

using Vector = std::vector<double>;

// Square dense matrix, row-major storage.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

    static Matrix identity(std::size_t dim);
    // Builds a matrix from rows; throws DimensionMismatch if not square.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t dim() const noexcept { return dim_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * dim_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * dim_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * dim_, dim_};
    }
    std::span<const double> data() const noexcept { return data_; }

    // Replaces the matrix with (M + M^T) / 2.
    void symmetrize() noexcept;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
Vector multiply(const Matrix& a, std::span<const double> x);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool is_symmetric(const Matrix& m, double rel_tol = 1e-10);

class CholeskyFactor {
public:
    CholeskyFactor() = default;

    std::size_t dim() const noexcept { return lower_.dim(); }
    const Matrix& lower() const noexcept { return lower_; }

    // L * L^T
    Matrix reconstruct() const;

    bool operator==(const CholeskyFactor&) const = default;

private:
    explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}

    friend CholeskyFactor cholesky_factor(const Matrix& m);
    friend void cholesky_downdate(CholeskyFactor& factor, std::span<const double> u);
    friend CholeskyFactor identity_factor(std::size_t dim);

    Matrix lower_;
};

// Reads the lower triangle of m. Throws NotPositiveDefinite on a pivot <= 0.
CholeskyFactor cholesky_factor(const Matrix& m);

CholeskyFactor identity_factor(std::size_t dim);

// Replaces L with the factor of L L^T - u u^T. Leaves the factor untouched and
// throws NotPositiveDefinite if the result would not be positive definite.
void cholesky_downdate(CholeskyFactor& factor, std::span<const double> u);

// Inverse of an SPD matrix through its Cholesky factor.
Matrix spd_inverse(const Matrix& m);

// B^-1 and a Cholesky factor of B^-1 for one precision matrix B.
struct InversePair {
    Matrix inverse;
    CholeskyFactor factor;

    static InversePair identity(std::size_t dim);
    // Refactorizes from the precision matrix itself.
    static InversePair from_precision(const Matrix& precision);

    bool operator==(const InversePair&) const = default;
};

// In-place B <- B + c c^T on the maintained inverse and factor. Strong
// guarantee: on NotPositiveDefinite the pair is unchanged.
void rank_one_update(InversePair& state, std::span<const double> c);

// Value form of rank_one_update.
InversePair rank_one_updated(InversePair state, std::span<const double> c);

// mean + scale * L * z, z drawn from N(0, I) in coordinate order.
Vector sample_mvn(std::span<const double> mean, const CholeskyFactor& factor, double scale,
                  Rng& rng);

}  // namespace linalg
}  // namespace cbrc
