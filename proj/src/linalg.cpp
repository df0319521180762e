#include "cbrc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cbrc/errors.hpp"

namespace cbrc::linalg {

namespace {

void require_dim(std::size_t expected, std::size_t actual, const char* what) {
    if (expected != actual) {
        throw DimensionMismatch(std::string(what) + ": expected dimension " +
                                std::to_string(expected) + ", got " + std::to_string(actual));
    }
}

}  // namespace

Matrix Matrix::identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require_dim(rows.size(), rows[r].size(), "Matrix::from_rows");
        std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + r * m.dim_);
    }
    return m;
}

void Matrix::symmetrize() noexcept {
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = r + 1; c < dim_; ++c) {
            const double avg = 0.5 * ((*this)(r, c) + (*this)(c, r));
            (*this)(r, c) = avg;
            (*this)(c, r) = avg;
        }
    }
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    require_dim(a.dim(), b.dim(), "multiply");
    const std::size_t n = a.dim();
    Matrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
    require_dim(a.dim(), x.size(), "multiply");
    Vector out(a.dim(), 0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.dim(); ++j) acc += a(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_dim(a.dim(), b.dim(), "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

bool is_symmetric(const Matrix& m, double rel_tol) {
    double scale = 0.0;
    for (double v : m.data()) scale = std::max(scale, std::abs(v));
    const double tol = rel_tol * std::max(scale, 1.0);
    for (std::size_t r = 0; r < m.dim(); ++r) {
        for (std::size_t c = r + 1; c < m.dim(); ++c) {
            if (std::abs(m(r, c) - m(c, r)) > tol) return false;
        }
    }
    return true;
}

Matrix CholeskyFactor::reconstruct() const {
    const std::size_t n = dim();
    Matrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= j; ++k) acc += lower_(i, k) * lower_(j, k);
            out(i, j) = acc;
            out(j, i) = acc;
        }
    }
    return out;
}

CholeskyFactor cholesky_factor(const Matrix& m) {
    const std::size_t n = m.dim();
    Matrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = m(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (!(pivot > 0.0)) {
            throw NotPositiveDefinite("cholesky_factor: pivot " + std::to_string(j) +
                                      " is " + std::to_string(pivot));
        }
        const double diag = std::sqrt(pivot);
        l(j, j) = diag;
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = m(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            l(i, j) = acc / diag;
        }
    }
    return CholeskyFactor(std::move(l));
}

CholeskyFactor identity_factor(std::size_t dim) { return CholeskyFactor(Matrix::identity(dim)); }

void cholesky_downdate(CholeskyFactor& factor, std::span<const double> u) {
    const std::size_t n = factor.dim();
    require_dim(n, u.size(), "cholesky_downdate");
    Matrix l = factor.lower_;
    Vector w(u.begin(), u.end());
    for (std::size_t k = 0; k < n; ++k) {
        const double lkk = l(k, k);
        const double r2 = lkk * lkk - w[k] * w[k];
        if (!(r2 > 0.0)) {
            throw NotPositiveDefinite("cholesky_downdate: pivot " + std::to_string(k) +
                                      " lost positivity");
        }
        const double r = std::sqrt(r2);
        const double cos = r / lkk;
        const double sin = w[k] / lkk;
        l(k, k) = r;
        for (std::size_t i = k + 1; i < n; ++i) {
            l(i, k) = (l(i, k) - sin * w[i]) / cos;
            w[i] = cos * w[i] - sin * l(i, k);
        }
    }
    factor.lower_ = std::move(l);
}

Matrix spd_inverse(const Matrix& m) {
    const CholeskyFactor f = cholesky_factor(m);
    const Matrix& l = f.lower();
    const std::size_t n = m.dim();
    // Solve L Y = I column by column, then X = L^-T Y.
    Matrix inv(n);
    Vector y(n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = (i == col) ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * y[k];
            y[i] = acc / l(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) acc -= l(k, ii) * inv(k, col);
            inv(ii, col) = acc / l(ii, ii);
        }
    }
    inv.symmetrize();
    return inv;
}

InversePair InversePair::identity(std::size_t dim) {
    return {Matrix::identity(dim), identity_factor(dim)};
}

InversePair InversePair::from_precision(const Matrix& precision) {
    Matrix inverse = spd_inverse(precision);
    CholeskyFactor factor = cholesky_factor(inverse);
    return {std::move(inverse), std::move(factor)};
}

void rank_one_update(InversePair& state, std::span<const double> c) {
    const std::size_t n = state.inverse.dim();
    require_dim(n, c.size(), "rank_one_update");
    require_dim(n, state.factor.dim(), "rank_one_update factor");

    const Vector h = multiply(state.inverse, c);
    double denom = 1.0;
    for (std::size_t i = 0; i < n; ++i) denom += c[i] * h[i];
    if (denom == 1.0) {
        bool zero = std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
        if (zero) return;
    }

    const double root = std::sqrt(denom);
    Vector u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = h[i] / root;

    CholeskyFactor factor = state.factor;
    cholesky_downdate(factor, u);

    Matrix inverse = state.inverse;
    for (std::size_t i = 0; i < n; ++i) {
        if (h[i] == 0.0) continue;
        const double hi = h[i] / denom;
        for (std::size_t j = 0; j < n; ++j) inverse(i, j) -= hi * h[j];
    }
    inverse.symmetrize();

    state.inverse = std::move(inverse);
    state.factor = std::move(factor);
}

InversePair rank_one_updated(InversePair state, std::span<const double> c) {
    rank_one_update(state, c);
    return state;
}

Vector sample_mvn(std::span<const double> mean, const CholeskyFactor& factor, double scale,
                  Rng& rng) {
    const std::size_t n = factor.dim();
    require_dim(n, mean.size(), "sample_mvn");
    if (scale < 0.0) throw std::invalid_argument("sample_mvn: negative scale");

    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n);
    for (double& v : z) v = normal(rng);

    const Matrix& l = factor.lower();
    Vector out(mean.begin(), mean.end());
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= i; ++k) acc += l(i, k) * z[k];
        out[i] += scale * acc;
    }
    return out;
}

}  // namespace cbrc::linalg
