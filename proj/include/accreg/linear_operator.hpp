#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "accreg/kernels.hpp"
#include "accreg/sparse.hpp"

namespace accreg {

// Inner product on a coefficient space: plain Euclidean, diagonally weighted,
// or weighted by a symmetric positive definite Gram (mass) matrix.
class InnerProduct {
public:
    InnerProduct() = default;
    static InnerProduct diagonal(Vector weights);
    static InnerProduct gram(std::shared_ptr<const CsrMatrix> gram);

    double dot(std::span<const double> a, std::span<const double> b) const;
    double norm(std::span<const double> a) const;
    // Riesz map: returns G a (the identity for the Euclidean product).
    Vector apply_gram(std::span<const double> a) const;
    bool euclidean() const { return weights_.empty() && !gram_; }

private:
    Vector weights_;
    std::shared_ptr<const CsrMatrix> gram_;
};

// Bounded linear map K : Q0 -> Q between two inner-product spaces, with its
// Hilbert-space adjoint taken in those inner products.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t source_dim() const = 0;
    virtual std::size_t data_dim() const = 0;
    virtual const InnerProduct& source_inner() const;
    virtual const InnerProduct& data_inner() const;

    Vector apply(std::span<const double> f) const;
    Vector apply_adjoint(std::span<const double> v) const;

protected:
    virtual void apply_impl(std::span<const double> f, std::span<double> out) const = 0;
    virtual void adjoint_impl(std::span<const double> v, std::span<double> out) const = 0;
};

class DiagonalOperator final : public LinearOperator {
public:
    // Singular values must be strictly positive and nonincreasing.
    explicit DiagonalOperator(Vector singular_values);

    std::size_t source_dim() const override { return sigma_.size(); }
    std::size_t data_dim() const override { return sigma_.size(); }
    const Vector& singular_values() const { return sigma_; }

protected:
    void apply_impl(std::span<const double> f, std::span<double> out) const override;
    void adjoint_impl(std::span<const double> v, std::span<double> out) const override;

private:
    Vector sigma_;
};

// Dense matrix with Euclidean inner products on both sides.
class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Eigen::MatrixXd a);

    std::size_t source_dim() const override { return static_cast<std::size_t>(a_.cols()); }
    std::size_t data_dim() const override { return static_cast<std::size_t>(a_.rows()); }
    const Eigen::MatrixXd& matrix() const { return a_; }

protected:
    void apply_impl(std::span<const double> f, std::span<double> out) const override;
    void adjoint_impl(std::span<const double> v, std::span<double> out) const override;

private:
    Eigen::MatrixXd a_;
};

// Power iteration on K*K; returns the estimate of ||K*K||^{1/2} = ||K||.
double estimate_norm(const LinearOperator& op, int iters, std::uint64_t seed = 0);

struct NoiseSpec {
    double relative_level = 0.0;  // delta', dimensionless
    std::uint64_t seed = 0;
};

// g_i (1 + delta' (2 u_i - 1)) with u_i uniform on [0, 1).
Vector add_uniform_noise(std::span<const double> g, const NoiseSpec& spec);

// Random vector with entries uniform on [-1, 1), reproducible from the seed.
Vector random_vector(std::size_t n, std::uint64_t seed);

}  // namespace accreg
