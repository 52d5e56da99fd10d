#include "accreg/linear_operator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "accreg/random.hpp"

namespace accreg {

namespace {
void require_length(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        std::ostringstream msg;
        msg << what << ": expected length " << want << ", got " << got;
        throw std::invalid_argument(msg.str());
    }
}
}  // namespace

InnerProduct InnerProduct::diagonal(Vector weights) {
    for (double w : weights)
        if (!(w > 0.0)) throw std::invalid_argument("InnerProduct: weights must be positive");
    InnerProduct ip;
    ip.weights_ = std::move(weights);
    return ip;
}

InnerProduct InnerProduct::gram(std::shared_ptr<const CsrMatrix> gram) {
    if (!gram || gram->rows != gram->cols)
        throw std::invalid_argument("InnerProduct: Gram matrix must be square");
    InnerProduct ip;
    ip.gram_ = std::move(gram);
    return ip;
}

double InnerProduct::dot(std::span<const double> a, std::span<const double> b) const {
    if (gram_) {
        Vector gb(gram_->rows);
        kernels::spmv(*gram_, b, gb);
        return kernels::dot(a, gb);
    }
    if (!weights_.empty()) return kernels::weighted_dot(weights_, a, b);
    return kernels::dot(a, b);
}

double InnerProduct::norm(std::span<const double> a) const {
    return std::sqrt(std::max(0.0, dot(a, a)));
}

Vector InnerProduct::apply_gram(std::span<const double> a) const {
    if (gram_) return gram_->multiply(a);
    Vector out(a.begin(), a.end());
    if (!weights_.empty())
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= weights_[i];
    return out;
}

const InnerProduct& LinearOperator::source_inner() const {
    static const InnerProduct euclidean;
    return euclidean;
}

const InnerProduct& LinearOperator::data_inner() const {
    static const InnerProduct euclidean;
    return euclidean;
}

Vector LinearOperator::apply(std::span<const double> f) const {
    require_length(f.size(), source_dim(), "apply");
    Vector out(data_dim(), 0.0);
    apply_impl(f, out);
    return out;
}

Vector LinearOperator::apply_adjoint(std::span<const double> v) const {
    require_length(v.size(), data_dim(), "apply_adjoint");
    Vector out(source_dim(), 0.0);
    adjoint_impl(v, out);
    return out;
}

DiagonalOperator::DiagonalOperator(Vector singular_values) : sigma_(std::move(singular_values)) {
    if (sigma_.empty()) throw std::invalid_argument("DiagonalOperator: empty spectrum");
    for (std::size_t j = 0; j < sigma_.size(); ++j) {
        if (!(sigma_[j] > 0.0))
            throw std::invalid_argument("DiagonalOperator: singular values must be positive");
        if (j > 0 && sigma_[j] > sigma_[j - 1])
            throw std::invalid_argument("DiagonalOperator: singular values must be nonincreasing");
    }
}

void DiagonalOperator::apply_impl(std::span<const double> f, std::span<double> out) const {
    for (std::size_t j = 0; j < sigma_.size(); ++j) out[j] = sigma_[j] * f[j];
}

void DiagonalOperator::adjoint_impl(std::span<const double> v, std::span<double> out) const {
    for (std::size_t j = 0; j < sigma_.size(); ++j) out[j] = sigma_[j] * v[j];
}

DenseOperator::DenseOperator(Eigen::MatrixXd a) : a_(std::move(a)) {}

void DenseOperator::apply_impl(std::span<const double> f, std::span<double> out) const {
    Eigen::Map<const Eigen::VectorXd> x(f.data(), static_cast<Eigen::Index>(f.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = a_ * x;
}

void DenseOperator::adjoint_impl(std::span<const double> v, std::span<double> out) const {
    Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) =
        a_.transpose() * x;
}

double estimate_norm(const LinearOperator& op, int iters, std::uint64_t seed) {
    if (iters < 1) throw std::invalid_argument("estimate_norm: iters must be >= 1");
    const InnerProduct& ip = op.source_inner();
    Vector x = random_vector(op.source_dim(), seed);
    double xn = ip.norm(x);
    if (xn == 0.0) return 0.0;
    kernels::scale(1.0 / xn, x);

    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        Vector z = op.apply_adjoint(op.apply(x));
        const double zn = ip.norm(z);
        if (zn == 0.0) return std::sqrt(lambda);
        lambda = std::max(lambda, zn);
        kernels::scale(1.0 / zn, z);
        x = std::move(z);
    }
    return std::sqrt(lambda);
}

Vector add_uniform_noise(std::span<const double> g, const NoiseSpec& spec) {
    if (!(spec.relative_level >= 0.0))
        throw std::invalid_argument("add_uniform_noise: relative level must be >= 0");
    Vector out(g.begin(), g.end());
    if (spec.relative_level == 0.0) return out;
    const CounterRng rng(spec.seed);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] *= 1.0 + spec.relative_level * rng.symmetric(i);
    return out;
}

Vector random_vector(std::size_t n, std::uint64_t seed) {
    const CounterRng rng(seed);
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.symmetric(i);
    return v;
}

}  // namespace accreg
