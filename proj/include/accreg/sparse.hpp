#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "accreg/kernels.hpp"

namespace accreg {

// Compressed sparse row matrix with sorted, duplicate-free column indices.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }
    double at(std::size_t i, std::size_t j) const;
    Vector diagonal() const;
    Vector multiply(std::span<const double> x) const;
    Vector multiply_transpose(std::span<const double> x) const;
    bool is_symmetric(double tol) const;
};

// Accumulates (i, j, v) entries; duplicates are summed on build().
class TripletBuilder {
public:
    TripletBuilder(std::size_t rows, std::size_t cols);

    void add(std::size_t i, std::size_t j, double v);
    CsrMatrix build() const;

private:
    struct Entry {
        std::size_t i, j;
        double v;
    };
    std::size_t rows_, cols_;
    std::vector<Entry> entries_;
};

// Submatrix A(rows, cols) for sorted index lists.
CsrMatrix extract(const CsrMatrix& a, std::span<const std::size_t> rows,
                  std::span<const std::size_t> cols);

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double beta = 1.0);

}  // namespace accreg
