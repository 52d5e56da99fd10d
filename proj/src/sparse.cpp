#include "accreg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace accreg {

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= rows || j >= cols) throw std::out_of_range("CsrMatrix::at");
    auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - col_idx.begin())];
}

Vector CsrMatrix::diagonal() const {
    Vector d(std::min(rows, cols), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

Vector CsrMatrix::multiply(std::span<const double> x) const {
    Vector y(rows);
    kernels::spmv(*this, x, y);
    return y;
}

Vector CsrMatrix::multiply_transpose(std::span<const double> x) const {
    if (x.size() != rows) throw std::invalid_argument("CsrMatrix: length mismatch");
    Vector y(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            y[col_idx[p]] += values[p] * x[i];
    return y;
}

bool CsrMatrix::is_symmetric(double tol) const {
    if (rows != cols) return false;
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            if (std::abs(values[p] - at(col_idx[p], i)) > tol * scale) return false;
    return true;
}

TripletBuilder::TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

void TripletBuilder::add(std::size_t i, std::size_t j, double v) {
    if (i >= rows_ || j >= cols_) throw std::out_of_range("TripletBuilder::add");
    entries_.push_back({i, j, v});
}

CsrMatrix TripletBuilder::build() const {
    std::vector<Entry> sorted = entries_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    CsrMatrix m;
    m.rows = rows_;
    m.cols = cols_;
    m.row_ptr.assign(rows_ + 1, 0);
    for (std::size_t p = 0; p < sorted.size();) {
        std::size_t q = p;
        double sum = 0.0;
        while (q < sorted.size() && sorted[q].i == sorted[p].i && sorted[q].j == sorted[p].j)
            sum += sorted[q++].v;
        m.col_idx.push_back(sorted[p].j);
        m.values.push_back(sum);
        ++m.row_ptr[sorted[p].i + 1];
        p = q;
    }
    for (std::size_t i = 0; i < rows_; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

CsrMatrix extract(const CsrMatrix& a, std::span<const std::size_t> rows,
                  std::span<const std::size_t> cols) {
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> col_map(a.cols, kNone);
    for (std::size_t k = 0; k < cols.size(); ++k) col_map[cols[k]] = k;

    CsrMatrix out;
    out.rows = rows.size();
    out.cols = cols.size();
    out.row_ptr.assign(rows.size() + 1, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t i = rows[r];
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const std::size_t c = col_map[a.col_idx[p]];
            if (c == kNone) continue;
            out.col_idx.push_back(c);
            out.values.push_back(a.values[p]);
        }
        out.row_ptr[r + 1] = out.values.size();
    }
    return out;
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double beta) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("add: matrix shape mismatch");
    TripletBuilder t(a.rows, a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            t.add(i, a.col_idx[p], a.values[p]);
        for (std::size_t p = b.row_ptr[i]; p < b.row_ptr[i + 1]; ++p)
            t.add(i, b.col_idx[p], beta * b.values[p]);
    }
    return t.build();
}

}  // namespace accreg
