#pragma once

#include <vector>

namespace svcsched {

/// Row-major compressed sparse matrix, append-only by row.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col_idx;
    std::vector<double> val;

    void start(int num_rows, int num_cols) {
        rows = num_rows;
        cols = num_cols;
        row_ptr.assign(1, 0);
        col_idx.clear();
        val.clear();
        row_ptr.reserve(num_rows + 1);
    }

    void push_entry(int col, double value) {
        col_idx.push_back(col);
        val.push_back(value);
    }

    void finish_row() { row_ptr.push_back(static_cast<int>(col_idx.size())); }

    int completed_rows() const { return static_cast<int>(row_ptr.size()) - 1; }

    double row_sum(int row) const {
        double total = 0.0;
        for (int k = row_ptr[row]; k < row_ptr[row + 1]; ++k) total += val[k];
        return total;
    }
};

}  // namespace svcsched
