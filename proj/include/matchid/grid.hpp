#pragma once
#include <cstddef>
#include <vector>

namespace matchid {

// Dense row-major matrix, small enough for per-round copies.
template <class T>
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int r, int c, T fill = T{}) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    T& operator()(int i, int k) { return data[static_cast<std::size_t>(i) * cols + k]; }
    const T& operator()(int i, int k) const { return data[static_cast<std::size_t>(i) * cols + k]; }

    bool operator==(const Grid& o) const = default;

    static Grid from_rows(const std::vector<std::vector<T>>& rs) {
        Grid g(static_cast<int>(rs.size()), rs.empty() ? 0 : static_cast<int>(rs[0].size()));
        for (int i = 0; i < g.rows; ++i)
            for (int k = 0; k < g.cols; ++k) g(i, k) = rs[i][k];
        return g;
    }
    std::vector<std::vector<T>> to_rows() const {
        std::vector<std::vector<T>> rs(rows, std::vector<T>(cols));
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) rs[i][k] = (*this)(i, k);
        return rs;
    }
};

using Mat = Grid<double>;

}  // namespace matchid
