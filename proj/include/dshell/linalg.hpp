#pragma once

#include <array>

#include "clifford.hpp"

namespace dshell {

struct Span2 {
    CVec4 w1, w2;
    std::array<int, 2> pivots{};
};

// Orthonormal basis of the range of a rank-2 matrix by column-pivoted
// Gram-Schmidt. Pivots below threshold·(largest column norm) mean the rank
// has dropped below two.
inline Span2 pivoted_span2(const Mat4& m, double threshold = 1e-10) {
    Mat4 r = m;
    Span2 out;
    CVec4* w[2] = {&out.w1, &out.w2};
    double scale = 0.0;
    for (int k = 0; k < 2; ++k) {
        int best = 0;
        double bn = -1.0;
        for (int j = 0; j < 4; ++j) {
            double n = r.col(j).norm();
            if (n > bn) {
                bn = n;
                best = j;
            }
        }
        if (k == 0) scale = bn;
        if (!(bn > threshold * scale) || !(scale > 0))
            fail(ErrorKind::Domain, "rank-deficient matrix: expected two independent columns");
        *w[k] = r.col(best) / bn;
        out.pivots[static_cast<std::size_t>(k)] = best;
        r -= (*w[k]) * ((*w[k]).adjoint() * r);
    }
    return out;
}

inline double sigma_min(const Mat4& m) {
    Eigen::JacobiSVD<Mat4> svd(m);
    return svd.singularValues()(3);
}

} // namespace dshell
