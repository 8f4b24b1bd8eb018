#include "interlace/linalg.h"

#include "interlace/error.h"

namespace interlace::linalg {

double determinant(const Matrix& m) {
    if (m.rows() != m.cols()) throw DomainError("determinant of a non-square matrix");
    if (m.rows() == 0) return 1.0;
    if (m.rows() == 1) return m(0, 0);
    return m.partialPivLu().determinant();
}

double hadamard_bound(const Matrix& m) {
    double bound = 1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) bound *= m.row(i).norm();
    return bound;
}

} // namespace interlace::linalg
