#include "xltag/cca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "xltag/error.hpp"

namespace xltag {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat to_eigen(const Tensor &t) {
    Mat m(t.rows(), t.cols());
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) m(r, c) = t.at(r, c);
    return m;
}

Tensor to_tensor(const Mat &m) {
    Tensor t = Tensor::matrix(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) t.at(r, c) = m(r, c);
    return t;
}

Tensor to_tensor(const Vec &v) {
    Tensor t = Tensor::vector(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) t[i] = v(i);
    return t;
}

// Inverse square root of a covariance matrix. Rank-deficient input gets a
// ridge of kCcaRidge on the diagonal before giving up.
Mat inverse_sqrt(Mat cov, const char *side, bool &regularized) {
    auto decompose = [](const Mat &m) { return Eigen::SelfAdjointEigenSolver<Mat>(m); };
    auto solver = decompose(cov);
    Vec evals = solver.eigenvalues();
    const double top = std::max(1.0, evals.cwiseAbs().maxCoeff());
    if (evals.minCoeff() <= 1e-12 * top) {
        regularized = true;
        cov.diagonal().array() += kCcaRidge;
        solver = decompose(cov);
        evals = solver.eigenvalues();
        if (!(evals.minCoeff() > 0.0)) {
            throw InputError(std::string("cca: ") + side +
                             " covariance is singular even after regularization");
        }
    }
    const Mat &vecs = solver.eigenvectors();
    return vecs * evals.cwiseSqrt().cwiseInverse().asDiagonal() * vecs.transpose();
}

}  // namespace

CcaResult canonical_correlation(const Tensor &x, const Tensor &y, std::size_t k) {
    if (x.rank() != 2 || y.rank() != 2 || x.rows() != y.rows()) {
        throw ShapeError("cca: paired samples need equal row counts, got " + x.shape_string() + " and " +
                         y.shape_string());
    }
    const std::size_t n = x.rows();
    if (n < 2) throw InputError("cca: need at least 2 usable pairs, got " + std::to_string(n));
    const std::size_t bound = std::min({x.cols(), y.cols(), n});
    if (k == 0) k = bound;
    if (k > bound) {
        throw InputError("cca: projection dimension " + std::to_string(k) + " exceeds min(d_src, d_tgt, pairs) = " +
                         std::to_string(bound));
    }

    Mat X = to_eigen(x);
    Mat Y = to_eigen(y);
    const Vec mx = X.colwise().mean();
    const Vec my = Y.colwise().mean();
    X.rowwise() -= mx.transpose();
    Y.rowwise() -= my.transpose();
    const double denom = static_cast<double>(n - 1);
    const Mat cxx = X.transpose() * X / denom;
    const Mat cyy = Y.transpose() * Y / denom;
    const Mat cxy = X.transpose() * Y / denom;

    CcaResult out;
    const Mat wx = inverse_sqrt(cxx, "source", out.regularized);
    const Mat wy = inverse_sqrt(cyy, "target", out.regularized);
    Eigen::JacobiSVD<Mat> svd(wx * cxy * wy, Eigen::ComputeThinU | Eigen::ComputeThinV);

    Mat a = wx * svd.matrixU().leftCols(k);
    Mat b = wy * svd.matrixV().leftCols(k);
    // Fix the sign of each canonical pair so output is reproducible.
    for (std::size_t j = 0; j < k; ++j) {
        Eigen::Index arg = 0;
        a.col(j).cwiseAbs().maxCoeff(&arg);
        if (a(arg, j) < 0.0) {
            a.col(j) *= -1.0;
            b.col(j) *= -1.0;
        }
    }

    out.src_projection = to_tensor(a);
    out.tgt_projection = to_tensor(b);
    out.src_mean = to_tensor(mx);
    out.tgt_mean = to_tensor(my);
    const Vec &sv = svd.singularValues();
    out.correlations.assign(sv.data(), sv.data() + k);
    out.pairs_used = n;
    return out;
}

CcaResult cca_align(const EmbeddingSpace &src, const EmbeddingSpace &tgt, const BilingualLexicon &lexicon,
                    std::size_t k) {
    std::vector<std::size_t> src_rows;
    std::vector<std::size_t> tgt_rows;
    for (const auto &[s, t] : lexicon.pairs) {
        const std::size_t si = src.index(s);
        const std::size_t ti = tgt.index(t);
        if (si == src.vocab.unk_index() || ti == tgt.vocab.unk_index()) continue;
        src_rows.push_back(si);
        tgt_rows.push_back(ti);
    }
    const std::size_t n = src_rows.size();
    if (n < 2) throw InputError("cca: need at least 2 usable lexicon pairs, got " + std::to_string(n));

    Tensor x = Tensor::matrix(n, src.dim());
    Tensor y = Tensor::matrix(n, tgt.dim());
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(src.matrix.row(src_rows[i]).begin(), src.dim(), x.row(i).begin());
        std::copy_n(tgt.matrix.row(tgt_rows[i]).begin(), tgt.dim(), y.row(i).begin());
    }
    return canonical_correlation(x, y, k);
}

EmbeddingMatrix project(const EmbeddingMatrix &matrix, const Tensor &projection, const Tensor &mean) {
    if (projection.rank() != 2 || projection.rows() != matrix.dim() || mean.size() != matrix.dim()) {
        throw ShapeError("project: embeddings of dim " + std::to_string(matrix.dim()) +
                         " vs projection " + projection.shape_string());
    }
    const std::size_t k = projection.cols();
    Tensor out = Tensor::matrix(matrix.rows(), k);
    std::vector<double> centered(matrix.dim());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        auto row = matrix.row(r);
        for (std::size_t c = 0; c < matrix.dim(); ++c) centered[c] = row[c] - mean[c];
        auto dst = out.row(r);
        for (std::size_t c = 0; c < matrix.dim(); ++c) {
            const double v = centered[c];
            for (std::size_t j = 0; j < k; ++j) dst[j] += v * projection.at(c, j);
        }
    }
    return EmbeddingMatrix(std::move(out));
}

}  // namespace xltag
