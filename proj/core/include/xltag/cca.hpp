#pragma once

#include <cstddef>
#include <vector>

#include "xltag/embed.hpp"
#include "xltag/tensor.hpp"

namespace xltag {

/// Ridge added to a covariance diagonal when it is rank deficient.
inline constexpr double kCcaRidge = 1e-8;

struct CcaResult {
    Tensor src_projection;  // d_src x k
    Tensor tgt_projection;  // d_tgt x k
    Tensor src_mean;        // d_src, mean of the paired source rows
    Tensor tgt_mean;        // d_tgt
    std::vector<double> correlations;  // k, non-increasing
    std::size_t pairs_used = 0;
    bool regularized = false;
};

/// CCA on paired samples: row i of `x` is paired with row i of `y`. Covariances
/// are whitened by their inverse square roots and the whitened cross-covariance
/// is decomposed by SVD. k = 0 selects min(d_x, d_y, n).
CcaResult canonical_correlation(const Tensor &x, const Tensor &y, std::size_t k = 0);

/// Aligns two embedding spaces through the lexicon pairs that resolve to known
/// words on both sides.
CcaResult cca_align(const EmbeddingSpace &src, const EmbeddingSpace &tgt,
                    const BilingualLexicon &lexicon, std::size_t k = 0);

/// (row - mean) * projection for every row, unk included.
EmbeddingMatrix project(const EmbeddingMatrix &matrix, const Tensor &projection, const Tensor &mean);

}  // namespace xltag
